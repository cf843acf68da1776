#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tssto/image_stack.hpp"
#include "tssto/mask.hpp"

namespace tssto {

// Stacks live on disk as a JSON manifest plus headerless row-major
// little-endian plane files (one per frame per band):
//   { "version": 1, "dims": [rows, cols], "bands": b,
//     "pixel_format": "f32le" | "u16le" | "u8", "peak": 255.0,
//     "band_names": [...],              // optional
//     "frames": [ { "id": "f000", "timestamp": "2001-05-12T10:30:00Z",
//                   "planes": ["f000_b00.raw", ...] }, ... ] }
// Plane paths are resolved relative to the manifest. Samples are divided by
// peak on read and written back denormalized (round-half-to-even for the
// integer formats).

ImageStack read_stack(const std::filesystem::path& manifest_path);

std::filesystem::path write_stack(const ImageStack& stack, const std::filesystem::path& out_dir,
                                  const std::string& manifest_name = "manifest.json");

// Masks are binary PGM (P5), maxval 255: 0 = Clear, 128 = Shadow, 255 = Cloud.
void write_mask(const LabelMask& mask, const std::filesystem::path& path);
LabelMask read_mask(const std::filesystem::path& path);

PixelFormat parse_pixel_format(const std::string& name);  // throws InputError
std::string pixel_format_name(PixelFormat fmt);

// "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z' -> seconds since the Unix
// epoch (UTC). Throws InputError on malformed input.
std::int64_t parse_iso8601(const std::string& ts);

}  // namespace tssto
