#include "tssto/stack_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace tssto {

PixelFormat parse_pixel_format(const std::string& name) {
  if (name == "f32le") return PixelFormat::F32LE;
  if (name == "u16le") return PixelFormat::U16LE;
  if (name == "u8") return PixelFormat::U8;
  throw InputError("unknown pixel_format: " + name);
}

std::string pixel_format_name(PixelFormat fmt) {
  switch (fmt) {
    case PixelFormat::F32LE: return "f32le";
    case PixelFormat::U16LE: return "u16le";
    default: return "u8";
  }
}

namespace {

// days since 1970-01-01 for a proleptic-Gregorian civil date
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::size_t sample_bytes(PixelFormat fmt) {
  switch (fmt) {
    case PixelFormat::F32LE: return 4;
    case PixelFormat::U16LE: return 2;
    default: return 1;
  }
}

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing plane file: " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff len = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
  if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
  if (!in) throw InputError("failed reading plane file: " + path.string());
  return bytes;
}

void decode_plane(const std::vector<unsigned char>& bytes, PixelFormat fmt, double peak,
                  const fs::path& path, double* out, std::size_t n_px) {
  if (bytes.size() != n_px * sample_bytes(fmt))
    throw InputError("plane file has wrong size: " + path.string());
  const unsigned char* b = bytes.data();
  switch (fmt) {
    case PixelFormat::F32LE:
      for (std::size_t p = 0; p < n_px; ++p, b += 4) {
        const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                                (static_cast<std::uint32_t>(b[1]) << 8) |
                                (static_cast<std::uint32_t>(b[2]) << 16) |
                                (static_cast<std::uint32_t>(b[3]) << 24);
        const float f = std::bit_cast<float>(u);
        if (!std::isfinite(f)) throw InputError("non-finite sample in: " + path.string());
        out[p] = static_cast<double>(f) / peak;
      }
      break;
    case PixelFormat::U16LE:
      for (std::size_t p = 0; p < n_px; ++p, b += 2)
        out[p] = static_cast<double>(static_cast<std::uint32_t>(b[0]) |
                                     (static_cast<std::uint32_t>(b[1]) << 8)) /
                 peak;
      break;
    default:
      for (std::size_t p = 0; p < n_px; ++p, ++b) out[p] = static_cast<double>(*b) / peak;
  }
}

void encode_plane(const double* in, std::size_t n_px, PixelFormat fmt, double peak,
                  std::vector<unsigned char>& bytes) {
  bytes.resize(n_px * sample_bytes(fmt));
  unsigned char* b = bytes.data();
  switch (fmt) {
    case PixelFormat::F32LE:
      for (std::size_t p = 0; p < n_px; ++p, b += 4) {
        const std::uint32_t u = std::bit_cast<std::uint32_t>(static_cast<float>(in[p] * peak));
        b[0] = static_cast<unsigned char>(u);
        b[1] = static_cast<unsigned char>(u >> 8);
        b[2] = static_cast<unsigned char>(u >> 16);
        b[3] = static_cast<unsigned char>(u >> 24);
      }
      break;
    case PixelFormat::U16LE:
      for (std::size_t p = 0; p < n_px; ++p, b += 2) {
        const double v = std::clamp(std::nearbyint(in[p] * peak), 0.0, 65535.0);
        const std::uint16_t u = static_cast<std::uint16_t>(v);
        b[0] = static_cast<unsigned char>(u);
        b[1] = static_cast<unsigned char>(u >> 8);
      }
      break;
    default:
      for (std::size_t p = 0; p < n_px; ++p, ++b)
        *b = static_cast<unsigned char>(std::clamp(std::nearbyint(in[p] * peak), 0.0, 255.0));
  }
}

}  // namespace

std::int64_t parse_iso8601(const std::string& ts) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, used = 0;
  if (std::sscanf(ts.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &used) != 6)
    throw InputError("malformed timestamp: " + ts);
  const std::string rest = ts.substr(static_cast<std::size_t>(used));
  if (!rest.empty() && rest != "Z") throw InputError("malformed timestamp: " + ts);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
    throw InputError("timestamp out of range: " + ts);
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400LL +
         h * 3600LL + mi * 60LL + s;
}

ImageStack read_stack(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw InputError("cannot open manifest: " + manifest_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("manifest parse failed (" + manifest_path.string() + "): " + e.what());
  }

  try {
    ImageStack stack;
    const auto dims = doc.at("dims");
    if (!dims.is_array() || dims.size() != 2) throw InputError("manifest dims must be [rows, cols]");
    const int m = dims[0].get<int>(), n = dims[1].get<int>();
    const int b = doc.at("bands").get<int>();
    if (m < 1 || n < 1 || b < 1) throw InputError("manifest dims/bands must be positive");
    stack.format = parse_pixel_format(doc.at("pixel_format").get<std::string>());
    stack.peak = doc.at("peak").get<double>();
    if (!(stack.peak > 0)) throw InputError("manifest peak must be positive");
    if (doc.contains("band_names")) {
      stack.band_names = doc["band_names"].get<std::vector<std::string>>();
      if (static_cast<int>(stack.band_names.size()) != b)
        throw InputError("band_names count does not match bands");
    }
    const auto& frames = doc.at("frames");
    if (!frames.is_array() || frames.empty()) throw InputError("manifest needs at least one frame");
    const int t = static_cast<int>(frames.size());

    for (int bi = 0; bi < b; ++bi) stack.bands.emplace_back(m, n, t);
    const fs::path base = manifest_path.parent_path();
    const std::size_t n_px = static_cast<std::size_t>(m) * n;

    for (int k = 0; k < t; ++k) {
      const auto& fr = frames[k];
      FrameInfo info;
      info.id = fr.at("id").get<std::string>();
      if (fr.contains("timestamp")) {
        info.timestamp = fr["timestamp"].get<std::string>();
        info.epoch_seconds = parse_iso8601(*info.timestamp);
      }
      const auto& planes = fr.at("planes");
      if (!planes.is_array() || static_cast<int>(planes.size()) != b)
        throw InputError("frame " + info.id + " needs one plane per band");
      for (int bi = 0; bi < b; ++bi) {
        const fs::path plane_path = base / planes[bi].get<std::string>();
        decode_plane(read_file(plane_path), stack.format, stack.peak, plane_path,
                     stack.bands[bi].frame_data(k), n_px);
      }
      stack.frames.push_back(std::move(info));
    }
    stack.validate();
    return stack;
  } catch (const json::exception& e) {
    throw InputError("manifest field error (" + manifest_path.string() + "): " + e.what());
  }
}

std::filesystem::path write_stack(const ImageStack& stack, const fs::path& out_dir,
                                  const std::string& manifest_name) {
  stack.validate();
  fs::create_directories(out_dir);
  const std::size_t n_px = static_cast<std::size_t>(stack.rows()) * stack.cols();

  ordered_json doc;
  doc["version"] = 1;
  doc["dims"] = {stack.rows(), stack.cols()};
  doc["bands"] = stack.band_count();
  doc["pixel_format"] = pixel_format_name(stack.format);
  doc["peak"] = stack.peak;
  if (!stack.band_names.empty()) doc["band_names"] = stack.band_names;
  doc["frames"] = ordered_json::array();

  std::vector<unsigned char> bytes;
  char name[64];
  for (int k = 0; k < stack.frame_count(); ++k) {
    ordered_json fr;
    fr["id"] = stack.frames[k].id;
    if (stack.frames[k].timestamp) fr["timestamp"] = *stack.frames[k].timestamp;
    fr["planes"] = ordered_json::array();
    for (int b = 0; b < stack.band_count(); ++b) {
      std::snprintf(name, sizeof name, "f%03d_b%02d.raw", k, b);
      encode_plane(stack.bands[b].frame_data(k), n_px, stack.format, stack.peak, bytes);
      std::ofstream out(out_dir / name, std::ios::binary);
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
      if (!out) throw std::runtime_error("failed writing plane: " + (out_dir / name).string());
      fr["planes"].push_back(name);
    }
    doc["frames"].push_back(std::move(fr));
  }

  const fs::path manifest_path = out_dir / manifest_name;
  std::ofstream out(manifest_path);
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing manifest: " + manifest_path.string());
  return manifest_path;
}

void write_mask(const LabelMask& mask, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mask: " + path.string());
  out << "P5\n" << mask.cols << " " << mask.rows << "\n255\n";
  std::vector<unsigned char> bytes(mask.size());
  for (std::size_t p = 0; p < mask.size(); ++p)
    bytes[p] = mask.labels[p] == Label::Cloud ? 255 : (mask.labels[p] == Label::Shadow ? 128 : 0);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing mask: " + path.string());
}

LabelMask read_mask(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing mask file: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw InputError("not a P5 PGM: " + path.string());
  auto next_token = [&in, &path]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] != '#') return tok;
      std::string rest;
      std::getline(in, rest);
    }
    throw InputError("truncated PGM header: " + path.string());
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w < 1 || h < 1) throw InputError("bad PGM dims: " + path.string());
  if (maxval != 255) throw InputError("PGM maxval must be 255: " + path.string());
  in.get();  // single whitespace after maxval

  LabelMask mask(h, w);
  std::vector<unsigned char> bytes(mask.size());
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw InputError("truncated PGM data: " + path.string());
  for (std::size_t p = 0; p < mask.size(); ++p) {
    switch (bytes[p]) {
      case 0: mask.labels[p] = Label::Clear; break;
      case 128: mask.labels[p] = Label::Shadow; break;
      case 255: mask.labels[p] = Label::Cloud; break;
      default: throw InputError("unexpected mask value in: " + path.string());
    }
  }
  return mask;
}

}  // namespace tssto
