#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "tssto/mask.hpp"
#include "tssto/simulate.hpp"
#include "tssto/solver.hpp"
#include "tssto/compositor.hpp"
#include "tssto/stack_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using tssto::ImageStack;
using tssto::Label;
using tssto::LabelMask;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    path = fs::temp_directory_path() / (std::string("tssto_cli_") + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(TSSTO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp_text(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<char> slurp_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// a small contaminated fixture on disk; returns the manifest path
fs::path write_dirty_fixture(const fs::path& dir, int rows = 16, int cols = 16, int bands = 2,
                             int frames = 4) {
  const ImageStack clean = fix::make_scene(rows, cols, bands, frames);
  std::vector<LabelMask> masks = fix::clear_masks(rows, cols, frames);
  masks[1] = tssto::generate_mask(rows, cols, 0.12, 17);
  masks[1].frame_index = 1;
  const ImageStack dirty = tssto::apply_contamination(clean, masks);
  return tssto::write_stack(dirty, dir);
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  TempDir dir("usage");
  CHECK(run_cli("", dir.path / "log0") == 1);
  CHECK(run_cli("frobnicate", dir.path / "log1") == 1);
  CHECK(run_cli("remove --input", dir.path / "log2") == 1);

  const fs::path manifest = write_dirty_fixture(dir.path / "in");
  // --coverage present but valueless
  CHECK(run_cli("simulate --input " + manifest.string() + " --out " +
                    (dir.path / "out").string() + " --coverage",
                dir.path / "log3") == 1);
}

TEST_CASE("input validation exits with code 2") {
  TempDir dir("badinput");
  CHECK(run_cli("remove --input " + (dir.path / "missing.json").string() + " --out " +
                    (dir.path / "out").string(),
                dir.path / "log0") == 2);

  // single-frame stack: the temporal prior is undefined
  ImageStack single = fix::make_scene(8, 8, 1, 2);
  single.bands[0] = tssto::BandTensor(8, 8, 1, std::vector<double>(64, 0.5));
  single.frames.resize(1);
  const fs::path m1 = tssto::write_stack(single, dir.path / "single");
  CHECK(run_cli("remove --input " + m1.string() + " --out " + (dir.path / "out1").string(),
                dir.path / "log1") == 2);

  // evaluate with mismatched shapes
  const fs::path a = tssto::write_stack(fix::make_scene(16, 16, 1, 2), dir.path / "a");
  const fs::path b = tssto::write_stack(fix::make_scene(12, 16, 1, 2), dir.path / "b");
  CHECK(run_cli("evaluate --ref " + a.string() + " --test " + b.string(), dir.path / "log2") ==
        2);
}

TEST_CASE("simulate writes one run per default preset") {
  TempDir dir("simdefault");
  const fs::path manifest = tssto::write_stack(fix::make_scene(32, 32, 1, 3), dir.path / "clean");
  const fs::path out = dir.path / "sim";
  CHECK(run_cli("simulate --input " + manifest.string() + " --out " + out.string() +
                    " --blobs 3 --seed 4",
                dir.path / "log") == 0);

  for (const char* sub : {"cov_0134", "cov_0392", "cov_1035", "cov_1974", "cov_3484"}) {
    CHECK(fs::exists(out / sub / "manifest.json"));
    CHECK(fs::exists(out / sub / "mask_000.pgm"));
    CHECK(fs::exists(out / sub / "mask_002.pgm"));
  }
  CHECK(fs::exists(out / "effective_config.json"));

  // only frame 0 is contaminated by default; its mask coverage hits the target
  const LabelMask m0 = tssto::read_mask(out / "cov_1035" / "mask_000.pgm");
  const auto [cf, sf] = tssto::coverage(m0);
  CHECK(cf >= 0.0985);
  CHECK(cf <= 0.1085);
  const LabelMask m1 = tssto::read_mask(out / "cov_1035" / "mask_001.pgm");
  CHECK(tssto::coverage(m1).first == 0.0);

  // clear frames of the contaminated stack equal the clean original
  const ImageStack clean = tssto::read_stack(manifest);
  const ImageStack dirty = tssto::read_stack(out / "cov_1035" / "manifest.json");
  for (int p = 0; p < 32 * 32; ++p) {
    CHECK(dirty.bands[0].frame_data(1)[p] == clean.bands[0].frame_data(1)[p]);
    CHECK(dirty.bands[0].frame_data(2)[p] == clean.bands[0].frame_data(2)[p]);
  }
}

TEST_CASE("simulate is reproducible for a fixed seed") {
  TempDir dir("simseed");
  const fs::path manifest = tssto::write_stack(fix::make_scene(24, 24, 1, 2), dir.path / "clean");
  const std::string base = "simulate --input " + manifest.string() + " --coverage 0.1 --seed 9";
  CHECK(run_cli(base + " --out " + (dir.path / "s1").string(), dir.path / "log1") == 0);
  CHECK(run_cli(base + " --out " + (dir.path / "s2").string(), dir.path / "log2") == 0);
  CHECK(run_cli("simulate --input " + manifest.string() + " --coverage 0.1 --seed 10 --out " +
                    (dir.path / "s3").string(),
                dir.path / "log3") == 0);

  for (const char* f : {"f000_b00.raw", "f001_b00.raw", "mask_000.pgm", "manifest.json"})
    CHECK(slurp_bytes(dir.path / "s1" / "cov_1000" / f) ==
          slurp_bytes(dir.path / "s2" / "cov_1000" / f));
  CHECK(slurp_bytes(dir.path / "s1" / "cov_1000" / "f000_b00.raw") !=
        slurp_bytes(dir.path / "s3" / "cov_1000" / "f000_b00.raw"));
}

TEST_CASE("skip-cloning output equals the substitution stage computed directly") {
  TempDir dir("tos");
  const fs::path manifest = write_dirty_fixture(dir.path / "in");
  const fs::path out = dir.path / "out";
  CHECK(run_cli("remove --input " + manifest.string() + " --out " + out.string() +
                    " --skip-cloning",
                dir.path / "log") == 0);

  // same stages through the library, default parameters
  const ImageStack stack = tssto::read_stack(manifest);
  std::vector<tssto::BandTensor> b_bands, c_bands;
  for (const auto& band : stack.bands) {
    tssto::Decomposition dec = tssto::solve(band, tssto::SolverParams{});
    b_bands.push_back(std::move(dec.B));
    c_bands.push_back(std::move(dec.C));
  }
  const std::vector<LabelMask> masks = tssto::build_masks(c_bands, tssto::ThresholdConfig{});
  const ImageStack tos = tssto::substitute_clean(stack, b_bands, masks);
  const fs::path lib_manifest = tssto::write_stack(tos, dir.path / "lib");

  for (int k = 0; k < 4; ++k)
    for (int b = 0; b < 2; ++b) {
      char name[32];
      std::snprintf(name, sizeof name, "f%03d_b%02d.raw", k, b);
      CHECK(slurp_bytes(out / name) == slurp_bytes(dir.path / "lib" / name));
    }

  const json log = json::parse(slurp_text(out / "removal_log.json"));
  CHECK(log["cloning"]["enabled"] == false);
  CHECK(log["masks"]["source"] == "estimated");
  CHECK(fs::exists(out / "convergence_b00.csv"));
  CHECK(fs::exists(out / "convergence_b01.csv"));
  const std::string csv = slurp_text(out / "convergence_b00.csv");
  CHECK(csv.rfind("iter,rel_change,res_a,res_h,res_v,res_t,mu\n", 0) == 0);
  CHECK(fs::exists(out / "effective_config.json"));
}

TEST_CASE("externally provided masks bypass the threshold stage") {
  TempDir dir("maskin");
  const fs::path manifest = write_dirty_fixture(dir.path / "in");

  // deliberately odd masks no threshold would produce: one thin ring
  std::vector<LabelMask> provided = fix::clear_masks(16, 16, 4);
  for (int i = 4; i < 12; ++i) {
    provided[2].at(i, 4) = Label::Cloud;
    provided[2].at(i, 11) = Label::Cloud;
    provided[2].at(4, i) = Label::Cloud;
    provided[2].at(11, i) = Label::Cloud;
  }
  const fs::path mdir = dir.path / "masks";
  fs::create_directories(mdir);
  for (int k = 0; k < 4; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "mask_%03d.pgm", k);
    tssto::write_mask(provided[k], mdir / name);
  }

  const fs::path out = dir.path / "out";
  CHECK(run_cli("remove --input " + manifest.string() + " --out " + out.string() +
                    " --masks-in " + mdir.string() + " --skip-cloning",
                dir.path / "log") == 0);

  for (int k = 0; k < 4; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "mask_%03d.pgm", k);
    const LabelMask echoed = tssto::read_mask(out / name);
    for (std::size_t p = 0; p < provided[k].size(); ++p)
      CHECK(echoed.labels[p] == provided[k].labels[p]);
  }
  const json log = json::parse(slurp_text(out / "removal_log.json"));
  CHECK(log["masks"]["source"] == "external");

  // pixels outside the provided masks are untouched
  const ImageStack in_stack = tssto::read_stack(manifest);
  const ImageStack out_stack = tssto::read_stack(out / "manifest.json");
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        if (provided[2].at(i, j) == Label::Clear)
          CHECK(out_stack.bands[b].at(i, j, 2) == in_stack.bands[b].at(i, j, 2));
}

TEST_CASE("full removal run improves on the contaminated input") {
  TempDir dir("full");
  const fs::path clean_manifest =
      tssto::write_stack(fix::make_scene(16, 16, 2, 4), dir.path / "clean");
  const fs::path dirty_manifest = write_dirty_fixture(dir.path / "in");
  const fs::path out = dir.path / "out";

  CHECK(run_cli("remove --input " + dirty_manifest.string() + " --out " + out.string(),
                dir.path / "log") == 0);
  const std::string log_text = slurp_text(dir.path / "log");
  CHECK(log_text.find("band 0: converged") != std::string::npos);
  CHECK(log_text.find("band 1: converged") != std::string::npos);

  const json rlog = json::parse(slurp_text(out / "removal_log.json"));
  CHECK(rlog["cloning"]["enabled"] == true);
  CHECK(rlog["bands"].size() == 2);
  for (const auto& b : rlog["bands"]) CHECK(b["converged"] == true);

  const fs::path rep = dir.path / "cmp.json";
  CHECK(run_cli("evaluate --ref " + clean_manifest.string() + " --test " +
                    (out / "manifest.json").string() + " --out " + rep.string(),
                dir.path / "log_eval") == 0);
  const fs::path rep_dirty = dir.path / "cmp_dirty.json";
  CHECK(run_cli("evaluate --ref " + clean_manifest.string() + " --test " +
                    dirty_manifest.string() + " --out " + rep_dirty.string(),
                dir.path / "log_eval2") == 0);
  const double psnr_restored = json::parse(slurp_text(rep))["whole_image"]["psnr_db"];
  const double psnr_dirty = json::parse(slurp_text(rep_dirty))["whole_image"]["psnr_db"];
  CHECK(psnr_restored > psnr_dirty);
}

TEST_CASE("hitting the iteration cap is reported, not fatal") {
  TempDir dir("cap");
  const fs::path manifest = write_dirty_fixture(dir.path / "in");
  const fs::path out = dir.path / "out";
  CHECK(run_cli("remove --input " + manifest.string() + " --out " + out.string() +
                    " --max-iters 1 --skip-cloning",
                dir.path / "log") == 0);
  CHECK(slurp_text(dir.path / "log").find("NOT converged") != std::string::npos);
  const json rlog = json::parse(slurp_text(out / "removal_log.json"));
  CHECK(rlog["bands"][0]["converged"] == false);
  CHECK(rlog["bands"][0]["iterations"] == 1);
}

TEST_CASE("self-evaluation is perfect and the report schema is stable") {
  TempDir dir("eval");
  const fs::path manifest = tssto::write_stack(fix::make_scene(16, 16, 2, 2), dir.path / "a");

  // a scope mask so the repaired-area block appears
  const fs::path mdir = dir.path / "masks";
  fs::create_directories(mdir);
  std::vector<LabelMask> scope = fix::clear_masks(16, 16, 2);
  for (int i = 2; i < 9; ++i)
    for (int j = 2; j < 9; ++j) scope[0].at(i, j) = Label::Cloud;
  tssto::write_mask(scope[0], mdir / "mask_000.pgm");
  tssto::write_mask(scope[1], mdir / "mask_001.pgm");

  const fs::path rep = dir.path / "report.json";
  CHECK(run_cli("evaluate --ref " + manifest.string() + " --test " + manifest.string() +
                    " --scope-masks " + mdir.string() + " --out " + rep.string(),
                dir.path / "log") == 0);

  const json r = json::parse(slurp_text(rep));
  CHECK(r["whole_image"]["psnr_db"] == "inf");
  CHECK(r["whole_image"]["ssim"] == doctest::Approx(1.0));
  CHECK(r["whole_image"]["ce"] == 0.0);
  CHECK(r["whole_image"].size() == 4);  // psnr_db, ssim, ce, fd: each exactly once
  REQUIRE(r.contains("repaired_area"));
  CHECK(r["repaired_area"].contains("sd"));
  CHECK(r["repaired_area"].contains("fd"));
  CHECK(r["repaired_area"].contains("ie_bits"));
  CHECK(r["repaired_area"].size() == 3);

  // stdout carries the same report
  CHECK(slurp_text(dir.path / "log").find("\"psnr_db\": \"inf\"") != std::string::npos);
}

TEST_CASE("thread count can come from the environment") {
  TempDir dir("threads");
  const fs::path manifest = write_dirty_fixture(dir.path / "in");
  const fs::path out = dir.path / "out";
  const std::string cmd = std::string("TSSTO_THREADS=1 ") + TSSTO_CLI_PATH + " remove --input " +
                          manifest.string() + " --out " + out.string() + " --skip-cloning > " +
                          (dir.path / "log").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  CHECK(WEXITSTATUS(rc) == 0);
  CHECK(fs::exists(out / "manifest.json"));
}
