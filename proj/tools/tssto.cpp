// Command-line front end: simulate | remove | evaluate.
// Exit codes: 0 success, 1 usage, 2 rejected input, 3 runtime failure.
// Non-convergence of the decomposition is reported, not treated as failure.
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tssto/compositor.hpp"
#include "tssto/errors.hpp"
#include "tssto/mask.hpp"
#include "tssto/metrics.hpp"
#include "tssto/poisson.hpp"
#include "tssto/simulate.hpp"
#include "tssto/solver.hpp"
#include "tssto/stack_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Flat JSON config files; command-line flags win over file values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::FileError(std::string("config parse failed: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.name = key;
      auto render = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
        return v.dump();
      };
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(render(v));
      else
        item.inputs.push_back(render(value));
      items.push_back(std::move(item));
    }
    return items;
  }
};

void apply_threads(int threads) {
  if (threads <= 0)
    if (const char* env = std::getenv("TSSTO_THREADS")) threads = std::atoi(env);
  if (threads > 0) omp_set_num_threads(threads);
}

std::string mask_filename(int frame) {
  char name[32];
  std::snprintf(name, sizeof name, "mask_%03d.pgm", frame);
  return name;
}

std::vector<tssto::LabelMask> read_mask_dir(const fs::path& dir, int frames, int rows, int cols) {
  std::vector<tssto::LabelMask> masks;
  for (int k = 0; k < frames; ++k) {
    tssto::LabelMask mask = tssto::read_mask(dir / mask_filename(k));
    if (mask.rows != rows || mask.cols != cols)
      throw tssto::InputError("mask dims mismatch: " + (dir / mask_filename(k)).string());
    mask.frame_index = k;
    masks.push_back(std::move(mask));
  }
  return masks;
}

void write_json(const ordered_json& doc, const fs::path& path) {
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing: " + path.string());
}

ordered_json finite_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  std::string input, out;
  std::vector<double> coverage{0.0134, 0.0392, 0.1035, 0.1974, 0.3484};
  std::vector<int> frames{0};
  std::uint64_t seed = 1;
  tssto::BlobConfig blob;
  tssto::ContaminationConfig contam;
};

int run_simulate(const SimulateOpts& o) {
  if (o.coverage.empty()) {
    std::cerr << "usage error: --coverage needs at least one value\n";
    return 1;
  }
  const tssto::ImageStack clean = tssto::read_stack(o.input);
  const int m = clean.rows(), n = clean.cols(), t = clean.frame_count();
  for (int f : o.frames)
    if (f < 0 || f >= t) throw tssto::InputError("--frames index out of range");

  fs::create_directories(o.out);
  for (double cov : o.coverage) {
    char sub[32];
    std::snprintf(sub, sizeof sub, "cov_%04d", static_cast<int>(std::llround(cov * 1e4)));
    const fs::path dir = fs::path(o.out) / sub;

    std::vector<tssto::LabelMask> masks;
    for (int k = 0; k < t; ++k) {
      const bool contaminated =
          std::find(o.frames.begin(), o.frames.end(), k) != o.frames.end();
      tssto::LabelMask mask =
          contaminated ? tssto::generate_mask(m, n, cov, o.seed + static_cast<std::uint64_t>(k), o.blob)
                       : tssto::LabelMask(m, n, k);
      mask.frame_index = k;
      masks.push_back(std::move(mask));
    }
    tssto::ContaminationConfig contam = o.contam;
    contam.seed = o.seed;
    const tssto::ImageStack dirty = tssto::apply_contamination(clean, masks, contam);
    tssto::write_stack(dirty, dir);
    for (int k = 0; k < t; ++k) tssto::write_mask(masks[k], dir / mask_filename(k));

    double max_cloud = 0.0;
    for (const auto& mask : masks) max_cloud = std::max(max_cloud, tssto::coverage(mask).first);
    std::printf("%s: wrote %s (peak frame coverage %.4f)\n", sub, dir.string().c_str(), max_cloud);
  }

  ordered_json cfg;
  cfg["command"] = "simulate";
  cfg["input"] = o.input;
  cfg["out"] = o.out;
  cfg["coverage"] = o.coverage;
  cfg["frames"] = o.frames;
  cfg["seed"] = o.seed;
  cfg["num_blobs"] = o.blob.num_blobs;
  cfg["sigma_min_frac"] = o.blob.sigma_min_frac;
  cfg["sigma_max_frac"] = o.blob.sigma_max_frac;
  cfg["shadow_di"] = o.blob.shadow_di;
  cfg["shadow_dj"] = o.blob.shadow_dj;
  cfg["cloud_level"] = o.contam.cloud_level;
  cfg["shadow_factor"] = o.contam.shadow_factor;
  cfg["texture_amp"] = o.contam.texture_amp;
  write_json(cfg, fs::path(o.out) / "effective_config.json");
  return 0;
}

// ------------------------------------------------------------------ remove

struct RemoveOpts {
  std::string input, out, masks_in;
  double lambda1 = 0.01, lambda2 = 0.01, lambda3 = 1.0;
  double lambda4 = -1.0;  // < 0 selects the dimension-scaled default
  double mu = 1.0, rho = 1.0, tol = 1e-5;
  int max_iters = 200;
  bool enforce_bound = true;
  std::string group_mode = "cols";
  double tau_cloud = 0.15, tau_shadow = -0.15;
  std::string fusion = "any";
  int min_region = 8, dilate = 1;
  bool auto_thresholds = false;
  bool skip_cloning = false;
  int threads = 0;
};

void write_convergence_csv(const fs::path& path, const std::vector<tssto::IterationRecord>& hist) {
  std::ofstream out(path);
  out << "iter,rel_change,res_a,res_h,res_v,res_t,mu\n";
  char line[256];
  for (std::size_t i = 0; i < hist.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i + 1,
                  hist[i].rel_change, hist[i].res_a, hist[i].res_h, hist[i].res_v, hist[i].res_t,
                  hist[i].mu);
    out << line;
  }
  if (!out) throw std::runtime_error("failed writing: " + path.string());
}

int run_remove(const RemoveOpts& o) {
  apply_threads(o.threads);
  const tssto::ImageStack stack = tssto::read_stack(o.input);
  if (stack.frame_count() < 2)
    throw tssto::InputError("temporal decomposition needs at least 2 frames");
  const int t = stack.frame_count();

  tssto::SolverParams params;
  params.lambda1 = o.lambda1;
  params.lambda2 = o.lambda2;
  params.lambda3 = o.lambda3;
  if (o.lambda4 >= 0.0) params.lambda4 = o.lambda4;
  params.mu = o.mu;
  params.rho = o.rho;
  params.tol = o.tol;
  params.max_iters = o.max_iters;
  params.enforce_bound = o.enforce_bound;
  params.group_mode =
      o.group_mode == "rows" ? tssto::GroupMode::Mode1Rows : tssto::GroupMode::Mode1Cols;
  params.validate();

  fs::create_directories(o.out);
  const fs::path out_dir(o.out);

  std::vector<tssto::BandTensor> b_bands, c_bands;
  ordered_json band_log = ordered_json::array();
  for (int b = 0; b < stack.band_count(); ++b) {
    tssto::Decomposition dec = tssto::solve(stack.bands[b], params);
    char csv[32];
    std::snprintf(csv, sizeof csv, "convergence_b%02d.csv", b);
    write_convergence_csv(out_dir / csv, dec.history);

    const tssto::IterationRecord& last = dec.history.back();
    const double res_max = std::max({last.res_a, last.res_h, last.res_v, last.res_t});
    std::printf("band %d: %s after %d iterations (rel %.3g, max residual %.3g)\n", b,
                dec.converged ? "converged" : "NOT converged", dec.iters_used, last.rel_change,
                res_max);
    ordered_json entry;
    entry["band"] = b;
    entry["converged"] = dec.converged;
    entry["iterations"] = dec.iters_used;
    entry["final_rel_change"] = last.rel_change;
    entry["final_residual_max"] = res_max;
    band_log.push_back(std::move(entry));

    b_bands.push_back(std::move(dec.B));
    c_bands.push_back(std::move(dec.C));
  }

  tssto::ThresholdConfig tcfg;
  tcfg.tau_cloud = o.tau_cloud;
  tcfg.tau_shadow = o.tau_shadow;
  tcfg.fusion = o.fusion == "mean" ? tssto::BandFusion::Mean : tssto::BandFusion::Any;
  tcfg.min_region_px = o.min_region;
  tcfg.dilation_radius_px = o.dilate;
  tcfg.auto_thresholds = o.auto_thresholds;

  std::vector<tssto::LabelMask> masks;
  if (!o.masks_in.empty()) {
    masks = read_mask_dir(o.masks_in, t, stack.rows(), stack.cols());
  } else {
    masks = tssto::build_masks(c_bands, tcfg);
  }

  const tssto::ImageStack tos = tssto::substitute_clean(stack, b_bands, masks);

  tssto::ImageStack result = tos;
  ordered_json clone_log;
  clone_log["enabled"] = !o.skip_cloning;
  if (!o.skip_cloning) {
    std::vector<std::optional<std::int64_t>> times;
    if (stack.fully_timestamped())
      for (const auto& fr : stack.frames) times.push_back(fr.epoch_seconds);

    std::vector<std::vector<tssto::ReferenceChoice>> refs(t);
    ordered_json ref_log = ordered_json::array();
    for (int k = 0; k < t; ++k) {
      const std::vector<tssto::Region> regions = tssto::extract_regions(masks[k]);
      for (std::size_t r = 0; r < regions.size(); ++r) {
        const tssto::ReferenceChoice choice =
            tssto::select_reference(masks, k, regions[r].pixels, times);
        refs[k].push_back(choice);
        ordered_json entry;
        entry["frame"] = k;
        entry["region"] = r;
        entry["pixels"] = regions[r].pixels.size();
        entry["reference_frame"] = choice.frame;
        entry["kind"] = choice.kind == tssto::ReferenceKind::Full
                            ? "full"
                            : (choice.kind == tssto::ReferenceKind::Partial ? "partial" : "none");
        entry["clear_fraction"] = choice.clear_fraction;
        ref_log.push_back(std::move(entry));
      }
    }
    tssto::ReconstructionLog rlog;
    result = tssto::reconstruct_details(tos, masks, refs, tssto::PoissonConfig{}, &rlog);
    clone_log["regions_total"] = rlog.regions_total;
    clone_log["regions_cloned"] = rlog.regions_cloned;
    clone_log["skipped_no_reference"] = rlog.regions_skipped_no_reference;
    clone_log["not_converged"] = rlog.regions_not_converged;
    clone_log["references"] = std::move(ref_log);
    std::printf("cloning: %d/%d regions cloned, %d without reference, %d not converged\n",
                rlog.regions_cloned, rlog.regions_total, rlog.regions_skipped_no_reference,
                rlog.regions_not_converged);
  }

  tssto::write_stack(result, out_dir);
  for (int k = 0; k < t; ++k) tssto::write_mask(masks[k], out_dir / mask_filename(k));

  ordered_json mask_log;
  mask_log["source"] = o.masks_in.empty() ? "estimated" : "external";
  mask_log["per_frame_coverage"] = ordered_json::array();
  for (int k = 0; k < t; ++k) {
    const auto [cf, sf] = tssto::coverage(masks[k]);
    ordered_json entry;
    entry["frame"] = k;
    entry["cloud"] = cf;
    entry["shadow"] = sf;
    mask_log["per_frame_coverage"].push_back(std::move(entry));
  }

  ordered_json log;
  log["bands"] = std::move(band_log);
  log["masks"] = std::move(mask_log);
  log["cloning"] = std::move(clone_log);
  write_json(log, out_dir / "removal_log.json");

  ordered_json cfg;
  cfg["command"] = "remove";
  cfg["input"] = o.input;
  cfg["out"] = o.out;
  cfg["lambda1"] = params.lambda1;
  cfg["lambda2"] = params.lambda2;
  cfg["lambda3"] = params.lambda3;
  cfg["lambda4"] = params.resolve_lambda4(stack.rows(), stack.cols());
  cfg["lambda4_auto"] = !params.lambda4.has_value();
  cfg["mu"] = params.mu;
  cfg["rho"] = params.rho;
  cfg["tol"] = params.tol;
  cfg["max_iters"] = params.max_iters;
  cfg["enforce_bound"] = params.enforce_bound;
  cfg["group_mode"] = o.group_mode;
  if (tcfg.auto_thresholds) {
    const auto [tc, ts] =
        tssto::auto_threshold_values(c_bands, tcfg.auto_percentile, tcfg.tau_cloud, tcfg.tau_shadow);
    cfg["tau_cloud"] = tc;
    cfg["tau_shadow"] = ts;
  } else {
    cfg["tau_cloud"] = tcfg.tau_cloud;
    cfg["tau_shadow"] = tcfg.tau_shadow;
  }
  cfg["auto_thresholds"] = tcfg.auto_thresholds;
  cfg["fusion"] = o.fusion;
  cfg["min_region"] = tcfg.min_region_px;
  cfg["dilate"] = tcfg.dilation_radius_px;
  cfg["masks_in"] = o.masks_in;
  cfg["skip_cloning"] = o.skip_cloning;
  cfg["threads"] = o.threads;
  write_json(cfg, out_dir / "effective_config.json");
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string ref, test, scope_masks, out;
  double peak = 1.0;  // on the normalized scale; PSNR is invariant to it
};

int run_evaluate(const EvaluateOpts& o) {
  const tssto::ImageStack ref = tssto::read_stack(o.ref);
  const tssto::ImageStack test = tssto::read_stack(o.test);

  ordered_json report;
  ordered_json whole;
  whole["psnr_db"] = finite_or_inf(tssto::psnr(ref, test, o.peak));
  tssto::SsimConfig scfg;
  scfg.peak = o.peak;
  whole["ssim"] = tssto::ssim(ref, test, scfg);
  whole["ce"] = tssto::cross_entropy(ref, test);
  whole["fd"] = tssto::figure_definition(test);
  report["whole_image"] = std::move(whole);

  if (!o.scope_masks.empty()) {
    const std::vector<tssto::LabelMask> masks =
        read_mask_dir(o.scope_masks, test.frame_count(), test.rows(), test.cols());
    const auto [sd, ie] = tssto::sd_ie_scoped(test, masks);
    ordered_json repaired;
    repaired["sd"] = sd;
    repaired["fd"] = tssto::figure_definition_scoped(test, masks);
    repaired["ie_bits"] = ie;
    report["repaired_area"] = std::move(repaired);
  }

  std::cout << report.dump(2) << "\n";
  if (!o.out.empty()) write_json(report, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thick cloud and shadow removal for multitemporal image stacks"};
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* cmd_sim = app.add_subcommand("simulate", "paint synthetic clouds on a clean stack");
  cmd_sim->config_formatter(std::make_shared<JsonConfig>());
  cmd_sim->set_config("--config", "", "JSON config file (flags take precedence)");
  cmd_sim->add_option("--input", sim.input, "clean stack manifest")->required();
  cmd_sim->add_option("--out", sim.out, "output directory")->required();
  cmd_sim->add_option("--coverage", sim.coverage, "cloud fractions in (0,1), one run each")
      ->delimiter(',')
      ->capture_default_str();
  cmd_sim->add_option("--frames", sim.frames, "frame indices to contaminate")
      ->delimiter(',')
      ->capture_default_str();
  cmd_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  cmd_sim->add_option("--blobs", sim.blob.num_blobs, "Gaussian blobs per mask")
      ->capture_default_str();
  cmd_sim->add_option("--sigma-min", sim.blob.sigma_min_frac, "min blob sigma, fraction of short side")
      ->capture_default_str();
  cmd_sim->add_option("--sigma-max", sim.blob.sigma_max_frac, "max blob sigma, fraction of short side")
      ->capture_default_str();
  cmd_sim->add_option("--shadow-di", sim.blob.shadow_di, "shadow row offset (0 = no shadows)")
      ->capture_default_str();
  cmd_sim->add_option("--shadow-dj", sim.blob.shadow_dj, "shadow column offset")
      ->capture_default_str();
  cmd_sim->add_option("--cloud-level", sim.contam.cloud_level, "cloud brightness on [0,1]")
      ->capture_default_str();
  cmd_sim->add_option("--shadow-factor", sim.contam.shadow_factor, "shadow darkening factor")
      ->capture_default_str();
  cmd_sim->add_option("--texture-amp", sim.contam.texture_amp, "cloud texture amplitude")
      ->capture_default_str();

  RemoveOpts rem;
  CLI::App* cmd_rem = app.add_subcommand("remove", "decompose, mask, substitute, and clone details");
  cmd_rem->config_formatter(std::make_shared<JsonConfig>());
  cmd_rem->set_config("--config", "", "JSON config file (flags take precedence)");
  cmd_rem->add_option("--input", rem.input, "contaminated stack manifest")->required();
  cmd_rem->add_option("--out", rem.out, "output directory")->required();
  cmd_rem->add_option("--lambda1", rem.lambda1, "horizontal smoothness weight")
      ->capture_default_str();
  cmd_rem->add_option("--lambda2", rem.lambda2, "vertical smoothness weight")->capture_default_str();
  cmd_rem->add_option("--lambda3", rem.lambda3, "temporal smoothness weight")->capture_default_str();
  cmd_rem->add_option("--lambda4", rem.lambda4, "group sparsity weight (negative = auto)")
      ->capture_default_str();
  cmd_rem->add_option("--mu", rem.mu, "ADMM penalty")->capture_default_str();
  cmd_rem->add_option("--rho", rem.rho, "penalty growth per iteration (1 = fixed)")
      ->capture_default_str();
  cmd_rem->add_option("--tol", rem.tol, "relative-change stopping threshold")->capture_default_str();
  cmd_rem->add_option("--max-iters", rem.max_iters, "iteration cap")->capture_default_str();
  cmd_rem->add_flag("--enforce-bound,!--no-enforce-bound", rem.enforce_bound,
                    "project so the clean element stays nonnegative")
      ->capture_default_str();
  cmd_rem->add_option("--group-mode", rem.group_mode, "sparsity groups: cols | rows")
      ->check(CLI::IsMember({"cols", "rows"}))
      ->capture_default_str();
  cmd_rem->add_option("--tau-cloud", rem.tau_cloud, "cloud threshold")->capture_default_str();
  cmd_rem->add_option("--tau-shadow", rem.tau_shadow, "shadow threshold")->capture_default_str();
  cmd_rem->add_option("--fusion", rem.fusion, "band fusion: any | mean")
      ->check(CLI::IsMember({"any", "mean"}))
      ->capture_default_str();
  cmd_rem->add_option("--min-region", rem.min_region, "drop mask components smaller than this")
      ->capture_default_str();
  cmd_rem->add_option("--dilate", rem.dilate, "mask dilation radius")->capture_default_str();
  cmd_rem->add_flag("--auto-thresholds", rem.auto_thresholds,
                    "derive thresholds from the separated element's percentiles");
  cmd_rem->add_flag("--skip-cloning", rem.skip_cloning, "stop after substitution");
  cmd_rem->add_option("--masks-in", rem.masks_in, "directory of externally provided masks");
  cmd_rem->add_option("--threads", rem.threads, "worker threads (0 = TSSTO_THREADS env or auto)")
      ->capture_default_str();

  EvaluateOpts eval;
  CLI::App* cmd_eval = app.add_subcommand("evaluate", "score a restored stack against a reference");
  cmd_eval->config_formatter(std::make_shared<JsonConfig>());
  cmd_eval->set_config("--config", "", "JSON config file (flags take precedence)");
  cmd_eval->add_option("--ref", eval.ref, "reference stack manifest")->required();
  cmd_eval->add_option("--test", eval.test, "stack under test")->required();
  cmd_eval->add_option("--scope-masks", eval.scope_masks,
                       "mask directory; adds repaired-area metrics");
  cmd_eval->add_option("--out", eval.out, "write the JSON report here too");
  cmd_eval->add_option("--peak", eval.peak, "PSNR/SSIM peak on the normalized scale")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(cmd_sim)) return run_simulate(sim);
    if (app.got_subcommand(cmd_rem)) return run_remove(rem);
    return run_evaluate(eval);
  } catch (const tssto::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
