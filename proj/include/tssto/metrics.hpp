#pragma once

#include <utility>
#include <vector>

#include "tssto/image_stack.hpp"
#include "tssto/mask.hpp"

namespace tssto {

// Scoped variants restrict to non-Clear pixels of the masks (the repaired
// area); whole-stack variants run over every pixel, band, and frame.

double mse(const ImageStack& ref, const ImageStack& test);
double mse_scoped(const ImageStack& ref, const ImageStack& test,
                  const std::vector<LabelMask>& scope);

// 10*log10(peak^2 / mse); +infinity when mse == 0.
double psnr_from_mse(double mse_value, double peak);
double psnr(const ImageStack& ref, const ImageStack& test, double peak = 1.0);
double psnr_scoped(const ImageStack& ref, const ImageStack& test,
                   const std::vector<LabelMask>& scope, double peak = 1.0);

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

// Mean structural similarity over fully interior Gaussian-weighted windows.
double ssim_plane(const double* ref, const double* test, int rows, int cols,
                  const SsimConfig& cfg = {});
// Mean of ssim_plane over all bands and frames.
double ssim(const ImageStack& ref, const ImageStack& test, const SsimConfig& cfg = {});

// KL divergence sum(p log(p/q)) in nats; both inputs are smoothed with
// epsilon = 1e-12 and renormalized, so equal histograms give exactly zero.
double kl_divergence(const std::vector<double>& p_counts, const std::vector<double>& q_counts);

// KL divergence between the 256-bin intensity histograms of the two stacks.
double cross_entropy(const ImageStack& ref, const ImageStack& test);

// Mean over interior pixels of sqrt((dx^2 + dy^2)/2), forward differences.
double figure_definition_plane(const double* plane, int rows, int cols);
double figure_definition(const ImageStack& stack);
double figure_definition_scoped(const ImageStack& stack, const std::vector<LabelMask>& scope);

// Population standard deviation and 256-bin entropy (bits) of a sample list.
std::pair<double, double> sd_ie(const std::vector<double>& values);
std::pair<double, double> sd_ie_scoped(const ImageStack& stack,
                                       const std::vector<LabelMask>& scope);

}  // namespace tssto
