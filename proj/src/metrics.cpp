#include "tssto/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tssto/errors.hpp"

namespace tssto {

namespace {

void check_pair(const ImageStack& ref, const ImageStack& test) {
  ref.validate();
  test.validate();
  if (ref.band_count() != test.band_count() || ref.rows() != test.rows() ||
      ref.cols() != test.cols() || ref.frame_count() != test.frame_count())
    throw InputError("metric inputs have different shapes");
}

void check_scope(const ImageStack& s, const std::vector<LabelMask>& scope) {
  if (static_cast<int>(scope.size()) != s.frame_count())
    throw InputError("scope needs one mask per frame");
  for (const LabelMask& mask : scope)
    if (mask.rows != s.rows() || mask.cols != s.cols())
      throw InputError("scope mask dims mismatch");
}

constexpr double kHistEps = 1e-12;

std::array<double, 256> intensity_histogram(const ImageStack& s) {
  std::array<double, 256> h{};
  for (const BandTensor& band : s.bands) {
    const double* v = band.data();
    for (std::size_t p = 0; p < band.size(); ++p) {
      const long bin = std::lround(v[p] * 255.0);
      h[static_cast<std::size_t>(std::clamp(bin, 0L, 255L))] += 1.0;
    }
  }
  return h;
}

}  // namespace

double mse(const ImageStack& ref, const ImageStack& test) {
  check_pair(ref, test);
  double acc = 0.0;
  std::size_t count = 0;
  for (int b = 0; b < ref.band_count(); ++b) {
    const double* r = ref.bands[b].data();
    const double* x = test.bands[b].data();
    for (std::size_t p = 0; p < ref.bands[b].size(); ++p) {
      const double d = r[p] - x[p];
      acc += d * d;
    }
    count += ref.bands[b].size();
  }
  return acc / static_cast<double>(count);
}

double mse_scoped(const ImageStack& ref, const ImageStack& test,
                  const std::vector<LabelMask>& scope) {
  check_pair(ref, test);
  check_scope(ref, scope);
  const int mn = ref.rows() * ref.cols();
  double acc = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < ref.frame_count(); ++k)
    for (int b = 0; b < ref.band_count(); ++b) {
      const double* r = ref.bands[b].frame_data(k);
      const double* x = test.bands[b].frame_data(k);
      for (int p = 0; p < mn; ++p) {
        if (scope[k].labels[p] == Label::Clear) continue;
        const double d = r[p] - x[p];
        acc += d * d;
        ++count;
      }
    }
  if (count == 0) throw InputError("scoped mse: scope is empty");
  return acc / static_cast<double>(count);
}

double psnr_from_mse(double mse_value, double peak) {
  if (!(peak > 0)) throw InputError("psnr: peak must be positive");
  if (mse_value <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse_value);
}

double psnr(const ImageStack& ref, const ImageStack& test, double peak) {
  return psnr_from_mse(mse(ref, test), peak);
}

double psnr_scoped(const ImageStack& ref, const ImageStack& test,
                   const std::vector<LabelMask>& scope, double peak) {
  return psnr_from_mse(mse_scoped(ref, test, scope), peak);
}

namespace {

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> g(window);
  const double half = (window - 1) / 2.0;
  double sum = 0.0;
  for (int u = 0; u < window; ++u) {
    const double d = u - half;
    g[u] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += g[u];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Valid-region separable correlation with 1-D taps g: output is
// (rows - w + 1) x (cols - w + 1).
std::vector<double> filter_valid(const std::vector<double>& img, int rows, int cols,
                                 const std::vector<double>& g) {
  const int w = static_cast<int>(g.size());
  const int oc = cols - w + 1, orows = rows - w + 1;
  std::vector<double> tmp(static_cast<std::size_t>(rows) * oc);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < oc; ++j) {
      double s = 0.0;
      for (int u = 0; u < w; ++u) s += g[u] * img[static_cast<std::size_t>(i) * cols + j + u];
      tmp[static_cast<std::size_t>(i) * oc + j] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(orows) * oc);
  for (int i = 0; i < orows; ++i)
    for (int j = 0; j < oc; ++j) {
      double s = 0.0;
      for (int u = 0; u < w; ++u) s += g[u] * tmp[static_cast<std::size_t>(i + u) * oc + j];
      out[static_cast<std::size_t>(i) * oc + j] = s;
    }
  return out;
}

}  // namespace

double ssim_plane(const double* ref, const double* test, int rows, int cols,
                  const SsimConfig& cfg) {
  if (rows < cfg.window || cols < cfg.window)
    throw InputError("ssim: plane smaller than the window");
  const std::size_t np = static_cast<std::size_t>(rows) * cols;
  std::vector<double> x(ref, ref + np), y(test, test + np), xx(np), yy(np), xy(np);
  for (std::size_t p = 0; p < np; ++p) {
    xx[p] = x[p] * x[p];
    yy[p] = y[p] * y[p];
    xy[p] = x[p] * y[p];
  }
  const std::vector<double> g = gaussian_taps(cfg.window, cfg.sigma);
  const std::vector<double> mx = filter_valid(x, rows, cols, g);
  const std::vector<double> my = filter_valid(y, rows, cols, g);
  const std::vector<double> mxx = filter_valid(xx, rows, cols, g);
  const std::vector<double> myy = filter_valid(yy, rows, cols, g);
  const std::vector<double> mxy = filter_valid(xy, rows, cols, g);

  const double c1 = (cfg.k1 * cfg.peak) * (cfg.k1 * cfg.peak);
  const double c2 = (cfg.k2 * cfg.peak) * (cfg.k2 * cfg.peak);
  double acc = 0.0;
  for (std::size_t p = 0; p < mx.size(); ++p) {
    const double vx = mxx[p] - mx[p] * mx[p];
    const double vy = myy[p] - my[p] * my[p];
    const double cxy = mxy[p] - mx[p] * my[p];
    acc += ((2.0 * mx[p] * my[p] + c1) * (2.0 * cxy + c2)) /
           ((mx[p] * mx[p] + my[p] * my[p] + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(mx.size());
}

double ssim(const ImageStack& ref, const ImageStack& test, const SsimConfig& cfg) {
  check_pair(ref, test);
  double acc = 0.0;
  int planes = 0;
  for (int b = 0; b < ref.band_count(); ++b)
    for (int k = 0; k < ref.frame_count(); ++k) {
      acc += ssim_plane(ref.bands[b].frame_data(k), test.bands[b].frame_data(k), ref.rows(),
                        ref.cols(), cfg);
      ++planes;
    }
  return acc / planes;
}

double kl_divergence(const std::vector<double>& p_counts, const std::vector<double>& q_counts) {
  if (p_counts.size() != q_counts.size() || p_counts.empty())
    throw InputError("kl_divergence: histogram sizes disagree");
  double psum = 0.0, qsum = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    if (p_counts[i] < 0 || q_counts[i] < 0) throw InputError("kl_divergence: negative count");
    psum += p_counts[i] + kHistEps;
    qsum += q_counts[i] + kHistEps;
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    const double p = (p_counts[i] + kHistEps) / psum;
    const double q = (q_counts[i] + kHistEps) / qsum;
    d += p * std::log(p / q);
  }
  return d;
}

double cross_entropy(const ImageStack& ref, const ImageStack& test) {
  check_pair(ref, test);
  const std::array<double, 256> hr = intensity_histogram(ref);
  const std::array<double, 256> ht = intensity_histogram(test);
  return kl_divergence(std::vector<double>(hr.begin(), hr.end()),
                       std::vector<double>(ht.begin(), ht.end()));
}

double figure_definition_plane(const double* plane, int rows, int cols) {
  if (rows < 2 || cols < 2) throw InputError("figure_definition: plane too small");
  double acc = 0.0;
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j + 1 < cols; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * cols + j;
      const double dx = plane[p + 1] - plane[p];
      const double dy = plane[p + cols] - plane[p];
      acc += std::sqrt((dx * dx + dy * dy) / 2.0);
    }
  return acc / (static_cast<double>(rows - 1) * (cols - 1));
}

double figure_definition(const ImageStack& stack) {
  stack.validate();
  double acc = 0.0;
  int planes = 0;
  for (int b = 0; b < stack.band_count(); ++b)
    for (int k = 0; k < stack.frame_count(); ++k) {
      acc += figure_definition_plane(stack.bands[b].frame_data(k), stack.rows(), stack.cols());
      ++planes;
    }
  return acc / planes;
}

double figure_definition_scoped(const ImageStack& stack, const std::vector<LabelMask>& scope) {
  stack.validate();
  check_scope(stack, scope);
  const int m = stack.rows(), n = stack.cols();
  double acc = 0.0;
  std::size_t count = 0;
  for (int b = 0; b < stack.band_count(); ++b)
    for (int k = 0; k < stack.frame_count(); ++k) {
      const double* plane = stack.bands[b].frame_data(k);
      for (int i = 0; i + 1 < m; ++i)
        for (int j = 0; j + 1 < n; ++j) {
          if (scope[k].at(i, j) == Label::Clear) continue;
          const std::size_t p = static_cast<std::size_t>(i) * n + j;
          const double dx = plane[p + 1] - plane[p];
          const double dy = plane[p + n] - plane[p];
          acc += std::sqrt((dx * dx + dy * dy) / 2.0);
          ++count;
        }
    }
  if (count == 0) throw InputError("scoped figure definition: scope is empty");
  return acc / static_cast<double>(count);
}

std::pair<double, double> sd_ie(const std::vector<double>& values) {
  if (values.empty()) throw InputError("sd_ie: empty scope");
  const double n = static_cast<double>(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    // a constant sample set has zero spread exactly; the two-pass formula
    // below would report the rounding of the mean instead
    return {0.0, 0.0};
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  std::array<double, 256> hist{};
  for (double v : values) {
    var += (v - mean) * (v - mean);
    const long bin = std::lround(v * 255.0);
    hist[static_cast<std::size_t>(std::clamp(bin, 0L, 255L))] += 1.0;
  }
  var /= n;
  double ie = 0.0;
  for (double h : hist) {
    if (h <= 0.0) continue;
    const double p = h / n;
    ie -= p * std::log2(p);
  }
  return {std::sqrt(var), ie};
}

std::pair<double, double> sd_ie_scoped(const ImageStack& stack,
                                       const std::vector<LabelMask>& scope) {
  stack.validate();
  check_scope(stack, scope);
  const int mn = stack.rows() * stack.cols();
  std::vector<double> values;
  for (int b = 0; b < stack.band_count(); ++b)
    for (int k = 0; k < stack.frame_count(); ++k) {
      const double* plane = stack.bands[b].frame_data(k);
      for (int p = 0; p < mn; ++p)
        if (scope[k].labels[p] != Label::Clear) values.push_back(plane[p]);
    }
  return sd_ie(values);
}

}  // namespace tssto
