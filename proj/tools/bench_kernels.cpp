// Times every parallel kernel against its serial reference on one tensor and
// checks the outputs are bit-identical (the parallel versions only reorder
// thread assignment, never arithmetic).
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "tssto/band_tensor.hpp"
#include "tssto/kernels.hpp"
#include "tssto/simulate.hpp"

using tssto::Axis;
using tssto::BandTensor;

namespace {

template <class F>
double best_ms(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

struct Row {
  std::string name;
  double serial_ms, parallel_ms;
  bool identical;
};

}  // namespace

int main(int argc, char** argv) {
  int m = 192, n = 192, t = 8, reps = 5;
  if (argc > 1) m = n = std::atoi(argv[1]);
  if (argc > 2) t = std::atoi(argv[2]);
  if (argc > 3) reps = std::atoi(argv[3]);
  if (m < 1 || t < 1 || reps < 1) {
    std::fprintf(stderr, "usage: %s [side] [frames] [reps]   (all positive integers)\n", argv[0]);
    return 1;
  }

  BandTensor x(m, n, t), y(m, n, t);
  tssto::SplitMix64 rng(42);
  for (std::size_t p = 0; p < x.size(); ++p) {
    x.data()[p] = rng.uniform(-1.0, 1.0);
    y.data()[p] = rng.uniform(-1.0, 1.0);
  }
  BandTensor out_s(m, n, t), out_p(m, n, t);
  const std::size_t sz = x.size();

  auto identical = [&] {
    for (std::size_t p = 0; p < sz; ++p)
      if (out_s.data()[p] != out_p.data()[p]) return false;
    return true;
  };

  std::vector<Row> rows;
  auto bench = [&](const std::string& name, std::function<void()> serial,
                   std::function<void()> parallel) {
    serial();
    parallel();
    rows.push_back({name, best_ms(serial, reps), best_ms(parallel, reps), identical()});
  };

  bench("grad_x", [&] { tssto::serial::grad(x, Axis::X, out_s); },
        [&] { tssto::kernels::grad(x, Axis::X, out_p); });
  bench("grad_z", [&] { tssto::serial::grad(x, Axis::Z, out_s); },
        [&] { tssto::kernels::grad(x, Axis::Z, out_p); });
  bench("grad_adjoint_y", [&] { tssto::serial::grad_adjoint(x, Axis::Y, out_s); },
        [&] { tssto::kernels::grad_adjoint(x, Axis::Y, out_p); });
  bench("soft_threshold", [&] { tssto::serial::soft_threshold(x.data(), sz, 0.3, out_s.data()); },
        [&] { tssto::kernels::soft_threshold(x.data(), sz, 0.3, out_p.data()); });
  bench("group_shrink_cols", [&] { tssto::serial::group_shrink_cols(x, 0.3, out_s); },
        [&] { tssto::kernels::group_shrink_cols(x, 0.3, out_p); });
  bench("lincomb", [&] { tssto::serial::lincomb(1.5, x.data(), -0.5, y.data(), sz, out_s.data()); },
        [&] { tssto::kernels::lincomb(1.5, x.data(), -0.5, y.data(), sz, out_p.data()); });
  bench("min_with",
        [&] {
          out_s = x;
          tssto::serial::min_with(y.data(), sz, out_s.data());
        },
        [&] {
          out_p = x;
          tssto::kernels::min_with(y.data(), sz, out_p.data());
        });

  std::printf("tensor %dx%dx%d, %d reps, omp max threads %d\n\n", m, n, t, reps,
              omp_get_max_threads());
  std::printf("%-18s %12s %12s %9s %10s\n", "kernel", "serial ms", "parallel ms", "speedup",
              "identical");
  for (const Row& r : rows)
    std::printf("%-18s %12.3f %12.3f %8.2fx %10s\n", r.name.c_str(), r.serial_ms, r.parallel_ms,
                r.serial_ms / r.parallel_ms, r.identical ? "yes" : "NO");

  bool all_identical = true;
  for (const Row& r : rows) all_identical &= r.identical;
  return all_identical ? 0 : 1;
}
