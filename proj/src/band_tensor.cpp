#include "tssto/band_tensor.hpp"

#include <cmath>

#include "tssto/errors.hpp"

namespace tssto {

BandTensor::BandTensor(int rows, int cols, int frames)
    : rows_(rows), cols_(cols), frames_(frames) {
  if (rows < 1 || cols < 1 || frames < 1) {
    throw InputError("BandTensor dims must be >= 1");
  }
  data_.assign(static_cast<std::size_t>(rows) * cols * frames, 0.0);
}

BandTensor::BandTensor(int rows, int cols, int frames, std::vector<double> values)
    : rows_(rows), cols_(cols), frames_(frames), data_(std::move(values)) {
  if (rows < 1 || cols < 1 || frames < 1) {
    throw InputError("BandTensor dims must be >= 1");
  }
  if (data_.size() != static_cast<std::size_t>(rows) * cols * frames) {
    throw InputError("BandTensor value count does not match dims");
  }
}

bool BandTensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Mode1Unfolding unfold_mode1(const BandTensor& t) {
  Mode1Unfolding m;
  m.rows = t.rows();
  m.cols = t.cols();
  m.frames = t.frames();
  const int mc = m.mat_cols();
  m.matrix.resize(static_cast<std::size_t>(m.rows) * mc);
  for (int k = 0; k < t.frames(); ++k) {
    for (int i = 0; i < t.rows(); ++i) {
      for (int j = 0; j < t.cols(); ++j) {
        m.matrix[static_cast<std::size_t>(i) * mc + (k * t.cols() + j)] = t.at(i, j, k);
      }
    }
  }
  return m;
}

BandTensor fold_mode1(const Mode1Unfolding& m) {
  if (m.rows < 1 || m.cols < 1 || m.frames < 1 ||
      m.matrix.size() != static_cast<std::size_t>(m.rows) * m.mat_cols()) {
    throw InputError("fold_mode1: matrix size does not match recorded dims");
  }
  BandTensor t(m.rows, m.cols, m.frames);
  const int mc = m.mat_cols();
  for (int k = 0; k < m.frames; ++k) {
    for (int i = 0; i < m.rows; ++i) {
      for (int j = 0; j < m.cols; ++j) {
        t.at(i, j, k) = m.matrix[static_cast<std::size_t>(i) * mc + (k * m.cols + j)];
      }
    }
  }
  return t;
}

}  // namespace tssto
