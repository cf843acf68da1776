#pragma once

#include <cstddef>
#include <vector>

namespace tssto {

// Differencing axes of a band tensor: X runs along columns, Y along rows,
// Z along the temporal (frame) axis.
enum class Axis { X, Y, Z };

// Dense rows x cols x frames tensor holding one spectral band of an image
// stack. Storage is frame-major with the column index fastest, so one
// temporal slice is a contiguous rows*cols block:
//   flat index = (k*rows + i)*cols + j.
class BandTensor {
 public:
  BandTensor() = default;
  BandTensor(int rows, int cols, int frames);
  BandTensor(int rows, int cols, int frames, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int frames() const { return frames_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * rows_ + i) * cols_ + j;
  }
  double at(int i, int j, int k) const { return data_[index(i, j, k)]; }
  double& at(int i, int j, int k) { return data_[index(i, j, k)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  // Contiguous temporal slice k (rows*cols doubles).
  double* frame_data(int k) { return data_.data() + static_cast<std::size_t>(k) * rows_ * cols_; }
  const double* frame_data(int k) const {
    return data_.data() + static_cast<std::size_t>(k) * rows_ * cols_;
  }

  bool same_dims(const BandTensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && frames_ == o.frames_;
  }
  bool all_finite() const;

 private:
  int rows_ = 0, cols_ = 0, frames_ = 0;
  std::vector<double> data_;
};

// Mode-1 unfolding: rows x (cols*frames) matrix stored row-major, with
// column index c = k*cols + j. The column order is part of the format
// contract; group-sparsity norms are taken over columns of this matrix.
struct Mode1Unfolding {
  int rows = 0, cols = 0, frames = 0;  // dims of the folded tensor
  std::vector<double> matrix;
  int mat_cols() const { return cols * frames; }
};

Mode1Unfolding unfold_mode1(const BandTensor& t);

// Inverse of unfold_mode1. Rejects an unfolding whose matrix size does not
// match its recorded dims.
BandTensor fold_mode1(const Mode1Unfolding& m);

}  // namespace tssto
