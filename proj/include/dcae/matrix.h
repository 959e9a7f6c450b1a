// dcae/matrix.h

// Copyright 2026  The dcae authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DCAE_MATRIX_H_
#define DCAE_MATRIX_H_

#include <algorithm>
#include <vector>

#include "dcae/common.h"

namespace dcae {

// Dense row-major double matrix.  All network math runs in 64-bit so the
// finite-difference checks have headroom.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * cols, fill) {
    require(rows >= 0 && cols >= 0, "Matrix: negative dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double *row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double *row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }

  bool same_shape(const Matrix &o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }
  void scale(double s) {
    for (double &v : data_) v *= s;
  }
  // *this += s * other
  void add_scaled(const Matrix &other, double s) {
    require(same_shape(other), "Matrix::add_scaled: shape mismatch");
    const double *o = other.data();
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += s * o[i];
  }

  bool all_finite() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

using Vector = std::vector<double>;

// c = a * b.  Parallel over output rows; per-element accumulation order is
// identical to the serial reference, so results are bitwise equal for any
// thread count.
Matrix matmul(const Matrix &a, const Matrix &b);
// c = a * b^T
Matrix matmul_nt(const Matrix &a, const Matrix &b);
// c = a^T * b
Matrix matmul_tn(const Matrix &a, const Matrix &b);

Matrix transpose(const Matrix &a);
Matrix hconcat(const Matrix &a, const Matrix &b);
Matrix slice_cols(const Matrix &a, int begin, int len);
// dst[:, begin:begin+src.cols()] += src
void add_into_cols(Matrix &dst, int begin, const Matrix &src);

double frobenius_norm(const Matrix &a);

namespace ref {
// Serial reference kernels, kept for correctness tests and the benchmark.
Matrix matmul(const Matrix &a, const Matrix &b);
Matrix matmul_nt(const Matrix &a, const Matrix &b);
Matrix matmul_tn(const Matrix &a, const Matrix &b);
}  // namespace ref

}  // namespace dcae

#endif  // DCAE_MATRIX_H_
