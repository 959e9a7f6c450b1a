// dcae/matrix.cc

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

#include "dcae/matrix.h"

#include <cmath>

#include "dcae/parallel.h"

namespace dcae {

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr long kParallelGrain = 1 << 15;
}  // namespace

namespace ref {

Matrix matmul(const Matrix &a, const Matrix &b) {
  require(a.cols() == b.rows(), "matmul: inner dims differ");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double *crow = c.row(i);
    const double *arow = a.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      const double *brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix &a, const Matrix &b) {
  require(a.cols() == b.cols(), "matmul_nt: inner dims differ");
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double *arow = a.row(i);
    double *crow = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double *brow = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
      crow[j] = acc;
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix &a, const Matrix &b) {
  require(a.rows() == b.rows(), "matmul_tn: inner dims differ");
  Matrix c(a.cols(), b.cols());
  for (int i = 0; i < a.cols(); ++i) {
    double *crow = c.row(i);
    for (int k = 0; k < a.rows(); ++k) {
      const double aki = a(k, i);
      const double *brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

}  // namespace ref

// The parallel kernels keep the k-summation order of the serial reference for
// every output element; only the independent output rows are distributed.

Matrix matmul(const Matrix &a, const Matrix &b) {
  require(a.cols() == b.rows(), "matmul: inner dims differ");
  const long work = static_cast<long>(a.rows()) * a.cols() * b.cols();
  if (max_threads() == 1 || work < kParallelGrain) return ref::matmul(a, b);
  Matrix c(a.rows(), b.cols());
  parallel_for(a.rows(), [&](int i) {
    double *crow = c.row(i);
    const double *arow = a.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      const double *brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  });
  return c;
}

Matrix matmul_nt(const Matrix &a, const Matrix &b) {
  require(a.cols() == b.cols(), "matmul_nt: inner dims differ");
  const long work = static_cast<long>(a.rows()) * a.cols() * b.rows();
  if (max_threads() == 1 || work < kParallelGrain) return ref::matmul_nt(a, b);
  Matrix c(a.rows(), b.rows());
  parallel_for(a.rows(), [&](int i) {
    const double *arow = a.row(i);
    double *crow = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double *brow = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
      crow[j] = acc;
    }
  });
  return c;
}

Matrix matmul_tn(const Matrix &a, const Matrix &b) {
  require(a.rows() == b.rows(), "matmul_tn: inner dims differ");
  const long work = static_cast<long>(a.rows()) * a.cols() * b.cols();
  if (max_threads() == 1 || work < kParallelGrain) return ref::matmul_tn(a, b);
  Matrix c(a.cols(), b.cols());
  parallel_for(a.cols(), [&](int i) {
    double *crow = c.row(i);
    for (int k = 0; k < a.rows(); ++k) {
      const double aki = a(k, i);
      const double *brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
    }
  });
  return c;
}

Matrix transpose(const Matrix &a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix hconcat(const Matrix &a, const Matrix &b) {
  require(a.rows() == b.rows(), "hconcat: row counts differ");
  Matrix c(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double *crow = c.row(i);
    const double *arow = a.row(i);
    const double *brow = b.row(i);
    for (int j = 0; j < a.cols(); ++j) crow[j] = arow[j];
    for (int j = 0; j < b.cols(); ++j) crow[a.cols() + j] = brow[j];
  }
  return c;
}

Matrix slice_cols(const Matrix &a, int begin, int len) {
  require(begin >= 0 && len >= 0 && begin + len <= a.cols(),
          "slice_cols: range out of bounds");
  Matrix c(a.rows(), len);
  for (int i = 0; i < a.rows(); ++i) {
    const double *arow = a.row(i) + begin;
    double *crow = c.row(i);
    for (int j = 0; j < len; ++j) crow[j] = arow[j];
  }
  return c;
}

void add_into_cols(Matrix &dst, int begin, const Matrix &src) {
  require(dst.rows() == src.rows() && begin + src.cols() <= dst.cols(),
          "add_into_cols: range out of bounds");
  for (int i = 0; i < src.rows(); ++i) {
    double *drow = dst.row(i) + begin;
    const double *srow = src.row(i);
    for (int j = 0; j < src.cols(); ++j) drow[j] += srow[j];
  }
}

double frobenius_norm(const Matrix &a) {
  double acc = 0.0;
  const double *p = a.data();
  for (size_t i = 0; i < a.size(); ++i) acc += p[i] * p[i];
  return std::sqrt(acc);
}

}  // namespace dcae
