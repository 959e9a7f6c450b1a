// dcae/tests/matrix_test.cc

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

#include <doctest.h>

#include "dcae/parallel.h"
#include "oracles.h"

using namespace dcae;
using namespace dcae::testing;

TEST_CASE("matmul matches a hand example") {
  Matrix a(2, 3), b(3, 2);
  double av[] = {1, 2, 3, 4, 5, 6}, bv[] = {7, 8, 9, 10, 11, 12};
  std::copy(av, av + 6, a.data());
  std::copy(bv, bv + 6, b.data());
  Matrix c = matmul(a, b);
  CHECK(c(0, 0) == 58.0);
  CHECK(c(0, 1) == 64.0);
  CHECK(c(1, 0) == 139.0);
  CHECK(c(1, 1) == 154.0);
}

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
  Rng rng(42);
  set_max_threads(2);
  // Sizes straddle the parallel grain threshold.
  for (int n : {3, 17, 64, 96}) {
    Matrix a = random_matrix(rng, n, n + 1);
    Matrix b = random_matrix(rng, n + 1, n + 2);
    CHECK(bitwise_equal(matmul(a, b), ref::matmul(a, b)));
    Matrix bt = random_matrix(rng, n + 2, n + 1);
    CHECK(bitwise_equal(matmul_nt(a, bt), ref::matmul_nt(a, bt)));
    Matrix c = random_matrix(rng, n, n + 2);
    CHECK(bitwise_equal(matmul_tn(a, c), ref::matmul_tn(a, c)));
  }
  set_max_threads(1);
}

TEST_CASE("matmul rejects mismatched shapes") {
  Matrix a(2, 3), b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), DataError);
}

TEST_CASE("transpose round-trips") {
  Rng rng(7);
  Matrix a = random_matrix(rng, 4, 6);
  CHECK(bitwise_equal(transpose(transpose(a)), a));
}

TEST_CASE("hconcat and slice_cols invert each other") {
  Rng rng(9);
  Matrix a = random_matrix(rng, 5, 3), b = random_matrix(rng, 5, 4);
  Matrix joined = hconcat(a, b);
  CHECK(joined.cols() == 7);
  CHECK(bitwise_equal(slice_cols(joined, 0, 3), a));
  CHECK(bitwise_equal(slice_cols(joined, 3, 4), b));
}

TEST_CASE("add_into_cols accumulates into a block") {
  Matrix dst(2, 4, 1.0);
  Matrix src(2, 2, 2.0);
  add_into_cols(dst, 1, src);
  CHECK(dst(0, 0) == 1.0);
  CHECK(dst(0, 1) == 3.0);
  CHECK(dst(1, 2) == 3.0);
  CHECK(dst(1, 3) == 1.0);
}

TEST_CASE("add_scaled and scale") {
  Matrix a(1, 3, 2.0), b(1, 3, 1.0);
  a.add_scaled(b, 0.5);
  CHECK(a(0, 0) == 2.5);
  a.scale(2.0);
  CHECK(a(0, 2) == 5.0);
}
