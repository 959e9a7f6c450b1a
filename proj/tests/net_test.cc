// dcae/tests/net_test.cc

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

#include "dcae/net.h"

#include <doctest.h>

#include <cmath>

#include "oracles.h"

using namespace dcae;
using namespace dcae::testing;

TEST_CASE("splice: offset {0} is the identity") {
  Rng rng(1);
  const Matrix x = random_matrix(rng, 4, 3);
  CHECK(bitwise_equal(splice(x, {0}), x));
}

TEST_CASE("splice: edge frames replicate") {
  Rng rng(2);
  const Matrix x = random_matrix(rng, 1, 3);
  const Matrix out = splice(x, {-1, 0, 1});
  CHECK(out.rows() == 1);
  CHECK(out.cols() == 9);
  for (int k = 0; k < 3; ++k)
    for (int d = 0; d < 3; ++d) CHECK(out(0, 3 * k + d) == x(0, d));
}

TEST_CASE("splice: interior rows concatenate neighbors") {
  Rng rng(3);
  const Matrix x = random_matrix(rng, 4, 2);
  const Matrix out = splice(x, {-1, 0, 1});
  // Row 2 = concat(x[1], x[2], x[3]).
  for (int d = 0; d < 2; ++d) {
    CHECK(out(2, d) == x(1, d));
    CHECK(out(2, 2 + d) == x(2, d));
    CHECK(out(2, 4 + d) == x(3, d));
  }
}

TEST_CASE("splice backward matches finite differences") {
  Rng rng(4);
  Matrix x = random_matrix(rng, 5, 2);
  const std::vector<int> offsets = {-2, 0, 1};
  // Scalar loss: weighted sum of spliced entries.
  const Matrix w = random_matrix(rng, 5, 6);
  auto loss = [&]() {
    const Matrix s = splice(x, offsets);
    double acc = 0.0;
    for (size_t i = 0; i < s.size(); ++i) acc += s.data()[i] * w.data()[i];
    return acc;
  };
  const Matrix fd = finite_difference(x, 1e-6, loss);
  const Matrix analytic = splice_backward(w, offsets, 5, 2);
  CHECK(max_rel_err(analytic, fd) < 1e-6);
}

TEST_CASE("subsample keeps every factor-th frame") {
  Rng rng(5);
  const Matrix x = random_matrix(rng, 7, 2);
  CHECK(bitwise_equal(subsample(x, 1), x));
  const Matrix s = subsample(x, 3);
  CHECK(s.rows() == 3);  // frames 0, 3, 6
  for (int d = 0; d < 2; ++d) {
    CHECK(s(0, d) == x(0, d));
    CHECK(s(1, d) == x(3, d));
    CHECK(s(2, d) == x(6, d));
  }
  const Matrix back = subsample_backward(s, 3, 7);
  CHECK(back.rows() == 7);
  CHECK(back(3, 0) == s(1, 0));
  CHECK(back(1, 0) == 0.0);
}

TEST_CASE("tdnnf forward: identity-like factors pass positive input through") {
  TdnnfLayer layer;
  layer.offsets = {0};
  layer.weight_a = Matrix(3, 3);
  layer.weight_b = Matrix(3, 3);
  for (int i = 0; i < 3; ++i) {
    layer.weight_a(i, i) = 1.0;
    layer.weight_b(i, i) = 1.0;
  }
  layer.bias = Matrix(1, 3);
  Matrix x(2, 3, 0.5);
  TdnnfCache cache;
  const Matrix out = tdnnf_forward(layer, x, &cache);
  CHECK(bitwise_equal(out, x));
}

TEST_CASE("tdnnf: relu kills negative pre-activations and their gradients") {
  TdnnfLayer layer;
  layer.offsets = {0};
  layer.weight_a = Matrix(2, 2);
  layer.weight_b = Matrix(2, 2);
  layer.weight_a(0, 0) = layer.weight_a(1, 1) = 1.0;
  layer.weight_b(0, 0) = layer.weight_b(1, 1) = 1.0;
  layer.bias = Matrix(1, 2, -1.0);
  Matrix x(3, 2);  // zero input, negative bias -> all dead
  TdnnfCache cache;
  const Matrix out = tdnnf_forward(layer, x, &cache);
  for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == 0.0);
  TdnnfGrads grads;
  Matrix g_out(3, 2, 1.0);
  const Matrix g_in = tdnnf_backward(layer, cache, g_out, 3, 2, &grads);
  for (size_t i = 0; i < g_in.size(); ++i) CHECK(g_in.data()[i] == 0.0);
}

TEST_CASE("tdnnf backward matches finite differences across parameter draws") {
  Rng rng(6);
  for (int draw = 0; draw < 10; ++draw) {
    TdnnfLayer layer;
    layer.offsets = {-1, 0, 1};
    layer.weight_a = random_matrix(rng, 6, 3, 0.7);
    layer.weight_b = random_matrix(rng, 3, 4, 0.7);
    layer.bias = random_matrix(rng, 1, 4, 0.1);
    Matrix x = random_matrix(rng, 5, 2);
    const Matrix w = random_matrix(rng, 5, 4);  // loss = sum(out .* w)

    auto loss = [&]() {
      const Matrix out = tdnnf_forward(layer, x, nullptr);
      double acc = 0.0;
      for (size_t i = 0; i < out.size(); ++i) acc += out.data()[i] * w.data()[i];
      return acc;
    };

    TdnnfCache cache;
    tdnnf_forward(layer, x, &cache);
    TdnnfGrads grads;
    const Matrix g_in = tdnnf_backward(layer, cache, w, 5, 2, &grads);

    CHECK(max_rel_err(grads.weight_a, finite_difference(layer.weight_a, 1e-5, loss)) < 1e-4);
    CHECK(max_rel_err(grads.weight_b, finite_difference(layer.weight_b, 1e-5, loss)) < 1e-4);
    CHECK(max_rel_err(grads.bias, finite_difference(layer.bias, 1e-5, loss)) < 1e-4);
    CHECK(max_rel_err(g_in, finite_difference(x, 1e-5, loss)) < 1e-4);
  }
}

TEST_CASE("semi-orthogonal step: fixed point and convergence") {
  // Already semi-orthogonal: unchanged.
  Matrix id(2, 4);
  id(0, 0) = id(1, 1) = 1.0;
  Matrix stepped = id;
  semi_orthogonal_step(stepped, 0.125);
  CHECK(bitwise_equal(stepped, id));

  // nu = 0 is the identity operation.
  Rng rng(7);
  Matrix m = random_matrix(rng, 2, 4);
  Matrix frozen = m;
  semi_orthogonal_step(frozen, 0.0);
  CHECK(bitwise_equal(frozen, m));

  // Repeated application drives m m^T toward I.
  for (int i = 0; i < 100; ++i) semi_orthogonal_step(m, 0.125);
  Matrix gram = matmul_nt(m, m);
  for (int i = 0; i < 2; ++i) gram(i, i) -= 1.0;
  CHECK(frobenius_norm(gram) < 1e-6);

  Matrix tall(4, 2);
  CHECK_THROWS_AS(semi_orthogonal_step(tall, 0.125), DataError);
}

TEST_CASE("code_split slices concatenate back exactly") {
  Rng rng(8);

  // Whole code is P when the other parts are zero-width.
  const Matrix h4 = random_matrix(rng, 2, 4);
  const CodeSlices only_p = code_split(h4, CodeLayout{4, 0, 0, 0});
  CHECK(bitwise_equal(only_p.p, h4));
  CHECK(only_p.s.cols() == 0);
  CHECK(only_p.r.cols() == 0);

  const Matrix h6 = random_matrix(rng, 2, 6);
  const CodeSlices parts = code_split(h6, CodeLayout{2, 2, 2, 0});
  CHECK(bitwise_equal(hconcat(hconcat(parts.p, parts.s), parts.r), h6));

  CHECK_THROWS_AS(code_split(h6, CodeLayout{2, 2, 0, 0}), DataError);
}

TEST_CASE("split gradient is the incoming gradient, elementwise") {
  // d(concat(split(h)))/dh is the identity; verified by finite differences.
  Rng rng(9);
  Matrix h = random_matrix(rng, 2, 5);
  const Matrix w = random_matrix(rng, 2, 5);
  auto loss = [&]() {
    const CodeSlices s = code_split(h, CodeLayout{2, 1, 2, 0});
    const Matrix back = hconcat(hconcat(s.p, s.s), s.r);
    double acc = 0.0;
    for (size_t i = 0; i < back.size(); ++i) acc += back.data()[i] * w.data()[i];
    return acc;
  };
  const Matrix fd = finite_difference(h, 1e-6, loss);
  CHECK(max_rel_err(w, fd) < 1e-7);
}

TEST_CASE("decoder: depth 1 is a plain affine map") {
  DecoderStack dec;
  AffineLayer layer;
  layer.weight = Matrix(2, 2);
  layer.weight(0, 0) = layer.weight(1, 1) = 1.0;
  layer.bias = Matrix(1, 2);
  layer.bias(0, 0) = 3.0;
  dec.layers.push_back(layer);
  Matrix code(2, 2, -1.0);  // negatives pass: no relu on the final layer
  const Matrix out = decoder_forward(dec, code, {}, UNetMode{}, nullptr);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(0, 1) == -1.0);
}

TEST_CASE("decoder backward matches finite differences at depths 2..6") {
  Rng rng(10);
  for (int depth : {2, 3, 4, 5, 6}) {
    DecoderStack dec;
    int in = 3;
    for (int i = 0; i < depth; ++i) {
      const int out_dim = i == depth - 1 ? 2 : 4;
      AffineLayer layer;
      layer.weight = random_matrix(rng, in, out_dim, 0.6);
      layer.bias = random_matrix(rng, 1, out_dim, 0.1);
      dec.layers.push_back(layer);
      in = out_dim;
    }
    Matrix code = random_matrix(rng, 3, 3);
    const Matrix w = random_matrix(rng, 3, 2);
    auto loss = [&]() {
      const Matrix out = decoder_forward(dec, code, {}, UNetMode{}, nullptr);
      double acc = 0.0;
      for (size_t i = 0; i < out.size(); ++i) acc += out.data()[i] * w.data()[i];
      return acc;
    };
    DecoderCache cache;
    decoder_forward(dec, code, {}, UNetMode{}, &cache);
    DecoderGrads grads;
    const Matrix g_code =
        decoder_backward(dec, cache, w, {}, UNetMode{}, nullptr, &grads);
    CHECK(max_rel_err(g_code, finite_difference(code, 1e-5, loss)) < 1e-4);
    for (int i = 0; i < depth; ++i) {
      CHECK(max_rel_err(grads.layers[i].weight,
                        finite_difference(dec.layers[i].weight, 1e-5, loss)) < 1e-4);
      CHECK(max_rel_err(grads.layers[i].bias,
                        finite_difference(dec.layers[i].bias, 1e-5, loss)) < 1e-4);
    }
  }
}

TEST_CASE("unet_connect modes") {
  Rng rng(11);
  const Matrix enc = random_matrix(rng, 2, 3);
  const Matrix dec = random_matrix(rng, 2, 3);

  // sum with weight 0 is bitwise `none`.
  CHECK(bitwise_equal(unet_connect(enc, dec, UNetMode{UNetKind::kSum, 0.0}),
                      unet_connect(enc, dec, UNetMode{UNetKind::kNone, 1.0})));

  // sum with weight 0.3 is d + 0.3 e elementwise.
  const Matrix sum = unet_connect(enc, dec, UNetMode{UNetKind::kSum, 0.3});
  for (size_t i = 0; i < sum.size(); ++i)
    CHECK(sum.data()[i] ==
          doctest::Approx(dec.data()[i] + 0.3 * enc.data()[i]).epsilon(1e-15));

  // diff_concat with enc == dec has an all-zero second half.
  const Matrix dc = unet_connect(dec, dec, UNetMode{UNetKind::kDiffConcat, 0.7});
  CHECK(dc.cols() == 6);
  for (int t = 0; t < 2; ++t)
    for (int d = 3; d < 6; ++d) CHECK(dc(t, d) == 0.0);

  // concat stacks [dec || enc].
  const Matrix cc = unet_connect(enc, dec, UNetMode{UNetKind::kConcat, 1.0});
  CHECK(bitwise_equal(slice_cols(cc, 0, 3), dec));
  CHECK(bitwise_equal(slice_cols(cc, 3, 3), enc));

  Matrix wrong(2, 4);
  CHECK_THROWS_AS(unet_connect(wrong, dec, UNetMode{UNetKind::kSum, 0.5}),
                  DataError);
}

TEST_CASE("unet backward matches finite differences for every mode") {
  Rng rng(12);
  for (int draw = 0; draw < 10; ++draw)
  for (UNetKind kind : {UNetKind::kNone, UNetKind::kSum, UNetKind::kConcat,
                        UNetKind::kDiffConcat}) {
    const UNetMode mode{kind, 0.4};
    Matrix enc = random_matrix(rng, 2, 3);
    Matrix dec = random_matrix(rng, 2, 3);
    const int out_cols =
        (kind == UNetKind::kConcat || kind == UNetKind::kDiffConcat) ? 6 : 3;
    const Matrix w = random_matrix(rng, 2, out_cols);
    auto loss = [&]() {
      const Matrix out = unet_connect(enc, dec, mode);
      double acc = 0.0;
      for (size_t i = 0; i < out.size(); ++i) acc += out.data()[i] * w.data()[i];
      return acc;
    };
    Matrix g_dec, g_enc;
    unet_backward(mode, w, 3, &g_dec, &g_enc);
    CHECK(max_rel_err(g_dec, finite_difference(dec, 1e-6, loss)) < 1e-6);
    if (kind != UNetKind::kNone)
      CHECK(max_rel_err(g_enc, finite_difference(enc, 1e-6, loss)) < 1e-6);
  }
}

TEST_CASE("forward passes are pure") {
  Rng rng(13);
  TdnnfLayer layer;
  layer.offsets = {-1, 0, 1};
  layer.weight_a = random_matrix(rng, 9, 4);
  layer.weight_b = random_matrix(rng, 4, 5);
  layer.bias = random_matrix(rng, 1, 5);
  const Matrix x = random_matrix(rng, 6, 3);
  CHECK(bitwise_equal(tdnnf_forward(layer, x, nullptr),
                      tdnnf_forward(layer, x, nullptr)));
}

TEST_CASE("unet mode names round-trip") {
  for (UNetKind kind : {UNetKind::kNone, UNetKind::kSum, UNetKind::kConcat,
                        UNetKind::kDiffConcat})
    CHECK(unet_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(unet_kind_from_string("bogus"), ConfigError);
}
