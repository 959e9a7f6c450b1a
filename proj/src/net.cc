// dcae/net.cc

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

#include <algorithm>
#include <cmath>

namespace dcae {

namespace {

inline int clamp_row(int t, int rows) { return std::min(std::max(t, 0), rows - 1); }

Matrix relu(const Matrix &pre) {
  Matrix out = pre;
  double *p = out.data();
  for (size_t i = 0; i < out.size(); ++i)
    if (p[i] < 0.0) p[i] = 0.0;
  return out;
}

// grad_out masked by the relu activation pattern (derivative 0 at the kink).
Matrix relu_backward(const Matrix &pre, const Matrix &grad_out) {
  Matrix g = grad_out;
  const double *q = pre.data();
  double *p = g.data();
  for (size_t i = 0; i < g.size(); ++i)
    if (q[i] <= 0.0) p[i] = 0.0;
  return g;
}

Matrix add_bias(Matrix m, const Matrix &bias) {
  require(bias.rows() == 1 && bias.cols() == m.cols(), "add_bias: shape mismatch");
  const double *b = bias.row(0);
  for (int t = 0; t < m.rows(); ++t) {
    double *row = m.row(t);
    for (int j = 0; j < m.cols(); ++j) row[j] += b[j];
  }
  return m;
}

Matrix col_sums(const Matrix &m) {
  Matrix s(1, m.cols());
  double *out = s.row(0);
  for (int t = 0; t < m.rows(); ++t) {
    const double *row = m.row(t);
    for (int j = 0; j < m.cols(); ++j) out[j] += row[j];
  }
  return s;
}

}  // namespace

Matrix splice(const Matrix &x, const std::vector<int> &offsets) {
  require(!offsets.empty(), "splice: empty offset list");
  require(x.rows() >= 1, "splice: empty input");
  const int T = x.rows(), D = x.cols();
  const int K = static_cast<int>(offsets.size());
  Matrix out(T, D * K);
  for (int t = 0; t < T; ++t) {
    double *row = out.row(t);
    for (int k = 0; k < K; ++k) {
      const double *src = x.row(clamp_row(t + offsets[k], T));
      for (int d = 0; d < D; ++d) row[k * D + d] = src[d];
    }
  }
  return out;
}

Matrix splice_backward(const Matrix &grad_spliced,
                       const std::vector<int> &offsets, int in_rows,
                       int in_cols) {
  const int K = static_cast<int>(offsets.size());
  require(grad_spliced.rows() == in_rows && grad_spliced.cols() == in_cols * K,
          "splice_backward: shape mismatch");
  Matrix grad(in_rows, in_cols);
  for (int t = 0; t < in_rows; ++t) {
    const double *row = grad_spliced.row(t);
    for (int k = 0; k < K; ++k) {
      double *dst = grad.row(clamp_row(t + offsets[k], in_rows));
      for (int d = 0; d < in_cols; ++d) dst[d] += row[k * in_cols + d];
    }
  }
  return grad;
}

Matrix subsample(const Matrix &x, int factor) {
  require(factor >= 1, "subsample: factor must be >= 1");
  const int T = x.rows();
  const int out_rows = (T + factor - 1) / factor;
  Matrix out(out_rows, x.cols());
  for (int i = 0; i < out_rows; ++i) {
    const double *src = x.row(i * factor);
    double *dst = out.row(i);
    for (int d = 0; d < x.cols(); ++d) dst[d] = src[d];
  }
  return out;
}

Matrix subsample_backward(const Matrix &grad_sub, int factor, int full_rows) {
  Matrix grad(full_rows, grad_sub.cols());
  for (int i = 0; i < grad_sub.rows(); ++i) {
    const double *src = grad_sub.row(i);
    double *dst = grad.row(i * factor);
    for (int d = 0; d < grad_sub.cols(); ++d) dst[d] = src[d];
  }
  return grad;
}

Matrix tdnnf_forward(const TdnnfLayer &layer, const Matrix &x,
                     TdnnfCache *cache) {
  Matrix spliced = splice(x, layer.offsets);
  require(spliced.cols() == layer.weight_a.rows(),
          "tdnnf_forward: input dim mismatch");
  Matrix bottleneck = matmul(spliced, layer.weight_a);
  Matrix pre = add_bias(matmul(bottleneck, layer.weight_b), layer.bias);
  Matrix out = relu(pre);
  if (cache != nullptr) {
    cache->spliced = std::move(spliced);
    cache->bottleneck = std::move(bottleneck);
    cache->pre = std::move(pre);
  }
  return out;
}

Matrix tdnnf_backward(const TdnnfLayer &layer, const TdnnfCache &cache,
                      const Matrix &grad_out, int in_rows, int in_cols,
                      TdnnfGrads *grads) {
  Matrix g_pre = relu_backward(cache.pre, grad_out);
  grads->bias = col_sums(g_pre);
  grads->weight_b = matmul_tn(cache.bottleneck, g_pre);
  Matrix g_bottleneck = matmul_nt(g_pre, layer.weight_b);
  grads->weight_a = matmul_tn(cache.spliced, g_bottleneck);
  Matrix g_spliced = matmul_nt(g_bottleneck, layer.weight_a);
  return splice_backward(g_spliced, layer.offsets, in_rows, in_cols);
}

void semi_orthogonal_step(Matrix &m, double nu) {
  require(m.rows() <= m.cols(), "semi_orthogonal_step: matrix must be wide");
  Matrix gram = matmul_nt(m, m);  // m m^T
  for (int i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
  Matrix update = matmul(gram, m);
  m.add_scaled(update, -nu);
}

Matrix affine_forward(const AffineLayer &layer, const Matrix &x) {
  require(x.cols() == layer.weight.rows(), "affine_forward: dim mismatch");
  return add_bias(matmul(x, layer.weight), layer.bias);
}

Matrix affine_backward(const AffineLayer &layer, const Matrix &x,
                       const Matrix &grad_out, AffineGrads *grads) {
  grads->bias = col_sums(grad_out);
  grads->weight = matmul_tn(x, grad_out);
  return matmul_nt(grad_out, layer.weight);
}

std::vector<Matrix> split_cols(const Matrix &h, const std::vector<int> &sizes) {
  int total = 0;
  for (int s : sizes) {
    require(s >= 0, "split_cols: negative size");
    total += s;
  }
  require(total == h.cols(), "split_cols: sizes do not sum to width");
  std::vector<Matrix> parts;
  int begin = 0;
  for (int s : sizes) {
    parts.push_back(slice_cols(h, begin, s));
    begin += s;
  }
  return parts;
}

CodeSlices code_split(const Matrix &h, const CodeLayout &layout) {
  auto parts = split_cols(h, {layout.p_size, layout.s_size, layout.r_size});
  return CodeSlices{std::move(parts[0]), std::move(parts[1]),
                    std::move(parts[2])};
}

std::string to_string(UNetKind kind) {
  switch (kind) {
    case UNetKind::kNone: return "none";
    case UNetKind::kSum: return "sum";
    case UNetKind::kConcat: return "concat";
    case UNetKind::kDiffConcat: return "diff_concat";
  }
  return "none";
}

UNetKind unet_kind_from_string(const std::string &s) {
  if (s == "none") return UNetKind::kNone;
  if (s == "sum") return UNetKind::kSum;
  if (s == "concat") return UNetKind::kConcat;
  if (s == "diff_concat") return UNetKind::kDiffConcat;
  throw ConfigError("unknown U-Net mode: " + s);
}

Matrix unet_connect(const Matrix &enc, const Matrix &dec, const UNetMode &u) {
  switch (u.kind) {
    case UNetKind::kNone:
      return dec;
    case UNetKind::kSum: {
      require(enc.same_shape(dec), "unet_connect(sum): shape mismatch");
      if (u.weight == 0.0) return dec;  // exact degeneracy to `none`
      Matrix out = dec;
      out.add_scaled(enc, u.weight);
      return out;
    }
    case UNetKind::kConcat:
      require(enc.rows() == dec.rows(), "unet_connect(concat): row mismatch");
      return hconcat(dec, enc);
    case UNetKind::kDiffConcat: {
      require(enc.same_shape(dec), "unet_connect(diff_concat): shape mismatch");
      Matrix diff = enc;
      diff.add_scaled(dec, -1.0);
      diff.scale(u.weight);
      return hconcat(dec, diff);
    }
  }
  throw DataError("unet_connect: bad mode");
}

void unet_backward(const UNetMode &u, const Matrix &grad_out, int dec_cols,
                   Matrix *grad_dec, Matrix *grad_enc) {
  switch (u.kind) {
    case UNetKind::kNone:
      *grad_dec = grad_out;
      *grad_enc = Matrix();
      return;
    case UNetKind::kSum: {
      *grad_dec = grad_out;
      if (u.weight == 0.0) {
        *grad_enc = Matrix(grad_out.rows(), grad_out.cols());
      } else {
        *grad_enc = grad_out;
        grad_enc->scale(u.weight);
      }
      return;
    }
    case UNetKind::kConcat: {
      *grad_dec = slice_cols(grad_out, 0, dec_cols);
      *grad_enc = slice_cols(grad_out, dec_cols, grad_out.cols() - dec_cols);
      return;
    }
    case UNetKind::kDiffConcat: {
      // out = [dec || w*(enc - dec)]
      Matrix g_left = slice_cols(grad_out, 0, dec_cols);
      Matrix g_right = slice_cols(grad_out, dec_cols, grad_out.cols() - dec_cols);
      g_right.scale(u.weight);
      *grad_enc = g_right;
      g_left.add_scaled(g_right, -1.0);
      *grad_dec = std::move(g_left);
      return;
    }
  }
  throw DataError("unet_backward: bad mode");
}

Matrix decoder_forward(const DecoderStack &dec, const Matrix &code,
                       const std::vector<Matrix> &taps, const UNetMode &u,
                       DecoderCache *cache) {
  require(dec.depth() >= 1, "decoder_forward: empty decoder");
  require(taps.empty() || taps.size() == dec.layers.size(),
          "decoder_forward: taps/layer count mismatch");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pres.clear();
  }
  Matrix h = code;
  for (int i = 0; i < dec.depth(); ++i) {
    if (!taps.empty() && !taps[i].empty())
      h = unet_connect(taps[i], h, u);
    Matrix pre = affine_forward(dec.layers[i], h);
    if (cache != nullptr) {
      cache->inputs.push_back(std::move(h));
      cache->pres.push_back(pre);
    }
    h = (i + 1 < dec.depth()) ? relu(pre) : pre;  // final layer stays linear
  }
  return h;
}

Matrix decoder_backward(const DecoderStack &dec, const DecoderCache &cache,
                        const Matrix &grad_out, const std::vector<Matrix> &taps,
                        const UNetMode &u, std::vector<Matrix> *tap_grads,
                        DecoderGrads *grads) {
  grads->layers.assign(dec.depth(), AffineGrads{});
  if (tap_grads != nullptr) tap_grads->assign(dec.depth(), Matrix());
  Matrix g = grad_out;
  for (int i = dec.depth() - 1; i >= 0; --i) {
    Matrix g_pre =
        (i + 1 < dec.depth()) ? relu_backward(cache.pres[i], g) : std::move(g);
    Matrix g_input = affine_backward(dec.layers[i], cache.inputs[i], g_pre,
                                     &grads->layers[i]);
    if (!taps.empty() && !taps[i].empty()) {
      const int raw_cols = (u.kind == UNetKind::kConcat ||
                            u.kind == UNetKind::kDiffConcat)
                               ? g_input.cols() - taps[i].cols()
                               : g_input.cols();
      Matrix g_raw, g_tap;
      unet_backward(u, g_input, raw_cols, &g_raw, &g_tap);
      if (tap_grads != nullptr) (*tap_grads)[i] = std::move(g_tap);
      g = std::move(g_raw);
    } else {
      g = std::move(g_input);
    }
  }
  return g;
}

}  // namespace dcae
