// dcae/net.h

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

#ifndef DCAE_NET_H_
#define DCAE_NET_H_

#include <string>
#include <vector>

#include "dcae/matrix.h"

namespace dcae {

// Differentiable building blocks.  Every forward pass here has an exact
// hand-derived backward; the grad-check harness in train.h exercises each
// against central finite differences.

// Row t of the result concatenates x[clamp(t+o)] over the offsets
// (edge frames are replicated).
Matrix splice(const Matrix &x, const std::vector<int> &offsets);
Matrix splice_backward(const Matrix &grad_spliced,
                       const std::vector<int> &offsets, int in_rows,
                       int in_cols);

// Keeps rows 0, factor, 2*factor, ...; output length ceil(T/factor).
Matrix subsample(const Matrix &x, int factor);
Matrix subsample_backward(const Matrix &grad_sub, int factor, int full_rows);

// Factorized TDNN layer: relu(splice(x) * A * B + bias).
struct TdnnfLayer {
  std::vector<int> offsets;
  Matrix weight_a;  // (in_dim * |offsets|) x bottleneck
  Matrix weight_b;  // bottleneck x out_dim
  Matrix bias;      // 1 x out_dim

  int out_dim() const { return weight_b.cols(); }
};

struct TdnnfCache {
  Matrix spliced, bottleneck, pre;
};

struct TdnnfGrads {
  Matrix weight_a, weight_b, bias;
};

Matrix tdnnf_forward(const TdnnfLayer &layer, const Matrix &x,
                     TdnnfCache *cache);
// Returns the gradient w.r.t. the layer input.
Matrix tdnnf_backward(const TdnnfLayer &layer, const TdnnfCache &cache,
                      const Matrix &grad_out, int in_rows, int in_cols,
                      TdnnfGrads *grads);

// One semi-orthogonality update m -= nu * (m m^T - I) m for a wide matrix
// (rows <= cols); repeated application drives ||m m^T - I||_F to zero.
void semi_orthogonal_step(Matrix &m, double nu);

struct AffineLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
};

struct AffineGrads {
  Matrix weight, bias;
};

Matrix affine_forward(const AffineLayer &layer, const Matrix &x);
Matrix affine_backward(const AffineLayer &layer, const Matrix &x,
                       const Matrix &grad_out, AffineGrads *grads);

// Code layer factorization.  For the hierarchical model c_size/r_size
// describe the first code and p_size/s_size the second.
struct CodeLayout {
  int p_size = 0;
  int s_size = 0;
  int r_size = 0;
  int c_size = 0;
};

std::vector<Matrix> split_cols(const Matrix &h, const std::vector<int> &sizes);

struct CodeSlices {
  Matrix p, s, r;
};

// (p, s, r) as contiguous column slices; concatenation inverts exactly.
CodeSlices code_split(const Matrix &h, const CodeLayout &layout);

enum class UNetKind { kNone, kSum, kConcat, kDiffConcat };

struct UNetMode {
  UNetKind kind = UNetKind::kNone;
  double weight = 1.0;  // ignored for none/concat
};

std::string to_string(UNetKind kind);
UNetKind unet_kind_from_string(const std::string &s);

// none: dec; sum: dec + w*enc; concat: [dec || enc];
// diff_concat: [dec || w*(enc - dec)].
Matrix unet_connect(const Matrix &enc, const Matrix &dec, const UNetMode &u);
// Splits the incoming gradient across both branches.
void unet_backward(const UNetMode &u, const Matrix &grad_out, int dec_cols,
                   Matrix *grad_dec, Matrix *grad_enc);

// Fully-connected decoder: affine+relu stacks with a final linear layer.
// taps[i], when non-empty, is combined with layer i's input via `u`
// (the U-Net path); pass empty matrices for a plain decoder.
struct DecoderStack {
  std::vector<AffineLayer> layers;

  int depth() const { return static_cast<int>(layers.size()); }
};

struct DecoderCache {
  std::vector<Matrix> inputs;  // post-connection input of each layer
  std::vector<Matrix> pres;    // pre-activation outputs
};

struct DecoderGrads {
  std::vector<AffineGrads> layers;
};

Matrix decoder_forward(const DecoderStack &dec, const Matrix &code,
                       const std::vector<Matrix> &taps, const UNetMode &u,
                       DecoderCache *cache);
// Returns grad w.r.t. code; tap_grads[i] receives the gradient for taps[i].
Matrix decoder_backward(const DecoderStack &dec, const DecoderCache &cache,
                        const Matrix &grad_out, const std::vector<Matrix> &taps,
                        const UNetMode &u, std::vector<Matrix> *tap_grads,
                        DecoderGrads *grads);

}  // namespace dcae

#endif  // DCAE_NET_H_
