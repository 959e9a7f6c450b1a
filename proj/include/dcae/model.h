// dcae/model.h

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

#ifndef DCAE_MODEL_H_
#define DCAE_MODEL_H_

#include <optional>
#include <string>
#include <vector>

#include "dcae/matrix.h"
#include "dcae/net.h"

namespace dcae {

// Four assemblies over the same TDNN-F encoder:
//  baseline  - encoder -> senone head, no code split, no decoders.
//  c_dcae    - encoder -> (P, R); P -> senone head; [P||R] -> decoder ->
//              input reconstruction.
//  pc_dcae   - encoder -> (P, S, R); decoder II([P||S]) -> clean frame;
//              decoder I([P||S||R]) -> noisy frame.
//  hc_dcae   - encoder I -> (C, R); decoder I([C||R]) -> noisy frame;
//              encoder II(C) -> (P, S); decoder II([P||S]) -> clean frame.
// The senone head is a single affine over P-Code in every assembly.
enum class ModelKind { kBaseline, kCDcae, kPcDcae, kHcDcae };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string &s);

struct ModelConfig {
  ModelKind kind = ModelKind::kCDcae;
  int encoder_depth = 5;   // total encoder depth (encoders I+II for hc_dcae)
  int encoder2_depth = 1;  // hc_dcae only
  int decoder1_depth = 2;
  int decoder2_depth = 2;
  CodeLayout code{48, 0, 16, 0};
  UNetMode unet;           // applies to decoder I only
  int hidden = 64;
  int bottleneck = 16;
  std::vector<int> splice_offsets = {-1, 0, 1};
  int subsample_factor = 3;
  int feat_dim = 20;
  int spk_embed_dim = 8;
  int num_senones = 20;
  uint64_t seed = 1;

  bool has_decoder1() const { return kind != ModelKind::kBaseline; }
  bool has_decoder2() const {
    return kind == ModelKind::kPcDcae || kind == ModelKind::kHcDcae;
  }
  int enc1_depth() const {
    return kind == ModelKind::kHcDcae ? encoder_depth - encoder2_depth
                                      : encoder_depth;
  }
  // Width of the encoder(-I) code layer.
  int code1_width() const;
  // Width of encoder II's code layer (hc_dcae).
  int code2_width() const { return code.p_size + code.s_size; }
  int input_dim() const { return feat_dim + spk_embed_dim; }

  void validate() const;  // throws ConfigError

  std::string to_json_string() const;
  static ModelConfig from_json_string(const std::string &text);
};

struct Model {
  ModelConfig cfg;
  std::vector<TdnnfLayer> enc1;
  std::vector<TdnnfLayer> enc2;  // hc_dcae only
  DecoderStack dec1;
  DecoderStack dec2;
  AffineLayer head;
  bool stripped = false;

  struct ParamRef {
    std::string name;
    Matrix *value;
  };
  // Stable registry of all trainable tensors (construction order).
  std::vector<ParamRef> params();
  std::vector<ParamRef> params() const;
  size_t num_parameters() const;
};

// Parameters initialized N(0, 1/fan_in), biases zero, each tensor seeded
// from (cfg.seed, tensor name) so construction order is irrelevant.
Model assemble(const ModelConfig &cfg);

struct ModelOutputs {
  Matrix senone_logits;                // T' x num_senones
  std::optional<Matrix> recon_noisy;   // decoder I output
  std::optional<Matrix> recon_clean;   // decoder II output
};

struct ForwardCache {
  Matrix input;  // T x (feat+embed)
  std::vector<TdnnfCache> enc1, enc2;
  std::vector<Matrix> enc1_out, enc2_out;  // post-activation outputs
  Matrix code1;                            // subsampled encoder(-I) code
  Matrix code2;                            // hc_dcae: encoder II code
  Matrix p;                                // senone-head input slice
  Matrix dec2_input;
  std::vector<Matrix> dec1_taps;           // subsampled U-Net taps
  DecoderCache dec1, dec2;
};

// spk_embed is appended to every frame before the encoder; outputs are at
// the subsampled rate.  Pure: identical inputs give bitwise-equal outputs.
ModelOutputs model_forward(const Model &model, const Matrix &noisy,
                           const Vector &spk_embed, ForwardCache *cache);

struct OutputGrads {
  Matrix d_logits;
  std::optional<Matrix> d_recon_noisy;
  std::optional<Matrix> d_recon_clean;
};

// Exact parameter gradients, in params() order.
std::vector<Matrix> model_backward(const Model &model, const ForwardCache &cache,
                                   const OutputGrads &grads);

// Inference model: encoders, code split and senone head only.  Senone
// logits are bitwise-identical to the full model's on every input.
Model strip_decoders(const Model &model);

// Parameter file: magic "DCAEM", version, config as a JSON blob, named
// tensors (u32 name length, name, rank, dims, f64 data), CRC32 trailer.
void save_model(const Model &model, const std::string &path);
Model load_model(const std::string &path);

}  // namespace dcae

#endif  // DCAE_MODEL_H_
