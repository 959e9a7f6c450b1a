// dcae/model.cc

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

#include "dcae/model.h"

#include <cmath>

#include <json.hpp>

#include "dcae/io.h"
#include "dcae/rng.h"

using nlohmann::json;

namespace dcae {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBaseline: return "baseline";
    case ModelKind::kCDcae: return "c_dcae";
    case ModelKind::kPcDcae: return "pc_dcae";
    case ModelKind::kHcDcae: return "hc_dcae";
  }
  return "baseline";
}

ModelKind model_kind_from_string(const std::string &s) {
  if (s == "baseline") return ModelKind::kBaseline;
  if (s == "c_dcae") return ModelKind::kCDcae;
  if (s == "pc_dcae") return ModelKind::kPcDcae;
  if (s == "hc_dcae") return ModelKind::kHcDcae;
  throw ConfigError("unknown model kind: " + s);
}

int ModelConfig::code1_width() const {
  switch (kind) {
    case ModelKind::kBaseline: return code.p_size;
    case ModelKind::kCDcae: return code.p_size + code.r_size;
    case ModelKind::kPcDcae: return code.p_size + code.s_size + code.r_size;
    case ModelKind::kHcDcae: return code.c_size + code.r_size;
  }
  return 0;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string &msg) { throw ConfigError("ModelConfig: " + msg); };
  if (code.p_size < 1) fail("p_size must be >= 1");
  if (code.s_size < 0 || code.r_size < 0 || code.c_size < 0)
    fail("negative code size");
  if (encoder_depth < 1) fail("encoder_depth must be >= 1");
  if (hidden < 1 || bottleneck < 1) fail("hidden/bottleneck must be >= 1");
  if (splice_offsets.empty()) fail("splice_offsets must be non-empty");
  for (size_t i = 1; i < splice_offsets.size(); ++i)
    if (splice_offsets[i] <= splice_offsets[i - 1])
      fail("splice_offsets must be strictly increasing");
  if (subsample_factor < 1) fail("subsample_factor must be >= 1");
  if (feat_dim < 1 || spk_embed_dim < 0 || num_senones < 1)
    fail("bad feature/embedding/senone dims");
  if (unet.weight < 0.0 || unet.weight > 1.0)
    fail("unet weight must be in [0, 1]");

  switch (kind) {
    case ModelKind::kBaseline:
      if (code.s_size != 0 || code.r_size != 0 || code.c_size != 0)
        fail("baseline takes only p_size");
      break;
    case ModelKind::kCDcae:
      if (code.s_size != 0 || code.c_size != 0)
        fail("c_dcae takes p_size and r_size only");
      if (decoder1_depth < 1) fail("decoder1_depth must be >= 1");
      break;
    case ModelKind::kPcDcae:
      if (code.c_size != 0) fail("pc_dcae takes p/s/r sizes only");
      if (decoder1_depth < 1 || decoder2_depth < 1)
        fail("decoder depths must be >= 1");
      break;
    case ModelKind::kHcDcae:
      if (code.c_size < 1) fail("hc_dcae needs c_size >= 1");
      if (encoder2_depth < 1) fail("hc_dcae needs encoder2_depth >= 1");
      if (encoder_depth - encoder2_depth < 1)
        fail("encoders I+II exceed the total encoder depth");
      if (decoder1_depth < 1 || decoder2_depth < 1)
        fail("decoder depths must be >= 1");
      break;
  }
  if (has_decoder1() && unet.kind != UNetKind::kNone &&
      decoder1_depth > enc1_depth())
    fail("U-Net needs decoder1_depth <= encoder(-I) depth");
}

namespace {

Matrix init_weight(int rows, int cols, uint64_t model_seed,
                   const std::string &name) {
  Rng rng(mix_seed(model_seed, hash_string(name)));
  Matrix m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

TdnnfLayer make_tdnnf(const ModelConfig &cfg, const std::string &prefix,
                      int in_dim, int out_dim) {
  TdnnfLayer layer;
  layer.offsets = cfg.splice_offsets;
  const int spliced = in_dim * static_cast<int>(cfg.splice_offsets.size());
  layer.weight_a = init_weight(spliced, cfg.bottleneck, cfg.seed, prefix + ".a");
  layer.weight_b = init_weight(cfg.bottleneck, out_dim, cfg.seed, prefix + ".b");
  layer.bias = Matrix(1, out_dim);
  return layer;
}

AffineLayer make_affine(const ModelConfig &cfg, const std::string &prefix,
                        int in_dim, int out_dim) {
  AffineLayer layer;
  layer.weight = init_weight(in_dim, out_dim, cfg.seed, prefix + ".w");
  layer.bias = Matrix(1, out_dim);
  return layer;
}

// Decoder layer IO widths.  The U-Net connection is applied to each layer's
// input; decoder hidden widths equal the paired encoder widths, which is
// `hidden` everywhere except the code-adjacent pair.
int dec_layer_in(const ModelConfig &cfg, int code_width, int i, bool unet) {
  const int raw = i == 0 ? code_width : cfg.hidden;
  if (!unet) return raw;
  const bool doubles = cfg.unet.kind == UNetKind::kConcat ||
                       cfg.unet.kind == UNetKind::kDiffConcat;
  return doubles ? 2 * raw : raw;
}

int dec_layer_out(const ModelConfig &cfg, int depth, int i) {
  return i == depth - 1 ? cfg.feat_dim : cfg.hidden;
}

}  // namespace

Model assemble(const ModelConfig &cfg) {
  cfg.validate();
  Model m;
  m.cfg = cfg;

  int in = cfg.input_dim();
  for (int i = 0; i < cfg.enc1_depth(); ++i) {
    const int out = i == cfg.enc1_depth() - 1 ? cfg.code1_width() : cfg.hidden;
    m.enc1.push_back(make_tdnnf(cfg, "enc1." + std::to_string(i), in, out));
    in = out;
  }
  if (cfg.kind == ModelKind::kHcDcae) {
    in = cfg.code.c_size;
    for (int i = 0; i < cfg.encoder2_depth; ++i) {
      const int out = i == cfg.encoder2_depth - 1 ? cfg.code2_width() : cfg.hidden;
      m.enc2.push_back(make_tdnnf(cfg, "enc2." + std::to_string(i), in, out));
      in = out;
    }
  }
  if (cfg.has_decoder1()) {
    const bool unet = cfg.unet.kind != UNetKind::kNone;
    for (int i = 0; i < cfg.decoder1_depth; ++i)
      m.dec1.layers.push_back(make_affine(
          cfg, "dec1." + std::to_string(i),
          dec_layer_in(cfg, cfg.code1_width(), i, unet),
          dec_layer_out(cfg, cfg.decoder1_depth, i)));
  }
  if (cfg.has_decoder2()) {
    const int d2_in = cfg.code.p_size + cfg.code.s_size;
    for (int i = 0; i < cfg.decoder2_depth; ++i)
      m.dec2.layers.push_back(make_affine(
          cfg, "dec2." + std::to_string(i),
          i == 0 ? d2_in : cfg.hidden,
          dec_layer_out(cfg, cfg.decoder2_depth, i)));
  }
  m.head = make_affine(cfg, "head", cfg.code.p_size, cfg.num_senones);
  return m;
}

namespace {

void collect_params(Model &m, std::vector<Model::ParamRef> &out) {
  for (size_t i = 0; i < m.enc1.size(); ++i) {
    const std::string p = "enc1." + std::to_string(i);
    out.push_back({p + ".a", &m.enc1[i].weight_a});
    out.push_back({p + ".b", &m.enc1[i].weight_b});
    out.push_back({p + ".bias", &m.enc1[i].bias});
  }
  for (size_t i = 0; i < m.enc2.size(); ++i) {
    const std::string p = "enc2." + std::to_string(i);
    out.push_back({p + ".a", &m.enc2[i].weight_a});
    out.push_back({p + ".b", &m.enc2[i].weight_b});
    out.push_back({p + ".bias", &m.enc2[i].bias});
  }
  for (size_t i = 0; i < m.dec1.layers.size(); ++i) {
    const std::string p = "dec1." + std::to_string(i);
    out.push_back({p + ".w", &m.dec1.layers[i].weight});
    out.push_back({p + ".bias", &m.dec1.layers[i].bias});
  }
  for (size_t i = 0; i < m.dec2.layers.size(); ++i) {
    const std::string p = "dec2." + std::to_string(i);
    out.push_back({p + ".w", &m.dec2.layers[i].weight});
    out.push_back({p + ".bias", &m.dec2.layers[i].bias});
  }
  out.push_back({"head.w", &m.head.weight});
  out.push_back({"head.bias", &m.head.bias});
}

}  // namespace

std::vector<Model::ParamRef> Model::params() {
  std::vector<ParamRef> out;
  collect_params(*this, out);
  return out;
}

std::vector<Model::ParamRef> Model::params() const {
  std::vector<ParamRef> out;
  collect_params(const_cast<Model &>(*this), out);
  return out;
}

size_t Model::num_parameters() const {
  size_t n = 0;
  for (const auto &p : params()) n += p.value->size();
  return n;
}

ModelOutputs model_forward(const Model &model, const Matrix &noisy,
                           const Vector &spk_embed, ForwardCache *cache) {
  const ModelConfig &cfg = model.cfg;
  require(noisy.cols() == cfg.feat_dim, "model_forward: feature dim mismatch");
  require(static_cast<int>(spk_embed.size()) == cfg.spk_embed_dim,
          "model_forward: speaker embedding dim mismatch");

  ForwardCache local;
  ForwardCache &c = cache != nullptr ? *cache : local;
  c = ForwardCache{};

  // Speaker embedding appended to every frame.
  const int T = noisy.rows();
  c.input = Matrix(T, cfg.input_dim());
  for (int t = 0; t < T; ++t) {
    double *row = c.input.row(t);
    const double *src = noisy.row(t);
    for (int d = 0; d < cfg.feat_dim; ++d) row[d] = src[d];
    for (int d = 0; d < cfg.spk_embed_dim; ++d)
      row[cfg.feat_dim + d] = spk_embed[d];
  }

  c.enc1.resize(model.enc1.size());
  Matrix h = c.input;
  for (size_t i = 0; i < model.enc1.size(); ++i) {
    h = tdnnf_forward(model.enc1[i], h, &c.enc1[i]);
    c.enc1_out.push_back(h);
  }
  c.code1 = subsample(h, cfg.subsample_factor);

  ModelOutputs out;
  const bool run_dec1 = cfg.has_decoder1() && !model.dec1.layers.empty();
  const bool run_dec2 = cfg.has_decoder2() && !model.dec2.layers.empty();

  if (cfg.kind == ModelKind::kHcDcae) {
    // Encoder II consumes only C-Code, at the subsampled rate.
    Matrix c_code = slice_cols(c.code1, 0, cfg.code.c_size);
    c.enc2.resize(model.enc2.size());
    Matrix h2 = std::move(c_code);
    for (size_t i = 0; i < model.enc2.size(); ++i) {
      h2 = tdnnf_forward(model.enc2[i], h2, &c.enc2[i]);
      c.enc2_out.push_back(h2);
    }
    c.code2 = std::move(h2);
    c.p = slice_cols(c.code2, 0, cfg.code.p_size);
    if (run_dec2) {
      c.dec2_input = c.code2;  // [P || S]
      out.recon_clean = decoder_forward(model.dec2, c.dec2_input, {},
                                        UNetMode{}, &c.dec2);
    }
  } else {
    c.p = slice_cols(c.code1, 0, cfg.code.p_size);
    if (run_dec2) {
      c.dec2_input = slice_cols(c.code1, 0, cfg.code.p_size + cfg.code.s_size);
      out.recon_clean = decoder_forward(model.dec2, c.dec2_input, {},
                                        UNetMode{}, &c.dec2);
    }
  }

  if (run_dec1) {
    // U-Net taps: decoder layer j pairs with encoder layer E-j (mirrored,
    // code-adjacent pair first), subsampled onto the decoder's timeline.
    c.dec1_taps.assign(model.dec1.layers.size(), Matrix());
    if (cfg.unet.kind != UNetKind::kNone) {
      const int E = static_cast<int>(model.enc1.size());
      for (int j = 0; j < static_cast<int>(model.dec1.layers.size()); ++j)
        c.dec1_taps[j] =
            subsample(c.enc1_out[E - 1 - j], cfg.subsample_factor);
    }
    out.recon_noisy =
        decoder_forward(model.dec1, c.code1, c.dec1_taps, cfg.unet, &c.dec1);
  }

  out.senone_logits = affine_forward(model.head, c.p);
  return out;
}

std::vector<Matrix> model_backward(const Model &model, const ForwardCache &cache,
                                   const OutputGrads &grads) {
  const ModelConfig &cfg = model.cfg;
  std::vector<Model::ParamRef> refs = const_cast<Model &>(model).params();
  std::vector<Matrix> out(refs.size());
  auto slot = [&](const std::string &name) -> Matrix & {
    for (size_t i = 0; i < refs.size(); ++i)
      if (refs[i].name == name) return out[i];
    throw DataError("model_backward: unknown tensor " + name);
  };

  // Senone head.
  AffineGrads head_grads;
  Matrix d_p = affine_backward(model.head, cache.p, grads.d_logits, &head_grads);
  slot("head.w") = std::move(head_grads.weight);
  slot("head.bias") = std::move(head_grads.bias);

  const bool ran_dec1 = !model.dec1.layers.empty() && grads.d_recon_noisy;
  const bool ran_dec2 = !model.dec2.layers.empty() && grads.d_recon_clean;

  Matrix d_code1(cache.code1.rows(), cache.code1.cols());

  if (cfg.kind == ModelKind::kHcDcae) {
    Matrix d_code2(cache.code2.rows(), cache.code2.cols());
    add_into_cols(d_code2, 0, d_p);
    if (ran_dec2) {
      DecoderGrads dg;
      Matrix d_in = decoder_backward(model.dec2, cache.dec2,
                                     *grads.d_recon_clean, {}, UNetMode{},
                                     nullptr, &dg);
      for (size_t i = 0; i < dg.layers.size(); ++i) {
        slot("dec2." + std::to_string(i) + ".w") = std::move(dg.layers[i].weight);
        slot("dec2." + std::to_string(i) + ".bias") = std::move(dg.layers[i].bias);
      }
      d_code2.add_scaled(d_in, 1.0);
    }
    // Encoder II backward, into the C-Code columns of code 1.
    Matrix g = std::move(d_code2);
    for (int i = static_cast<int>(model.enc2.size()) - 1; i >= 0; --i) {
      const int in_rows = cache.code1.rows();  // encoder II runs subsampled
      const int in_cols =
          i == 0 ? cfg.code.c_size : cache.enc2_out[i - 1].cols();
      TdnnfGrads tg;
      g = tdnnf_backward(model.enc2[i], cache.enc2[i], g, in_rows, in_cols,
                         &tg);
      const std::string p = "enc2." + std::to_string(i);
      slot(p + ".a") = std::move(tg.weight_a);
      slot(p + ".b") = std::move(tg.weight_b);
      slot(p + ".bias") = std::move(tg.bias);
    }
    add_into_cols(d_code1, 0, g);
  } else {
    add_into_cols(d_code1, 0, d_p);
    if (ran_dec2) {
      DecoderGrads dg;
      Matrix d_in = decoder_backward(model.dec2, cache.dec2,
                                     *grads.d_recon_clean, {}, UNetMode{},
                                     nullptr, &dg);
      for (size_t i = 0; i < dg.layers.size(); ++i) {
        slot("dec2." + std::to_string(i) + ".w") = std::move(dg.layers[i].weight);
        slot("dec2." + std::to_string(i) + ".bias") = std::move(dg.layers[i].bias);
      }
      add_into_cols(d_code1, 0, d_in);
    }
  }

  // Per-encoder-layer output gradients at the full frame rate.
  std::vector<Matrix> d_enc_out(model.enc1.size());
  for (size_t i = 0; i < model.enc1.size(); ++i)
    d_enc_out[i] = Matrix(cache.enc1_out[i].rows(), cache.enc1_out[i].cols());

  if (ran_dec1) {
    DecoderGrads dg;
    std::vector<Matrix> tap_grads;
    Matrix d_in = decoder_backward(model.dec1, cache.dec1,
                                   *grads.d_recon_noisy, cache.dec1_taps,
                                   cfg.unet, &tap_grads, &dg);
    for (size_t i = 0; i < dg.layers.size(); ++i) {
      slot("dec1." + std::to_string(i) + ".w") = std::move(dg.layers[i].weight);
      slot("dec1." + std::to_string(i) + ".bias") = std::move(dg.layers[i].bias);
    }
    d_code1.add_scaled(d_in, 1.0);
    if (cfg.unet.kind != UNetKind::kNone) {
      const int E = static_cast<int>(model.enc1.size());
      for (size_t j = 0; j < tap_grads.size(); ++j) {
        if (tap_grads[j].empty()) continue;
        Matrix full = subsample_backward(tap_grads[j], cfg.subsample_factor,
                                         cache.enc1_out[E - 1 - j].rows());
        d_enc_out[E - 1 - j].add_scaled(full, 1.0);
      }
    }
  }

  // Code 1 gradient back through the subsampling pick.
  {
    Matrix full = subsample_backward(d_code1, cfg.subsample_factor,
                                     cache.enc1_out.back().rows());
    d_enc_out.back().add_scaled(full, 1.0);
  }

  // Encoder I stack.
  for (int i = static_cast<int>(model.enc1.size()) - 1; i >= 0; --i) {
    const Matrix &in = (i == 0) ? cache.input : cache.enc1_out[i - 1];
    TdnnfGrads tg;
    Matrix d_in = tdnnf_backward(model.enc1[i], cache.enc1[i], d_enc_out[i],
                                 in.rows(), in.cols(), &tg);
    const std::string p = "enc1." + std::to_string(i);
    slot(p + ".a") = std::move(tg.weight_a);
    slot(p + ".b") = std::move(tg.weight_b);
    slot(p + ".bias") = std::move(tg.bias);
    if (i > 0) d_enc_out[i - 1].add_scaled(d_in, 1.0);
  }

  // Tensors untouched by the active losses keep zero gradients.
  for (size_t i = 0; i < refs.size(); ++i)
    if (out[i].empty())
      out[i] = Matrix(refs[i].value->rows(), refs[i].value->cols());
  return out;
}

Model strip_decoders(const Model &model) {
  Model inference = model;
  inference.dec1.layers.clear();
  inference.dec2.layers.clear();
  inference.stripped = true;
  return inference;
}

std::string ModelConfig::to_json_string() const {
  json j;
  j["kind"] = to_string(kind);
  j["encoder_depth"] = encoder_depth;
  j["encoder2_depth"] = encoder2_depth;
  j["decoder1_depth"] = decoder1_depth;
  j["decoder2_depth"] = decoder2_depth;
  j["code"] = {{"p_size", code.p_size},
               {"s_size", code.s_size},
               {"r_size", code.r_size},
               {"c_size", code.c_size}};
  j["unet"] = {{"mode", to_string(unet.kind)}, {"weight", unet.weight}};
  j["hidden"] = hidden;
  j["bottleneck"] = bottleneck;
  j["splice_offsets"] = splice_offsets;
  j["subsample_factor"] = subsample_factor;
  j["feat_dim"] = feat_dim;
  j["spk_embed_dim"] = spk_embed_dim;
  j["num_senones"] = num_senones;
  j["seed"] = seed;
  return j.dump();
}

ModelConfig ModelConfig::from_json_string(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw DataError("model config parse error: " + std::string(e.what()));
  }
  ModelConfig cfg;
  try {
    cfg.kind = model_kind_from_string(j.at("kind").get<std::string>());
    cfg.encoder_depth = j.at("encoder_depth").get<int>();
    cfg.encoder2_depth = j.at("encoder2_depth").get<int>();
    cfg.decoder1_depth = j.at("decoder1_depth").get<int>();
    cfg.decoder2_depth = j.at("decoder2_depth").get<int>();
    cfg.code.p_size = j.at("code").at("p_size").get<int>();
    cfg.code.s_size = j.at("code").at("s_size").get<int>();
    cfg.code.r_size = j.at("code").at("r_size").get<int>();
    cfg.code.c_size = j.at("code").at("c_size").get<int>();
    cfg.unet.kind = unet_kind_from_string(j.at("unet").at("mode").get<std::string>());
    cfg.unet.weight = j.at("unet").at("weight").get<double>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.bottleneck = j.at("bottleneck").get<int>();
    cfg.splice_offsets = j.at("splice_offsets").get<std::vector<int>>();
    cfg.subsample_factor = j.at("subsample_factor").get<int>();
    cfg.feat_dim = j.at("feat_dim").get<int>();
    cfg.spk_embed_dim = j.at("spk_embed_dim").get<int>();
    cfg.num_senones = j.at("num_senones").get<int>();
    cfg.seed = j.at("seed").get<uint64_t>();
  } catch (const json::exception &e) {
    throw DataError("model config field error: " + std::string(e.what()));
  }
  cfg.validate();
  return cfg;
}

void save_model(const Model &model, const std::string &path) {
  ByteWriter payload;
  json header;
  header["config"] = json::parse(model.cfg.to_json_string());
  header["stripped"] = model.stripped;
  const std::string header_text = header.dump();
  payload.put_u32(static_cast<uint32_t>(header_text.size()));
  payload.put_bytes(header_text);

  const auto refs = model.params();
  payload.put_u32(static_cast<uint32_t>(refs.size()));
  for (const auto &ref : refs) {
    payload.put_u32(static_cast<uint32_t>(ref.name.size()));
    payload.put_bytes(ref.name);
    payload.put_u32(2);  // rank
    payload.put_u32(static_cast<uint32_t>(ref.value->rows()));
    payload.put_u32(static_cast<uint32_t>(ref.value->cols()));
    for (size_t i = 0; i < ref.value->size(); ++i)
      payload.put_f64(ref.value->data()[i]);
  }

  ByteWriter file;
  file.put_bytes("DCAEM");
  file.put_u8(0x01);
  file.put_bytes(payload.bytes());
  file.put_u32(crc32(payload.bytes()));
  write_file_bytes(path, file.bytes());
}

Model load_model(const std::string &path) {
  const std::string bytes = read_file_bytes(path);
  ByteReader header(bytes);
  if (header.remaining() < 6 || header.get_bytes(5) != "DCAEM")
    throw DataError("bad magic bytes (not a model file): " + path);
  if (header.get_u8() != 0x01)
    throw DataError("unsupported model file version: " + path);
  if (header.remaining() < 4) throw DataError("truncated payload: " + path);
  const std::string_view payload(bytes.data() + 6, bytes.size() - 10);
  ByteReader crc_reader(std::string_view(bytes.data() + bytes.size() - 4, 4));
  if (crc32(payload) != crc_reader.get_u32())
    throw DataError("checksum mismatch: " + path);

  ByteReader r(payload);
  const uint32_t header_len = r.get_u32();
  const std::string header_text(r.get_bytes(header_len));
  json j;
  try {
    j = json::parse(header_text);
  } catch (const json::parse_error &e) {
    throw DataError("model header parse error: " + std::string(e.what()));
  }
  ModelConfig cfg = ModelConfig::from_json_string(j.at("config").dump());
  Model model = assemble(cfg);
  if (j.at("stripped").get<bool>()) model = strip_decoders(model);

  auto refs = model.params();
  const uint32_t num_tensors = r.get_u32();
  if (num_tensors != refs.size())
    throw DataError("model file tensor count mismatch: " + path);
  for (uint32_t i = 0; i < num_tensors; ++i) {
    const uint32_t name_len = r.get_u32();
    const std::string name(r.get_bytes(name_len));
    if (name != refs[i].name)
      throw DataError("model file tensor order mismatch at " + name);
    if (r.get_u32() != 2)
      throw DataError("model file: unexpected tensor rank for " + name);
    const uint32_t rows = r.get_u32();
    const uint32_t cols = r.get_u32();
    if (static_cast<int>(rows) != refs[i].value->rows() ||
        static_cast<int>(cols) != refs[i].value->cols())
      throw DataError("model file tensor shape mismatch for " + name);
    for (size_t k = 0; k < refs[i].value->size(); ++k)
      refs[i].value->data()[k] = r.get_f64();
  }
  if (r.remaining() != 0)
    throw DataError("trailing bytes in model payload: " + path);
  return model;
}

}  // namespace dcae
