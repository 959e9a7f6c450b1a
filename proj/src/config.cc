// dcae/config.cc

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

#include "dcae/config.h"

#include <cmath>
#include <set>

#include <json.hpp>

#include "dcae/io.h"

using nlohmann::json;

namespace dcae {

namespace {

// Line/column of a byte offset, for parse diagnostics.
std::pair<int, int> line_col(const std::string &text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void check_keys(const json &j, const std::string &where,
                const std::set<std::string> &known) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto &item : j.items())
    if (!known.count(item.key()))
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

template <typename T>
T get_or(const json &j, const std::string &key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

CorpusSpec parse_corpus(const json &j) {
  check_keys(j, "corpus",
             {"num_phones", "feat_dim", "spk_embed_dim", "num_speakers",
              "num_utts", "num_test_utts", "utt_len_range", "num_noise_types",
              "snr_range_db", "num_channels", "vocab", "seed"});
  CorpusSpec spec;
  spec.num_phones = get_or(j, "num_phones", spec.num_phones);
  spec.feat_dim = get_or(j, "feat_dim", spec.feat_dim);
  spec.spk_embed_dim = get_or(j, "spk_embed_dim", spec.spk_embed_dim);
  spec.num_speakers = get_or(j, "num_speakers", spec.num_speakers);
  spec.num_utts = get_or(j, "num_utts", spec.num_utts);
  spec.num_test_utts = get_or(j, "num_test_utts", spec.num_test_utts);
  if (j.contains("utt_len_range")) {
    const auto range = j.at("utt_len_range").get<std::vector<int>>();
    if (range.size() != 2)
      throw ConfigError("corpus.utt_len_range: expected [min, max]");
    spec.min_utt_frames = range[0];
    spec.max_utt_frames = range[1];
  }
  spec.num_noise_types = get_or(j, "num_noise_types", spec.num_noise_types);
  if (j.contains("snr_range_db")) {
    const auto range = j.at("snr_range_db").get<std::vector<double>>();
    if (range.size() != 2)
      throw ConfigError("corpus.snr_range_db: expected [low, high]");
    spec.snr_low_db = range[0];
    spec.snr_high_db = range[1];
  }
  spec.num_channels = get_or(j, "num_channels", spec.num_channels);
  spec.seed = get_or<uint64_t>(j, "seed", spec.seed);
  if (j.contains("vocab")) {
    const json &v = j.at("vocab");
    check_keys(v, "corpus.vocab", {"auto_words", "words", "prons"});
    if (v.contains("auto_words")) {
      if (v.contains("words") || v.contains("prons"))
        throw ConfigError("corpus.vocab: auto_words excludes explicit words");
      spec.vocab = make_default_vocab(v.at("auto_words").get<int>(),
                                      spec.num_phones, spec.seed);
    } else {
      spec.vocab.words = v.at("words").get<std::vector<std::string>>();
      spec.vocab.prons = v.at("prons").get<std::vector<std::vector<int>>>();
    }
  } else {
    spec.vocab = make_default_vocab(20, spec.num_phones, spec.seed);
  }
  return spec;
}

ModelConfig parse_model(const json &j, const CorpusSpec &corpus) {
  check_keys(j, "model",
             {"kind", "encoder_depth", "encoder2_depth", "decoder1_depth",
              "decoder2_depth", "code", "unet", "hidden", "bottleneck",
              "splice_offsets", "subsample_factor", "seed"});
  ModelConfig cfg;
  cfg.kind = model_kind_from_string(get_or<std::string>(j, "kind", "c_dcae"));
  cfg.encoder_depth = get_or(j, "encoder_depth", cfg.encoder_depth);
  cfg.encoder2_depth = get_or(j, "encoder2_depth", cfg.encoder2_depth);
  cfg.decoder1_depth = get_or(j, "decoder1_depth", cfg.decoder1_depth);
  cfg.decoder2_depth = get_or(j, "decoder2_depth", cfg.decoder2_depth);
  if (j.contains("code")) {
    const json &c = j.at("code");
    check_keys(c, "model.code", {"p_size", "s_size", "r_size", "c_size", "r_ratio"});
    cfg.code.p_size = get_or(c, "p_size", 0);
    cfg.code.s_size = get_or(c, "s_size", 0);
    cfg.code.c_size = get_or(c, "c_size", 0);
    if (c.contains("r_ratio")) {
      if (c.contains("r_size"))
        throw ConfigError("model.code: give either r_size or r_ratio");
      cfg.code.r_size = static_cast<int>(
          std::llround(c.at("r_ratio").get<double>() * cfg.code.p_size));
    } else {
      cfg.code.r_size = get_or(c, "r_size", 0);
    }
  }  // otherwise keep the default layout
  if (j.contains("unet")) {
    const json &u = j.at("unet");
    check_keys(u, "model.unet", {"mode", "weight"});
    cfg.unet.kind = unet_kind_from_string(get_or<std::string>(u, "mode", "none"));
    cfg.unet.weight = get_or(u, "weight", cfg.unet.weight);
  }
  cfg.hidden = get_or(j, "hidden", cfg.hidden);
  cfg.bottleneck = get_or(j, "bottleneck", cfg.bottleneck);
  cfg.splice_offsets =
      get_or<std::vector<int>>(j, "splice_offsets", cfg.splice_offsets);
  cfg.subsample_factor = get_or(j, "subsample_factor", cfg.subsample_factor);
  cfg.seed = get_or<uint64_t>(j, "seed", cfg.seed);
  // Derived from the corpus, not configurable separately.
  cfg.feat_dim = corpus.feat_dim;
  cfg.spk_embed_dim = corpus.spk_embed_dim;
  cfg.num_senones = 2 * corpus.num_phones;
  return cfg;
}

TrainSchedule parse_train(const json &j) {
  check_keys(j, "train",
             {"epochs", "warm_start_epochs", "learning_rate", "lr_decay",
              "momentum", "batch_size", "seed", "alpha", "beta", "ce_weight",
              "semi_orthogonal"});
  TrainSchedule s;
  s.epochs = get_or(j, "epochs", s.epochs);
  s.warm_start_epochs = get_or(j, "warm_start_epochs", s.warm_start_epochs);
  s.learning_rate = get_or(j, "learning_rate", s.learning_rate);
  s.lr_decay = get_or(j, "lr_decay", s.lr_decay);
  s.momentum = get_or(j, "momentum", s.momentum);
  s.batch_size = get_or(j, "batch_size", s.batch_size);
  s.seed = get_or<uint64_t>(j, "seed", s.seed);
  s.weights.alpha = get_or(j, "alpha", s.weights.alpha);
  s.weights.beta = get_or(j, "beta", s.weights.beta);
  s.weights.ce_weight = get_or(j, "ce_weight", s.weights.ce_weight);
  s.semi_orthogonal = get_or(j, "semi_orthogonal", s.semi_orthogonal);
  return s;
}

void apply_override(json &j, const std::string &assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects dotted.key=value, got: " + assignment);
  const std::string dotted = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json *node = &j;
  size_t begin = 0;
  while (true) {
    const size_t dot = dotted.find('.', begin);
    const std::string key = dotted.substr(begin, dot - begin);
    if (key.empty()) throw ConfigError("--set: empty key segment in " + dotted);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

}  // namespace

RunConfig parse_run_config(const std::string &json_text,
                           const std::vector<std::string> &overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error &e) {
    const auto [line, col] = line_col(json_text, e.byte);
    throw ConfigError("config parse error at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
  for (const std::string &o : overrides) apply_override(j, o);

  check_keys(j, "config", {"corpus", "model", "train", "out_dir"});
  RunConfig cfg;
  try {
    cfg.corpus = parse_corpus(j.value("corpus", json::object()));
    cfg.model = parse_model(j.value("model", json::object()), cfg.corpus);
    cfg.schedule = parse_train(j.value("train", json::object()));
    cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);
    cfg.corpus.validate();
    cfg.model.validate();
    cfg.schedule.validate();
  } catch (const ConfigError &) {
    throw;
  } catch (const DataError &e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string &path,
                          const std::vector<std::string> &overrides) {
  std::string text;
  try {
    text = read_file_bytes(path);
  } catch (const DataError &e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, overrides);
}

}  // namespace dcae
