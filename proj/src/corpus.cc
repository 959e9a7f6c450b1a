// dcae/corpus.cc

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

#include "dcae/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dcae/io.h"
#include "dcae/parallel.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dcae {

namespace {

// Generator constants.  Feature magnitudes stay near unit scale (like
// mean-normalized cepstra) so squared-error losses are well conditioned;
// phone means stay well separated relative to the frame noise.
constexpr double kPhoneMeanScale = 0.5;
constexpr double kSpeakerShiftSigma = 0.1;
constexpr double kFrameNoiseSigma = 0.1;
constexpr double kChannelBiasSigma = 0.25;
constexpr int kMinPhoneFrames = 3;

double round_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void round_matrix_f32(Matrix &m) {
  double *p = m.data();
  for (size_t i = 0; i < m.size(); ++i) p[i] = round_f32(p[i]);
}

Vector random_vector(Rng &rng, int dim, double sigma) {
  Vector v(dim);
  for (double &x : v) x = sigma * rng.normal();
  return v;
}

}  // namespace

void CorpusSpec::validate() const {
  require(num_phones >= 2, "CorpusSpec: num_phones must be >= 2");
  require(feat_dim >= 1, "CorpusSpec: feat_dim must be >= 1");
  require(spk_embed_dim >= 1, "CorpusSpec: spk_embed_dim must be >= 1");
  require(num_speakers >= 1, "CorpusSpec: num_speakers must be >= 1");
  require(num_utts >= 0 && num_test_utts >= 0, "CorpusSpec: negative sizes");
  require(min_utt_frames >= kMinPhoneFrames && max_utt_frames >= min_utt_frames,
          "CorpusSpec: bad utterance length range");
  require(snr_low_db <= snr_high_db, "CorpusSpec: snr range inverted");
  require(num_noise_types >= 1, "CorpusSpec: need at least one noise type");
  require(num_channels >= 1, "CorpusSpec: need at least one channel");
  require(!vocab.words.empty(), "CorpusSpec: empty vocab");
  vocab.validate(num_phones);
}

void Utterance::validate() const {
  require(clean.same_shape(noisy), "Utterance: clean/noisy shape mismatch");
  require(static_cast<int>(alignment.size()) == clean.rows(),
          "Utterance: alignment length != frame count");
  require(clean.all_finite() && noisy.all_finite(),
          "Utterance: non-finite feature values");
  require(condition == 'A' || condition == 'B' || condition == 'C' ||
              condition == 'D',
          "Utterance: bad condition tag");
  for (int32_t s : alignment)
    require(s >= 0, "Utterance: negative senone id in alignment");
}

CorpusModel derive_corpus_model(const CorpusSpec &spec) {
  spec.validate();
  CorpusModel m;
  m.spec = spec;
  for (int k = 0; k < spec.num_noise_types; ++k) {
    Rng rng(mix_seed(spec.seed, hash_string("noise:" + std::to_string(k))));
    NoiseType nt;
    nt.ar_coeff = 0.5 + 0.45 * rng.uniform();
    nt.shape.resize(spec.feat_dim);
    for (double &s : nt.shape) s = 0.3 + 0.9 * rng.uniform();
    m.noises.push_back(std::move(nt));
  }
  m.channel_bias.emplace_back(spec.feat_dim, 0.0);  // near-field mic
  for (int c = 1; c < spec.num_channels; ++c) {
    Rng rng(mix_seed(spec.seed, hash_string("channel:" + std::to_string(c))));
    m.channel_bias.push_back(random_vector(rng, spec.feat_dim, kChannelBiasSigma));
  }
  for (int p = 0; p < spec.num_phones; ++p) {
    Rng rng(mix_seed(spec.seed, hash_string("phone:" + std::to_string(p))));
    m.phone_means.push_back(random_vector(rng, spec.feat_dim, kPhoneMeanScale));
  }
  for (int s = 0; s < spec.num_speakers; ++s) {
    Rng rng(mix_seed(spec.seed, hash_string("speaker:" + std::to_string(s))));
    m.speaker_shift.push_back(
        random_vector(rng, spec.feat_dim, kSpeakerShiftSigma));
    Vector e = random_vector(rng, spec.spk_embed_dim, 1.0);
    double norm = 0.0;
    for (double x : e) norm += x * x;
    norm = std::sqrt(norm);
    for (double &x : e) x = round_f32(x / norm);
    m.speaker_embed.push_back(std::move(e));
  }
  return m;
}

Lexicon make_default_vocab(int num_words, int num_phones, uint64_t seed) {
  require(num_words >= 1 && num_phones >= 2, "make_default_vocab: bad sizes");
  Rng rng(mix_seed(seed, hash_string("vocab")));
  Lexicon lex;
  std::set<std::vector<int>> used;
  for (int w = 0; w < num_words; ++w) {
    std::vector<int> pron;
    // Distinct pronunciations so decoding ground truth is unambiguous.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const int len = rng.uniform_int(3, 5);
      pron.clear();
      for (int i = 0; i < len; ++i) pron.push_back(rng.uniform_int(0, num_phones - 1));
      if (!used.count(pron)) break;
    }
    require(!used.count(pron), "make_default_vocab: could not find distinct pronunciation");
    used.insert(pron);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "w%02d", w);
    lex.words.push_back(buf);
    lex.prons.push_back(std::move(pron));
  }
  return lex;
}

double snr_gain(double signal_power, double noise_power, double target_snr_db) {
  require(signal_power > 0.0, "snr_gain: signal power must be positive");
  require(noise_power > 0.0, "snr_gain: noise power must be positive");
  return std::sqrt(signal_power /
                   (noise_power * std::pow(10.0, target_snr_db / 10.0)));
}

Matrix corrupt(const Matrix &clean, const CorpusModel &model, int noise_type,
               double snr_db, const Vector *channel_bias, Rng &rng) {
  require(noise_type >= 0 && noise_type <= model.spec.num_noise_types,
          "corrupt: unknown noise type " + std::to_string(noise_type));
  if (channel_bias != nullptr)
    require(static_cast<int>(channel_bias->size()) == clean.cols(),
            "corrupt: channel bias dimension mismatch");
  Matrix out = clean;
  if (noise_type > 0) {
    const NoiseType &nt = model.noises[noise_type - 1];
    const int T = clean.rows(), D = clean.cols();
    // Stationary AR(1) trajectory with per-dimension std nt.shape[d].
    Matrix traj(T, D);
    const double innov = std::sqrt(1.0 - nt.ar_coeff * nt.ar_coeff);
    for (int d = 0; d < D; ++d) traj(0, d) = nt.shape[d] * rng.normal();
    for (int t = 1; t < T; ++t)
      for (int d = 0; d < D; ++d)
        traj(t, d) = nt.ar_coeff * traj(t - 1, d) +
                     innov * nt.shape[d] * rng.normal();
    double gain = 0.0;
    if (!(std::isinf(snr_db) && snr_db > 0)) {
      double ps = 0.0, pn = 0.0;
      for (size_t i = 0; i < clean.size(); ++i) ps += clean.data()[i] * clean.data()[i];
      for (size_t i = 0; i < traj.size(); ++i) pn += traj.data()[i] * traj.data()[i];
      ps /= static_cast<double>(clean.size());
      pn /= static_cast<double>(traj.size());
      gain = snr_gain(ps, pn, snr_db);
    }
    out.add_scaled(traj, gain);
  }
  if (channel_bias != nullptr)
    for (int t = 0; t < out.rows(); ++t)
      for (int d = 0; d < out.cols(); ++d) out(t, d) += (*channel_bias)[d];
  return out;
}

void save_utterance(const Utterance &utt, const std::string &path) {
  utt.validate();
  ByteWriter payload;
  payload.put_u32(static_cast<uint32_t>(utt.clean.rows()));
  payload.put_u32(static_cast<uint32_t>(utt.clean.cols()));
  payload.put_u32(static_cast<uint32_t>(utt.spk_embed.size()));
  payload.put_u32(static_cast<uint32_t>(utt.transcript.size()));
  for (size_t i = 0; i < utt.clean.size(); ++i)
    payload.put_f32(static_cast<float>(utt.clean.data()[i]));
  for (size_t i = 0; i < utt.noisy.size(); ++i)
    payload.put_f32(static_cast<float>(utt.noisy.data()[i]));
  for (int32_t a : utt.alignment) payload.put_u32(static_cast<uint32_t>(a));
  for (double v : utt.spk_embed) payload.put_f32(static_cast<float>(v));
  for (int32_t w : utt.transcript) payload.put_u32(static_cast<uint32_t>(w));

  ByteWriter file;
  file.put_bytes("DCAE");
  file.put_u8(0x01);
  file.put_bytes(payload.bytes());
  file.put_u32(crc32(payload.bytes()));
  write_file_bytes(path, file.bytes());
}

Utterance load_utterance(const std::string &path) {
  const std::string bytes = read_file_bytes(path);
  ByteReader header(bytes);
  if (header.remaining() < 5 || header.get_bytes(4) != "DCAE")
    throw DataError("bad magic bytes (not an utterance file): " + path);
  const uint8_t version = header.get_u8();
  if (version != 0x01)
    throw DataError("unsupported utterance file version: " + path);
  if (header.remaining() < 4) throw DataError("truncated payload: " + path);
  const std::string_view payload(bytes.data() + 5, bytes.size() - 9);
  ByteReader expected_crc(std::string_view(bytes.data() + bytes.size() - 4, 4));
  if (crc32(payload) != expected_crc.get_u32())
    throw DataError("checksum mismatch: " + path);

  ByteReader r(payload);
  Utterance utt;
  const uint32_t T = r.get_u32();
  const uint32_t D = r.get_u32();
  const uint32_t E = r.get_u32();
  const uint32_t W = r.get_u32();
  utt.clean = Matrix(static_cast<int>(T), static_cast<int>(D));
  utt.noisy = Matrix(static_cast<int>(T), static_cast<int>(D));
  for (size_t i = 0; i < utt.clean.size(); ++i)
    utt.clean.data()[i] = static_cast<double>(r.get_f32());
  for (size_t i = 0; i < utt.noisy.size(); ++i)
    utt.noisy.data()[i] = static_cast<double>(r.get_f32());
  utt.alignment.resize(T);
  for (uint32_t t = 0; t < T; ++t)
    utt.alignment[t] = static_cast<int32_t>(r.get_u32());
  utt.spk_embed.resize(E);
  for (uint32_t i = 0; i < E; ++i)
    utt.spk_embed[i] = static_cast<double>(r.get_f32());
  utt.transcript.resize(W);
  for (uint32_t i = 0; i < W; ++i)
    utt.transcript[i] = static_cast<int32_t>(r.get_u32());
  if (r.remaining() != 0)
    throw DataError("trailing bytes in utterance payload: " + path);
  utt.validate();
  return utt;
}

std::vector<ManifestEntry> load_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    ManifestEntry e;
    std::string cond;
    if (!std::getline(ss, e.id, '\t') || !std::getline(ss, e.speaker, '\t') ||
        !std::getline(ss, cond, '\t') || !std::getline(ss, e.relpath, '\t'))
      throw DataError("malformed manifest line: " + line);
    require(cond.size() == 1, "manifest: bad condition field: " + cond);
    e.condition = cond[0];
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<CorruptionRecord> load_corruption_records(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open meta file: " + path);
  std::vector<CorruptionRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    CorruptionRecord r;
    std::string noise, snr, channel;
    if (!std::getline(ss, r.id, '\t') || !std::getline(ss, noise, '\t') ||
        !std::getline(ss, snr, '\t') || !std::getline(ss, channel, '\t'))
      throw DataError("malformed meta line: " + line);
    r.noise_type = std::stoi(noise);
    r.snr_db = std::stod(snr);
    r.channel = std::stoi(channel);
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

struct GeneratedBase {
  std::string speaker;
  int speaker_idx = 0;
  Matrix clean;
  std::vector<int32_t> alignment;
  std::vector<int32_t> transcript;
};

// Samples transcript, durations and clean features for one utterance.
GeneratedBase generate_base(const CorpusModel &model, Rng &rng) {
  const CorpusSpec &spec = model.spec;
  GeneratedBase base;
  base.speaker_idx = rng.uniform_int(0, spec.num_speakers - 1);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%02d", base.speaker_idx);
  base.speaker = buf;

  const int target_len = rng.uniform_int(spec.min_utt_frames, spec.max_utt_frames);
  std::vector<int> phones;
  while (true) {
    const int w = rng.uniform_int(0, spec.vocab.num_words() - 1);
    const auto &pron = spec.vocab.prons[w];
    const int would_have = static_cast<int>(phones.size() + pron.size());
    if (!base.transcript.empty() && kMinPhoneFrames * would_have > target_len)
      break;
    if (base.transcript.empty() &&
        kMinPhoneFrames * would_have > spec.max_utt_frames)
      throw DataError("gen_corpus: utt_len_range infeasible for sampled transcript");
    base.transcript.push_back(w);
    phones.insert(phones.end(), pron.begin(), pron.end());
    if (kMinPhoneFrames * static_cast<int>(phones.size()) >= target_len) break;
  }

  // Geometric duration surplus tuned so the expected total hits target_len.
  const int n = static_cast<int>(phones.size());
  const double budget =
      std::max(0.0, static_cast<double>(target_len - kMinPhoneFrames * n));
  const double mean_extra = budget / n;
  const double p = 1.0 / (1.0 + mean_extra);
  std::vector<int> durations(n);
  int total = 0;
  for (int i = 0; i < n; ++i) {
    durations[i] = kMinPhoneFrames + rng.geometric(p);
    total += durations[i];
  }

  Topology topo{spec.num_phones};
  base.alignment.reserve(total);
  base.clean = Matrix(total, spec.feat_dim);
  int t = 0;
  for (int i = 0; i < n; ++i) {
    const int phone = phones[i];
    for (int d = 0; d < durations[i]; ++d) {
      base.alignment.push_back(d == 0 ? topo.forward_senone(phone)
                                      : topo.selfloop_senone(phone));
      double *row = base.clean.row(t++);
      const Vector &mean = model.phone_means[phone];
      const Vector &shift = model.speaker_shift[base.speaker_idx];
      for (int f = 0; f < spec.feat_dim; ++f)
        row[f] = mean[f] + shift[f] + kFrameNoiseSigma * rng.normal();
    }
  }

  // 3-frame moving average with edge replication.
  Matrix smooth(total, spec.feat_dim);
  for (int tt = 0; tt < total; ++tt) {
    const int lo = std::max(0, tt - 1), hi = std::min(total - 1, tt + 1);
    for (int f = 0; f < spec.feat_dim; ++f)
      smooth(tt, f) =
          (base.clean(lo, f) + base.clean(tt, f) + base.clean(hi, f)) / 3.0;
  }
  round_matrix_f32(smooth);
  base.clean = std::move(smooth);
  return base;
}

struct Record {
  ManifestEntry entry;
  CorruptionRecord meta;
};

}  // namespace

void gen_corpus(const CorpusSpec &spec, const std::string &out_dir) {
  const CorpusModel model = derive_corpus_model(spec);
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/utt");
  save_corpus_model(model, out_dir + "/corpus.json");

  struct Job {
    std::string split;  // "tr" or "te"
    char condition;     // for test jobs; train jobs emit A and B
    int index;
    uint64_t stream;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < spec.num_utts; ++i)
    jobs.push_back({"tr", 'A', i, mix_seed(spec.seed, hash_string("tr:" + std::to_string(i)))});
  for (char cond : {'A', 'B', 'C', 'D'})
    for (int i = 0; i < spec.num_test_utts; ++i)
      jobs.push_back({"te", cond, i,
                      mix_seed(spec.seed, hash_string(std::string("te:") + cond +
                                                      ":" + std::to_string(i)))});

  std::vector<std::vector<Record>> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), [&](int j) {
    const Job &job = jobs[j];
    Rng rng(job.stream);
    GeneratedBase base = generate_base(model, rng);

    auto emit = [&](const std::string &id, char condition) {
      Utterance utt;
      utt.id = id;
      utt.speaker_id = base.speaker;
      utt.condition = condition;
      utt.clean = base.clean;
      utt.alignment = base.alignment;
      utt.transcript = base.transcript;
      utt.spk_embed = model.speaker_embed[base.speaker_idx];

      CorruptionRecord meta{id, 0, std::numeric_limits<double>::infinity(), 0};
      const bool noisy = condition == 'B' || condition == 'D';
      const bool channel = condition == 'C' || condition == 'D';
      if (noisy) {
        meta.noise_type = rng.uniform_int(1, spec.num_noise_types);
        meta.snr_db = spec.snr_low_db +
                      (spec.snr_high_db - spec.snr_low_db) * rng.uniform();
      }
      if (channel && spec.num_channels > 1)
        meta.channel = rng.uniform_int(1, spec.num_channels - 1);
      const Vector *bias =
          meta.channel > 0 ? &model.channel_bias[meta.channel] : nullptr;
      if (noisy || bias != nullptr) {
        utt.noisy = corrupt(utt.clean, model, meta.noise_type, meta.snr_db,
                            bias, rng);
        round_matrix_f32(utt.noisy);
      } else {
        utt.noisy = utt.clean;
      }
      const std::string relpath = "utt/" + id + ".dcae";
      save_utterance(utt, out_dir + "/" + relpath);
      results[j].push_back(
          Record{ManifestEntry{id, base.speaker, condition, relpath}, meta});
    };

    char buf[64];
    if (job.split == "tr") {
      std::snprintf(buf, sizeof(buf), "tr%04d", job.index);
      emit(std::string(buf) + "_A", 'A');
      emit(std::string(buf) + "_B", 'B');
    } else {
      std::snprintf(buf, sizeof(buf), "te%c_%04d", job.condition, job.index);
      emit(buf, job.condition);
    }
  });

  std::ofstream train(out_dir + "/train.tsv");
  std::ofstream test_a(out_dir + "/test_A.tsv"), test_b(out_dir + "/test_B.tsv");
  std::ofstream test_c(out_dir + "/test_C.tsv"), test_d(out_dir + "/test_D.tsv");
  std::ofstream meta(out_dir + "/meta.tsv");
  auto manifest_for = [&](const std::string &split, char cond) -> std::ofstream & {
    if (split == "tr") return train;
    switch (cond) {
      case 'A': return test_a;
      case 'B': return test_b;
      case 'C': return test_c;
      default: return test_d;
    }
  };
  for (size_t j = 0; j < jobs.size(); ++j) {
    for (const Record &r : results[j]) {
      manifest_for(jobs[j].split, jobs[j].condition)
          << r.entry.id << '\t' << r.entry.speaker << '\t' << r.entry.condition
          << '\t' << r.entry.relpath << '\n';
      meta << r.meta.id << '\t' << r.meta.noise_type << '\t'
           << format_double(r.meta.snr_db) << '\t' << r.meta.channel << '\n';
    }
  }
}

void save_corpus_model(const CorpusModel &model, const std::string &path) {
  json j;
  const CorpusSpec &s = model.spec;
  j["num_phones"] = s.num_phones;
  j["feat_dim"] = s.feat_dim;
  j["spk_embed_dim"] = s.spk_embed_dim;
  j["num_speakers"] = s.num_speakers;
  j["num_utts"] = s.num_utts;
  j["num_test_utts"] = s.num_test_utts;
  j["min_utt_frames"] = s.min_utt_frames;
  j["max_utt_frames"] = s.max_utt_frames;
  j["num_noise_types"] = s.num_noise_types;
  j["snr_low_db"] = s.snr_low_db;
  j["snr_high_db"] = s.snr_high_db;
  j["num_channels"] = s.num_channels;
  j["seed"] = s.seed;
  j["vocab"]["words"] = s.vocab.words;
  j["vocab"]["prons"] = s.vocab.prons;
  json noises = json::array();
  for (const NoiseType &nt : model.noises)
    noises.push_back({{"ar_coeff", nt.ar_coeff}, {"shape", nt.shape}});
  j["noises"] = noises;
  j["channel_bias"] = model.channel_bias;
  write_file_bytes(path, j.dump(2) + "\n");
}

CorpusModel load_corpus_model(const std::string &path) {
  json j;
  try {
    j = json::parse(read_file_bytes(path));
  } catch (const json::parse_error &e) {
    throw DataError("corpus.json parse error: " + std::string(e.what()));
  }
  CorpusSpec s;
  try {
    s.num_phones = j.at("num_phones").get<int>();
    s.feat_dim = j.at("feat_dim").get<int>();
    s.spk_embed_dim = j.at("spk_embed_dim").get<int>();
    s.num_speakers = j.at("num_speakers").get<int>();
    s.num_utts = j.at("num_utts").get<int>();
    s.num_test_utts = j.at("num_test_utts").get<int>();
    s.min_utt_frames = j.at("min_utt_frames").get<int>();
    s.max_utt_frames = j.at("max_utt_frames").get<int>();
    s.num_noise_types = j.at("num_noise_types").get<int>();
    s.snr_low_db = j.at("snr_low_db").get<double>();
    s.snr_high_db = j.at("snr_high_db").get<double>();
    s.num_channels = j.at("num_channels").get<int>();
    s.seed = j.at("seed").get<uint64_t>();
    s.vocab.words = j.at("vocab").at("words").get<std::vector<std::string>>();
    s.vocab.prons = j.at("vocab").at("prons").get<std::vector<std::vector<int>>>();
  } catch (const json::exception &e) {
    throw DataError("corpus.json field error: " + std::string(e.what()));
  }
  // Rebuild the derived pieces from the seed, then cross-check the stored
  // noise/channel tables so a hand-edited file cannot drift silently.
  CorpusModel m = derive_corpus_model(s);
  try {
    const auto stored_bias = j.at("channel_bias").get<std::vector<Vector>>();
    require(stored_bias.size() == m.channel_bias.size(),
            "corpus.json: channel table size mismatch");
  } catch (const json::exception &e) {
    throw DataError("corpus.json field error: " + std::string(e.what()));
  }
  return m;
}

std::vector<Utterance> load_utterances(const std::string &corpus_dir,
                                       const std::string &manifest_name) {
  const auto entries = load_manifest(corpus_dir + "/" + manifest_name);
  std::vector<Utterance> utts(entries.size());
  parallel_for(static_cast<int>(entries.size()), [&](int i) {
    utts[i] = load_utterance(corpus_dir + "/" + entries[i].relpath);
    utts[i].id = entries[i].id;
    utts[i].speaker_id = entries[i].speaker;
    utts[i].condition = entries[i].condition;
  });
  return utts;
}

}  // namespace dcae
