// dcae/corpus.h

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

#ifndef DCAE_CORPUS_H_
#define DCAE_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dcae/fst.h"
#include "dcae/matrix.h"
#include "dcae/rng.h"

namespace dcae {

// Synthetic corpus mirroring the four-condition structure of
// multi-condition training sets: A clean, B additive noise, C channel
// distortion, D noise + channel.  Features are generated directly in a
// cepstral-like domain; channel distortion is therefore an additive
// per-utterance bias vector and noises are stationary AR(1) feature
// trajectories.

struct CorpusSpec {
  int num_phones = 10;
  int feat_dim = 20;
  int spk_embed_dim = 8;
  int num_speakers = 8;
  int num_utts = 100;       // train A/B pairs; the train manifest has 2x rows
  int num_test_utts = 40;   // per condition
  int min_utt_frames = 40;
  int max_utt_frames = 80;
  int num_noise_types = 6;  // ids 1..n; 0 means "no noise"
  double snr_low_db = 10.0;
  double snr_high_db = 20.0;
  int num_channels = 2;     // channel 0 is the identity (near-field mic)
  Lexicon vocab;
  uint64_t seed = 7;

  void validate() const;
};

struct Utterance {
  std::string id;
  std::string speaker_id;
  char condition = 'A';  // A, B, C or D
  Matrix clean;          // T x D
  Matrix noisy;          // same shape; equals clean for condition A
  std::vector<int32_t> alignment;   // length T, full-rate senone ids
  std::vector<int32_t> transcript;  // word ids
  Vector spk_embed;

  int num_frames() const { return clean.rows(); }
  void validate() const;
};

struct NoiseType {
  double ar_coeff = 0.0;
  Vector shape;  // per-dimension stationary standard deviation
};

// Everything deterministically derived from the spec seed that later stages
// (tests, training, decoding) need to interpret the corpus.
struct CorpusModel {
  CorpusSpec spec;
  std::vector<NoiseType> noises;      // [num_noise_types]
  std::vector<Vector> channel_bias;   // [num_channels], index 0 all-zero
  std::vector<Vector> phone_means;    // generation only
  std::vector<Vector> speaker_shift;  // generation only
  std::vector<Vector> speaker_embed;  // unit-norm, fixed per speaker
};

CorpusModel derive_corpus_model(const CorpusSpec &spec);

// Deterministic toy vocabulary with distinct pronunciations.
Lexicon make_default_vocab(int num_words, int num_phones, uint64_t seed);

// g such that signal_power / (g^2 * noise_power) == 10^(snr_db/10).
double snr_gain(double signal_power, double noise_power, double target_snr_db);

// clean + g * noise_trajectory + channel_bias.  noise_type 0 adds no noise;
// snr_db = +inf forces gain 0.  channel_bias may be null.
Matrix corrupt(const Matrix &clean, const CorpusModel &model, int noise_type,
               double snr_db, const Vector *channel_bias, Rng &rng);

// Binary utterance file: magic "DCAE", version 1, little-endian payload
// (u32 T, D, embed dim, transcript length; clean and noisy as f32 row-major;
// alignment u32; embedding f32; transcript u32), CRC32 of the payload.
// Identity fields (id/speaker/condition) live in the manifest, not the file.
void save_utterance(const Utterance &utt, const std::string &path);
Utterance load_utterance(const std::string &path);

struct ManifestEntry {
  std::string id;
  std::string speaker;
  char condition = 'A';
  std::string relpath;
};

std::vector<ManifestEntry> load_manifest(const std::string &path);

// Per-utterance corruption record (noise id, target SNR, channel index).
struct CorruptionRecord {
  std::string id;
  int noise_type = 0;
  double snr_db = 0.0;
  int channel = 0;
};

std::vector<CorruptionRecord> load_corruption_records(const std::string &path);

// Generates the full corpus under out_dir: corpus.json, train.tsv,
// test_A..D.tsv, meta.tsv and utt/*.dcae.  Deterministic in spec.seed;
// utterances are generated concurrently on independent seed streams.
void gen_corpus(const CorpusSpec &spec, const std::string &out_dir);

void save_corpus_model(const CorpusModel &model, const std::string &path);
CorpusModel load_corpus_model(const std::string &path);

// Loads every utterance referenced by a manifest (parallel, read-only).
std::vector<Utterance> load_utterances(const std::string &corpus_dir,
                                       const std::string &manifest_name);

}  // namespace dcae

#endif  // DCAE_CORPUS_H_
