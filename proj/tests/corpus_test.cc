// dcae/tests/corpus_test.cc

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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "dcae/io.h"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace dcae;
using namespace dcae::testing;

namespace {

CorpusSpec tiny_spec() {
  CorpusSpec spec;
  spec.num_phones = 4;
  spec.feat_dim = 6;
  spec.spk_embed_dim = 3;
  spec.num_speakers = 3;
  spec.num_utts = 6;
  spec.num_test_utts = 4;
  spec.min_utt_frames = 20;
  spec.max_utt_frames = 40;
  spec.num_noise_types = 3;
  spec.num_channels = 2;
  spec.vocab = make_default_vocab(5, 4, 99);
  spec.seed = 42;
  return spec;
}

std::string temp_dir(const std::string &name) {
  const std::string dir = (fs::temp_directory_path() / name).string();
  fs::remove_all(dir);
  return dir;
}

double measured_snr_db(const Matrix &clean, const Matrix &noisy,
                       const Vector &bias) {
  double ps = 0.0, pn = 0.0;
  for (int t = 0; t < clean.rows(); ++t)
    for (int d = 0; d < clean.cols(); ++d) {
      const double s = clean(t, d);
      const double n = noisy(t, d) - clean(t, d) - bias[d];
      ps += s * s;
      pn += n * n;
    }
  return 10.0 * std::log10(ps / pn);
}

}  // namespace

TEST_CASE("snr_gain formula cases") {
  CHECK(snr_gain(1.0, 1.0, 0.0) == 1.0);
  CHECK(snr_gain(4.0, 1.0, 0.0) == 2.0);
  CHECK(snr_gain(1.0, 1.0, 20.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(snr_gain(0.0, 1.0, 10.0), DataError);
  CHECK_THROWS_AS(snr_gain(1.0, -1.0, 10.0), DataError);
}

TEST_CASE("corrupt: infinite SNR leaves the input untouched") {
  const CorpusModel model = derive_corpus_model(tiny_spec());
  Rng rng(1);
  const Matrix clean = random_matrix(rng, 10, 6);
  const Matrix out = corrupt(clean, model, 1,
                             std::numeric_limits<double>::infinity(), nullptr,
                             rng);
  CHECK(bitwise_equal(out, clean));
}

TEST_CASE("corrupt: zero input with a channel bias is the constant bias") {
  const CorpusModel model = derive_corpus_model(tiny_spec());
  Rng rng(2);
  const Matrix clean(5, 6);
  const Vector &bias = model.channel_bias[1];
  const Matrix out = corrupt(clean, model, 0, 0.0, &bias, rng);
  for (int t = 0; t < 5; ++t)
    for (int d = 0; d < 6; ++d) CHECK(out(t, d) == bias[d]);
}

TEST_CASE("corrupt: empirical SNR lands within half a dB of the target") {
  const CorpusModel model = derive_corpus_model(tiny_spec());
  Rng rng(3);
  Matrix clean = random_matrix(rng, 200, 6);
  for (size_t i = 0; i < clean.size(); ++i) clean.data()[i] += 0.7;
  const Vector no_bias(6, 0.0);
  for (double target : {5.0, 12.0, 20.0}) {
    const Matrix out = corrupt(clean, model, 2, target, nullptr, rng);
    CHECK(std::abs(measured_snr_db(clean, out, no_bias) - target) < 0.5);
  }
}

TEST_CASE("corrupt rejects unknown noise ids and bad channel dims") {
  const CorpusModel model = derive_corpus_model(tiny_spec());
  Rng rng(4);
  const Matrix clean = random_matrix(rng, 4, 6);
  CHECK_THROWS_AS(corrupt(clean, model, 9, 10.0, nullptr, rng), DataError);
  const Vector short_bias(3, 0.0);
  CHECK_THROWS_AS(corrupt(clean, model, 0, 10.0, &short_bias, rng), DataError);
}

TEST_CASE("utterance files round-trip bit-exactly") {
  const std::string dir = temp_dir("dcae_corpus_rt");
  fs::create_directories(dir);
  Rng rng(5);
  Utterance utt;
  utt.id = "u1";
  utt.speaker_id = "spk01";
  utt.condition = 'B';
  utt.clean = random_matrix(rng, 9, 4);
  // Quantize like the generator so f32 storage is exact.
  for (size_t i = 0; i < utt.clean.size(); ++i)
    utt.clean.data()[i] = static_cast<float>(utt.clean.data()[i]);
  utt.noisy = utt.clean;
  utt.noisy(0, 0) = 2.5;
  utt.alignment = {0, 1, 1, 2, 3, 3, 4, 5, 5};
  utt.transcript = {1, 3};
  utt.spk_embed = {0.5, -0.25, 0.125};

  const std::string path = dir + "/u1.dcae";
  save_utterance(utt, path);
  const Utterance loaded = load_utterance(path);
  CHECK(bitwise_equal(loaded.clean, utt.clean));
  CHECK(bitwise_equal(loaded.noisy, utt.noisy));
  CHECK(loaded.alignment == utt.alignment);
  CHECK(loaded.transcript == utt.transcript);
  CHECK(loaded.spk_embed == utt.spk_embed);
  fs::remove_all(dir);
}

TEST_CASE("utterance loader rejects malformed files") {
  const std::string dir = temp_dir("dcae_corpus_bad");
  fs::create_directories(dir);
  Rng rng(6);
  Utterance utt;
  utt.id = "u1";
  utt.condition = 'A';
  utt.clean = Matrix(3, 2, 0.5);
  utt.noisy = utt.clean;
  utt.alignment = {0, 1, 1};
  utt.spk_embed = {1.0};
  const std::string path = dir + "/u.dcae";
  save_utterance(utt, path);
  std::string bytes = read_file_bytes(path);

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'Z';
  write_file_bytes(path, wrong_magic);
  CHECK_THROWS_WITH_AS(load_utterance(path),
                       doctest::Contains("magic"), DataError);

  std::string truncated = bytes.substr(0, bytes.size() - 6);
  write_file_bytes(path, truncated);
  CHECK_THROWS_AS(load_utterance(path), DataError);

  std::string flipped = bytes;
  flipped[8] ^= 0x01;  // declared frame count no longer matches the payload
  write_file_bytes(path, flipped);
  CHECK_THROWS_AS(load_utterance(path), DataError);
  fs::remove_all(dir);
}

TEST_CASE("gen_corpus with zero sizes writes empty manifests and no files") {
  CorpusSpec spec = tiny_spec();
  spec.num_utts = 0;
  spec.num_test_utts = 0;
  const std::string dir = temp_dir("dcae_corpus_empty");
  gen_corpus(spec, dir);
  CHECK(load_manifest(dir + "/train.tsv").empty());
  CHECK(load_manifest(dir + "/test_A.tsv").empty());
  CHECK(fs::is_empty(dir + "/utt"));
  fs::remove_all(dir);
}

TEST_CASE("gen_corpus is byte-identical across runs") {
  const CorpusSpec spec = tiny_spec();
  const std::string d1 = temp_dir("dcae_gen_a");
  const std::string d2 = temp_dir("dcae_gen_b");
  gen_corpus(spec, d1);
  gen_corpus(spec, d2);
  for (const auto &entry : fs::recursive_directory_iterator(d1)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), d1).string();
    CHECK(read_file_bytes(entry.path().string()) ==
          read_file_bytes(d2 + "/" + rel));
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("generated corpus honors the condition semantics") {
  const CorpusSpec spec = tiny_spec();
  const CorpusModel model = derive_corpus_model(spec);
  const std::string dir = temp_dir("dcae_gen_cond");
  gen_corpus(spec, dir);

  std::map<std::string, CorruptionRecord> meta;
  for (const auto &r : load_corruption_records(dir + "/meta.tsv")) meta[r.id] = r;

  int checked_b = 0;
  for (const std::string manifest :
       {"train.tsv", "test_A.tsv", "test_B.tsv", "test_C.tsv", "test_D.tsv"}) {
    for (const Utterance &utt : load_utterances(dir, manifest)) {
      const CorruptionRecord &rec = meta.at(utt.id);
      if (utt.condition == 'A') {
        CHECK(bitwise_equal(utt.noisy, utt.clean));
      } else if (utt.condition == 'C') {
        // Constant per-frame bias.
        for (int t = 1; t < utt.noisy.rows(); ++t)
          for (int d = 0; d < utt.noisy.cols(); ++d)
            CHECK(utt.noisy(t, d) - utt.clean(t, d) ==
                  doctest::Approx(utt.noisy(0, d) - utt.clean(0, d))
                      .epsilon(1e-5));
      } else {
        // B and D record a noise id and an SNR inside the configured range.
        CHECK(rec.noise_type >= 1);
        CHECK(rec.noise_type <= spec.num_noise_types);
        CHECK(rec.snr_db >= spec.snr_low_db);
        CHECK(rec.snr_db <= spec.snr_high_db);
        const Vector &bias = model.channel_bias[rec.channel];
        CHECK(std::abs(measured_snr_db(utt.clean, utt.noisy, bias) - rec.snr_db) <
              0.5);
        ++checked_b;
      }
    }
  }
  CHECK(checked_b > 0);
  fs::remove_all(dir);
}

TEST_CASE("alignments decode back to the transcript phone sequence") {
  const CorpusSpec spec = tiny_spec();
  const std::string dir = temp_dir("dcae_gen_align");
  gen_corpus(spec, dir);
  const Topology topo = build_topology(spec.num_phones);
  for (const Utterance &utt : load_utterances(dir, "train.tsv")) {
    std::vector<int> align_phones;
    for (int32_t s : utt.alignment)
      if (Topology::is_forward(s)) align_phones.push_back(Topology::phone_of(s));
    CHECK(align_phones == expand_to_phones(spec.vocab, utt.transcript));
    // Every phone lasts at least 3 frames, so the output-rate alignment is
    // well defined for the default factor.
    const auto resampled = topo.resample_alignment(utt.alignment, 3);
    CHECK(resampled.size() == (utt.alignment.size() + 2) / 3);
  }
  fs::remove_all(dir);
}

TEST_CASE("speaker embeddings are unit-norm and fixed per speaker") {
  const CorpusSpec spec = tiny_spec();
  const CorpusModel model = derive_corpus_model(spec);
  for (const Vector &e : model.speaker_embed) {
    double norm = 0.0;
    for (double v : e) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
  }
  const std::string dir = temp_dir("dcae_gen_spk");
  gen_corpus(spec, dir);
  std::map<std::string, Vector> seen;
  for (const Utterance &utt : load_utterances(dir, "train.tsv")) {
    auto it = seen.find(utt.speaker_id);
    if (it == seen.end())
      seen[utt.speaker_id] = utt.spk_embed;
    else
      CHECK(it->second == utt.spk_embed);
  }
  fs::remove_all(dir);
}

TEST_CASE("default vocab has distinct pronunciations over defined phones") {
  const Lexicon lex = make_default_vocab(20, 10, 7);
  CHECK(lex.num_words() == 20);
  std::set<std::vector<int>> prons(lex.prons.begin(), lex.prons.end());
  CHECK(prons.size() == 20);
  lex.validate(10);
}

TEST_CASE("corpus model round-trips through corpus.json") {
  const CorpusSpec spec = tiny_spec();
  const CorpusModel model = derive_corpus_model(spec);
  const std::string dir = temp_dir("dcae_corpus_json");
  fs::create_directories(dir);
  save_corpus_model(model, dir + "/corpus.json");
  const CorpusModel loaded = load_corpus_model(dir + "/corpus.json");
  CHECK(loaded.spec.num_phones == spec.num_phones);
  CHECK(loaded.spec.vocab.words == spec.vocab.words);
  CHECK(loaded.spec.vocab.prons == spec.vocab.prons);
  REQUIRE(loaded.channel_bias.size() == model.channel_bias.size());
  CHECK(loaded.channel_bias[1] == model.channel_bias[1]);
  fs::remove_all(dir);
}

TEST_CASE("spec validation rejects inconsistent settings") {
  CorpusSpec spec = tiny_spec();
  spec.num_phones = 1;
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec = tiny_spec();
  spec.snr_low_db = 25.0;
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec = tiny_spec();
  spec.vocab.prons[0] = {9};  // undefined phone
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec = tiny_spec();
  spec.vocab.words.clear();
  spec.vocab.prons.clear();
  CHECK_THROWS_AS(spec.validate(), DataError);
}
