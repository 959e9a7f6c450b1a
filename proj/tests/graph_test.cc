// dcae/tests/graph_test.cc

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

#include "dcae/fst.h"

#include <doctest.h>

#include <cmath>

#include "oracles.h"

using namespace dcae;
using namespace dcae::testing;

TEST_CASE("topology: two senones per phone, single-frame traversal") {
  const Topology topo = build_topology(1);
  CHECK(topo.num_senones() == 2);
  CHECK(topo.forward_senone(0) == 0);
  CHECK(topo.selfloop_senone(0) == 1);
  // One phone can be traversed in exactly one frame: its single-frame
  // alignment is just the forward senone.
  CHECK(topo.resample_alignment({0}, 1) == std::vector<int32_t>{0});

  CHECK_THROWS_AS(build_topology(0), DataError);

  const Topology three = build_topology(3);
  CHECK(three.num_senones() == 6);
  for (int p = 0; p < 3; ++p) {
    CHECK(three.forward_senone(p) == 2 * p);
    CHECK(three.selfloop_senone(p) == 2 * p + 1);
    // Shortest accepting realization of each phone is one frame long.
    CHECK(three.resample_alignment({three.forward_senone(p)}, 1).size() == 1);
  }
}

TEST_CASE("resample_alignment re-enters each phone instance exactly once") {
  const Topology topo = build_topology(2);
  // Two instances of phone 0 (3 frames each), then phone 1 (3 frames).
  const std::vector<int32_t> full = {0, 1, 1, 0, 1, 1, 2, 3, 3};
  const std::vector<int32_t> out = topo.resample_alignment(full, 3);
  CHECK(out == std::vector<int32_t>{0, 0, 2});
  // factor 1 keeps the alignment unchanged.
  CHECK(topo.resample_alignment(full, 1) == full);
}

TEST_CASE("numerator is a weight-free linear chain") {
  const Fst one = build_numerator({3});
  CHECK(one.num_states == 2);
  CHECK(one.arcs.size() == 1);
  CHECK(one.arcs[0].senone == 3);
  CHECK(one.arcs[0].log_weight == 0.0);

  const std::vector<int32_t> seq = {1, 0, 2, 2, 1};
  const Fst chain = build_numerator(seq);
  CHECK(chain.num_states == static_cast<int32_t>(seq.size()) + 1);
  CHECK(chain.arcs.size() == seq.size());

  CHECK_THROWS_AS(build_numerator({}), DataError);
}

TEST_CASE("numerator logZ is the sum of frame log-likelihoods") {
  Rng rng(21);
  const std::vector<int32_t> seq = {1, 0, 2, 2, 1};
  const Fst chain = build_numerator(seq);
  const Matrix loglik = random_matrix(rng, 5, 3);
  const ForwardBackwardResult fb = forward_backward(chain, loglik);
  REQUIRE(fb.ok);
  double expected = 0.0;
  for (size_t t = 0; t < seq.size(); ++t)
    expected += loglik(static_cast<int>(t), seq[t]);
  CHECK(fb.log_z == doctest::Approx(expected).epsilon(1e-12));
  // Single path: gamma is one-hot per frame.
  for (size_t t = 0; t < seq.size(); ++t)
    for (int s = 0; s < 3; ++s)
      CHECK(fb.gamma(static_cast<int>(t), s) ==
            doctest::Approx(s == seq[t] ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("bigram rows are normalized and counts dominate") {
  // Single sequence [0]: P(0|BOS) has count 1, everything else smoothing.
  const BigramLm lm = estimate_bigram({{0}}, 2);
  CHECK(std::exp(lm.log_prob(-1, 0)) > std::exp(lm.log_prob(-1, 1)));
  for (int h = -1; h < 2; ++h) {
    double mass = std::exp(lm.log_prob(h, -1));
    for (int t = 0; t < 2; ++t) mass += std::exp(lm.log_prob(h, t));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Uniform corpus over 2 phones: rows become near-uniform.
  const BigramLm uni = estimate_bigram(
      {{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 0, 1, 1}, {1, 1, 0, 0}}, 2);
  CHECK(std::exp(uni.log_prob(0, 1)) ==
        doctest::Approx(std::exp(uni.log_prob(1, 0))).epsilon(0.25));

  CHECK_THROWS_AS(estimate_bigram({}, 2), DataError);
}

TEST_CASE("denominator with one phone accepts exactly its senone language") {
  const Topology topo = build_topology(1);
  const BigramLm lm = estimate_bigram({{0}, {0, 0}}, 1);
  const Fst den = build_denominator(lm, topo);

  // Accepts forward, forward+selfloops; rejects selfloop-first.
  Matrix ll(3, 2);
  CHECK(forward_backward(den, ll).ok);
  Matrix ll1(1, 2);
  const ForwardBackwardResult one = forward_backward(den, ll1);
  REQUIRE(one.ok);
  // Only length-1 path is the forward senone.
  CHECK(one.gamma(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.gamma(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("denominator path score is LM log-probs plus end prob") {
  const Topology topo = build_topology(2);
  const BigramLm lm = estimate_bigram({{0, 1}, {1, 0}}, 2);
  const Fst den = build_denominator(lm, topo);
  // Two frames, forced labels [fwd 0, fwd 1]: exactly one path.
  Matrix ll(2, 4, -100.0);
  ll(0, 0) = 0.0;
  ll(1, 2) = 0.0;
  const auto paths = enum_paths(den, ll);
  double best = kLogZero;
  for (const auto &p : paths)
    if (p.senones == std::vector<int32_t>{0, 2}) best = std::max(best, p.score);
  CHECK(best == doctest::Approx(lm.log_prob(-1, 0) + lm.log_prob(0, 1) +
                                lm.log_prob(1, -1))
                    .epsilon(1e-12));
}

TEST_CASE("numerator path is contained in the denominator with its LM score") {
  // Containment with matching weights: den logZ >= num logZ + LM score of
  // the phone sequence, for any log-likelihoods.
  Rng rng(31);
  const Topology topo = build_topology(3);
  const BigramLm lm = estimate_bigram({{0, 1, 2}, {2, 0, 1}, {1, 1, 0}}, 3);
  const Fst den = build_denominator(lm, topo);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int32_t> align;
    std::vector<int> phones;
    const int n = rng.uniform_int(1, 4);
    for (int i = 0; i < n; ++i) {
      const int phone = rng.uniform_int(0, 2);
      phones.push_back(phone);
      align.push_back(topo.forward_senone(phone));
      for (int d = rng.uniform_int(0, 2); d > 0; --d)
        align.push_back(topo.selfloop_senone(phone));
    }
    const Fst num = build_numerator(align);
    const Matrix ll = random_matrix(rng, static_cast<int>(align.size()), 6);
    const double num_z = forward_backward(num, ll).log_z;
    const double den_z = forward_backward(den, ll).log_z;
    std::vector<int> phone_seq(phones.begin(), phones.end());
    CHECK(num_z + lm.score(phone_seq) <= den_z + 1e-9);
  }
}

TEST_CASE("forward-backward matches exhaustive enumeration") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const Fst fst = random_fst(rng, 6, 4);
    const int T = rng.uniform_int(1, 8);
    const Matrix ll = random_matrix(rng, T, 4);
    const ForwardBackwardResult fb = forward_backward(fst, ll);
    const EnumResult oracle = enum_forward_backward(fst, ll);
    REQUIRE(fb.ok == oracle.ok);
    if (!fb.ok) continue;
    CHECK(std::abs(fb.log_z - oracle.log_z) < 1e-9);
    CHECK(max_abs_diff(fb.gamma, oracle.gamma) < 1e-9);
    // Posterior rows sum to one.
    for (int t = 0; t < T; ++t) {
      double row = 0.0;
      for (int s = 0; s < 4; ++s) row += fb.gamma(t, s);
      CHECK(row == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("forward-backward flags missing accepting paths") {
  // Final state unreachable within 1 frame.
  Fst fst;
  fst.num_states = 3;
  fst.start = 0;
  fst.final_logweight = {kLogZero, kLogZero, 0.0};
  fst.arcs.push_back(Arc{0, 1, 0, -1, 0.0});
  fst.arcs.push_back(Arc{1, 2, 0, -1, 0.0});
  fst.finish();
  Matrix ll(1, 1);
  CHECK_FALSE(forward_backward(fst, ll).ok);
  CHECK(forward_backward(fst, ll).log_z == kLogZero);
  Matrix ll2(2, 1);
  CHECK(forward_backward(fst, ll2).ok);
}

TEST_CASE("viterbi matches enumeration and never exceeds logZ") {
  Rng rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    const Fst fst = random_fst(rng, 6, 4);
    const int T = rng.uniform_int(1, 8);
    const Matrix ll = random_matrix(rng, T, 4);
    const ViterbiResult vit = viterbi(fst, ll);
    const EnumResult oracle = enum_forward_backward(fst, ll);
    REQUIRE(vit.ok == oracle.ok);
    if (!vit.ok) continue;
    CHECK(vit.score == doctest::Approx(oracle.best_score).epsilon(1e-10));
    CHECK(vit.score <= forward_backward(fst, ll).log_z + 1e-9);
  }
}

TEST_CASE("viterbi returns the label sequence of a linear chain") {
  const std::vector<int32_t> seq = {2, 0, 1, 1};
  const Fst chain = build_numerator(seq);
  Rng rng(5);
  const ViterbiResult vit = viterbi(chain, random_matrix(rng, 4, 3));
  REQUIRE(vit.ok);
  CHECK(vit.senones(chain) == seq);
}

TEST_CASE("viterbi ties break toward the lowest-numbered predecessor") {
  // Two exactly tied paths into state 3: via state 1 and via state 2.
  Fst fst;
  fst.num_states = 4;
  fst.start = 0;
  fst.final_logweight = {kLogZero, kLogZero, kLogZero, 0.0};
  fst.arcs.push_back(Arc{0, 1, 0, -1, 0.0});
  fst.arcs.push_back(Arc{0, 2, 1, -1, 0.0});
  fst.arcs.push_back(Arc{1, 3, 0, -1, 0.0});
  fst.arcs.push_back(Arc{2, 3, 1, -1, 0.0});
  fst.finish();
  Matrix ll(2, 2);  // all-zero log-likelihoods: a perfect tie
  const ViterbiResult vit = viterbi(fst, ll);
  REQUIRE(vit.ok);
  CHECK(vit.senones(fst) == std::vector<int32_t>{0, 0});  // through state 1
}

TEST_CASE("decode graph: one-word vocabulary always decodes to that word") {
  const Topology topo = build_topology(2);
  Lexicon lex;
  lex.words = {"only"};
  lex.prons = {{0, 1}};
  const BigramLm lm = estimate_bigram({{0}, {0, 0}}, 1);
  const Fst graph = build_decode_graph(lex, lm, topo);
  Rng rng(8);
  // Any senone realization of the word decodes to it.
  Matrix ll(5, 4, -50.0);
  ll(0, 0) = 0;  // fwd phone 0
  ll(1, 1) = 0;  // loop
  ll(2, 2) = 0;  // fwd phone 1
  ll(3, 3) = 0;
  ll(4, 3) = 0;
  const ViterbiResult vit = viterbi(graph, ll);
  REQUIRE(vit.ok);
  CHECK(vit.words(graph) == std::vector<int32_t>{0});
}

TEST_CASE("homophones break ties by LM score then word id") {
  const Topology topo = build_topology(1);
  Lexicon lex;
  lex.words = {"aa", "bb"};
  lex.prons = {{0}, {0}};

  // Word 1 much more frequent: LM decides.
  const BigramLm lm = estimate_bigram({{1}, {1}, {1}, {1}, {1}, {0}}, 2);
  const Fst graph = build_decode_graph(lex, lm, topo);
  Matrix ll(1, 2);
  ll(0, 0) = 0.0;
  const ViterbiResult vit = viterbi(graph, ll);
  REQUIRE(vit.ok);
  CHECK(vit.words(graph) == std::vector<int32_t>{1});

  // Identical LM rows: the lower word id wins.
  const BigramLm tied = estimate_bigram({{0, 1}, {1, 0}}, 2);
  const Fst tied_graph = build_decode_graph(lex, tied, topo);
  const ViterbiResult tv = viterbi(tied_graph, ll);
  REQUIRE(tv.ok);
  CHECK(tv.words(tied_graph) == std::vector<int32_t>{0});
}

TEST_CASE("decode graph rejects words without pronunciations") {
  const Topology topo = build_topology(1);
  Lexicon lex;
  lex.words = {"empty"};
  lex.prons = {{}};
  const BigramLm lm = estimate_bigram({{0}}, 1);
  CHECK_THROWS_AS(build_decode_graph(lex, lm, topo), DataError);
}

TEST_CASE("fst debug dump is stable and diffable") {
  const Fst chain = build_numerator({1, 0});
  const std::string dump = chain.debug_dump();
  CHECK(dump == "0 1 1 0\n1 2 0 0\n2 0\n");
}

TEST_CASE("expand_to_phones concatenates pronunciations") {
  Lexicon lex;
  lex.words = {"a", "b"};
  lex.prons = {{0, 1}, {2}};
  CHECK(expand_to_phones(lex, {1, 0}) == std::vector<int>{2, 0, 1});
}
