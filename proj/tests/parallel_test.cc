// dcae/tests/parallel_test.cc

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

#include "dcae/parallel.h"

#include <doctest.h>

#include <atomic>
#include <vector>

#include "dcae/train.h"
#include "oracles.h"

using namespace dcae;
using namespace dcae::testing;

TEST_CASE("set_max_threads clamps to at least one") {
  set_max_threads(-3);
  CHECK(max_threads() == 1);
  set_max_threads(2);
  CHECK(max_threads() == 2);
  set_max_threads(1);
}

TEST_CASE("parallel_for visits each index exactly once") {
  for (int threads : {1, 2, 4}) {
    set_max_threads(threads);
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, [&](int i) { hits[i].fetch_add(1); });
    for (const auto &h : hits) CHECK(h.load() == 1);
  }
  set_max_threads(1);
  parallel_for(0, [&](int) { FAIL("body must not run for n = 0"); });
}

TEST_CASE("parallel_for propagates exceptions from the body") {
  for (int threads : {1, 2}) {
    set_max_threads(threads);
    CHECK_THROWS_AS(
        parallel_for(16,
                     [&](int i) {
                       if (i % 7 == 3) throw DataError("boom");
                     }),
        DataError);
  }
  set_max_threads(1);
}

TEST_CASE("per-utterance gradients are thread-count independent") {
  const Topology topo = build_topology(3);
  ModelConfig cfg;
  cfg.kind = ModelKind::kPcDcae;
  cfg.encoder_depth = 3;
  cfg.decoder1_depth = 2;
  cfg.decoder2_depth = 2;
  cfg.code = CodeLayout{6, 2, 2, 0};
  cfg.unet = UNetMode{UNetKind::kSum, 0.5};
  cfg.hidden = 12;
  cfg.bottleneck = 4;
  cfg.feat_dim = 6;
  cfg.spk_embed_dim = 3;
  cfg.num_senones = 6;
  cfg.seed = 4;
  cfg.validate();
  const Fst den = build_denominator(estimate_bigram({{0, 1, 2}}, 3), topo);
  const Model model = assemble(cfg);

  std::vector<PreparedUtt> utts;
  for (int i = 0; i < 8; ++i)
    utts.push_back(make_check_utterance(cfg, topo, 12, 50 + i));

  auto run = [&](int threads) {
    set_max_threads(threads);
    std::vector<UttComputation> results(utts.size());
    parallel_for(static_cast<int>(utts.size()), [&](int i) {
      results[i] = compute_utterance(model, utts[i], den, LossWeights{}, false,
                                     true);
    });
    // Fixed-order reduction.
    std::vector<Matrix> sum = results[0].grads;
    for (size_t u = 1; u < results.size(); ++u)
      for (size_t t = 0; t < sum.size(); ++t)
        sum[t].add_scaled(results[u].grads[t], 1.0);
    set_max_threads(1);
    return sum;
  };

  const auto serial = run(1);
  const auto parallel = run(2);
  REQUIRE(serial.size() == parallel.size());
  for (size_t t = 0; t < serial.size(); ++t)
    CHECK(bitwise_equal(serial[t], parallel[t]));
}
