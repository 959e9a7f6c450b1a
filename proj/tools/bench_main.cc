// dcae/tools/bench_main.cc

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

// Compares the serial reference kernels against the OpenMP paths and checks
// that both produce bitwise-identical numbers.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "dcae/matrix.h"
#include "dcae/model.h"
#include "dcae/parallel.h"
#include "dcae/rng.h"
#include "dcae/train.h"

using namespace dcae;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Matrix random_matrix(int r, int c, Rng &rng) {
  Matrix m(r, c);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

bool bitwise_equal(const Matrix &a, const Matrix &b) {
  return a.same_shape(b) &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void bench_matmul(int hw_threads) {
  Rng rng(1);
  const int n = 384;
  Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  const int reps = 20;

  double t0 = now_s();
  Matrix serial;
  for (int i = 0; i < reps; ++i) serial = ref::matmul(a, b);
  const double t_serial = now_s() - t0;

  set_max_threads(hw_threads);
  t0 = now_s();
  Matrix parallel;
  for (int i = 0; i < reps; ++i) parallel = matmul(a, b);
  const double t_parallel = now_s() - t0;
  set_max_threads(1);

  std::printf("matmul %dx%d x%d     serial %7.3fs  omp(%d) %7.3fs  speedup %.2fx  bitwise %s\n",
              n, n, reps, t_serial, hw_threads, t_parallel,
              t_serial / t_parallel, bitwise_equal(serial, parallel) ? "ok" : "DIFF");
}

void bench_batch(int hw_threads) {
  ModelConfig cfg;
  cfg.kind = ModelKind::kPcDcae;
  cfg.encoder_depth = 5;
  cfg.decoder1_depth = 3;
  cfg.decoder2_depth = 3;
  cfg.code = CodeLayout{32, 16, 16, 0};
  cfg.hidden = 64;
  cfg.bottleneck = 16;
  cfg.feat_dim = 20;
  cfg.spk_embed_dim = 8;
  const int phones = 10;
  cfg.num_senones = 2 * phones;
  cfg.seed = 3;
  cfg.validate();

  const Topology topo = build_topology(phones);
  std::vector<std::vector<int>> seqs{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  const Fst den = build_denominator(estimate_bigram(seqs, phones), topo);

  const int batch = 16;
  std::vector<PreparedUtt> utts;
  for (int i = 0; i < batch; ++i)
    utts.push_back(make_check_utterance(cfg, topo, 60, 100 + i));
  const Model model = assemble(cfg);

  auto run = [&](int threads) {
    set_max_threads(threads);
    std::vector<UttComputation> results(batch);
    const double t0 = now_s();
    parallel_for(batch, [&](int b) {
      results[b] = compute_utterance(model, utts[b], den, LossWeights{}, false,
                                     true);
    });
    const double dt = now_s() - t0;
    // Reduce in fixed order; the sum must not depend on the thread count.
    std::vector<Matrix> sum;
    for (const auto &r : results) {
      if (sum.empty()) {
        sum = r.grads;
      } else {
        for (size_t i = 0; i < sum.size(); ++i) sum[i].add_scaled(r.grads[i], 1.0);
      }
    }
    set_max_threads(1);
    return std::make_pair(dt, std::move(sum));
  };

  auto [t_serial, g_serial] = run(1);
  auto [t_parallel, g_parallel] = run(hw_threads);
  bool same = g_serial.size() == g_parallel.size();
  for (size_t i = 0; same && i < g_serial.size(); ++i)
    same = bitwise_equal(g_serial[i], g_parallel[i]);

  std::printf("batch fwd+bwd (%d utts) serial %7.3fs  omp(%d) %7.3fs  speedup %.2fx  bitwise %s\n",
              batch, t_serial, hw_threads, t_parallel, t_serial / t_parallel,
              same ? "ok" : "DIFF");
}

}  // namespace

int main() {
  const int hw = max_threads();  // hardware default before any override
  std::printf("benchmarking with %d worker thread(s)\n", hw);
  set_max_threads(1);
  bench_matmul(hw);
  bench_batch(hw);
  return 0;
}
