// dcae/train.h

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

#ifndef DCAE_TRAIN_H_
#define DCAE_TRAIN_H_

#include <functional>
#include <string>
#include <vector>

#include "dcae/corpus.h"
#include "dcae/loss.h"
#include "dcae/model.h"

namespace dcae {

struct TrainSchedule {
  int epochs = 15;
  int warm_start_epochs = 0;  // 0 = flat start
  double learning_rate = 0.03;
  double lr_decay = 0.9;  // per epoch, exponential
  double momentum = 0.9;
  int batch_size = 8;
  uint64_t seed = 1;
  LossWeights weights;
  bool semi_orthogonal = false;

  void validate() const;
};

// Per-utterance pieces that stay fixed across epochs: the numerator graph,
// output-rate labels and subsampled reconstruction targets.
struct PreparedUtt {
  std::string id;
  Matrix noisy;  // network input (full rate)
  Vector spk_embed;
  Matrix noisy_sub;  // reconstruction target
  Matrix clean_sub;  // restoration target
  std::vector<int32_t> labels;
  Fst numerator;
};

PreparedUtt prepare_utterance(const Utterance &utt, const Topology &topo,
                              int subsample_factor);

// Phone bigram over the training transcripts composed with the topology.
Fst make_denominator(const std::vector<Utterance> &train_set,
                     const Lexicon &lex, const Topology &topo);

struct UttComputation {
  LossBreakdown loss;
  std::vector<Matrix> grads;  // params() order; empty when !want_grads
};

// Forward + losses (+ backward).  During warm start the senone-head losses
// are still computed for the history but excluded from the applied gradient.
UttComputation compute_utterance(const Model &model, const PreparedUtt &utt,
                                 const Fst &denominator,
                                 const LossWeights &weights, bool warm_start,
                                 bool want_grads);

struct TrainResult {
  std::vector<LossBreakdown> history;  // per-epoch means
};

// SGD with momentum over deterministic per-epoch shuffles.  Per-utterance
// passes within a batch run concurrently; gradients are reduced in
// utterance-id order before the single-threaded update, so results are
// bitwise identical for any --jobs value.  Writes history.csv and per-epoch
// checkpoints (model.dcaem.ep<N>) plus the final model.dcaem into out_dir
// when out_dir is non-empty.
TrainResult train(Model &model, const std::vector<Utterance> &train_set,
                  const Fst &denominator, const Topology &topo,
                  const TrainSchedule &sched, const std::string &out_dir);

void write_history_csv(const std::string &path,
                       const std::vector<LossBreakdown> &history);
std::vector<LossBreakdown> load_history_csv(const std::string &path);

struct GradCheckEntry {
  std::string tensor;
  double max_rel_err = 0.0;
  int coords_checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst = 0.0;
  bool passed(double tol = 1e-4) const { return worst <= tol; }
};

// Central finite differences on every parameter coordinate (or a random
// subsample of coords_per_tensor when the tensor is larger).  The tamper
// hook lets tests corrupt the analytic gradients to prove the harness
// catches bad backward passes.
GradCheckReport grad_check(
    Model &model, const PreparedUtt &utt, const Fst &denominator,
    const LossWeights &weights, double eps, int coords_per_tensor = 0,
    const std::function<void(std::vector<Matrix> &)> &tamper = nullptr);

// Small random utterance with a valid alignment, for the check harness.
PreparedUtt make_check_utterance(const ModelConfig &cfg, const Topology &topo,
                                 int num_frames, uint64_t seed);

}  // namespace dcae

#endif  // DCAE_TRAIN_H_
