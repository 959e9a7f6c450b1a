// dcae/eval.h

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

#ifndef DCAE_EVAL_H_
#define DCAE_EVAL_H_

#include <optional>
#include <string>
#include <vector>

#include "dcae/corpus.h"
#include "dcae/loss.h"
#include "dcae/model.h"

namespace dcae {

// Viterbi over the decode graph using per-frame senone log-softmax scores.
std::vector<int32_t> decode_utterance(const Model &model, const Utterance &utt,
                                      const Fst &decode_graph);

// Levenshtein distance with unit substitution/deletion/insertion costs.
int edit_distance(const std::vector<int32_t> &ref,
                  const std::vector<int32_t> &hyp);

// Levenshtein distance (unit costs) over the reference length, as percent.
double wer(const std::vector<int32_t> &ref, const std::vector<int32_t> &hyp);

// Fraction of frames whose logits argmax equals the label; argmax ties
// resolve to the lowest senone id.  Percent.
double frame_accuracy(const Matrix &logits, const std::vector<int32_t> &labels);

// (baseline - system) / baseline * 100; positive = improvement.
// NaN when baseline is 0 and system is not (rendered as "n/a").
double relative_change(double baseline, double system);

struct ConditionResult {
  char condition = 'A';
  double wer = 0.0;
  int num_utts = 0;
};

struct ConditionReport {
  std::string system;  // model kind
  std::string unet;    // U-Net mode
  std::vector<ConditionResult> conditions;
  double average = 0.0;  // weighted by utterance count

  // Relative changes vs. a named baseline report, aligned with `conditions`
  // plus one trailing entry for the average.
  std::vector<double> rel_change;
  bool has_baseline = false;
};

ConditionReport make_report(const std::string &system, const std::string &unet,
                            const std::vector<ConditionResult> &conditions,
                            const ConditionReport *baseline);

// Aligned text table mirroring "WER (rel)" cells.
std::string render_report(const ConditionReport &report);

// CSV columns: system,unet,condition,wer,rel_change.
void write_report_csv(const std::string &path, const ConditionReport &report);
ConditionReport load_report_csv(const std::string &path);

void write_loss_curves_svg(const std::string &path,
                           const std::vector<LossBreakdown> &history);
void write_wer_bars_svg(const std::string &path, const ConditionReport &report);

}  // namespace dcae

#endif  // DCAE_EVAL_H_
