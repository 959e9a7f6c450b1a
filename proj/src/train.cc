// dcae/train.cc

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

#include "dcae/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "dcae/io.h"
#include "dcae/parallel.h"

namespace dcae {

void TrainSchedule::validate() const {
  require(epochs >= 1, "TrainSchedule: epochs must be >= 1");
  require(warm_start_epochs >= 0 && warm_start_epochs < epochs,
          "TrainSchedule: warm_start_epochs must be < epochs");
  require(learning_rate > 0.0, "TrainSchedule: learning_rate must be > 0");
  require(lr_decay > 0.0 && lr_decay <= 1.0, "TrainSchedule: bad lr_decay");
  require(momentum >= 0.0 && momentum < 1.0, "TrainSchedule: bad momentum");
  require(batch_size >= 1, "TrainSchedule: batch_size must be >= 1");
  require(weights.alpha >= 0.0 && weights.beta >= 0.0 &&
              std::isfinite(weights.alpha) && std::isfinite(weights.beta),
          "TrainSchedule: alpha/beta must be finite and non-negative");
}

PreparedUtt prepare_utterance(const Utterance &utt, const Topology &topo,
                              int subsample_factor) {
  PreparedUtt p;
  p.id = utt.id;
  p.noisy = utt.noisy;
  p.spk_embed = utt.spk_embed;
  p.noisy_sub = subsample(utt.noisy, subsample_factor);
  p.clean_sub = subsample(utt.clean, subsample_factor);
  p.labels = topo.resample_alignment(utt.alignment, subsample_factor);
  p.numerator = build_numerator(p.labels);
  return p;
}

Fst make_denominator(const std::vector<Utterance> &train_set,
                     const Lexicon &lex, const Topology &topo) {
  require(!train_set.empty(), "make_denominator: empty training set");
  std::vector<std::vector<int>> phone_seqs;
  phone_seqs.reserve(train_set.size());
  for (const Utterance &utt : train_set)
    phone_seqs.push_back(expand_to_phones(lex, utt.transcript));
  const BigramLm phone_lm = estimate_bigram(phone_seqs, topo.num_phones);
  return build_denominator(phone_lm, topo);
}

UttComputation compute_utterance(const Model &model, const PreparedUtt &utt,
                                 const Fst &denominator,
                                 const LossWeights &weights, bool warm_start,
                                 bool want_grads) {
  ForwardCache cache;
  const ModelOutputs out =
      model_forward(model, utt.noisy, utt.spk_embed, want_grads ? &cache : nullptr);
  if (!out.senone_logits.all_finite())
    throw NumericError("non-finite senone logits");

  const LfmmiResult mmi = lfmmi(out.senone_logits, utt.numerator, denominator);
  const LossGrad ce = frame_ce(out.senone_logits, utt.labels);
  LossGrad rc, rs;
  if (out.recon_noisy) rc = recon_error(*out.recon_noisy, utt.noisy_sub);
  if (out.recon_clean) rs = restore_error(*out.recon_clean, utt.clean_sub);

  UttComputation result;
  result.loss = total_loss(mmi.objective, ce.value, rc.value, rs.value, weights);
  if (!want_grads) return result;

  OutputGrads grads;
  grads.d_logits = Matrix(out.senone_logits.rows(), out.senone_logits.cols());
  if (!warm_start) {
    // d(total)/d(logits) = -dF + ce_weight * dCE.
    grads.d_logits.add_scaled(mmi.grad, -1.0);
    grads.d_logits.add_scaled(ce.grad, weights.ce_weight);
  }
  if (out.recon_noisy) {
    Matrix g = rc.grad;
    g.scale(weights.alpha);
    grads.d_recon_noisy = std::move(g);
  }
  if (out.recon_clean) {
    Matrix g = rs.grad;
    g.scale(weights.beta);
    grads.d_recon_clean = std::move(g);
  }
  result.grads = model_backward(model, cache, grads);
  return result;
}

namespace {

// Deterministic Fisher-Yates.
void shuffle_indices(std::vector<int> &idx, Rng &rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_int(0, i)]);
}

void apply_semi_orthogonal(Model &model) {
  constexpr double kNu = 0.125;
  for (TdnnfLayer &layer : model.enc1) {
    Matrix at = transpose(layer.weight_a);
    semi_orthogonal_step(at, kNu);
    layer.weight_a = transpose(at);
  }
  for (TdnnfLayer &layer : model.enc2) {
    Matrix at = transpose(layer.weight_a);
    semi_orthogonal_step(at, kNu);
    layer.weight_a = transpose(at);
  }
}

}  // namespace

TrainResult train(Model &model, const std::vector<Utterance> &train_set,
                  const Fst &denominator, const Topology &topo,
                  const TrainSchedule &sched, const std::string &out_dir) {
  sched.validate();
  require(!train_set.empty(), "train: empty training set");

  std::vector<PreparedUtt> prepared(train_set.size());
  parallel_for(static_cast<int>(train_set.size()), [&](int i) {
    prepared[i] = prepare_utterance(train_set[i], topo, model.cfg.subsample_factor);
  });

  auto refs = model.params();
  // Update order sorted by tensor name, independent of construction order.
  std::vector<size_t> update_order(refs.size());
  std::iota(update_order.begin(), update_order.end(), 0);
  std::sort(update_order.begin(), update_order.end(),
            [&](size_t a, size_t b) { return refs[a].name < refs[b].name; });

  std::vector<Matrix> velocity(refs.size());
  for (size_t i = 0; i < refs.size(); ++i)
    velocity[i] = Matrix(refs[i].value->rows(), refs[i].value->cols());

  TrainResult result;
  long update_steps = 0;
  for (int epoch = 1; epoch <= sched.epochs; ++epoch) {
    const bool warm = epoch <= sched.warm_start_epochs;
    const double lr = sched.learning_rate * std::pow(sched.lr_decay, epoch - 1);

    std::vector<int> order(prepared.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(sched.seed, static_cast<uint64_t>(epoch)));
    shuffle_indices(order, shuffle_rng);

    LossBreakdown epoch_sum;
    for (size_t begin = 0; begin < order.size(); begin += sched.batch_size) {
      const size_t end = std::min(order.size(),
                                  begin + static_cast<size_t>(sched.batch_size));
      const int batch = static_cast<int>(end - begin);

      std::vector<UttComputation> results(batch);
      parallel_for(batch, [&](int b) {
        try {
          results[b] = compute_utterance(model, prepared[order[begin + b]],
                                         denominator, sched.weights, warm, true);
        } catch (const NumericError &e) {
          throw NumericError(std::string(e.what()) + " at epoch " +
                             std::to_string(epoch) + ", utterance " +
                             prepared[order[begin + b]].id);
        }
      });

      // Reduce in utterance-id order so the sum is independent of both the
      // shuffle position and the worker schedule.
      std::vector<int> reduce(batch);
      std::iota(reduce.begin(), reduce.end(), 0);
      std::sort(reduce.begin(), reduce.end(), [&](int a, int b) {
        return prepared[order[begin + a]].id < prepared[order[begin + b]].id;
      });

      std::vector<Matrix> grad_sum(refs.size());
      for (size_t i = 0; i < refs.size(); ++i)
        grad_sum[i] = Matrix(refs[i].value->rows(), refs[i].value->cols());
      for (int b : reduce) {
        const UttComputation &r = results[b];
        if (!std::isfinite(r.loss.total))
          throw NumericError("train: non-finite loss at epoch " +
                             std::to_string(epoch) + ", utterance " +
                             prepared[order[begin + b]].id);
        for (size_t i = 0; i < refs.size(); ++i)
          grad_sum[i].add_scaled(r.grads[i], 1.0);
        epoch_sum.neg_mmi += r.loss.neg_mmi;
        epoch_sum.ce += r.loss.ce;
        epoch_sum.rc += r.loss.rc;
        epoch_sum.rs += r.loss.rs;
        epoch_sum.total += r.loss.total;
      }

      const double inv_batch = 1.0 / batch;
      for (size_t i : update_order) {
        velocity[i].scale(sched.momentum);
        velocity[i].add_scaled(grad_sum[i], -lr * inv_batch);
        refs[i].value->add_scaled(velocity[i], 1.0);
      }
      ++update_steps;
      if (sched.semi_orthogonal && update_steps % 4 == 0)
        apply_semi_orthogonal(model);
    }

    const double inv_n = 1.0 / static_cast<double>(prepared.size());
    LossBreakdown mean{epoch_sum.neg_mmi * inv_n, epoch_sum.ce * inv_n,
                       epoch_sum.rc * inv_n, epoch_sum.rs * inv_n,
                       epoch_sum.total * inv_n};
    result.history.push_back(mean);

    if (!out_dir.empty())
      save_model(model, out_dir + "/model.dcaem.ep" + std::to_string(epoch));
  }

  if (!out_dir.empty()) {
    save_model(model, out_dir + "/model.dcaem");
    write_history_csv(out_dir + "/history.csv", result.history);
  }
  return result;
}

void write_history_csv(const std::string &path,
                       const std::vector<LossBreakdown> &history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open history file: " + path);
  out << "epoch,neg_mmi,ce,rc,rs,total\n";
  for (size_t e = 0; e < history.size(); ++e) {
    const LossBreakdown &b = history[e];
    out << (e + 1) << ',' << format_double(b.neg_mmi) << ','
        << format_double(b.ce) << ',' << format_double(b.rc) << ','
        << format_double(b.rs) << ',' << format_double(b.total) << '\n';
  }
}

std::vector<LossBreakdown> load_history_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open history file: " + path);
  std::vector<LossBreakdown> history;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "history csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LossBreakdown b;
    int epoch = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf", &epoch, &b.neg_mmi,
                    &b.ce, &b.rc, &b.rs, &b.total) != 6)
      throw DataError("history csv: malformed line: " + line);
    history.push_back(b);
  }
  return history;
}

GradCheckReport grad_check(
    Model &model, const PreparedUtt &utt, const Fst &denominator,
    const LossWeights &weights, double eps, int coords_per_tensor,
    const std::function<void(std::vector<Matrix> &)> &tamper) {
  require(eps > 0.0, "grad_check: eps must be positive");
  UttComputation analytic =
      compute_utterance(model, utt, denominator, weights, false, true);
  if (tamper) tamper(analytic.grads);

  auto loss_at = [&]() {
    return compute_utterance(model, utt, denominator, weights, false, false)
        .loss.total;
  };

  GradCheckReport report;
  auto refs = model.params();
  for (size_t r = 0; r < refs.size(); ++r) {
    Matrix &tensor = *refs[r].value;
    const int n = static_cast<int>(tensor.size());
    std::vector<int> coords(n);
    std::iota(coords.begin(), coords.end(), 0);
    if (coords_per_tensor > 0 && coords_per_tensor < n) {
      Rng rng(mix_seed(0x67726164u, hash_string(refs[r].name)));
      shuffle_indices(coords, rng);
      coords.resize(coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }

    GradCheckEntry entry{refs[r].name, 0.0, static_cast<int>(coords.size())};
    for (int c : coords) {
      const double saved = tensor.data()[c];
      tensor.data()[c] = saved + eps;
      const double plus = loss_at();
      tensor.data()[c] = saved - eps;
      const double minus = loss_at();
      tensor.data()[c] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus))
        throw NumericError("grad_check: non-finite loss during perturbation of " +
                           refs[r].name);
      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic_g = analytic.grads[r].data()[c];
      const double diff = std::abs(numeric - analytic_g);
      const double denom = std::max(std::abs(numeric), std::abs(analytic_g));
      const double rel = denom > 1e-8 ? diff / denom : diff;
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.worst = std::max(report.worst, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

PreparedUtt make_check_utterance(const ModelConfig &cfg, const Topology &topo,
                                 int num_frames, uint64_t seed) {
  require(num_frames >= cfg.subsample_factor,
          "make_check_utterance: too few frames");
  Rng rng(seed);
  Utterance utt;
  utt.id = "check";
  utt.speaker_id = "spk00";
  utt.condition = 'B';
  utt.clean = Matrix(num_frames, cfg.feat_dim);
  utt.noisy = Matrix(num_frames, cfg.feat_dim);
  for (size_t i = 0; i < utt.clean.size(); ++i) {
    utt.clean.data()[i] = rng.normal();
    utt.noisy.data()[i] = utt.clean.data()[i] + 0.3 * rng.normal();
  }
  utt.spk_embed.resize(cfg.spk_embed_dim);
  for (double &v : utt.spk_embed) v = rng.normal();

  // Random phone segments, each at least subsample_factor frames long so
  // the resampled alignment stays in the denominator language.
  int t = 0;
  while (t < num_frames) {
    const int phone = rng.uniform_int(0, topo.num_phones - 1);
    int dur = cfg.subsample_factor + rng.uniform_int(0, cfg.subsample_factor);
    dur = std::min(dur, num_frames - t);
    if (num_frames - (t + dur) < cfg.subsample_factor)
      dur = num_frames - t;  // absorb a too-short tail
    utt.alignment.push_back(topo.forward_senone(phone));
    for (int d = 1; d < dur; ++d)
      utt.alignment.push_back(topo.selfloop_senone(phone));
    t += dur;
  }
  utt.transcript = {0};
  return prepare_utterance(utt, topo, cfg.subsample_factor);
}

}  // namespace dcae
