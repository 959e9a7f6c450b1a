// dcae/fst.h

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

#ifndef DCAE_FST_H_
#define DCAE_FST_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dcae/common.h"
#include "dcae/matrix.h"

namespace dcae {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Stable log(exp(a) + exp(b)).
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// Weighted acceptor over senone labels.  Every arc consumes exactly one
// frame; there are no epsilon input labels.  The optional output label
// (word >= 0) is only used by decoding graphs.
struct Arc {
  int32_t src = 0;
  int32_t dst = 0;
  int32_t senone = 0;
  int32_t word = -1;  // -1: no output label
  double log_weight = 0.0;
};

struct Fst {
  int32_t num_states = 0;
  int32_t start = 0;
  std::vector<Arc> arcs;
  std::vector<double> final_logweight;  // per state, kLogZero if non-final

  // Sorts arcs by (src, senone, word, dst), builds the per-state index and
  // validates the structure.  Must be called once after construction; the
  // arc order doubles as the deterministic tie-break order for viterbi.
  void finish();

  // Arcs leaving state s occupy [arc_begin[s], arc_begin[s+1]) after finish().
  std::vector<int32_t> arc_begin;

  int max_senone() const;
  bool is_final(int32_t s) const { return final_logweight[s] != kLogZero; }

  // Text dump, one line per arc `src dst senone logweight` (plus the output
  // word when present), then finals as `state logweight`.  Stable, meant for
  // diffing in tests.
  std::string debug_dump() const;
};

// Chain topology: each phone is one emitting state that can be traversed in
// a single frame.  Entering the phone emits the forward-transition senone,
// staying in it emits the self-loop senone, so a phone owns two pdf ids.
struct Topology {
  int num_phones = 0;

  int num_senones() const { return 2 * num_phones; }
  int32_t forward_senone(int phone) const { return 2 * phone; }
  int32_t selfloop_senone(int phone) const { return 2 * phone + 1; }
  static bool is_forward(int32_t senone) { return senone % 2 == 0; }
  static int phone_of(int32_t senone) { return senone / 2; }

  // Re-renders a full-rate senone alignment at the reduced output frame
  // rate: the phone instance covering each kept frame is re-entered exactly
  // once (forward senone on its first kept frame, self-loop after).  Valid
  // whenever every phone lasts at least `factor` frames.
  std::vector<int32_t> resample_alignment(const std::vector<int32_t> &full_rate,
                                          int factor) const;
};

Topology build_topology(int num_phones);

// Linear-chain acceptor for exactly `senone_seq`; all weights zero.
Fst build_numerator(const std::vector<int32_t> &senone_seq);

// Add-1-smoothed bigram over symbols 0..num_symbols-1 with implicit
// begin/end markers.
class BigramLm {
 public:
  BigramLm() = default;
  BigramLm(int num_symbols, Matrix log_prob)
      : num_symbols_(num_symbols), log_prob_(std::move(log_prob)) {}

  int num_symbols() const { return num_symbols_; }
  // history -1 = begin-of-sequence; target -1 = end-of-sequence.
  double log_prob(int history, int target) const;
  // Total log-probability of a sequence including the end transition.
  double score(const std::vector<int> &seq) const;

 private:
  int num_symbols_ = 0;
  Matrix log_prob_;  // (n+1) histories x (n+1) targets; last row/col = BOS/EOS
};

BigramLm estimate_bigram(const std::vector<std::vector<int>> &seqs,
                         int num_symbols);

// Denominator graph: bigram phone LM composed with the chain topology.
// One state per phone (the history) plus the start state; all phone states
// are final with the end-of-sequence log-probability.
Fst build_denominator(const BigramLm &phone_lm, const Topology &topo);

struct ForwardBackwardResult {
  bool ok = false;       // false: no accepting path of this length
  double log_z = kLogZero;
  Matrix gamma;          // frames x senones, rows sum to 1 when ok
};

// Exact log-domain forward-backward over all accepting paths whose length
// equals loglik.rows().  gamma[t][s] is the posterior that an arc labeled s
// is crossed at frame t.
ForwardBackwardResult forward_backward(const Fst &fst, const Matrix &loglik);

struct ViterbiResult {
  bool ok = false;
  double score = kLogZero;
  std::vector<int32_t> arc_path;  // indices into fst.arcs, one per frame

  std::vector<int32_t> senones(const Fst &fst) const;
  std::vector<int32_t> words(const Fst &fst) const;  // output labels >= 0 only
};

// Best path; ties broken towards the lowest-numbered predecessor state
// (then arc order).  score <= forward_backward().log_z always.
ViterbiResult viterbi(const Fst &fst, const Matrix &loglik);

struct Lexicon {
  std::vector<std::string> words;
  std::vector<std::vector<int>> prons;  // phone ids per word

  int num_words() const { return static_cast<int>(words.size()); }
  void validate(int num_phones) const;
};

std::vector<int> expand_to_phones(const Lexicon &lex,
                                  const std::vector<int32_t> &word_ids);

// Senone-to-word transducer: bigram word LM over lexicon pronunciations
// rendered in the chain topology.  The word label and LM weight sit on the
// arc entering the word's first phone.
Fst build_decode_graph(const Lexicon &lex, const BigramLm &word_lm,
                       const Topology &topo);

}  // namespace dcae

#endif  // DCAE_FST_H_
