// dcae/fst.cc

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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcae/io.h"

namespace dcae {

void Fst::finish() {
  require(num_states > 0, "Fst: no states");
  require(start >= 0 && start < num_states, "Fst: bad start state");
  require(static_cast<int32_t>(final_logweight.size()) == num_states,
          "Fst: final weight vector size mismatch");
  for (const Arc &a : arcs) {
    require(a.src >= 0 && a.src < num_states && a.dst >= 0 && a.dst < num_states,
            "Fst: arc endpoint out of range");
    require(a.senone >= 0, "Fst: negative senone label");
    require(std::isfinite(a.log_weight), "Fst: non-finite arc weight");
  }
  std::sort(arcs.begin(), arcs.end(), [](const Arc &x, const Arc &y) {
    if (x.src != y.src) return x.src < y.src;
    if (x.senone != y.senone) return x.senone < y.senone;
    if (x.word != y.word) return x.word < y.word;
    return x.dst < y.dst;
  });
  arc_begin.assign(num_states + 1, 0);
  for (const Arc &a : arcs) ++arc_begin[a.src + 1];
  for (int32_t s = 0; s < num_states; ++s) arc_begin[s + 1] += arc_begin[s];

  bool any_final = false;
  for (double w : final_logweight) any_final = any_final || w != kLogZero;
  require(any_final, "Fst: no final state");
}

int Fst::max_senone() const {
  int m = -1;
  for (const Arc &a : arcs) m = std::max(m, static_cast<int>(a.senone));
  return m;
}

std::string Fst::debug_dump() const {
  std::ostringstream os;
  for (const Arc &a : arcs) {
    os << a.src << ' ' << a.dst << ' ' << a.senone << ' '
       << format_double(a.log_weight);
    if (a.word >= 0) os << " w" << a.word;
    os << '\n';
  }
  for (int32_t s = 0; s < num_states; ++s)
    if (final_logweight[s] != kLogZero)
      os << s << ' ' << format_double(final_logweight[s]) << '\n';
  return os.str();
}

Topology build_topology(int num_phones) {
  require(num_phones >= 1, "build_topology: need at least one phone");
  return Topology{num_phones};
}

std::vector<int32_t> Topology::resample_alignment(
    const std::vector<int32_t> &full_rate, int factor) const {
  require(factor >= 1, "resample_alignment: factor must be >= 1");
  // Phone-instance index per frame: a new instance starts at every
  // forward senone.
  std::vector<int32_t> instance(full_rate.size());
  int32_t cur = -1;
  for (size_t t = 0; t < full_rate.size(); ++t) {
    require(full_rate[t] >= 0 && full_rate[t] < num_senones(),
            "resample_alignment: senone id out of range");
    if (is_forward(full_rate[t])) ++cur;
    require(cur >= 0, "resample_alignment: alignment starts mid-phone");
    instance[t] = cur;
  }
  std::vector<int32_t> out;
  int32_t prev_instance = -1;
  for (size_t t = 0; t < full_rate.size(); t += factor) {
    const int phone = phone_of(full_rate[t]);
    if (instance[t] != prev_instance) {
      out.push_back(forward_senone(phone));
      prev_instance = instance[t];
    } else {
      out.push_back(selfloop_senone(phone));
    }
  }
  return out;
}

Fst build_numerator(const std::vector<int32_t> &senone_seq) {
  require(!senone_seq.empty(), "build_numerator: empty alignment");
  Fst fst;
  fst.num_states = static_cast<int32_t>(senone_seq.size()) + 1;
  fst.start = 0;
  fst.final_logweight.assign(fst.num_states, kLogZero);
  fst.final_logweight[fst.num_states - 1] = 0.0;
  for (size_t t = 0; t < senone_seq.size(); ++t) {
    require(senone_seq[t] >= 0, "build_numerator: negative senone id");
    fst.arcs.push_back(Arc{static_cast<int32_t>(t),
                           static_cast<int32_t>(t) + 1, senone_seq[t], -1,
                           0.0});
  }
  fst.finish();
  return fst;
}

double BigramLm::log_prob(int history, int target) const {
  const int h = history < 0 ? num_symbols_ : history;
  const int t = target < 0 ? num_symbols_ : target;
  require(h >= 0 && h <= num_symbols_ && t >= 0 && t <= num_symbols_,
          "BigramLm: symbol out of range");
  return log_prob_(h, t);
}

double BigramLm::score(const std::vector<int> &seq) const {
  double total = 0.0;
  int hist = -1;
  for (int sym : seq) {
    total += log_prob(hist, sym);
    hist = sym;
  }
  return total + log_prob(hist, -1);
}

BigramLm estimate_bigram(const std::vector<std::vector<int>> &seqs,
                         int num_symbols) {
  require(num_symbols >= 1, "estimate_bigram: empty symbol set");
  require(!seqs.empty(), "estimate_bigram: empty corpus");
  const int n = num_symbols;
  Matrix counts(n + 1, n + 1);  // row n = BOS history, col n = EOS target
  for (const auto &seq : seqs) {
    require(!seq.empty(), "estimate_bigram: empty sequence");
    int hist = n;
    for (int sym : seq) {
      require(sym >= 0 && sym < n, "estimate_bigram: symbol out of range");
      counts(hist, sym) += 1.0;
      hist = sym;
    }
    counts(hist, n) += 1.0;
  }
  Matrix logp(n + 1, n + 1);
  for (int h = 0; h <= n; ++h) {
    double total = 0.0;
    for (int t = 0; t <= n; ++t) total += counts(h, t) + 1.0;
    for (int t = 0; t <= n; ++t)
      logp(h, t) = std::log((counts(h, t) + 1.0) / total);
  }
  return BigramLm(n, std::move(logp));
}

Fst build_denominator(const BigramLm &phone_lm, const Topology &topo) {
  require(phone_lm.num_symbols() == topo.num_phones,
          "build_denominator: LM/topology phone count mismatch");
  const int p = topo.num_phones;
  // State 0: start (BOS history); state 1+q: inside phone q.
  Fst fst;
  fst.num_states = p + 1;
  fst.start = 0;
  fst.final_logweight.assign(fst.num_states, kLogZero);
  for (int q = 0; q < p; ++q) {
    fst.arcs.push_back(Arc{0, static_cast<int32_t>(1 + q),
                           topo.forward_senone(q), -1, phone_lm.log_prob(-1, q)});
    fst.arcs.push_back(Arc{static_cast<int32_t>(1 + q),
                           static_cast<int32_t>(1 + q),
                           topo.selfloop_senone(q), -1, 0.0});
    for (int r = 0; r < p; ++r)
      fst.arcs.push_back(Arc{static_cast<int32_t>(1 + q),
                             static_cast<int32_t>(1 + r),
                             topo.forward_senone(r), -1,
                             phone_lm.log_prob(q, r)});
    fst.final_logweight[1 + q] = phone_lm.log_prob(q, -1);
  }
  fst.finish();
  return fst;
}

ForwardBackwardResult forward_backward(const Fst &fst, const Matrix &loglik) {
  require(loglik.all_finite(), "forward_backward: non-finite log-likelihoods");
  require(fst.max_senone() < loglik.cols(),
          "forward_backward: senone id exceeds loglik columns");
  const int T = loglik.rows();
  const int32_t N = fst.num_states;

  Matrix alpha(T + 1, N, kLogZero);
  alpha(0, fst.start) = 0.0;
  for (int t = 0; t < T; ++t) {
    const double *ll = loglik.row(t);
    for (const Arc &a : fst.arcs) {
      const double sa = alpha(t, a.src);
      if (sa == kLogZero) continue;
      alpha(t + 1, a.dst) =
          log_add(alpha(t + 1, a.dst), sa + a.log_weight + ll[a.senone]);
    }
  }
  double log_z = kLogZero;
  for (int32_t s = 0; s < N; ++s)
    if (fst.is_final(s))
      log_z = log_add(log_z, alpha(T, s) + fst.final_logweight[s]);

  ForwardBackwardResult res;
  if (log_z == kLogZero) return res;  // no accepting path of length T
  res.log_z = log_z;

  Matrix beta(T + 1, N, kLogZero);
  for (int32_t s = 0; s < N; ++s)
    if (fst.is_final(s)) beta(T, s) = fst.final_logweight[s];
  res.gamma = Matrix(T, loglik.cols());
  for (int t = T - 1; t >= 0; --t) {
    const double *ll = loglik.row(t);
    double *g = res.gamma.row(t);
    for (const Arc &a : fst.arcs) {
      const double tail = beta(t + 1, a.dst);
      if (tail == kLogZero) continue;
      const double arc_score = a.log_weight + ll[a.senone] + tail;
      beta(t, a.src) = log_add(beta(t, a.src), arc_score);
      const double head = alpha(t, a.src);
      if (head != kLogZero)
        g[a.senone] += std::exp(head + arc_score - log_z);
    }
  }
  res.ok = true;
  return res;
}

std::vector<int32_t> ViterbiResult::senones(const Fst &fst) const {
  std::vector<int32_t> out;
  out.reserve(arc_path.size());
  for (int32_t idx : arc_path) out.push_back(fst.arcs[idx].senone);
  return out;
}

std::vector<int32_t> ViterbiResult::words(const Fst &fst) const {
  std::vector<int32_t> out;
  for (int32_t idx : arc_path)
    if (fst.arcs[idx].word >= 0) out.push_back(fst.arcs[idx].word);
  return out;
}

ViterbiResult viterbi(const Fst &fst, const Matrix &loglik) {
  require(loglik.all_finite(), "viterbi: non-finite log-likelihoods");
  require(fst.max_senone() < loglik.cols(),
          "viterbi: senone id exceeds loglik columns");
  const int T = loglik.rows();
  const int32_t N = fst.num_states;

  Matrix delta(T + 1, N, kLogZero);
  std::vector<std::vector<int32_t>> backptr(
      T, std::vector<int32_t>(N, -1));
  delta(0, fst.start) = 0.0;
  // Arcs are iterated in sorted order (src ascending), and a candidate only
  // replaces the incumbent when strictly better, so ties resolve to the
  // lowest-numbered predecessor state.
  for (int t = 0; t < T; ++t) {
    const double *ll = loglik.row(t);
    for (size_t i = 0; i < fst.arcs.size(); ++i) {
      const Arc &a = fst.arcs[i];
      const double sa = delta(t, a.src);
      if (sa == kLogZero) continue;
      const double cand = sa + a.log_weight + ll[a.senone];
      if (cand > delta(t + 1, a.dst)) {
        delta(t + 1, a.dst) = cand;
        backptr[t][a.dst] = static_cast<int32_t>(i);
      }
    }
  }
  ViterbiResult res;
  int32_t best_state = -1;
  for (int32_t s = 0; s < N; ++s) {
    if (!fst.is_final(s) || delta(T, s) == kLogZero) continue;
    const double sc = delta(T, s) + fst.final_logweight[s];
    if (best_state < 0 || sc > res.score) {
      res.score = sc;
      best_state = s;
    }
  }
  if (best_state < 0) return res;

  res.arc_path.resize(T);
  int32_t s = best_state;
  for (int t = T - 1; t >= 0; --t) {
    const int32_t idx = backptr[t][s];
    require(idx >= 0, "viterbi: broken backpointer chain");
    res.arc_path[t] = idx;
    s = fst.arcs[idx].src;
  }
  res.ok = true;
  return res;
}

void Lexicon::validate(int num_phones) const {
  require(words.size() == prons.size(), "Lexicon: words/prons size mismatch");
  for (size_t w = 0; w < words.size(); ++w) {
    require(!prons[w].empty(), "Lexicon: word without pronunciation: " + words[w]);
    for (int p : prons[w])
      require(p >= 0 && p < num_phones,
              "Lexicon: undefined phone in pronunciation of " + words[w]);
  }
}

std::vector<int> expand_to_phones(const Lexicon &lex,
                                  const std::vector<int32_t> &word_ids) {
  std::vector<int> phones;
  for (int32_t w : word_ids) {
    require(w >= 0 && w < lex.num_words(), "expand_to_phones: bad word id");
    phones.insert(phones.end(), lex.prons[w].begin(), lex.prons[w].end());
  }
  return phones;
}

Fst build_decode_graph(const Lexicon &lex, const BigramLm &word_lm,
                       const Topology &topo) {
  lex.validate(topo.num_phones);
  require(word_lm.num_symbols() == lex.num_words(),
          "build_decode_graph: LM/lexicon size mismatch");
  const int V = lex.num_words();
  require(V >= 1, "build_decode_graph: empty lexicon");

  // State 0 = start (BOS history).  Word w gets one state per phone of its
  // pronunciation; the state of its last phone is also the history state
  // "just finished w".
  Fst fst;
  fst.start = 0;
  std::vector<int32_t> first_state(V), last_state(V);
  int32_t next = 1;
  for (int w = 0; w < V; ++w) {
    first_state[w] = next;
    next += static_cast<int32_t>(lex.prons[w].size());
    last_state[w] = next - 1;
  }
  fst.num_states = next;
  fst.final_logweight.assign(fst.num_states, kLogZero);

  // Entry arcs carry the word label and its LM score; arcs inside a word's
  // pronunciation are unweighted and added once.
  auto add_entry_arc = [&](int32_t from, int history, int w) {
    fst.arcs.push_back(Arc{from, first_state[w],
                           topo.forward_senone(lex.prons[w][0]), w,
                           word_lm.log_prob(history, w)});
  };
  for (int w = 0; w < V; ++w) {
    const auto &pron = lex.prons[w];
    for (size_t i = 0; i < pron.size(); ++i) {
      const int32_t st = first_state[w] + static_cast<int32_t>(i);
      fst.arcs.push_back(Arc{st, st, topo.selfloop_senone(pron[i]), -1, 0.0});
      if (i + 1 < pron.size())
        fst.arcs.push_back(Arc{st, st + 1,
                               topo.forward_senone(pron[i + 1]), -1, 0.0});
    }
    add_entry_arc(0, -1, w);
  }
  for (int v = 0; v < V; ++v) {
    for (int w = 0; w < V; ++w) add_entry_arc(last_state[v], v, w);
    fst.final_logweight[last_state[v]] = word_lm.log_prob(v, -1);
  }
  fst.finish();
  return fst;
}

}  // namespace dcae
