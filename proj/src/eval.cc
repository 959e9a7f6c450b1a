// dcae/eval.cc

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

#include "dcae/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dcae/io.h"

namespace dcae {

namespace {

Matrix log_softmax_rows(const Matrix &logits) {
  Matrix out = logits;
  for (int t = 0; t < out.rows(); ++t) {
    double *row = out.row(t);
    double m = row[0];
    for (int s = 1; s < out.cols(); ++s) m = std::max(m, row[s]);
    double z = 0.0;
    for (int s = 0; s < out.cols(); ++s) z += std::exp(row[s] - m);
    const double log_z = m + std::log(z);
    for (int s = 0; s < out.cols(); ++s) row[s] -= log_z;
  }
  return out;
}

std::string format_wer(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string format_rel(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::vector<int32_t> decode_utterance(const Model &model, const Utterance &utt,
                                      const Fst &decode_graph) {
  const ModelOutputs out = model_forward(model, utt.noisy, utt.spk_embed, nullptr);
  const Matrix scores = log_softmax_rows(out.senone_logits);
  const ViterbiResult best = viterbi(decode_graph, scores);
  if (!best.ok)
    throw DataError("decode: no accepting path for utterance " + utt.id);
  return best.words(decode_graph);
}

int edit_distance(const std::vector<int32_t> &ref,
                  const std::vector<int32_t> &hyp) {
  const size_t R = ref.size(), H = hyp.size();
  std::vector<int> prev(H + 1), cur(H + 1);
  for (size_t j = 0; j <= H; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= R; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= H; ++j) {
      const int sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[H];
}

double wer(const std::vector<int32_t> &ref, const std::vector<int32_t> &hyp) {
  require(!ref.empty(), "wer: empty reference");
  return 100.0 * edit_distance(ref, hyp) / static_cast<double>(ref.size());
}

double frame_accuracy(const Matrix &logits, const std::vector<int32_t> &labels) {
  require(static_cast<int>(labels.size()) == logits.rows(),
          "frame_accuracy: label count != frame count");
  require(logits.rows() > 0, "frame_accuracy: empty logits");
  int correct = 0;
  for (int t = 0; t < logits.rows(); ++t) {
    const double *row = logits.row(t);
    int best = 0;
    for (int s = 1; s < logits.cols(); ++s)
      if (row[s] > row[best]) best = s;  // ties keep the lowest id
    if (best == labels[t]) ++correct;
  }
  return 100.0 * correct / static_cast<double>(logits.rows());
}

double relative_change(double baseline, double system) {
  if (baseline == 0.0)
    return system == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  return (baseline - system) / baseline * 100.0;
}

ConditionReport make_report(const std::string &system, const std::string &unet,
                            const std::vector<ConditionResult> &conditions,
                            const ConditionReport *baseline) {
  require(!conditions.empty(), "make_report: no conditions");
  ConditionReport report;
  report.system = system;
  report.unet = unet;
  report.conditions = conditions;

  double weighted = 0.0;
  int total_utts = 0;
  for (const ConditionResult &c : conditions) {
    require(c.wer >= 0.0, "make_report: negative WER");
    weighted += c.wer * c.num_utts;
    total_utts += c.num_utts;
  }
  require(total_utts > 0, "make_report: no utterances");
  report.average = weighted / total_utts;

  if (baseline != nullptr) {
    require(baseline->conditions.size() == conditions.size(),
            "make_report: baseline condition set mismatch");
    report.has_baseline = true;
    for (size_t i = 0; i < conditions.size(); ++i) {
      require(baseline->conditions[i].condition == conditions[i].condition,
              "make_report: baseline condition order mismatch");
      report.rel_change.push_back(
          relative_change(baseline->conditions[i].wer, conditions[i].wer));
    }
    report.rel_change.push_back(relative_change(baseline->average, report.average));
  }
  return report;
}

std::string render_report(const ConditionReport &report) {
  std::ostringstream os;
  os << "system      unet          ";
  for (const ConditionResult &c : report.conditions)
    os << "      " << c.condition << "        ";
  os << "   Average\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-11s %-13s", report.system.c_str(),
                report.unet.c_str());
  os << buf;
  for (size_t i = 0; i < report.conditions.size(); ++i) {
    std::string cell = format_wer(report.conditions[i].wer);
    if (report.has_baseline)
      cell += " (" + format_rel(report.rel_change[i]) + ")";
    std::snprintf(buf, sizeof(buf), " %-14s", cell.c_str());
    os << buf;
  }
  std::string avg = format_wer(report.average);
  if (report.has_baseline)
    avg += " (" + format_rel(report.rel_change.back()) + ")";
  os << ' ' << avg << '\n';
  return os.str();
}

void write_report_csv(const std::string &path, const ConditionReport &report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open report file: " + path);
  out << "system,unet,condition,wer,rel_change\n";
  auto rel_at = [&](size_t i) -> std::string {
    if (!report.has_baseline) return "";
    return std::isnan(report.rel_change[i]) ? "n/a"
                                            : format_double(report.rel_change[i]);
  };
  for (size_t i = 0; i < report.conditions.size(); ++i)
    out << report.system << ',' << report.unet << ','
        << report.conditions[i].condition << ','
        << format_double(report.conditions[i].wer) << ',' << rel_at(i) << '\n';
  out << report.system << ',' << report.unet << ",average,"
      << format_double(report.average) << ','
      << (report.has_baseline ? rel_at(report.conditions.size()) : "") << '\n';
}

ConditionReport load_report_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report file: " + path);
  ConditionReport report;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)),
          "report csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string system, unet, cond, wer_s, rel_s;
    if (!std::getline(ss, system, ',') || !std::getline(ss, unet, ',') ||
        !std::getline(ss, cond, ',') || !std::getline(ss, wer_s, ','))
      throw DataError("report csv: malformed line: " + line);
    std::getline(ss, rel_s, ',');
    report.system = system;
    report.unet = unet;
    if (cond == "average") {
      report.average = std::stod(wer_s);
    } else {
      require(cond.size() == 1, "report csv: bad condition: " + cond);
      report.conditions.push_back(
          ConditionResult{cond[0], std::stod(wer_s), 0});
    }
  }
  return report;
}

void write_loss_curves_svg(const std::string &path,
                           const std::vector<LossBreakdown> &history) {
  require(!history.empty(), "write_loss_curves_svg: empty history");
  const int W = 640, H = 400, margin = 50;
  double max_v = 0.0, min_v = 0.0;
  auto fields = [](const LossBreakdown &b) {
    return std::vector<double>{b.neg_mmi, b.ce, b.rc, b.rs, b.total};
  };
  for (const LossBreakdown &b : history)
    for (double v : fields(b)) {
      max_v = std::max(max_v, v);
      min_v = std::min(min_v, v);
    }
  if (max_v == min_v) max_v = min_v + 1.0;

  const char *names[5] = {"neg_mmi", "ce", "rc", "rs", "total"};
  const char *colors[5] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#111111"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"monospace\">loss per epoch</text>\n";
  auto sx = [&](size_t e) {
    return margin + (W - 2.0 * margin) * (history.size() == 1
                                              ? 0.5
                                              : static_cast<double>(e) /
                                                    (history.size() - 1));
  };
  auto sy = [&](double v) {
    return H - margin - (H - 2.0 * margin) * (v - min_v) / (max_v - min_v);
  };
  os << "<line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\""
     << W - margin << "\" y2=\"" << H - margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
     << "\" y2=\"" << H - margin << "\" stroke=\"black\"/>\n";
  for (int f = 0; f < 5; ++f) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[f]
       << "\" stroke-width=\"1.5\" points=\"";
    for (size_t e = 0; e < history.size(); ++e)
      os << sx(e) << ',' << sy(fields(history[e])[f]) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << W - margin + 4 << "\" y=\"" << margin + 14 * f
       << "\" font-family=\"monospace\" font-size=\"11\" fill=\"" << colors[f]
       << "\">" << names[f] << "</text>\n";
  }
  os << "</svg>\n";
  write_file_bytes(path, os.str());
}

void write_wer_bars_svg(const std::string &path, const ConditionReport &report) {
  const int W = 480, H = 320, margin = 50;
  double max_wer = 1.0;
  for (const ConditionResult &c : report.conditions)
    max_wer = std::max(max_wer, c.wer);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"monospace\">" << report.system << " ("
     << report.unet << ") WER by condition</text>\n";
  const double band =
      (W - 2.0 * margin) / static_cast<double>(report.conditions.size());
  for (size_t i = 0; i < report.conditions.size(); ++i) {
    const ConditionResult &c = report.conditions[i];
    const double h = (H - 2.0 * margin) * c.wer / max_wer;
    const double x = margin + band * i + band * 0.15;
    os << "<rect x=\"" << x << "\" y=\"" << H - margin - h << "\" width=\""
       << band * 0.7 << "\" height=\"" << h << "\" fill=\"#1f77b4\"/>\n";
    os << "<text x=\"" << x + band * 0.35 << "\" y=\"" << H - margin + 16
       << "\" text-anchor=\"middle\" font-family=\"monospace\">" << c.condition
       << "</text>\n";
    os << "<text x=\"" << x + band * 0.35 << "\" y=\"" << H - margin - h - 4
       << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
       << format_wer(c.wer) << "</text>\n";
  }
  os << "</svg>\n";
  write_file_bytes(path, os.str());
}

}  // namespace dcae
