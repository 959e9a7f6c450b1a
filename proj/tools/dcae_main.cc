// dcae/tools/dcae_main.cc

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcae/config.h"
#include "dcae/eval.h"
#include "dcae/io.h"
#include "dcae/parallel.h"
#include "dcae/train.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;  // overrides config out_dir when non-empty
  int jobs = 0;
  std::optional<uint64_t> seed;
};

dcae::RunConfig load_config(const GlobalOpts &g) {
  if (g.config_path.empty())
    throw dcae::ConfigError("missing --config <path>");
  std::vector<std::string> overrides = g.overrides;
  if (g.seed) {
    overrides.push_back("corpus.seed=" + std::to_string(*g.seed));
    overrides.push_back("train.seed=" + std::to_string(*g.seed));
  }
  dcae::RunConfig cfg = dcae::load_run_config(g.config_path, overrides);
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  return cfg;
}

std::string run_dir_for(const dcae::RunConfig &cfg) {
  return cfg.out_dir + "/train-" + to_string(cfg.model.kind) + "-" +
         to_string(cfg.model.unet.kind);
}

int cmd_gen_corpus(const GlobalOpts &g) {
  const dcae::RunConfig cfg = load_config(g);
  const std::string dir = cfg.out_dir + "/corpus";
  dcae::gen_corpus(cfg.corpus, dir);
  const auto train = dcae::load_manifest(dir + "/train.tsv");
  std::printf("corpus written to %s (%zu train records, %d test per condition)\n",
              dir.c_str(), train.size(), cfg.corpus.num_test_utts);
  return 0;
}

int cmd_train(const GlobalOpts &g, const std::string &corpus_dir_flag) {
  dcae::RunConfig cfg = load_config(g);
  const std::string corpus_dir =
      corpus_dir_flag.empty() ? cfg.out_dir + "/corpus" : corpus_dir_flag;
  const dcae::CorpusModel corpus = dcae::load_corpus_model(corpus_dir + "/corpus.json");

  cfg.model.feat_dim = corpus.spec.feat_dim;
  cfg.model.spk_embed_dim = corpus.spec.spk_embed_dim;
  cfg.model.num_senones = 2 * corpus.spec.num_phones;
  cfg.model.validate();

  const auto train_set = dcae::load_utterances(corpus_dir, "train.tsv");
  const dcae::Topology topo = dcae::build_topology(corpus.spec.num_phones);
  const dcae::Fst den = dcae::make_denominator(train_set, corpus.spec.vocab, topo);

  dcae::Model model = dcae::assemble(cfg.model);
  const std::string run_dir = run_dir_for(cfg);
  fs::create_directories(run_dir);
  const dcae::TrainResult result =
      dcae::train(model, train_set, den, topo, cfg.schedule, run_dir);
  dcae::write_loss_curves_svg(run_dir + "/loss_curves.svg", result.history);

  const dcae::LossBreakdown &last = result.history.back();
  std::printf("trained %s (%s U-Net) for %d epochs; final total loss %.6f\n",
              to_string(cfg.model.kind).c_str(),
              to_string(cfg.model.unet.kind).c_str(), cfg.schedule.epochs,
              last.total);
  std::printf("artifacts in %s\n", run_dir.c_str());
  return 0;
}

int cmd_grad_check(const std::string &kind_s, const std::string &unet_s,
                   double eps) {
  // Small fixed geometry keeps the full-coordinate sweep fast.
  dcae::ModelConfig cfg;
  cfg.kind = dcae::model_kind_from_string(kind_s);
  cfg.unet.kind = dcae::unet_kind_from_string(unet_s);
  cfg.unet.weight = 0.5;
  cfg.encoder_depth = 3;
  cfg.encoder2_depth = 1;
  cfg.decoder1_depth = 2;
  cfg.decoder2_depth = 2;
  cfg.hidden = 8;
  cfg.bottleneck = 4;
  cfg.feat_dim = 6;
  cfg.spk_embed_dim = 3;
  cfg.subsample_factor = 3;
  cfg.seed = 11;
  const int phones = 3;
  cfg.num_senones = 2 * phones;
  switch (cfg.kind) {
    case dcae::ModelKind::kBaseline: cfg.code = {8, 0, 0, 0}; break;
    case dcae::ModelKind::kCDcae: cfg.code = {6, 0, 2, 0}; break;
    case dcae::ModelKind::kPcDcae: cfg.code = {4, 2, 2, 0}; break;
    case dcae::ModelKind::kHcDcae: cfg.code = {4, 2, 2, 6}; break;
  }
  cfg.validate();

  const dcae::Topology topo = dcae::build_topology(phones);
  std::vector<std::vector<int>> seqs{{0, 1, 2}, {2, 1, 0}};
  const dcae::Fst den =
      dcae::build_denominator(dcae::estimate_bigram(seqs, phones), topo);
  const dcae::PreparedUtt utt = dcae::make_check_utterance(cfg, topo, 6, 23);

  dcae::Model model = dcae::assemble(cfg);
  const dcae::GradCheckReport report =
      dcae::grad_check(model, utt, den, dcae::LossWeights{}, eps);

  std::printf("%-14s %-12s %12s %8s\n", "tensor", "", "max_rel_err", "coords");
  for (const auto &e : report.entries)
    std::printf("%-26s %12.3e %8d\n", e.tensor.c_str(), e.max_rel_err,
                e.coords_checked);
  std::printf("worst %.3e tolerance 1.0e-04 -> %s\n", report.worst,
              report.passed() ? "PASS" : "FAIL");
  if (!report.passed())
    throw dcae::CheckError("gradient check failed for " + kind_s + "/" + unet_s);
  return 0;
}

int cmd_decode(const GlobalOpts &g, const std::string &model_path,
               const std::string &corpus_dir, const std::string &manifest,
               const std::string &out_dir) {
  (void)g;
  const dcae::CorpusModel corpus = dcae::load_corpus_model(corpus_dir + "/corpus.json");
  const dcae::Model model = dcae::strip_decoders(dcae::load_model(model_path));
  dcae::require(model.cfg.feat_dim == corpus.spec.feat_dim,
          "decode: model/corpus feature dims differ");

  const dcae::Topology topo = dcae::build_topology(corpus.spec.num_phones);
  const auto train_set = dcae::load_utterances(corpus_dir, "train.tsv");
  std::vector<std::vector<int>> word_seqs;
  for (const auto &utt : train_set) {
    std::vector<int> seq(utt.transcript.begin(), utt.transcript.end());
    word_seqs.push_back(std::move(seq));
  }
  const dcae::BigramLm word_lm =
      dcae::estimate_bigram(word_seqs, corpus.spec.vocab.num_words());
  const dcae::Fst graph =
      dcae::build_decode_graph(corpus.spec.vocab, word_lm, topo);

  const auto utts = dcae::load_utterances(corpus_dir, manifest);
  dcae::require(!utts.empty(), "decode: empty manifest " + manifest);
  std::vector<std::vector<int32_t>> hyps(utts.size());
  dcae::parallel_for(static_cast<int>(utts.size()), [&](int i) {
    hyps[i] = dcae::decode_utterance(model, utts[i], graph);
  });

  fs::create_directories(out_dir);
  std::map<char, std::ofstream> files;
  for (size_t i = 0; i < utts.size(); ++i) {
    const char cond = utts[i].condition;
    if (!files.count(cond)) {
      const std::string path = out_dir + "/hyp_" + cond + ".tsv";
      files[cond].open(path, std::ios::trunc);
      if (!files[cond]) throw dcae::DataError("cannot open " + path);
    }
    files[cond] << utts[i].id << '\t';
    for (size_t w = 0; w < hyps[i].size(); ++w)
      files[cond] << (w ? " " : "") << corpus.spec.vocab.words[hyps[i][w]];
    files[cond] << '\n';
  }
  json meta;
  meta["system"] = to_string(model.cfg.kind);
  meta["unet"] = to_string(model.cfg.unet.kind);
  dcae::write_file_bytes(out_dir + "/decode_meta.json", meta.dump(2) + "\n");
  std::printf("decoded %zu utterances from %s\n", utts.size(), manifest.c_str());
  return 0;
}

int cmd_report(const GlobalOpts &g, const std::string &corpus_dir,
               const std::string &hyp_dir, const std::string &out_dir,
               const std::string &baseline_path,
               const std::string &history_path) {
  (void)g;
  const dcae::CorpusModel corpus = dcae::load_corpus_model(corpus_dir + "/corpus.json");
  std::map<std::string, int> word_id;
  for (int w = 0; w < corpus.spec.vocab.num_words(); ++w)
    word_id[corpus.spec.vocab.words[w]] = w;

  std::string system = "unknown", unet = "none";
  if (fs::exists(hyp_dir + "/decode_meta.json")) {
    const json meta = json::parse(dcae::read_file_bytes(hyp_dir + "/decode_meta.json"));
    system = meta.value("system", system);
    unet = meta.value("unet", unet);
  }

  std::vector<dcae::ConditionResult> conditions;
  for (char cond : {'A', 'B', 'C', 'D'}) {
    const std::string hyp_path = hyp_dir + "/hyp_" + cond + ".tsv";
    if (!fs::exists(hyp_path)) continue;

    std::map<std::string, std::vector<int32_t>> hyps;
    std::ifstream in(hyp_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw dcae::DataError("malformed hypothesis line: " + line);
      std::vector<int32_t> words;
      std::istringstream ws(line.substr(tab + 1));
      std::string word;
      while (ws >> word) {
        auto it = word_id.find(word);
        if (it == word_id.end())
          throw dcae::DataError("hypothesis word not in vocab: " + word);
        words.push_back(it->second);
      }
      hyps[line.substr(0, tab)] = std::move(words);
    }

    const auto refs =
        dcae::load_utterances(corpus_dir, std::string("test_") + cond + ".tsv");
    long errors = 0, ref_len = 0;
    for (const auto &ref : refs) {
      auto it = hyps.find(ref.id);
      if (it == hyps.end())
        throw dcae::DataError("missing hypothesis for utterance " + ref.id);
      errors += dcae::edit_distance(ref.transcript, it->second);
      ref_len += static_cast<long>(ref.transcript.size());
    }
    dcae::require(ref_len > 0, "report: empty references for condition");
    conditions.push_back(dcae::ConditionResult{
        cond, 100.0 * errors / static_cast<double>(ref_len),
        static_cast<int>(refs.size())});
  }
  dcae::require(!conditions.empty(), "report: no hyp_<condition>.tsv files found");

  std::optional<dcae::ConditionReport> baseline;
  if (!baseline_path.empty()) baseline = dcae::load_report_csv(baseline_path);
  const dcae::ConditionReport report = dcae::make_report(
      system, unet, conditions, baseline ? &*baseline : nullptr);

  fs::create_directories(out_dir);
  dcae::write_report_csv(out_dir + "/report.csv", report);
  dcae::write_wer_bars_svg(out_dir + "/wer_by_condition.svg", report);
  if (!history_path.empty())
    dcae::write_loss_curves_svg(out_dir + "/loss_curves.svg",
                                dcae::load_history_csv(history_path));
  std::fputs(dcae::render_report(report).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"chain-based discriminative autoencoder toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--set", g.overrides, "override a config key (dotted.key=value)");
  app.add_option("--out", g.out_dir, "output directory (overrides config out_dir)");
  app.add_option("--jobs", g.jobs, "max worker threads (default: hardware)");
  uint64_t seed_flag = 0;
  auto *seed_opt = app.add_option("--seed", seed_flag, "override corpus and train seeds");

  auto *gen = app.add_subcommand("gen-corpus", "generate the synthetic corpus");
  std::string corpus_dir_flag;
  auto *tr = app.add_subcommand("train", "train a model on the generated corpus");
  tr->add_option("--corpus", corpus_dir_flag, "corpus directory (default <out>/corpus)");

  std::string kind = "c_dcae", unet = "none";
  double eps = 1e-5;
  auto *gc = app.add_subcommand("grad-check",
                                "verify backprop against finite differences");
  gc->add_option("--kind", kind, "model kind")->capture_default_str();
  gc->add_option("--unet", unet, "U-Net mode")->capture_default_str();
  gc->add_option("--eps", eps, "finite-difference step")->capture_default_str();

  std::string model_path, dec_corpus, manifest = "test_A.tsv", dec_out = "decode";
  auto *dec = app.add_subcommand("decode", "decode a test manifest");
  dec->add_option("--model", model_path, "model checkpoint")->required();
  dec->add_option("--corpus", dec_corpus, "corpus directory")->required();
  dec->add_option("--manifest", manifest, "manifest file name")->capture_default_str();
  dec->add_option("--hyp-out", dec_out, "output directory for hypotheses")->required();

  std::string rep_corpus, hyp_dir, rep_out = "report", baseline_path, history_path;
  auto *rep = app.add_subcommand("report", "score hypotheses and render tables");
  rep->add_option("--corpus", rep_corpus, "corpus directory")->required();
  rep->add_option("--hyp-dir", hyp_dir, "directory with hyp_<cond>.tsv files")->required();
  rep->add_option("--report-out", rep_out, "output directory")->required();
  rep->add_option("--baseline", baseline_path, "baseline report.csv for relative changes");
  rep->add_option("--history", history_path, "history.csv to render loss curves");

  for (CLI::App *sub : app.get_subcommands({}))
    sub->fallthrough();  // global flags may follow the subcommand name

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  if (g.jobs > 0) dcae::set_max_threads(g.jobs);
  if (seed_opt->count() > 0) g.seed = seed_flag;

  try {
    if (gen->parsed()) return cmd_gen_corpus(g);
    if (tr->parsed()) return cmd_train(g, corpus_dir_flag);
    if (gc->parsed()) return cmd_grad_check(kind, unet, eps);
    if (dec->parsed())
      return cmd_decode(g, model_path, dec_corpus, manifest, dec_out);
    if (rep->parsed())
      return cmd_report(g, rep_corpus, hyp_dir, rep_out, baseline_path,
                        history_path);
  } catch (const dcae::ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dcae::NumericError &e) {
    std::fprintf(stderr, "numeric fault: %s\n", e.what());
    return 4;
  } catch (const dcae::CheckError &e) {
    std::fprintf(stderr, "check failure: %s\n", e.what());
    return 5;
  } catch (const dcae::DataError &e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
