/* Copyright 2026 The tacrec Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tacrec/checkpoint.hpp"
#include "tacrec/corpus.hpp"
#include "tacrec/error.hpp"
#include "tacrec/evaluator.hpp"
#include "tacrec/ngram.hpp"
#include "tacrec/predictor.hpp"
#include "tacrec/script_parser.hpp"
#include "tacrec/service.hpp"
#include "tacrec/trainer.hpp"

namespace tacrec::cli {
namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io-error", "cannot write " + path);
  out << text;
  if (!out) throw Error("io-error", "short write to " + path);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    if (b != std::string::npos) {
      out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
    }
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

std::string dataset_name(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

struct ConfigFlags {
  std::string config_path;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "model config (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--epochs", epochs, "override the config's epoch count");
    cmd->add_option("--seed", seed, "override the config's seed");
  }

  ModelConfig resolve() const {
    ModelConfig c;
    if (!config_path.empty()) c = config_from_json(read_text(config_path));
    if (epochs) c.epochs = *epochs;
    if (seed) c.seed = *seed;
    return c;
  }
};

void print_epoch(std::ostream& out, const TrainingLogEntry& e) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "epoch %zu loss %.6f val_top7 %.4f", e.epoch,
                e.train_loss, e.val_top7);
  out << buf << std::endl;
}

// --- subcommands ----------------------------------------------------------

struct ExtractArgs {
  std::string dir;
  std::string output;
  std::string pattern = "*Script.sml";
  unsigned threads = 1;
  std::string skips;
};

int run_extract(const ExtractArgs& a, std::ostream& out) {
  const ScanResult scan = scan_corpus(a.dir, a.pattern, a.threads);
  std::ostringstream records;
  write_proof_records(records, scan.proofs);
  write_text(a.output, records.str());
  if (!a.skips.empty()) {
    std::string text;
    for (const SkipRecord& s : scan.report.skip_reasons) {
      text += s.source_path + ":" + std::to_string(s.line) + "\t" + s.reason + "\n";
    }
    write_text(a.skips, text);
  }
  out << "files " << scan.report.files_scanned << ", proofs "
      << scan.report.proofs_extracted << ", skipped "
      << scan.report.proofs_skipped << "\n";
  return kExitOk;
}

struct BuildArgs {
  std::string proofs;
  std::string output;
  BuildOptions options;
  std::string mode = "pair";
};

int run_build(BuildArgs a, std::ostream& out) {
  std::ifstream in(a.proofs, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + a.proofs);
  const std::vector<ProofRecord> proofs = read_proof_records(in);
  a.options.mode = split_mode_from_string(a.mode);
  const Dataset d = build_dataset(proofs, a.options);
  persist_dataset(d, a.output);
  out << "train " << d.split.train.size() << ", test " << d.split.test.size()
      << ", vocab " << d.vocab.regular_size() << "\n";
  return kExitOk;
}

int run_stats(const std::string& dir, std::ostream& out) {
  const Dataset d = load_dataset(dir);
  out << render_stats_table(d.stats, dataset_name(dir));
  return kExitOk;
}

struct TrainArgs {
  std::string dataset;
  std::string output;
  ConfigFlags config;
};

int run_train(const TrainArgs& a, std::ostream& out) {
  const Dataset d = load_dataset(a.dataset);
  const ModelConfig config = a.config.resolve();
  config.validate(d.context_min);
  const ValidationCarveOut cv = carve_validation(d.split.train, config.seed);
  const Checkpoint ck = tf_train(config, cv.fit, cv.val, d.vocab,
                                 [&](const TrainingLogEntry& e, const Parameters<float>&) {
                                   print_epoch(out, e);
                                 });
  save_checkpoint(ck, a.output);
  out << "best epoch " << ck.best_epoch << "\n";
  return kExitOk;
}

int run_grid(const TrainArgs& a, std::ostream& out) {
  const Dataset d = load_dataset(a.dataset);
  const ModelConfig base = a.config.resolve();
  const std::vector<ModelConfig> grid = default_grid(base);
  for (const ModelConfig& c : grid) c.validate(d.context_min);
  const ValidationCarveOut cv = carve_validation(d.split.train, base.seed);
  const GridResult r = grid_search(
      grid, cv.fit, cv.val, d.vocab, [&](std::size_t i, const GridEntry& e) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "config %zu: layers %zu embed_dim %zu lr %g params %zu "
                      "val_top7 %.4f",
                      i, e.config.layers, e.config.embed_dim, e.config.lr,
                      e.parameters, e.val_top7);
        out << buf << std::endl;
      });
  save_checkpoint(r.checkpoint, a.output);
  out << "selected " << config_to_json(r.best_config) << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::vector<std::string> positional;
  bool ngram = false;
  std::size_t order = 3;
  std::string ns = "3,7,10";
  std::string ks = "1,2";
  std::string output;
};

std::vector<std::size_t> parse_counts(const std::string& text,
                                      const std::string& flag) {
  std::vector<std::size_t> out;
  for (const std::string& s : split_list(text)) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v == 0) {
      throw CLI::ValidationError(flag, "expected a comma-separated list of positive integers");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
  const std::size_t want = a.ngram ? 1 : 2;
  if (a.positional.size() != want) {
    throw CLI::ValidationError(
        "eval", a.ngram ? "expected <dataset-dir> with --ngram"
                        : "expected <checkpoint> <dataset-dir>");
  }
  const std::vector<std::size_t> ns = parse_counts(a.ns, "--n");
  const std::vector<std::size_t> ks = parse_counts(a.ks, "--k");
  const std::string& dir = a.positional.back();
  const Dataset d = load_dataset(dir);

  std::unique_ptr<Predictor> predictor;
  if (a.ngram) {
    predictor = std::make_unique<NgramPredictor>(
        ngram_fit(d.split.train, d.vocab, a.order));
  } else {
    predictor = std::make_unique<TransformerPredictor>(
        load_checkpoint(a.positional.front(), &d.vocab));
  }
  std::map<std::size_t, std::vector<ProofStatePair>> tests;
  for (std::size_t k : ks) tests[k] = d.test_for(k);
  const EvalReport report =
      evaluate_suite(*predictor, tests, ns, ks, dataset_name(dir));
  const std::string table = render_eval_table(report);
  out << table;
  if (!a.output.empty()) {
    write_text(a.output + ".table.txt", table);
    write_text(a.output + ".records.jsonl", render_eval_records(report));
  }
  return kExitOk;
}

struct RecommendArgs {
  std::string checkpoint;
  std::string tactics;
  std::size_t n = kDefaultRequestN;
  std::size_t k = 1;
};

int run_recommend(const RecommendArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> tactics = split_list(a.tactics);
  if (tactics.empty()) throw Error("empty-context", "no tactics given");
  const TransformerPredictor predictor(load_checkpoint(a.checkpoint));
  if (tactics.size() < 3) err << "warning: context-shorter-than-3\n";
  for (const std::string& t : tactics) {
    if (!predictor.vocab().contains(t)) err << "warning: unknown-token:" << t << "\n";
  }
  const Recommendation rec =
      predict_topn(predictor, std::span<const std::string>(tactics), a.n, a.k);
  for (std::size_t i = 0; i < rec.items.size(); ++i) {
    std::string joined;
    for (const std::string& t : rec.items[i].tactics) {
      if (!joined.empty()) joined += ',';
      joined += t;
    }
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", rec.items[i].score);
    out << (i + 1) << ". " << joined << " " << score << "\n";
  }
  return kExitOk;
}

struct ServeArgs {
  std::string checkpoint;
  std::optional<std::string> addr;
  std::string static_dir;
};

int run_serve(const ServeArgs& a, std::ostream& out) {
  const BindAddress addr = resolve_bind_address(a.addr);
  const RecommendService service = make_service(load_checkpoint(a.checkpoint));
  std::optional<std::filesystem::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  HttpServer server(service, static_dir);
  const int port = server.bind(addr.host, addr.port);
  out << "serving model " << service.model_digest() << " on http://"
      << addr.host << ":" << port << std::endl;
  server.listen();
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Extract HOL4 tactic corpora, train and evaluate next-tactic "
               "recommenders, and serve recommendations.",
               "tacrec"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  ExtractArgs extract;
  CLI::App* c_extract = app.add_subcommand("extract", "extract proof records from *Script.sml files");
  c_extract->add_option("dir", extract.dir, "script directory")->required()->check(CLI::ExistingDirectory);
  c_extract->add_option("-o,--output", extract.output, "proof records file (JSON lines)")->required();
  c_extract->add_option("--pattern", extract.pattern, "file name glob");
  c_extract->add_option("--threads", extract.threads, "parser threads")->check(CLI::PositiveNumber);
  c_extract->add_option("--skips", extract.skips, "write skipped declarations here");

  BuildArgs build;
  CLI::App* c_build = app.add_subcommand("build", "build a proof-state dataset from proof records");
  c_build->add_option("proofs", build.proofs, "proof records file")->required();
  c_build->add_option("-o,--output", build.output, "dataset directory")->required();
  c_build->add_option("--k", build.options.k, "label length")->check(CLI::PositiveNumber);
  c_build->add_option("--extra-k", build.options.extra_k, "additional test label lengths")
      ->check(CLI::PositiveNumber);
  c_build->add_option("--context-min", build.options.context_min, "minimum context length")
      ->check(CLI::PositiveNumber);
  c_build->add_option("--ratio", build.options.ratio, "train fraction")
      ->check(CLI::Range(0.0, 1.0));
  c_build->add_option("--seed", build.options.seed, "split seed");
  c_build->add_option("--split-mode", build.mode, "pair or proof")
      ->check(CLI::IsMember({"pair", "proof"}));

  std::string stats_dir;
  CLI::App* c_stats = app.add_subcommand("stats", "print dataset statistics");
  c_stats->add_option("dataset", stats_dir, "dataset directory")->required();

  TrainArgs train;
  CLI::App* c_train = app.add_subcommand("train", "train the transformer recommender");
  c_train->add_option("dataset", train.dataset, "dataset directory")->required();
  c_train->add_option("-o,--output", train.output, "checkpoint file")->required();
  train.config.add_to(c_train);

  TrainArgs grid;
  CLI::App* c_grid = app.add_subcommand("grid", "grid-search transformer hyperparameters");
  c_grid->add_option("dataset", grid.dataset, "dataset directory")->required();
  c_grid->add_option("-o,--output", grid.output, "checkpoint of the winner")->required();
  grid.config.add_to(c_grid);

  EvalArgs eval;
  CLI::App* c_eval = app.add_subcommand("eval", "n-correctness over the test split");
  c_eval->add_option("inputs", eval.positional, "<checkpoint> <dataset-dir>, or <dataset-dir> with --ngram")
      ->required();
  c_eval->add_flag("--ngram", eval.ngram, "evaluate the n-gram baseline fitted on train");
  c_eval->add_option("--order", eval.order, "n-gram order")->check(CLI::NonNegativeNumber);
  c_eval->add_option("--n", eval.ns, "comma-separated n values");
  c_eval->add_option("--k", eval.ks, "comma-separated k values");
  c_eval->add_option("-o,--output", eval.output, "write <base>.table.txt and <base>.records.jsonl");

  RecommendArgs rec;
  CLI::App* c_rec = app.add_subcommand("recommend", "top-n next tactics for a proof state");
  c_rec->add_option("checkpoint", rec.checkpoint, "checkpoint file")->required();
  c_rec->add_option("--tactics", rec.tactics, "comma-separated tactics so far")->required();
  c_rec->add_option("-n", rec.n, "number of recommendations")->check(CLI::Range(std::size_t{1}, kMaxRequestN));
  c_rec->add_option("-k", rec.k, "tactics per recommendation")->check(CLI::Range(1, 2));

  ServeArgs serve;
  CLI::App* c_serve = app.add_subcommand("serve", "HTTP recommendation service");
  c_serve->add_option("checkpoint", serve.checkpoint, "checkpoint file")->required();
  c_serve->add_option("--addr", serve.addr, "host:port (default TACREC_ADDR or 127.0.0.1:7071)");
  c_serve->add_option("--static-dir", serve.static_dir, "web client assets served at /")
      ->check(CLI::ExistingDirectory);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (c_extract->parsed()) return run_extract(extract, out);
    if (c_build->parsed()) return run_build(build, out);
    if (c_stats->parsed()) return run_stats(stats_dir, out);
    if (c_train->parsed()) return run_train(train, out);
    if (c_grid->parsed()) return run_grid(grid, out);
    if (c_eval->parsed()) return run_eval(eval, out);
    if (c_rec->parsed()) return run_recommend(rec, out, err);
    if (c_serve->parsed()) return run_serve(serve, out);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace tacrec::cli
