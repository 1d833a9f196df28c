// Copyright 2026 The dupq Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dupq <stats|split|train|eval|sweep|errors> [--config FILE] [--key value ...]

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "dupq/corpus.hpp"
#include "dupq/eval.hpp"
#include "dupq/pipeline.hpp"
#include "dupq/run_config.hpp"

namespace {

using namespace dupq;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

void flush_warnings(Warnings& w) {
  for (const auto& msg : w) std::cerr << "warning: " << msg << "\n";
  w.clear();
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
    std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

const std::string& require(const RunConfig& cfg, const std::string& key, const std::string& cmd) {
  const std::string& v = cfg.str(key);
  if (v.empty()) throw ConfigError(cmd + " needs --" + key);
  return v;
}

Dataset load(const RunConfig& cfg, const std::string& key, const std::string& cmd, Warnings& w) {
  const bool use_test = key == "eval_data" && cfg.str(key).empty() && !cfg.str("test").empty();
  Dataset d = load_pairs(require(cfg, use_test ? "test" : key, cmd), cfg.flag("strict"), &w);
  flush_warnings(w);
  return d;
}

Dataset load_optional(const RunConfig& cfg, const std::string& key, Warnings& w) {
  if (cfg.str(key).empty()) return {};
  Dataset d = load_pairs(cfg.str(key), cfg.flag("strict"), &w);
  flush_warnings(w);
  return d;
}

void cmd_stats(const RunConfig& cfg, Warnings& w) {
  const Dataset d = load(cfg, "data", "stats", w);
  const auto identity = cfg.str("identity") == "qid" ? QuestionIdentity::qid : QuestionIdentity::text;
  const DatasetStats s = compute_stats(d, identity);
  print_stats(std::cout, s);
  const std::string& out = cfg.str("out");
  if (out.empty()) {
    std::cout << "\n";
    write_histogram_csv(std::cout, s);
  } else {
    auto f = open_out(out);
    write_histogram_csv(f, s);
    std::cerr << "histogram written to " << out << "\n";
  }
}

void cmd_split(const RunConfig& cfg, Warnings& w) {
  const Dataset d = load(cfg, "data", "split", w);
  SplitRatios r;
  r.train = cfg.num("ratio_train");
  r.validation = cfg.num("ratio_valid");
  r.test = cfg.num("ratio_test");
  const SplitKind kind = parse_split_kind(cfg.str("split"));
  SplitResult s = kind == SplitKind::blind ? blind_split(d, r, cfg.u64("seed")) : disjoint_split(d, r, cfg.u64("seed"));
  w.insert(w.end(), s.warnings.begin(), s.warnings.end());
  flush_warnings(w);
  const std::string& dir = require(cfg, "out", "split");
  write_split(dir, s);
  std::cout << to_string(kind) << " split: train " << s.train.size() << ", valid " << s.validation.size() << ", test "
            << s.test.size() << " -> " << dir << "\n";
}

void cmd_train(const RunConfig& cfg, Warnings& w) {
  const ModelKind mk = parse_model_kind(require(cfg, "model", "train"));
  check_compatible(mk, cfg.str("features").empty() ? default_features(mk) : parse_feature_kind(cfg.str("features")));
  const Dataset train = load(cfg, "train", "train", w);
  const Dataset valid = load_optional(cfg, "valid", w);
  train_model(cfg, train, valid, require(cfg, "model_dir", "train"), &w, &std::cerr);
  flush_warnings(w);
}

void cmd_eval(const RunConfig& cfg, Warnings& w) {
  const Dataset d = load(cfg, "eval_data", "eval", w);
  const std::string& dir = require(cfg, "model_dir", "eval");
  const auto clf = load_model(dir, &w);
  flush_warnings(w);
  const std::string name = std::filesystem::path(dir).filename().string();
  const auto rows = compare({NamedPredictor{name, [&](const Dataset& x) { return clf->predict(x); }}}, d,
                            cfg.str("split_name"));
  print_report(std::cout, rows);
  if (!cfg.str("report").empty()) {
    auto f = open_out(cfg.str("report"));
    write_report_csv(f, rows);
  }
  for (const auto& r : rows) {
    if (!r.error.empty()) throw DataError(r.error);
  }
}

void cmd_sweep(const RunConfig& cfg, Warnings& w) {
  const Dataset train = load(cfg, "train", "sweep", w);
  const Dataset valid = load(cfg, "valid", "sweep", w);
  require(cfg, "sweep", "sweep");
  if (cfg.str("out").empty()) {
    run_configured_sweep(cfg, train, valid, std::cout, &w, &std::cerr);
  } else {
    auto f = open_out(cfg.str("out"));
    run_configured_sweep(cfg, train, valid, f, &w, &std::cerr);
  }
  flush_warnings(w);
}

void cmd_errors(const RunConfig& cfg, Warnings& w) {
  const Dataset d = load(cfg, "eval_data", "errors", w);
  const auto clf = load_model(require(cfg, "model_dir", "errors"), &w);
  flush_warnings(w);
  const auto n = static_cast<std::size_t>(cfg.u64("n"));
  const std::vector<double> s = clf->scores(d);
  const auto cases = worst_errors(s, clf->threshold(), labels_of(d), n);
  std::cout << cases.size() << " most confident errors (threshold " << clf->threshold() << ")\n";
  for (const auto& c : cases) {
    const QuestionPair& p = d[c.row];
    std::cout << "\n#" << p.pair_id << "  gold " << c.gold << "  predicted " << c.predicted << "  score "
              << std::setprecision(6) << c.score << "\n  q1: " << p.question1 << "\n  q2: " << p.question2 << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duplicate question detection toolkit"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
  std::map<std::string, std::string> overrides;
  for (const auto& k : config_keys()) {
    app.add_option_function<std::string>(
           std::string("--") + k.name, [&overrides, name = std::string(k.name)](const std::string& v) { overrides[name] = v; },
           std::string(k.help) + " (default: " + (k.default_value[0] != '\0' ? k.default_value : "\"\"") + ")")
        ->group("Configuration keys");
  }
  using Handler = void (*)(const RunConfig&, Warnings&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"stats", "dataset summary and question-occurrence histogram", cmd_stats},
      {"split", "blind or question-disjoint train/valid/test split", cmd_split},
      {"train", "train a model and save it to model_dir", cmd_train},
      {"eval", "evaluate a saved model on eval_data", cmd_eval},
      {"sweep", "hyperparameter, preprocessing or ablation sweep", cmd_sweep},
      {"errors", "most confident misclassifications of a saved model", cmd_errors}};
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  Warnings warnings;
  try {
    RunConfig cfg;
    if (!config_file.empty()) cfg.merge_file(config_file);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    std::cerr << "# resolved configuration\n" << cfg.dump() << std::flush;
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) fn(cfg, warnings);
    }
  } catch (const ConfigError& e) {
    flush_warnings(warnings);
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    flush_warnings(warnings);
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    flush_warnings(warnings);
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
