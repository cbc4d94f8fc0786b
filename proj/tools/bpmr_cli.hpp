#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bpmr/bpmr.hpp"

namespace bpmr::cli {

struct Options {
  std::string input;
  std::vector<std::string> behaviors;
  std::uint32_t alpha = 1;
  double epsilon = 1.0;
  std::string mode = "zscore";
  std::vector<std::size_t> ks{10, 50};
  std::size_t chunk_size = 1024;
  std::size_t threads = default_thread_count();
  std::uint64_t split_seed = 0;
  std::uint64_t noise_seed = 0;
  std::vector<double> fractions{0.0, 0.1, 0.2, 0.3, 0.4};
  std::size_t groups = 5;
  std::string output;
  std::string config;
  std::string model;
  std::string user;
  std::vector<std::string> users;
  std::size_t k = 10;
  bool json = false;
  bool share_prefixes = false;
  bool holdout = false;
};

inline std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Flat `key = value` file. Keys may use '-' or '_'; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    for (auto& ch : key) {
      if (ch == '_') ch = '-';
    }
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Splices config-file values into the argument list of the selected
// subcommand, behind any flag given explicitly on the command line.
inline std::vector<std::string> apply_config_file(CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (!sub) return args;

  std::string path;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;

  auto given = [&](const std::string& flag) {
    for (std::size_t k = 1; k < args.size(); ++k) {
      if (args[k] == flag || args[k].rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };

  std::vector<std::string> extra;
  for (const auto& [key, value] : read_config_file(path)) {
    const std::string flag = "--" + key;
    if (key == "config") throw ConfigError("config files cannot include other config files");
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) {
      bool known = false;
      for (const auto* other : app.get_subcommands({})) known |= other->get_option_no_throw(flag) != nullptr;
      if (!known) throw ConfigError("unknown config key '" + key + "' in " + path);
      continue;  // belongs to another command
    }
    if (given(flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") {
        extra.push_back(flag);
      } else if (!(value == "false" || value == "0" || value == "no")) {
        throw ConfigError("config key '" + key + "' expects true or false");
      }
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) { build(); }

  int run(std::vector<std::string> args) {
    try {
      args = apply_config_file(app_, std::move(args));
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app_.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out_ << help_for_args(args);
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app_.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err_ << "usage error: " << e.what() << '\n';
      return static_cast<int>(ExitCode::kUsage);
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return static_cast<int>(e.exit_code());
    }

    try {
      if (*eval_) return cmd_eval();
      if (*sparsity_) return cmd_sparsity();
      if (*noise_) return cmd_noise();
      if (*dump_patterns_) return cmd_dump_patterns();
      if (*dump_features_) return cmd_dump_features();
      if (*export_model_) return cmd_export_model();
      if (*score_user_) return cmd_score_user();
      err_ << app_.help();
      return static_cast<int>(ExitCode::kUsage);
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
      err_ << "internal error: " << e.what() << '\n';
      return static_cast<int>(ExitCode::kInternal);
    }
  }

 private:
  std::string help_for_args(const std::vector<std::string>& args) {
    if (!args.empty()) {
      if (auto* sub = app_.get_subcommand_no_throw(args.front())) return sub->help();
    }
    return app_.help();
  }

  void add_config(CLI::App* s) {
    s->add_option("--config", opt_.config, "Flat 'key = value' config file; command-line flags take precedence");
  }
  void add_data(CLI::App* s, bool input_required = true) {
    auto* in = s->add_option("--input", opt_.input, "Interaction file: user<TAB>item<TAB>behavior per line");
    if (input_required) in->required();
    s->add_option("--behaviors", opt_.behaviors, "Comma-separated behavior labels, target behavior last")
        ->delimiter(',');
  }
  void add_model(CLI::App* s) {
    s->add_option("--alpha", opt_.alpha, "Longest pattern has 2*alpha+1 steps")->capture_default_str();
    s->add_option("--epsilon", opt_.epsilon, "Additive smoothing for the pattern probabilities")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    s->add_option("--mode", opt_.mode, "Feature scaling before weighting: raw or zscore")
        ->capture_default_str()
        ->check(CLI::IsMember({"raw", "zscore"}));
  }
  void add_exec(CLI::App* s) {
    s->add_option("--chunk-size", opt_.chunk_size, "Users per work unit")->capture_default_str()->check(
        CLI::PositiveNumber);
    s->add_option("--threads", opt_.threads, "Worker threads (env BPMR_THREADS)")
        ->envname("BPMR_THREADS")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    s->add_flag("--share-prefixes", opt_.share_prefixes, "Reuse intermediate products across patterns");
  }
  void add_eval(CLI::App* s) {
    s->add_option("--k", opt_.ks, "Comma-separated cutoffs K")->delimiter(',')->capture_default_str();
    s->add_option("--split-seed", opt_.split_seed, "Seed of the leave-one-out split")->capture_default_str();
    s->add_option("--output", opt_.output, "Also write the report to this file");
    s->add_flag("--json", opt_.json, "Emit one JSON object per report instead of TSV");
  }

  void build() {
    app_.description("Behavior-pattern multi-behavior recommender");
    app_.require_subcommand(1);
    app_.set_help_all_flag("--help-all", "Help for every command");

    eval_ = app_.add_subcommand("eval", "Leave-one-out Recall@K / NDCG@K");
    sparsity_ = app_.add_subcommand("sparsity", "Metrics per user group of increasing target-behavior degree");
    noise_ = app_.add_subcommand("noise", "Metrics under random noise added to auxiliary behaviors");
    for (auto* s : {eval_, sparsity_, noise_}) {
      add_config(s);
      add_data(s);
      add_model(s);
      add_exec(s);
      add_eval(s);
    }
    sparsity_->add_option("--groups", opt_.groups, "Number of user groups")->capture_default_str()->check(
        CLI::PositiveNumber);
    noise_->add_option("--fractions", opt_.fractions, "Comma-separated noise fractions")
        ->delimiter(',')
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    noise_->add_option("--noise-seed", opt_.noise_seed, "Seed of the noise sampler")->capture_default_str();

    dump_patterns_ = app_.add_subcommand("dump-patterns", "List the pattern set with indices");
    add_config(dump_patterns_);
    dump_patterns_->add_option("--behaviors", opt_.behaviors, "Comma-separated behavior labels, target last")
        ->delimiter(',');
    dump_patterns_->add_option("--alpha", opt_.alpha, "Longest pattern has 2*alpha+1 steps")->capture_default_str();

    dump_features_ = app_.add_subcommand("dump-features", "Print non-zero walk counts for some users as TSV");
    add_config(dump_features_);
    add_data(dump_features_);
    dump_features_->add_option("--alpha", opt_.alpha, "Longest pattern has 2*alpha+1 steps")->capture_default_str();
    dump_features_->add_option("--user", opt_.users, "User key (repeatable)")->required();

    export_model_ = app_.add_subcommand("export-model", "Fit the model and write it as JSON");
    add_config(export_model_);
    add_data(export_model_);
    add_model(export_model_);
    add_exec(export_model_);
    export_model_->add_flag("--holdout", opt_.holdout, "Fit on the leave-one-out train split instead of all data");
    export_model_->add_option("--split-seed", opt_.split_seed, "Seed of the split used with --holdout")
        ->capture_default_str();
    export_model_->add_option("--output", opt_.output, "Model file (default: stdout)");

    score_user_ = app_.add_subcommand("score-user", "Top-K recommendations for one user from an exported model");
    add_config(score_user_);
    add_data(score_user_);
    score_user_->add_option("--model", opt_.model, "Model file written by export-model")->required();
    score_user_->add_option("--user", opt_.user, "User key")->required();
    score_user_->add_option("--k", opt_.k, "List length")->capture_default_str()->check(CLI::PositiveNumber);
    score_user_->add_option("--threads", opt_.threads, "Unused; accepted for config compatibility")
        ->envname("BPMR_THREADS");
  }

  BehaviorSchema schema() const {
    if (opt_.behaviors.empty()) throw ConfigError("--behaviors is required");
    return BehaviorSchema(opt_.behaviors);
  }

  PipelineOptions pipeline() const {
    PipelineOptions p;
    p.alpha = opt_.alpha;
    p.epsilon = opt_.epsilon;
    p.mode = parse_score_mode(opt_.mode);
    p.ks = opt_.ks;
    p.chunk_size = opt_.chunk_size;
    p.threads = opt_.threads;
    p.share_prefixes = opt_.share_prefixes;
    return p;
  }

  ExperimentConfig experiment() const {
    ExperimentConfig cfg;
    cfg.input = opt_.input;
    cfg.behaviors = opt_.behaviors;
    cfg.pipeline = pipeline();
    cfg.split_seed = opt_.split_seed;
    cfg.noise_seed = opt_.noise_seed;
    schema();
    validate(cfg);
    return cfg;
  }

  // Only settings that change results; threads and chunking do not.
  ReportHeader header(const std::string& command) const {
    std::string ks;
    for (std::size_t n = 0; n < opt_.ks.size(); ++n) ks += (n ? "," : "") + std::to_string(opt_.ks[n]);
    return {{"command", command},
            {"input", opt_.input},
            {"behaviors", BehaviorSchema(opt_.behaviors).joined()},
            {"alpha", std::to_string(opt_.alpha)},
            {"epsilon", fmt::format("{}", opt_.epsilon)},
            {"mode", opt_.mode},
            {"k", ks},
            {"split_seed", std::to_string(opt_.split_seed)}};
  }

  template <typename Write>
  void emit(Write&& write) {
    std::ostringstream buf;
    write(buf);
    out_ << buf.str();
    if (!opt_.output.empty()) {
      std::ofstream file(opt_.output);
      if (!file || !(file << buf.str())) throw DataError("cannot write output file '" + opt_.output + "'");
    }
  }

  int cmd_eval() {
    auto cfg = experiment();
    auto result = run_experiment(cfg);
    emit([&](std::ostream& os) {
      opt_.json ? write_eval_json(os, header("eval"), result.report) : write_eval_tsv(os, header("eval"), result.report);
    });
    return 0;
  }

  int cmd_sparsity() {
    auto cfg = experiment();
    cfg.sparsity_groups = opt_.groups;
    auto result = run_experiment(cfg);
    auto h = header("sparsity");
    h.emplace_back("groups", std::to_string(opt_.groups));
    emit([&](std::ostream& os) {
      opt_.json ? write_sparsity_json(os, h, result.groups) : write_sparsity_tsv(os, h, result.groups);
    });
    return 0;
  }

  int cmd_noise() {
    auto cfg = experiment();
    cfg.noise_fractions = opt_.fractions;
    if (cfg.noise_fractions.empty()) throw ConfigError("--fractions must list at least one value");
    auto result = run_experiment(cfg);
    auto h = header("noise");
    h.emplace_back("noise_seed", std::to_string(opt_.noise_seed));
    emit([&](std::ostream& os) {
      opt_.json ? write_noise_json(os, h, result.noise) : write_noise_tsv(os, h, result.noise);
    });
    return 0;
  }

  int cmd_dump_patterns() {
    auto s = schema();
    auto patterns = enumerate_patterns(s, opt_.alpha);
    for (std::size_t f = 0; f < patterns.size(); ++f) out_ << f << '\t' << format_pattern(s, patterns[f]) << '\n';
    return 0;
  }

  int cmd_dump_features() {
    auto s = schema();
    auto ds = load_dataset(opt_.input, s);
    auto patterns = enumerate_patterns(s, opt_.alpha);
    for (const auto& key : opt_.users) {
      auto u = ds.users().find(key);
      if (!u) throw DataError("unknown user '" + key + "'");
      auto block = compute_feature_block(ds, patterns, {*u, std::size_t{*u} + 1});
      write_feature_block_tsv(out_, ds, patterns, block);
    }
    return 0;
  }

  int cmd_export_model() {
    auto s = schema();
    auto opt = pipeline();
    auto ds = load_dataset(opt_.input, s);
    std::optional<std::uint64_t> holdout;
    if (opt_.holdout) {
      holdout = opt_.split_seed;
      ds = run_stage("split", [&] { return leave_one_out_split(ds, opt_.split_seed).train; });
    }
    auto fitted = fit_model(ds, opt);
    const std::string doc = model_to_json(s, fitted, holdout).dump(2) + "\n";
    if (opt_.output.empty()) {
      out_ << doc;
    } else {
      std::ofstream file(opt_.output);
      if (!file || !(file << doc)) throw DataError("cannot write model file '" + opt_.output + "'");
    }
    return 0;
  }

  int cmd_score_user() {
    auto doc = run_stage("model", [&] { return load_model_file(opt_.model); });
    if (!opt_.behaviors.empty() && BehaviorSchema(opt_.behaviors) != doc.schema) {
      throw ConfigError("--behaviors does not match the model schema " + doc.schema.joined());
    }
    auto ds = load_dataset(opt_.input, doc.schema);
    if (doc.holdout_seed) {
      ds = run_stage("split", [&] { return leave_one_out_split(ds, *doc.holdout_seed).train; });
    }
    auto u = ds.users().find(opt_.user);
    if (!u) throw DataError("unknown user '" + opt_.user + "'");
    RowScorer scorer(ds, doc.patterns, doc.model);
    std::vector<double> row;
    scorer.score_user(*u, row);
    auto top = top_k_items(row, ds.target().row(*u), opt_.k);
    out_ << "rank\titem\tscore\n";
    for (std::size_t r = 0; r < top.size(); ++r) {
      out_ << r + 1 << '\t' << ds.items().key(top[r]) << '\t' << fmt::format("{:.17g}", row[top[r]]) << '\n';
    }
    return 0;
  }

  std::ostream& out_;
  std::ostream& err_;
  Options opt_;
  CLI::App app_{"bpmr"};
  CLI::App* eval_ = nullptr;
  CLI::App* sparsity_ = nullptr;
  CLI::App* noise_ = nullptr;
  CLI::App* dump_patterns_ = nullptr;
  CLI::App* dump_features_ = nullptr;
  CLI::App* export_model_ = nullptr;
  CLI::App* score_user_ = nullptr;
};

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Cli cli(out, err);
  return cli.run(std::move(args));
}

}  // namespace bpmr::cli
