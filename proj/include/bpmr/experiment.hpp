#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"
#include "bpmr/evaluation.hpp"

namespace bpmr {

struct ExperimentConfig {
  std::string input;
  std::vector<std::string> behaviors;  // target last
  PipelineOptions pipeline;
  std::uint64_t split_seed = 0;
  std::uint64_t noise_seed = 0;
  std::vector<double> noise_fractions;  // non-empty: run a noise sweep
  std::size_t sparsity_groups = 0;      // non-zero: per-group breakdown
};

struct ExperimentResult {
  EvalReport report;
  std::vector<Entry> test_pairs;
  std::vector<std::size_t> ranks;
  std::vector<GroupReport> groups;
  std::vector<NoiseRow> noise;
};

inline void validate(const ExperimentConfig& cfg) {
  BehaviorSchema schema(cfg.behaviors);
  if (cfg.pipeline.ks.empty()) throw ConfigError("at least one K is required");
  for (auto k : cfg.pipeline.ks) {
    if (k == 0) throw ConfigError("K values must be >= 1");
  }
  if (cfg.pipeline.chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
  if (!(cfg.pipeline.epsilon >= 0)) throw ConfigError("epsilon must be >= 0");
  for (double f : cfg.noise_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("noise fractions must lie in [0, 1]");
  }
}

// ingest -> split -> fit -> rank -> metrics, plus the optional sparsity
// breakdown and noise sweep. Deterministic for fixed seeds.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const MultiBehaviorDataset& dataset) {
  run_stage("config", [&] { validate(cfg); });
  SplitDataset split = run_stage("split", [&] { return leave_one_out_split(dataset, cfg.split_seed); });

  ExperimentResult out;
  EvalRun clean = evaluate_split(split.train, split.test_pairs, cfg.pipeline);
  out.report = std::move(clean.report);
  out.ranks = std::move(clean.ranks);
  if (cfg.sparsity_groups > 0) {
    out.groups = run_stage("sparsity", [&] {
      return sparsity_reports(split.train, split.test_pairs, out.ranks, cfg.pipeline.ks, cfg.sparsity_groups);
    });
  }
  if (!cfg.noise_fractions.empty()) {
    out.noise = noise_sweep(split.train, split.test_pairs, cfg.noise_fractions, cfg.noise_seed, cfg.pipeline);
  }
  out.test_pairs = std::move(split.test_pairs);
  return out;
}

inline MultiBehaviorDataset load_dataset(const std::string& path, const BehaviorSchema& schema) {
  auto records = run_stage("read", [&] { return read_records_file(path); });
  return run_stage("ingest", [&] { return ingest(records, schema); });
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  run_stage("config", [&] { validate(cfg); });
  return run_experiment(cfg, load_dataset(cfg.input, BehaviorSchema(cfg.behaviors)));
}

}  // namespace bpmr
