#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpmr/bayes.hpp"
#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"
#include "bpmr/evaluation.hpp"
#include "bpmr/pattern.hpp"
#include "bpmr/statistics.hpp"

namespace bpmr {

// A fitted model as stored on disk.
struct ModelDocument {
  BehaviorSchema schema;
  std::uint32_t alpha = 1;
  PatternSet patterns;
  ScoreModel model;
  std::optional<std::uint64_t> holdout_seed;  // set when fitted on a leave-one-out train split
};

inline nlohmann::json model_to_json(const BehaviorSchema& schema, const FittedModel& fitted,
                                    std::optional<std::uint64_t> holdout_seed) {
  using nlohmann::json;
  json doc;
  doc["format"] = "bpmr-model";
  doc["version"] = 1;
  doc["schema"] = schema.names();
  doc["alpha"] = fitted.alpha;
  doc["epsilon"] = fitted.model.weights.epsilon;
  doc["mode"] = std::string(to_string(fitted.model.mode));
  doc["holdout_split_seed"] = holdout_seed ? json(*holdout_seed) : json(nullptr);
  doc["pair_count"] = fitted.stats.pair_count;
  doc["pos_pair_count"] = fitted.stats.pos_pair_count;
  json rows = json::array();
  for (std::size_t f = 0; f < fitted.patterns.size(); ++f) {
    const auto& w = fitted.model.weights.patterns[f];
    const auto& m = fitted.model.norm.patterns[f];
    rows.push_back({
        {"pattern", format_pattern(schema, fitted.patterns[f])},
        {"pos_sum", w.pos_sum},
        {"neg_sum", w.neg_sum},
        {"p_pos", w.p_pos},
        {"p_neg", w.p_neg},
        {"weight", w.weight},
        {"mean", m.mean},
        {"std", m.std},
        {"degenerate", m.degenerate},
    });
  }
  doc["patterns"] = std::move(rows);
  return doc;
}

// Validates the document: the pattern list must be exactly the enumerated
// set for (schema, alpha), in order.
inline ModelDocument model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "bpmr-model") throw DataError("not a bpmr model document");
    if (doc.at("version").get<int>() != 1) throw DataError("unsupported model version");
    BehaviorSchema schema(doc.at("schema").get<std::vector<std::string>>());
    const auto alpha = doc.at("alpha").get<std::uint32_t>();
    PatternSet patterns = enumerate_patterns(schema, alpha);

    ScoreModel model;
    model.weights.epsilon = doc.at("epsilon").get<double>();
    model.mode = parse_score_mode(doc.at("mode").get<std::string>());
    const auto& rows = doc.at("patterns");
    if (rows.size() != patterns.size()) {
      throw DataError("model lists " + std::to_string(rows.size()) + " patterns, expected " +
                      std::to_string(patterns.size()));
    }
    for (std::size_t f = 0; f < patterns.size(); ++f) {
      const auto& r = rows[f];
      const auto name = r.at("pattern").get<std::string>();
      if (parse_pattern(schema, name) != patterns[f]) {
        throw DataError("model pattern #" + std::to_string(f) + " is '" + name + "', expected '" +
                        format_pattern(schema, patterns[f]) + "'");
      }
      model.weights.patterns.push_back({r.at("pos_sum").get<Count>(), r.at("neg_sum").get<Count>(),
                                        r.at("p_pos").get<double>(), r.at("p_neg").get<double>(),
                                        r.at("weight").get<double>()});
      model.norm.patterns.push_back(
          {r.at("mean").get<double>(), r.at("std").get<double>(), r.value("degenerate", false)});
    }
    std::optional<std::uint64_t> seed;
    if (doc.contains("holdout_split_seed") && !doc["holdout_split_seed"].is_null()) {
      seed = doc["holdout_split_seed"].get<std::uint64_t>();
    }
    return {std::move(schema), alpha, std::move(patterns), std::move(model), seed};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid model document: ") + e.what());
  }
}

inline ModelDocument load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace bpmr
