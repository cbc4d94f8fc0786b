#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bpmr/evaluation.hpp"
#include "bpmr/metrics.hpp"

namespace bpmr {

// Ordered key/value pairs echoed at the top of every report.
using ReportHeader = std::vector<std::pair<std::string, std::string>>;

inline std::string format_metric(double v) { return fmt::format("{:.6f}", v); }

inline void write_header_tsv(std::ostream& out, const ReportHeader& header) {
  for (const auto& [k, v] : header) out << "# " << k << '=' << v << '\n';
}

inline nlohmann::ordered_json header_json(const ReportHeader& header) {
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : header) cfg[k] = v;
  return cfg;
}

inline nlohmann::ordered_json metrics_json(const EvalReport& rep) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& m : rep.metrics) {
    rows.push_back({{"metric", "recall"}, {"K", m.k}, {"value", m.recall}, {"n_users", rep.n_users}});
    rows.push_back({{"metric", "ndcg"}, {"K", m.k}, {"value", m.ndcg}, {"n_users", rep.n_users}});
  }
  return rows;
}

// metric  K  value  n_users
inline void write_eval_tsv(std::ostream& out, const ReportHeader& header, const EvalReport& rep) {
  write_header_tsv(out, header);
  out << "metric\tK\tvalue\tn_users\n";
  for (const auto& m : rep.metrics) {
    out << "recall\t" << m.k << '\t' << format_metric(m.recall) << '\t' << rep.n_users << '\n';
    out << "ndcg\t" << m.k << '\t' << format_metric(m.ndcg) << '\t' << rep.n_users << '\n';
  }
}

inline void write_eval_json(std::ostream& out, const ReportHeader& header, const EvalReport& rep) {
  nlohmann::ordered_json doc{{"report", "eval"}, {"config", header_json(header)}, {"metrics", metrics_json(rep)}};
  out << doc.dump() << '\n';
}

// group  min_degree  max_degree  metric  K  value  n_users
inline void write_sparsity_tsv(std::ostream& out, const ReportHeader& header, const std::vector<GroupReport>& groups) {
  write_header_tsv(out, header);
  out << "group\tmin_degree\tmax_degree\tmetric\tK\tvalue\tn_users\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& gr = groups[g];
    const auto prefix = fmt::format("{}\t{}\t{}\t", g, gr.group.min_degree, gr.group.max_degree);
    for (const auto& m : gr.report.metrics) {
      out << prefix << "recall\t" << m.k << '\t' << format_metric(m.recall) << '\t' << gr.report.n_users << '\n';
      out << prefix << "ndcg\t" << m.k << '\t' << format_metric(m.ndcg) << '\t' << gr.report.n_users << '\n';
    }
  }
}

inline void write_sparsity_json(std::ostream& out, const ReportHeader& header, const std::vector<GroupReport>& groups) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    rows.push_back({{"group", g},
                    {"min_degree", groups[g].group.min_degree},
                    {"max_degree", groups[g].group.max_degree},
                    {"metrics", metrics_json(groups[g].report)}});
  }
  nlohmann::ordered_json doc{{"report", "sparsity"}, {"config", header_json(header)}, {"groups", rows}};
  out << doc.dump() << '\n';
}

// fraction  metric  K  value  n_users
inline void write_noise_tsv(std::ostream& out, const ReportHeader& header, const std::vector<NoiseRow>& rows) {
  write_header_tsv(out, header);
  out << "fraction\tmetric\tK\tvalue\tn_users\n";
  for (const auto& row : rows) {
    const auto frac = fmt::format("{}", row.fraction);
    for (const auto& m : row.report.metrics) {
      out << frac << "\trecall\t" << m.k << '\t' << format_metric(m.recall) << '\t' << row.report.n_users << '\n';
      out << frac << "\tndcg\t" << m.k << '\t' << format_metric(m.ndcg) << '\t' << row.report.n_users << '\n';
    }
  }
}

inline void write_noise_json(std::ostream& out, const ReportHeader& header, const std::vector<NoiseRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) arr.push_back({{"fraction", row.fraction}, {"metrics", metrics_json(row.report)}});
  nlohmann::ordered_json doc{{"report", "noise"}, {"config", header_json(header)}, {"rows", arr}};
  out << doc.dump() << '\n';
}

}  // namespace bpmr
