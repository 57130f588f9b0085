#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mazetest/instruction.hpp"
#include "mazetest/navsim.hpp"
#include "mazetest/oracle.hpp"

namespace mazetest {

enum class ScoringMode { OracleMatch, Execution };

inline const char* scoring_mode_name(ScoringMode m) { return m == ScoringMode::OracleMatch ? "oracle-match" : "execution"; }

inline ScoringMode scoring_mode_from_name(std::string_view s) {
  if (s == "oracle-match") return ScoringMode::OracleMatch;
  if (s == "execution") return ScoringMode::Execution;
  throw DomainError("unknown scoring mode: " + std::string(s));
}

struct FirstFault {
  std::size_t index = 0;
  FaultKind kind = FaultKind::NotStarted;
  friend bool operator==(const FirstFault&, const FirstFault&) = default;
};

struct RunScore {
  bool complete = false;
  /// Correct-prefix length over reference length, in [0, 1].
  double partial = 0.0;
  std::optional<FirstFault> first_fault;
  ScoringMode mode = ScoringMode::OracleMatch;
  friend bool operator==(const RunScore&, const RunScore&) = default;
};

namespace metrics_detail {

/// Fault kind for a run whose correct prefix stops at `index`. A rejected
/// line right after the usable prefix is an unparseable step; otherwise the
/// simulator's verdict at that index, if it faulted there.
inline FaultKind fault_at(const ParsedResponse& parsed, const std::vector<Instruction>& usable,
                          const ExecutionTrace& trace, std::size_t index) {
  if (index == usable.size() && parsed.has_rejected_inside()) return FaultKind::UnparseableStep;
  if (const FailedAt* f = trace.failure(); f && f->index == index) return f->fault.kind;
  return FaultKind::OffReference;
}

}  // namespace metrics_detail

inline RunScore score_run(const Maze& maze, const Solution& reference, const ParsedResponse& parsed, ScoringMode mode,
                          const SimOptions& options = {}) {
  const std::vector<Instruction> usable = parsed.usable_prefix();
  const ExecutionTrace trace = execute(maze, usable, options);
  const std::size_t ref_len = reference.instructions.size();
  RunScore score;
  score.mode = mode;

  if (mode == ScoringMode::OracleMatch) {
    std::size_t m = 0;
    while (m < usable.size() && m < ref_len && usable[m] == reference.instructions[m]) ++m;
    score.complete = m == ref_len && usable.size() == ref_len && !parsed.has_rejected_inside();
    score.partial = static_cast<double>(m) / static_cast<double>(ref_len);
    if (!score.complete) score.first_fault = FirstFault{m, metrics_detail::fault_at(parsed, usable, trace, m)};
    return score;
  }

  score.complete = trace.complete() && !parsed.has_rejected_inside();
  std::size_t ok = trace.ok_steps;
  // A longer cell path can need fewer instructions than the reference.
  if (score.complete) ok = std::max(ok, ref_len);
  score.partial = std::min(1.0, static_cast<double>(ok) / static_cast<double>(ref_len));
  if (!score.complete) {
    if (const FailedAt* f = trace.failure()) {
      const FaultKind kind = (f->index == usable.size() && parsed.has_rejected_inside()) ? FaultKind::UnparseableStep
                                                                                      : f->fault.kind;
      score.first_fault = FirstFault{f->index, kind};
    } else {
      // Prefix executed to an exit, but instructions followed a rejected line.
      score.first_fault = FirstFault{usable.size(), FaultKind::UnparseableStep};
    }
  }
  return score;
}

/// Scores against optimal_solutions(maze).front().
inline RunScore score_run(const Maze& maze, const ParsedResponse& parsed, ScoringMode mode,
                          const SimOptions& options = {}) {
  return score_run(maze, reference_solution(maze), parsed, mode, options);
}

inline RunScore provider_error_score(ScoringMode mode) {
  return RunScore{false, 0.0, FirstFault{0, FaultKind::ProviderError}, mode};
}

struct MetricsSummary {
  std::string model;
  std::string scenario;
  double complete_accuracy = 0.0;  // percent
  double partial_accuracy = 0.0;   // percent
  std::size_t n = 0;
  std::map<FaultKind, std::size_t> faults;
};

inline MetricsSummary aggregate(std::string model, std::string scenario, const std::vector<RunScore>& scores) {
  if (scores.empty()) throw DomainError("cannot aggregate an empty group (" + model + ", " + scenario + ")");
  MetricsSummary s{std::move(model), std::move(scenario), 0.0, 0.0, scores.size(), {}};
  std::size_t complete = 0;
  double partial_sum = 0.0;
  for (const RunScore& r : scores) {
    complete += r.complete ? 1 : 0;
    partial_sum += r.partial;
    if (r.first_fault) ++s.faults[r.first_fault->kind];
  }
  const double n = static_cast<double>(scores.size());
  s.complete_accuracy = 100.0 * static_cast<double>(complete) / n;
  s.partial_accuracy = 100.0 * partial_sum / n;
  return s;
}

inline std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

enum class Metric { Complete, Partial };

struct ResultRow {
  std::string label;
  std::vector<std::optional<double>> values;  // one per column, percent
};

struct ResultTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<ResultRow> rows;
};

/// One row per model, one column per scenario. Rows are sorted ascending by
/// `sort_column` (missing values first); equal rows keep `models` order.
inline ResultTable build_table(const std::vector<MetricsSummary>& summaries, Metric metric,
                               const std::vector<std::string>& models, const std::vector<std::string>& scenarios,
                               const std::string& sort_column) {
  ResultTable t;
  t.title = metric == Metric::Complete ? "Complete Path Accuracy [%]" : "Partial Path Accuracy [%]";
  t.columns = scenarios;
  for (const auto& model : models) {
    ResultRow row{model, {}};
    for (const auto& sc : scenarios) {
      std::optional<double> v;
      for (const auto& s : summaries)
        if (s.model == model && s.scenario == sc)
          v = metric == Metric::Complete ? s.complete_accuracy : s.partial_accuracy;
      row.values.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  const auto col = std::find(scenarios.begin(), scenarios.end(), sort_column);
  if (col != scenarios.end()) {
    const auto k = static_cast<std::size_t>(col - scenarios.begin());
    std::stable_sort(t.rows.begin(), t.rows.end(), [k](const ResultRow& a, const ResultRow& b) {
      return a.values[k].value_or(-1.0) < b.values[k].value_or(-1.0);
    });
  }
  return t;
}

inline std::string render_text_table(const ResultTable& t, const std::string& corner = "Model") {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({corner});
  for (const auto& c : t.columns) cells.back().push_back(c);
  for (const auto& r : t.rows) {
    cells.push_back({r.label});
    for (const auto& v : r.values) cells.back().push_back(v ? format_percent(*v) : "-");
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

  std::string out = t.title + "\n";
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        line += row[i] + std::string(width[i] - row[i].size(), ' ');
      } else {
        line += "  " + std::string(width[i] - row[i].size(), ' ') + row[i];
      }
    }
    out += line + "\n";
  };
  emit(cells.front());
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string render_csv(const ResultTable& t, const std::string& corner = "model") {
  std::string out = csv_field(corner);
  for (const auto& c : t.columns) out += "," + csv_field(c);
  out += "\n";
  for (const auto& r : t.rows) {
    out += csv_field(r.label);
    for (const auto& v : r.values) out += "," + (v ? format_percent(*v) : std::string());
    out += "\n";
  }
  return out;
}

}  // namespace mazetest
