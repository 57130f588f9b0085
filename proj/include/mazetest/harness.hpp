#pragma once

#include <atomic>
#include <condition_variable>
#include <ctime>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "mazetest/corpus_io.hpp"
#include "mazetest/gateway.hpp"
#include "mazetest/http_transport.hpp"
#include "mazetest/metrics.hpp"
#include "mazetest/prompt.hpp"

namespace mazetest {

using ojson = nlohmann::ordered_json;

struct ExperimentSpec {
  std::string id = "experiment";
  fs::path corpus;  // corpus.json
  std::vector<ProviderConfig> providers;
  std::vector<Scenario> scenarios = default_scenarios();
  ScoringMode mode = ScoringMode::OracleMatch;
  SimOptions sim;
  std::size_t concurrency = 4;
  fs::path output_dir;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::optional<std::size_t> limit;  // first N test mazes only
  bool record_timestamps = true;

  void validate() const {
    if (id.empty() || id.find('|') != std::string::npos) throw DomainError("experiment id must be non-empty, no '|'");
    if (corpus.empty()) throw DomainError("experiment needs a corpus manifest");
    if (providers.empty()) throw DomainError("experiment needs at least one provider");
    if (scenarios.empty()) throw DomainError("experiment needs at least one scenario");
    if (concurrency < 1) throw DomainError("concurrency must be >= 1");
    if (repeats < 1) throw DomainError("repeats must be >= 1");
    if (output_dir.empty()) throw DomainError("experiment needs an output directory");
    std::set<std::string> names;
    for (const auto& p : providers) {
      p.validate();
      if (!names.insert(p.name).second) throw DomainError("duplicate provider: " + p.name);
    }
    names.clear();
    for (const auto& s : scenarios)
      if (s.name.empty() || s.name.find('|') != std::string::npos || !names.insert(s.name).second)
        throw DomainError("scenario names must be unique, non-empty, no '|': " + s.name);
  }
};

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (j.is_string()) return scenario_from_name(j.get<std::string>());
  Scenario s;
  if (j.contains("name")) {
    const std::string name = j.at("name").get<std::string>();
    try {
      s = scenario_from_name(name);
    } catch (const DomainError&) {
      s.name = name;
    }
  }
  s.k = j.value("k", s.k);
  s.offset = j.value("offset", s.offset);
  if (s.name.empty()) throw DomainError("scenario needs a name");
  return s;
}

inline ojson scenario_to_json(const Scenario& s) { return {{"name", s.name}, {"k", s.k}, {"offset", s.offset}}; }

/// Relative paths inside the spec resolve against `workdir`.
inline ExperimentSpec spec_from_json(const nlohmann::json& j, const fs::path& workdir) {
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : workdir / p; };
  ExperimentSpec s;
  s.id = j.value("id", s.id);
  s.corpus = resolve(j.at("corpus").get<std::string>());
  if (j.contains("registry")) {
    auto all = load_registry(resolve(j.at("registry").get<std::string>()));
    if (j.contains("use")) {
      for (const auto& name : j.at("use")) {
        auto it = std::find_if(all.begin(), all.end(), [&](const auto& p) { return p.name == name; });
        if (it == all.end()) throw DomainError("provider not in registry: " + name.get<std::string>());
        s.providers.push_back(*it);
      }
    } else {
      s.providers = std::move(all);
    }
  }
  if (j.contains("providers")) {
    for (const auto& p : j.at("providers")) {
      ProviderConfig c = provider_config_from_json(p);
      if (!c.script.empty()) c.script = resolve(c.script).string();
      s.providers.push_back(std::move(c));
    }
  }
  if (j.contains("scenarios")) {
    s.scenarios.clear();
    for (const auto& sc : j.at("scenarios")) s.scenarios.push_back(scenario_from_json(sc));
  }
  s.mode = scoring_mode_from_name(j.value("mode", std::string(scoring_mode_name(s.mode))));
  s.sim.lenient_exit = j.value("lenient_exit", false);
  s.concurrency = j.value("concurrency", s.concurrency);
  s.output_dir = resolve(j.value("output", std::string("runs/") + s.id));
  s.seed = j.value("seed", s.seed);
  s.repeats = j.value("repeats", s.repeats);
  if (j.contains("limit") && !j["limit"].is_null()) s.limit = j["limit"].get<std::size_t>();
  s.record_timestamps = j.value("record_timestamps", s.record_timestamps);
  s.validate();
  return s;
}

inline ExperimentSpec load_spec(const fs::path& path, const fs::path& workdir) {
  try {
    return spec_from_json(nlohmann::json::parse(read_text_file(path)), workdir);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Record encoding

inline ojson score_to_json(const RunScore& s) {
  ojson j{{"complete", s.complete}, {"partial", s.partial}};
  if (s.first_fault) {
    j["first_fault"] = {{"index", s.first_fault->index}, {"kind", fault_kind_name(s.first_fault->kind)}};
  } else {
    j["first_fault"] = nullptr;
  }
  return j;
}

inline RunScore score_from_json(const nlohmann::json& j, ScoringMode mode) {
  RunScore s;
  s.mode = mode;
  s.complete = j.at("complete").get<bool>();
  s.partial = j.at("partial").get<double>();
  if (!j.at("first_fault").is_null())
    s.first_fault = FirstFault{j["first_fault"].at("index").get<std::size_t>(),
                               fault_kind_from_name(j["first_fault"].at("kind").get<std::string>())};
  return s;
}

inline ojson parsed_to_json(const ParsedResponse& p) {
  ojson instrs = ojson::array();
  for (const auto& i : p.instructions) instrs.push_back(canonical_render(i));
  ojson rejected = ojson::array();
  for (const auto& r : p.rejected_lines)
    rejected.push_back({{"line", r.line}, {"text", r.text}, {"reason", reject_reason_name(r.reason)}});
  return {{"instructions", instrs},
          {"instruction_lines", p.instruction_lines},
          {"rejected", rejected},
          {"preamble_lines", p.preamble_lines},
          {"epilogue_lines", p.epilogue_lines}};
}

inline ojson trace_to_json(const ExecutionTrace& t) {
  ojson poses = ojson::array();
  for (const Pose& p : t.poses) poses.push_back(ojson::array({p.cell, std::string(1, heading_letter(p.heading))}));
  ojson j{{"poses", poses}, {"ok_steps", t.ok_steps}};
  if (const FailedAt* f = t.failure()) {
    j["outcome"] = {{"failed_at", f->index}, {"fault", fault_kind_name(f->fault.kind)}, {"detail", f->fault.detail}};
  } else {
    j["outcome"] = "complete";
  }
  return j;
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string trial_key(std::string_view provider, std::string_view scenario, std::string_view maze,
                             std::size_t repeat) {
  return std::string(provider) + "|" + std::string(scenario) + "|" + std::string(maze) + "|" + std::to_string(repeat);
}

/// The fields of a logged record that reports and resumption need.
struct StoredRecord {
  std::string provider;
  std::string model;
  bool reasoning = false;
  std::string scenario;
  std::string maze_id;
  std::size_t repeat = 0;
  std::string prompt_hash;
  ScoringMode primary_mode = ScoringMode::OracleMatch;
  bool lenient_exit = false;
  RunScore oracle_match;
  RunScore execution;

  std::string key() const { return trial_key(provider, scenario, maze_id, repeat); }
  const RunScore& score(ScoringMode m) const { return m == ScoringMode::OracleMatch ? oracle_match : execution; }
};

inline StoredRecord stored_from_json(const nlohmann::json& j) {
  StoredRecord r;
  r.provider = j.at("provider").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.reasoning = j.value("reasoning", false);
  r.scenario = j.at("scenario").get<std::string>();
  r.maze_id = j.at("maze_id").get<std::string>();
  r.repeat = j.at("repeat").get<std::size_t>();
  r.prompt_hash = j.at("prompt_hash").get<std::string>();
  r.primary_mode = scoring_mode_from_name(j.at("primary_mode").get<std::string>());
  r.lenient_exit = j.value("lenient_exit", false);
  r.oracle_match = score_from_json(j.at("score").at("oracle-match"), ScoringMode::OracleMatch);
  r.execution = score_from_json(j.at("score").at("execution"), ScoringMode::Execution);
  return r;
}

struct RecordLog {
  std::vector<StoredRecord> records;
  /// Byte length of the well-formed prefix of the file.
  std::uintmax_t valid_bytes = 0;
  /// A trailing line without newline that failed to parse (torn write).
  bool torn_tail = false;
  /// The last record parsed but lacks its newline.
  bool missing_newline = false;
};

/// Reads a JSONL log. A malformed final line lacking its newline is a torn
/// write and is reported, not fatal; malformed lines elsewhere are errors.
inline RecordLog read_record_log(const fs::path& path) {
  RecordLog log;
  if (!fs::exists(path)) return log;
  const std::string data = read_text_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = data.substr(pos, terminated ? nl - pos : std::string::npos);
    ++line_no;
    if (!line.empty()) {
      try {
        log.records.push_back(stored_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        if (!terminated) {
          log.torn_tail = true;
          break;
        }
        throw DomainError(path.string() + ":" + std::to_string(line_no) + ": bad record: " + e.what());
      }
    }
    if (!terminated) {
      // Whole record, only the newline is missing.
      log.missing_newline = true;
      log.valid_bytes = data.size();
      break;
    }
    pos = nl + 1;
    log.valid_bytes = pos;
  }
  return log;
}

// ---------------------------------------------------------------------------
// Reporting

struct Report {
  ScoringMode mode = ScoringMode::OracleMatch;
  std::vector<std::string> models;     // display labels, log order
  std::vector<std::string> scenarios;  // column order
  std::vector<MetricsSummary> summaries;
  ResultTable complete;
  ResultTable partial;
  std::string text;
  std::string summary_csv;
};

namespace report_detail {

inline std::vector<std::string> order_scenarios(const std::vector<std::string>& seen) {
  std::vector<std::string> out;
  for (const char* known : {"few-shot", "one-shot", "zero-shot"})
    if (std::find(seen.begin(), seen.end(), known) != seen.end()) out.push_back(known);
  for (const auto& s : seen)
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  return out;
}

inline std::string pad_right(const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); }

inline std::string grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += i == 0 ? pad_right(r[i], width[i]) : "  " + std::string(width[i] - r[i].size(), ' ') + r[i];
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace report_detail

inline Report build_report(const std::vector<StoredRecord>& records, std::optional<ScoringMode> mode_override,
                           std::size_t torn = 0) {
  if (records.empty()) throw DomainError("record log is empty");
  Report rep;
  if (mode_override) {
    rep.mode = *mode_override;
  } else {
    rep.mode = records.front().primary_mode;
    for (const auto& r : records)
      if (r.primary_mode != rep.mode)
        throw DomainError("record log mixes scoring modes; pass an explicit mode to re-score consistently");
  }

  std::vector<std::string> providers;     // provider names in log order
  std::map<std::string, std::string> label;  // provider -> display label
  std::vector<std::string> seen_scenarios;
  std::map<std::pair<std::string, std::string>, std::vector<RunScore>> groups;
  std::vector<std::string> mazes;
  std::size_t provider_errors = 0;
  for (const auto& r : records) {
    if (!label.count(r.provider)) {
      providers.push_back(r.provider);
      label[r.provider] = r.provider + (r.reasoning ? "*" : "");
    }
    if (std::find(seen_scenarios.begin(), seen_scenarios.end(), r.scenario) == seen_scenarios.end())
      seen_scenarios.push_back(r.scenario);
    if (std::find(mazes.begin(), mazes.end(), r.maze_id) == mazes.end()) mazes.push_back(r.maze_id);
    const RunScore& s = r.score(rep.mode);
    if (s.first_fault && s.first_fault->kind == FaultKind::ProviderError) ++provider_errors;
    groups[{r.provider, r.scenario}].push_back(s);
  }
  rep.scenarios = report_detail::order_scenarios(seen_scenarios);
  for (const auto& p : providers) rep.models.push_back(label[p]);
  for (const auto& p : providers)
    for (const auto& sc : rep.scenarios)
      if (auto it = groups.find({p, sc}); it != groups.end()) rep.summaries.push_back(aggregate(label[p], sc, it->second));

  const std::string sort_col = rep.scenarios.front();
  rep.complete = build_table(rep.summaries, Metric::Complete, rep.models, rep.scenarios, sort_col);
  rep.partial = build_table(rep.summaries, Metric::Partial, rep.models, rep.scenarios, sort_col);
  rep.complete.title += " (sorted by " + sort_col + ")";
  rep.partial.title += " (sorted by " + sort_col + ")";

  std::string& t = rep.text;
  t += render_text_table(rep.complete) + "\n" + render_text_table(rep.partial) + "\n";

  // Fault histogram: first fault of each failed run, per model.
  std::vector<FaultKind> kinds;
  for (FaultKind k : kAllFaultKinds)
    for (const auto& s : rep.summaries)
      if (s.faults.count(k) && std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  t += "First-fault counts per model (all scenarios)\n";
  if (kinds.empty()) {
    t += "(no faults)\n";
  } else {
    std::vector<std::vector<std::string>> rows{{"Model"}};
    for (FaultKind k : kinds) rows[0].push_back(fault_kind_name(k));
    for (const auto& m : rep.models) {
      rows.push_back({m});
      for (FaultKind k : kinds) {
        std::size_t c = 0;
        for (const auto& s : rep.summaries)
          if (s.model == m && s.faults.count(k)) c += s.faults.at(k);
        rows.back().push_back(std::to_string(c));
      }
    }
    t += report_detail::grid(rows);
  }

  t += "\nPer-maze difficulty (fraction of model runs fully correct)\n";
  {
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> per;  // (maze, scenario)
    for (const auto& r : records) {
      auto& [ok, n] = per[{r.maze_id, r.scenario}];
      ok += r.score(rep.mode).complete ? 1 : 0;
      ++n;
    }
    std::vector<std::vector<std::string>> rows{{"Maze"}};
    for (const auto& sc : rep.scenarios) rows[0].push_back(sc);
    for (const auto& m : mazes) {
      rows.push_back({m});
      for (const auto& sc : rep.scenarios) {
        auto it = per.find({m, sc});
        if (it == per.end()) {
          rows.back().push_back("-");
        } else {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(it->second.first) / static_cast<double>(it->second.second));
          rows.back().push_back(buf);
        }
      }
    }
    t += report_detail::grid(rows);
  }

  std::size_t n_runs = records.size();
  t += "\nNotes\n";
  t += "- Scoring mode: " + std::string(scoring_mode_name(rep.mode)) +
       (rep.mode == ScoringMode::OracleMatch
            ? ". A step counts only if it equals the reference solution's step at the same index.\n"
            : ". Steps count while the simulator accepts them; any successful exit is complete.\n");
  t += "- Partial accuracy divides the correct prefix by the reference solution length.\n";
  t += "- The correct prefix ends at the first unparseable line inside the instruction block.\n";
  std::size_t lenient = 0;
  for (const auto& r : records) lenient += r.lenient_exit ? 1 : 0;
  t += lenient == 0               ? "- Exit rule: strict, the final step must face the exit side.\n"
       : lenient == records.size() ? "- Exit rule: lenient, exit heading not checked.\n"
                                   : "- Exit rule: mixed strict and lenient records.\n";
  t += "- Models marked * are flagged reasoning-capable in the provider registry.\n";
  t += "- Provider failures after retries score 0 and are included in n (" + std::to_string(provider_errors) + " of " +
       std::to_string(n_runs) + " runs).\n";
  if (torn) t += "- Ignored " + std::to_string(torn) + " incomplete trailing record.\n";

  rep.summary_csv = "model,scenario,n,complete_accuracy,partial_accuracy\n";
  for (const auto& s : rep.summaries)
    rep.summary_csv += csv_field(s.model) + "," + csv_field(s.scenario) + "," + std::to_string(s.n) + "," +
                       format_percent(s.complete_accuracy) + "," + format_percent(s.partial_accuracy) + "\n";
  return rep;
}

inline void write_report_files(const Report& report, const fs::path& dir) {
  write_text_file(dir / "report.txt", report.text);
  write_text_file(dir / "summary.csv", report.summary_csv);
  write_text_file(dir / "complete.csv", render_csv(report.complete));
  write_text_file(dir / "partial.csv", render_csv(report.partial));
}

inline Report report_from_log(const fs::path& log_path, std::optional<ScoringMode> mode_override = std::nullopt) {
  if (!fs::exists(log_path)) throw std::runtime_error("no such record log: " + log_path.string());
  const RecordLog log = read_record_log(log_path);
  return build_report(log.records, mode_override, log.torn_tail ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Running

struct Trial {
  std::size_t provider_index = 0;
  Scenario scenario;
  const CorpusEntry* maze = nullptr;
  std::size_t repeat = 0;
  std::vector<ChatMessage> messages;
  std::string prompt_hash;
  std::string key;
};

using ProviderFactory = std::function<std::unique_ptr<Provider>(const ProviderConfig&)>;

inline std::unique_ptr<Provider> default_provider_factory(const ProviderConfig& cfg) {
  if (cfg.kind == ProviderKind::Mock) return MockProvider::from_config(cfg);
  return std::make_unique<ChatProvider>(cfg, std::make_shared<HttpTransport>());
}

struct RunOptions {
  ProviderFactory factory = default_provider_factory;
  /// Stop after this many new records (simulates an interrupted run).
  std::optional<std::size_t> stop_after;
  std::function<std::optional<std::string>(const std::string&)> getenv = GatewayHooks{}.getenv;
};

struct RunResult {
  std::vector<MetricsSummary> summaries;
  std::size_t skipped = 0;
  std::size_t executed = 0;
  std::size_t total_trials = 0;
  fs::path log_path;
};

inline fs::path record_log_path(const fs::path& output_dir) { return output_dir / "records.jsonl"; }

/// Corpus split checks: shots and tests disjoint by id and by structure,
/// and enough shots for every scenario.
inline void check_corpus_for(const Corpus& corpus, const std::vector<Scenario>& scenarios) {
  const auto tests = corpus.with_role(MazeRole::Test);
  const auto shots = corpus.with_role(MazeRole::Shot);
  if (tests.empty()) throw DomainError("corpus has no test mazes");
  std::set<Maze> test_mazes;
  for (const auto* t : tests) test_mazes.insert(t->maze);
  for (const auto* s : shots)
    if (test_mazes.count(s->maze)) throw DomainError("shot maze " + s->id + " duplicates a test maze");
  for (const auto& sc : scenarios)
    if (sc.offset + sc.k > shots.size())
      throw DomainError(sc.name + " needs shots [" + std::to_string(sc.offset) + ", " +
                        std::to_string(sc.offset + sc.k) + ") but the corpus has " + std::to_string(shots.size()));
}

inline std::vector<Shot> shots_for(const Corpus& corpus, const Scenario& sc,
                                   const std::map<std::string, Solution>& references) {
  const auto shots = corpus.with_role(MazeRole::Shot);
  std::vector<Shot> out;
  for (std::size_t i = sc.offset; i < sc.offset + sc.k; ++i) out.push_back({shots[i]->maze, references.at(shots[i]->id)});
  return out;
}

inline std::vector<Trial> plan_trials(const ExperimentSpec& spec, const Corpus& corpus,
                                      const std::map<std::string, Solution>& references) {
  auto tests = corpus.with_role(MazeRole::Test);
  if (spec.limit && *spec.limit < tests.size()) tests.resize(*spec.limit);
  std::vector<Trial> trials;
  for (std::size_t p = 0; p < spec.providers.size(); ++p) {
    for (const Scenario& sc : spec.scenarios) {
      const std::vector<Shot> shots = shots_for(corpus, sc, references);
      for (const CorpusEntry* m : tests) {
        auto messages = build_messages(m->maze, shots, sc);
        const std::string hash = prompt_hash(messages);
        for (std::size_t r = 0; r < spec.repeats; ++r) {
          trials.push_back({p, sc, m, r, messages, hash, trial_key(spec.providers[p].name, sc.name, m->id, r)});
        }
      }
    }
  }
  return trials;
}

inline std::string run_trial(const ExperimentSpec& spec, const Trial& t, Provider& provider, const Solution& reference) {
  const ProviderConfig& cfg = provider.config();
  ojson rec;
  rec["experiment"] = spec.id;
  rec["provider"] = cfg.name;
  rec["model"] = cfg.model;
  rec["reasoning"] = cfg.reasoning;
  rec["scenario"] = t.scenario.name;
  rec["shots"] = t.scenario.k;
  rec["maze_id"] = t.maze->id;
  rec["repeat"] = t.repeat;
  rec["prompt_hash"] = t.prompt_hash;
  rec["gateway"] = {{"temperature", cfg.temperature},
                    {"max_tokens", cfg.max_tokens},
                    {"timeout_s", cfg.timeout_s},
                    {"max_retries", cfg.max_retries}};
  if (spec.record_timestamps) rec["started_at"] = utc_timestamp();

  std::optional<Completion> completion;
  try {
    completion = provider.complete(t.messages, {t.maze->id, t.scenario.name});
  } catch (const GatewayError& e) {
    rec["response"] = nullptr;
    rec["error"] = {{"kind", gateway_error_name(e.kind())}, {"message", e.what()}};
    rec["parsed"] = nullptr;
    rec["trace"] = nullptr;
    rec["score"] = {{"oracle-match", score_to_json(provider_error_score(ScoringMode::OracleMatch))},
                    {"execution", score_to_json(provider_error_score(ScoringMode::Execution))}};
    rec["usage"] = {{"tokens_in", 0}, {"tokens_out", 0}};
    rec["latency_ms"] = 0;
    rec["attempts"] = e.attempts();
  }
  if (completion) {
    const ParsedResponse parsed = parse_response(completion->text);
    const auto trace = execute(t.maze->maze, parsed.usable_prefix(), spec.sim);
    rec["response"] = completion->text;
    rec["error"] = nullptr;
    rec["parsed"] = parsed_to_json(parsed);
    rec["trace"] = trace_to_json(trace);
    rec["score"] = {
        {"oracle-match", score_to_json(score_run(t.maze->maze, reference, parsed, ScoringMode::OracleMatch, spec.sim))},
        {"execution", score_to_json(score_run(t.maze->maze, reference, parsed, ScoringMode::Execution, spec.sim))}};
    rec["usage"] = {{"tokens_in", completion->tokens_in}, {"tokens_out", completion->tokens_out}};
    rec["latency_ms"] = completion->latency_ms;
    rec["attempts"] = completion->attempts;
  }
  rec["primary_mode"] = scoring_mode_name(spec.mode);
  rec["lenient_exit"] = spec.sim.lenient_exit;
  if (spec.record_timestamps) rec["finished_at"] = utc_timestamp();
  return rec.dump();
}

/// Runs every (provider, scenario, test maze, repeat) trial not already in
/// the output directory's record log, then writes the report files.
inline RunResult run(const ExperimentSpec& spec, const RunOptions& options = {}) {
  spec.validate();
  for (const auto& p : spec.providers) {
    if (p.kind == ProviderKind::Mock) continue;
    const auto key = options.getenv(p.api_key_env);
    if (!key || key->empty())
      throw GatewayError(GatewayErrorKind::Auth, p.name + ": environment variable " + p.api_key_env + " is not set");
  }
  const Corpus corpus = load_corpus(spec.corpus);
  check_corpus_for(corpus, spec.scenarios);
  std::map<std::string, Solution> references;
  for (const auto& e : corpus.entries) references.emplace(e.id, reference_solution(e.maze));
  const std::vector<Trial> trials = plan_trials(spec, corpus, references);

  fs::create_directories(spec.output_dir);
  const fs::path log_path = record_log_path(spec.output_dir);
  RecordLog existing = read_record_log(log_path);
  if (existing.torn_tail) fs::resize_file(log_path, existing.valid_bytes);
  std::map<std::string, std::string> done;
  for (const auto& r : existing.records) done[r.key()] = r.prompt_hash;

  std::vector<const Trial*> pending;
  RunResult result;
  result.total_trials = trials.size();
  result.log_path = log_path;
  for (const Trial& t : trials) {
    if (auto it = done.find(t.key); it != done.end()) {
      if (it->second != t.prompt_hash)
        throw DomainError("trial " + t.key + " is logged with a different prompt; use a fresh output directory");
      ++result.skipped;
    } else {
      pending.push_back(&t);
    }
  }

  std::vector<std::unique_ptr<Provider>> providers;
  for (const auto& p : spec.providers) providers.push_back(options.factory(p));

  std::ofstream out(log_path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open record log " + log_path.string());
  if (existing.missing_newline) out << '\n';

  // Workers finish trials in any order; the single writer emits them in plan
  // order so the log does not depend on scheduling.
  std::mutex mu;
  std::condition_variable cv;
  std::map<std::size_t, std::string> ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancel{false};
  std::exception_ptr failure;
  const std::size_t limit = options.stop_after ? std::min(*options.stop_after, pending.size()) : pending.size();

  auto worker = [&] {
    for (;;) {
      if (cancel) return;
      const std::size_t i = next++;
      if (i >= limit) return;
      const Trial& t = *pending[i];
      std::string line;
      try {
        line = run_trial(spec, t, *providers[t.provider_index], references.at(t.maze->id));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        cancel = true;
        cv.notify_all();
        return;
      }
      std::lock_guard lock(mu);
      ready.emplace(i, std::move(line));
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(spec.concurrency, limit));
  for (std::size_t w = 0; w < n_workers && limit > 0; ++w) pool.emplace_back(worker);

  std::size_t written = 0;
  while (written < limit) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return cancel || ready.count(written); });
    if (cancel && !ready.count(written)) break;
    std::string line = std::move(ready[written]);
    ready.erase(written);
    lock.unlock();
    out << line << '\n';
    out.flush();
    if (!out) {
      cancel = true;
      for (auto& th : pool) th.join();
      throw std::runtime_error("write to record log failed: " + log_path.string());
    }
    ++written;
  }
  for (auto& th : pool) th.join();
  out.close();
  if (failure) std::rethrow_exception(failure);
  result.executed = written;

  const RecordLog full = read_record_log(log_path);
  const Report report = build_report(full.records, spec.mode);
  write_report_files(report, spec.output_dir);
  result.summaries = report.summaries;
  return result;
}

/// Recomputes a stored record's prompt hash from the corpus, for audits.
inline std::string recompute_prompt_hash(const Corpus& corpus, const Scenario& scenario, const std::string& maze_id) {
  std::map<std::string, Solution> refs;
  for (const auto& e : corpus.entries)
    if (e.role == MazeRole::Shot) refs.emplace(e.id, reference_solution(e.maze));
  for (const auto& e : corpus.entries)
    if (e.id == maze_id) return prompt_hash(build_messages(e.maze, shots_for(corpus, scenario, refs), scenario));
  throw DomainError("maze not in corpus: " + maze_id);
}

}  // namespace mazetest
