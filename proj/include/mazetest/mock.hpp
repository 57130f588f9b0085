#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "mazetest/corpus_io.hpp"
#include "mazetest/harness.hpp"

namespace mazetest {

namespace mock_detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string numbered(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) out += std::to_string(i + 1) + ". " + lines[i] + "\n";
  return out;
}

inline std::vector<std::string> rendered(const std::vector<Instruction>& instrs) {
  std::vector<std::string> out;
  for (const auto& i : instrs) out.push_back(canonical_render(i));
  return out;
}

/// Out of 10: how many keys get a correct answer, by scenario.
inline std::uint64_t correct_share(std::string_view scenario) {
  if (scenario == "few-shot") return 6;
  if (scenario == "one-shot") return 4;
  return 2;
}

}  // namespace mock_detail

/// A deterministic imperfect answer for one (maze, scenario). Mixes correct
/// answers in several phrasings with truncations, wrong turns, a missing
/// final turn, an unparseable step, refusals and simulated provider errors.
inline nlohmann::json noisy_response(const Solution& ref, const std::string& key, std::string_view scenario,
                                     std::uint64_t seed) {
  using namespace mock_detail;
  const std::uint64_t h = detail::splitmix64(seed ^ fnv1a(key));
  const auto n = ref.instructions.size();
  std::vector<std::string> lines = rendered(ref.instructions);

  if (h % 10 < correct_share(scenario)) {
    switch ((h >> 8) % 3) {
      case 0: return numbered(lines);
      case 1: {
        std::string out = "Sure, here is the route:\n\n";
        for (std::size_t i = 0; i < n; ++i) {
          std::string l = lines[i];
          if (l.rfind("Turn ", 0) == 0) l = "Turn to my " + l.substr(5);
          out += "Step " + std::to_string(i + 1) + ": " + l + ".\n";
        }
        return out + "\nI hope this helps.\n";
      }
      default: {
        std::string out;
        for (const auto& l : lines) out += "- " + l + "\n";
        return out;
      }
    }
  }
  const std::size_t cut = n > 2 ? 1 + static_cast<std::size_t>((h >> 24) % (n - 2)) : 1;
  switch ((h >> 16) % 6) {
    case 0:
      lines.resize(cut);
      return numbered(lines) + "I am not sure how to continue from here.\n";
    case 1: {
      for (std::size_t i = cut; i < n; ++i) {
        if (lines[i] == "Turn left" || lines[i] == "Turn right") {
          lines[i] = lines[i] == "Turn left" ? "Turn right" : "Turn left";
          return numbered(lines);
        }
      }
      lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(cut), "Turn left");
      return numbered(lines);
    }
    case 2:
      if (n >= 2 && lines[n - 2].rfind("Turn ", 0) == 0) lines.erase(lines.end() - 2);
      else lines.insert(lines.end() - 1, "Turn right");
      return numbered(lines);
    case 3:
      lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(cut), "Look around for the exit");
      return numbered(lines);
    case 4:
      return std::string("I'm sorry, I cannot determine a path through this maze.\n");
    default:
      return nlohmann::json{{"error", "timeout"}};
  }
}

struct MockExperimentOptions {
  fs::path dir;
  std::uint64_t seed = 2024;
  std::size_t n_test = 34;
  std::size_t n_shot = 6;
  std::size_t concurrency = 4;
  std::optional<std::size_t> limit;
  std::vector<Scenario> scenarios = default_scenarios();
  ScoringMode mode = ScoringMode::OracleMatch;
  bool lenient_exit = false;
};

/// Lays out a self-contained experiment under opts.dir: corpus/, two mock
/// response scripts, providers.json and experiment.json. An existing corpus
/// is reused; everything else is rewritten byte-identically.
inline ExperimentSpec prepare_mock_experiment(const MockExperimentOptions& opts) {
  const fs::path manifest = opts.dir / "corpus" / "corpus.json";
  Corpus corpus;
  if (fs::exists(manifest)) {
    corpus = load_corpus(manifest);
  } else {
    GenConfig cfg;
    cfg.seed = opts.seed;
    corpus = generate_corpus(cfg, opts.n_test, opts.n_shot);
    save_corpus(corpus, opts.dir / "corpus");
  }

  nlohmann::ordered_json oracle{{"responses", nlohmann::ordered_json::object()}};
  nlohmann::ordered_json noisy{{"responses", nlohmann::ordered_json::object()}};
  for (const auto& e : corpus.entries) {
    if (e.role != MazeRole::Test) continue;
    const Solution ref = reference_solution(e.maze);
    oracle["responses"][e.id + "|*"] = render_solution_text(ref.instructions);
    for (const auto& sc : opts.scenarios) {
      const std::string key = e.id + "|" + sc.name;
      noisy["responses"][key] = noisy_response(ref, key, sc.name, opts.seed);
    }
  }
  write_text_file(opts.dir / "mock" / "oracle.json", oracle.dump(2) + "\n");
  write_text_file(opts.dir / "mock" / "noisy.json", noisy.dump(2) + "\n");

  nlohmann::ordered_json registry{{"providers",
                                   {{{"name", "mock-oracle"}, {"kind", "mock"}, {"reasoning", true},
                                     {"script", "mock/oracle.json"}},
                                    {{"name", "mock-noisy"}, {"kind", "mock"}, {"reasoning", false},
                                     {"script", "mock/noisy.json"}}}}};
  write_text_file(opts.dir / "providers.json", registry.dump(2) + "\n");

  nlohmann::ordered_json spec_json;
  spec_json["id"] = "mock-eval";
  spec_json["corpus"] = "corpus/corpus.json";
  spec_json["registry"] = "providers.json";
  spec_json["scenarios"] = nlohmann::ordered_json::array();
  for (const auto& sc : opts.scenarios) spec_json["scenarios"].push_back(scenario_to_json(sc));
  spec_json["mode"] = scoring_mode_name(opts.mode);
  spec_json["lenient_exit"] = opts.lenient_exit;
  spec_json["concurrency"] = opts.concurrency;
  spec_json["output"] = "runs";
  spec_json["seed"] = opts.seed;
  spec_json["repeats"] = 1;
  spec_json["limit"] = opts.limit ? nlohmann::ordered_json(*opts.limit) : nlohmann::ordered_json(nullptr);
  spec_json["record_timestamps"] = false;
  write_text_file(opts.dir / "experiment.json", spec_json.dump(2) + "\n");
  return load_spec(opts.dir / "experiment.json", opts.dir);
}

}  // namespace mazetest
