#include <gtest/gtest.h>

#include "mazetest/harness.hpp"
#include "mazetest/mock.hpp"
#include "test_support.hpp"

namespace mazetest {
namespace {

using testing::TempDir;

Corpus small_corpus(std::size_t n_test, std::size_t n_shot, std::uint64_t seed = 77) {
  GenConfig cfg;
  cfg.seed = seed;
  return generate_corpus(cfg, n_test, n_shot);
}

ProviderConfig mock_config(const std::string& name, const fs::path& script) {
  ProviderConfig c;
  c.name = name;
  c.kind = ProviderKind::Mock;
  c.model = name + "-model";
  c.script = script.string();
  return c;
}

// One experiment rooted in a temp dir, answered by one scripted mock.
struct Fixture {
  TempDir dir;
  Corpus corpus;
  ExperimentSpec spec;

  Fixture(std::size_t n_test, std::size_t n_shot, const nlohmann::json& script,
          std::vector<Scenario> scenarios = {scenario_from_name("zero")}) {
    corpus = small_corpus(n_test, n_shot);
    spec.corpus = save_corpus(corpus, dir.path() / "corpus");
    write_text_file(dir.path() / "script.json", script.dump());
    spec.providers = {mock_config("scripted", dir.path() / "script.json")};
    spec.scenarios = std::move(scenarios);
    spec.output_dir = dir.path() / "out";
    spec.record_timestamps = false;
  }

  std::vector<const CorpusEntry*> tests() const { return corpus.with_role(MazeRole::Test); }
};

std::string prefix_text(const Solution& s, std::size_t k) {
  std::vector<Instruction> head(s.instructions.begin(), s.instructions.begin() + static_cast<std::ptrdiff_t>(k));
  return render_solution_text(head);
}

TEST(Harness, PerfectAnswersScoreFull) {
  nlohmann::json script{{"responses", nlohmann::json::object()}};
  const Corpus c = small_corpus(10, 0);
  for (const auto* e : c.with_role(MazeRole::Test))
    script["responses"][e->id + "|*"] = render_solution_text(reference_solution(e->maze).instructions);
  Fixture f(10, 0, script);
  const RunResult r = run(f.spec);
  ASSERT_EQ(r.summaries.size(), 1u);
  EXPECT_DOUBLE_EQ(r.summaries[0].complete_accuracy, 100.0);
  EXPECT_DOUBLE_EQ(r.summaries[0].partial_accuracy, 100.0);
  EXPECT_EQ(r.executed, 10u);
}

TEST(Harness, EighteenOfThirtyFour) {
  nlohmann::json script{{"responses", nlohmann::json::object()}, {"default", ""}};
  const Corpus c = small_corpus(34, 0);
  const auto tests = c.with_role(MazeRole::Test);
  for (std::size_t i = 0; i < 18; ++i)
    script["responses"][tests[i]->id + "|*"] = render_solution_text(reference_solution(tests[i]->maze).instructions);
  Fixture f(34, 0, script);
  const RunResult r = run(f.spec);
  ASSERT_EQ(r.summaries.size(), 1u);
  EXPECT_EQ(r.summaries[0].n, 34u);
  EXPECT_EQ(format_percent(r.summaries[0].complete_accuracy), "52.9");
  EXPECT_EQ(format_percent(r.summaries[0].partial_accuracy), "52.9");
  EXPECT_EQ(r.summaries[0].faults.at(FaultKind::NotStarted), 16u);
}

TEST(Harness, PrefixPartialsMatchHandComputation) {
  nlohmann::json script{{"responses", nlohmann::json::object()}};
  const Corpus c = small_corpus(12, 0);
  double expected_sum = 0;
  std::size_t expected_complete = 0;
  std::size_t i = 0;
  for (const auto* e : c.with_role(MazeRole::Test)) {
    const Solution ref = reference_solution(e->maze);
    const std::size_t n = ref.instructions.size();
    const std::size_t k = (i++ * 5) % (n + 1);
    script["responses"][e->id + "|*"] = prefix_text(ref, k);
    expected_sum += static_cast<double>(k) / static_cast<double>(n);
    expected_complete += k == n;
  }
  Fixture f(12, 0, script);
  const RunResult r = run(f.spec);
  EXPECT_NEAR(r.summaries[0].partial_accuracy, 100.0 * expected_sum / 12.0, 1e-9);
  EXPECT_NEAR(r.summaries[0].complete_accuracy, 100.0 * static_cast<double>(expected_complete) / 12.0, 1e-9);
}

TEST(Harness, RecordCountAndRerunIsIdempotent) {
  TempDir dir;
  MockExperimentOptions o;
  o.dir = dir.path();
  o.n_test = 8;
  o.n_shot = 6;
  const ExperimentSpec spec = prepare_mock_experiment(o);
  const RunResult first = run(spec);
  EXPECT_EQ(first.total_trials, 2u * 3u * 8u);
  EXPECT_EQ(first.executed, 48u);
  const std::string log1 = read_text_file(first.log_path);
  const std::string report1 = read_text_file(spec.output_dir / "report.txt");
  EXPECT_EQ(read_record_log(first.log_path).records.size(), 48u);

  const RunResult second = run(spec);
  EXPECT_EQ(second.executed, 0u);
  EXPECT_EQ(second.skipped, 48u);
  EXPECT_EQ(read_text_file(first.log_path), log1);
  EXPECT_EQ(read_text_file(spec.output_dir / "report.txt"), report1);
}

TEST(Harness, InterruptedRunResumesToSameLog) {
  TempDir a, b;
  MockExperimentOptions o;
  o.n_test = 6;
  o.dir = a.path();
  const ExperimentSpec whole = prepare_mock_experiment(o);
  run(whole);
  o.dir = b.path();
  ExperimentSpec split = prepare_mock_experiment(o);
  RunOptions stop;
  stop.stop_after = 12;
  const RunResult partial = run(split, stop);
  EXPECT_EQ(partial.executed, 12u);
  EXPECT_EQ(read_record_log(partial.log_path).records.size(), 12u);
  const RunResult rest = run(split);
  EXPECT_EQ(rest.skipped, 12u);
  EXPECT_EQ(rest.executed, 36u - 12u);
  EXPECT_EQ(read_text_file(rest.log_path), read_text_file(record_log_path(whole.output_dir)));
}

TEST(Harness, ConcurrencyDoesNotChangeLog) {
  TempDir a, b;
  MockExperimentOptions o;
  o.n_test = 10;
  o.dir = a.path();
  o.concurrency = 1;
  const ExperimentSpec serial = prepare_mock_experiment(o);
  o.dir = b.path();
  o.concurrency = 8;
  const ExperimentSpec parallel = prepare_mock_experiment(o);
  run(serial);
  run(parallel);
  EXPECT_EQ(read_text_file(record_log_path(serial.output_dir)), read_text_file(record_log_path(parallel.output_dir)));
}

TEST(Harness, TornTailIsDiscardedAndRerun) {
  TempDir dir;
  MockExperimentOptions o;
  o.dir = dir.path();
  o.n_test = 4;
  const ExperimentSpec spec = prepare_mock_experiment(o);
  const RunResult first = run(spec);
  const std::string full = read_text_file(first.log_path);

  // Cut the last record mid-line, as a crash during a write would.
  const auto last_start = full.rfind('\n', full.size() - 2) + 1;
  write_text_file(first.log_path, full.substr(0, last_start + 20));
  const RecordLog torn = read_record_log(first.log_path);
  EXPECT_TRUE(torn.torn_tail);
  EXPECT_EQ(torn.records.size(), first.total_trials - 1);
  const RunResult again = run(spec);
  EXPECT_EQ(again.executed, 1u);
  EXPECT_EQ(read_text_file(first.log_path), full);

  // A complete record whose newline never made it to disk is kept.
  write_text_file(first.log_path, full.substr(0, full.size() - 1));
  const RecordLog unterminated = read_record_log(first.log_path);
  EXPECT_FALSE(unterminated.torn_tail);
  EXPECT_TRUE(unterminated.missing_newline);
  EXPECT_EQ(run(spec).executed, 0u);
  EXPECT_EQ(read_text_file(first.log_path), full);

  // Damage in the middle is not silently repaired.
  std::string broken = full;
  broken.replace(broken.find('{', 10), 1, "#");
  write_text_file(first.log_path, broken);
  EXPECT_THROW(run(spec), DomainError);
}

TEST(Harness, ChangedPromptIsRefused) {
  TempDir dir;
  MockExperimentOptions o;
  o.dir = dir.path();
  o.n_test = 3;
  ExperimentSpec spec = prepare_mock_experiment(o);
  const RunResult first = run(spec);
  std::string log = read_text_file(first.log_path);
  const auto at = log.find("\"prompt_hash\":\"") + 15;
  log[at] = log[at] == '0' ? '1' : '0';
  write_text_file(first.log_path, log);
  EXPECT_THROW(run(spec), DomainError);
}

TEST(Harness, ProviderErrorsAreRecordedAsFailures) {
  Fixture f(5, 0, nlohmann::json::parse(R"({"responses": {}, "default": {"error": "rate-limited"}})"));
  const RunResult r = run(f.spec);
  EXPECT_EQ(r.executed, 5u);
  EXPECT_EQ(r.summaries[0].complete_accuracy, 0.0);
  EXPECT_EQ(r.summaries[0].faults.at(FaultKind::ProviderError), 5u);
  const std::string line = read_text_file(r.log_path).substr(0, read_text_file(r.log_path).find('\n'));
  const auto rec = nlohmann::json::parse(line);
  EXPECT_EQ(rec["error"]["kind"], "rate-limited");
  EXPECT_TRUE(rec["response"].is_null());
  EXPECT_NE(read_text_file(f.spec.output_dir / "report.txt").find("(5 of 5"), std::string::npos);
}

TEST(Harness, StoredHashesAreReproducible) {
  TempDir dir;
  MockExperimentOptions o;
  o.dir = dir.path();
  o.n_test = 4;
  const ExperimentSpec spec = prepare_mock_experiment(o);
  const RunResult r = run(spec);
  const Corpus corpus = load_corpus(spec.corpus);
  for (const auto& rec : read_record_log(r.log_path).records) {
    const Scenario sc = scenario_from_name(rec.scenario);
    EXPECT_EQ(recompute_prompt_hash(corpus, sc, rec.maze_id), rec.prompt_hash) << rec.key();
  }
}

TEST(Harness, ReportFromLogMatchesRun) {
  TempDir dir;
  MockExperimentOptions o;
  o.dir = dir.path();
  o.n_test = 6;
  const ExperimentSpec spec = prepare_mock_experiment(o);
  const RunResult r = run(spec);
  const Report rep = report_from_log(r.log_path);
  ASSERT_EQ(rep.summaries.size(), r.summaries.size());
  for (std::size_t i = 0; i < rep.summaries.size(); ++i) {
    EXPECT_EQ(rep.summaries[i].model, r.summaries[i].model);
    EXPECT_EQ(rep.summaries[i].complete_accuracy, r.summaries[i].complete_accuracy);
    EXPECT_EQ(rep.summaries[i].partial_accuracy, r.summaries[i].partial_accuracy);
  }
  EXPECT_EQ(rep.models, (std::vector<std::string>{"mock-oracle*", "mock-noisy"}));
  EXPECT_EQ(rep.scenarios, (std::vector<std::string>{"few-shot", "one-shot", "zero-shot"}));
  EXPECT_EQ(rep.complete.rows.size(), 2u);
  EXPECT_TRUE(fs::exists(spec.output_dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(spec.output_dir / "complete.csv"));
  EXPECT_TRUE(fs::exists(spec.output_dir / "partial.csv"));
}

TEST(Harness, MixedModesNeedAnOverride) {
  TempDir dir;
  MockExperimentOptions o;
  o.dir = dir.path();
  o.n_test = 3;
  ExperimentSpec spec = prepare_mock_experiment(o);
  spec.scenarios = {scenario_from_name("zero")};
  run(spec);
  spec.mode = ScoringMode::Execution;
  spec.scenarios = {scenario_from_name("one")};
  run(spec);  // a run reports in its own mode
  EXPECT_THROW(report_from_log(record_log_path(spec.output_dir)), DomainError);
  const Report rep = report_from_log(record_log_path(spec.output_dir), ScoringMode::Execution);
  EXPECT_EQ(rep.mode, ScoringMode::Execution);
  EXPECT_EQ(rep.summaries.size(), 4u);
}

TEST(Harness, SingleModelAndEmptyLog) {
  nlohmann::json script{{"responses", nlohmann::json::object()}, {"default", "1. Turn left\n"}};
  Fixture f(3, 0, script);
  run(f.spec);
  const Report rep = report_from_log(record_log_path(f.spec.output_dir));
  EXPECT_EQ(rep.complete.rows.size(), 1u);
  EXPECT_EQ(rep.scenarios.size(), 1u);
  EXPECT_THROW(build_report({}, std::nullopt), DomainError);
  TempDir empty;
  write_text_file(empty.path() / "records.jsonl", "");
  EXPECT_THROW(report_from_log(empty.path() / "records.jsonl"), DomainError);
}

TEST(Harness, CorpusMustSupportScenarios) {
  Fixture f(3, 0, nlohmann::json::parse(R"({"responses": {}, "default": ""})"), {scenario_from_name("one")});
  EXPECT_THROW(run(f.spec), DomainError);
}

TEST(Harness, SpecValidationAndCredentials) {
  Fixture f(2, 0, nlohmann::json::parse(R"({"responses": {}, "default": ""})"));
  ExperimentSpec bad = f.spec;
  bad.concurrency = 0;
  EXPECT_THROW(run(bad), DomainError);
  bad = f.spec;
  bad.providers.clear();
  EXPECT_THROW(run(bad), DomainError);
  bad = f.spec;
  bad.providers.push_back(bad.providers[0]);
  EXPECT_THROW(run(bad), DomainError);

  ExperimentSpec net = f.spec;
  ProviderConfig p;
  p.name = "remote";
  p.endpoint = "https://example.invalid/v1/chat/completions";
  p.model = "x";
  p.api_key_env = "MAZETEST_UNSET_KEY_FOR_TEST";
  net.providers.push_back(p);
  RunOptions opts;
  opts.getenv = [](const std::string&) { return std::nullopt; };
  try {
    run(net, opts);
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::Auth);
  }
  EXPECT_FALSE(fs::exists(record_log_path(net.output_dir)));
}

TEST(Harness, SpecFromJson) {
  TempDir dir;
  write_text_file(dir.path() / "providers.json",
                  R"({"providers": [{"name": "a", "kind": "mock", "script": "a.json"},
                                    {"name": "b", "kind": "mock", "script": "b.json"}]})");
  const auto spec = spec_from_json(nlohmann::json::parse(R"({
      "id": "exp1", "corpus": "c/corpus.json", "registry": "providers.json", "use": ["b"],
      "scenarios": ["zero-shot", {"name": "three-shot", "k": 3, "offset": 2}],
      "mode": "execution", "lenient_exit": true, "concurrency": 2, "repeats": 3, "limit": 5})"),
                                   dir.path());
  EXPECT_EQ(spec.id, "exp1");
  EXPECT_EQ(spec.corpus, dir.path() / "c/corpus.json");
  ASSERT_EQ(spec.providers.size(), 1u);
  EXPECT_EQ(spec.providers[0].name, "b");
  ASSERT_EQ(spec.scenarios.size(), 2u);
  EXPECT_EQ(spec.scenarios[1].k, 3u);
  EXPECT_EQ(spec.scenarios[1].offset, 2u);
  EXPECT_EQ(spec.mode, ScoringMode::Execution);
  EXPECT_TRUE(spec.sim.lenient_exit);
  EXPECT_EQ(spec.repeats, 3u);
  EXPECT_EQ(spec.limit, 5u);
  EXPECT_EQ(spec.output_dir, dir.path() / "runs" / "exp1");
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"corpus": "c", "registry": "providers.json", "use": ["zz"]})"),
                              dir.path()),
               DomainError);
}

TEST(Harness, RepeatsAndLimit) {
  nlohmann::json script{{"responses", nlohmann::json::object()}, {"default", ""}};
  Fixture f(6, 0, script);
  f.spec.repeats = 2;
  f.spec.limit = 4;
  const RunResult r = run(f.spec);
  EXPECT_EQ(r.total_trials, 8u);
  EXPECT_EQ(r.summaries[0].n, 8u);
  std::set<std::string> keys;
  for (const auto& rec : read_record_log(r.log_path).records) keys.insert(rec.key());
  EXPECT_EQ(keys.size(), 8u);
}

}  // namespace
}  // namespace mazetest
