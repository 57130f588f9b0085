// mazetest: command-line front end for corpus generation, rendering,
// solving, scoring single answers and running experiments.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mazetest/corpus_io.hpp"
#include "mazetest/harness.hpp"
#include "mazetest/metrics.hpp"
#include "mazetest/mock.hpp"

namespace {

using namespace mazetest;

struct Globals {
  std::string workdir = ".";
  fs::path at(const std::string& p) const { return fs::path(p).is_absolute() ? fs::path(p) : fs::path(workdir) / p; }
};

std::string describe_step(const Instruction& i) { return canonical_render(i); }

std::string pose_text(const Pose& p) { return std::to_string(p.cell) + " " + heading_letter(p.heading); }

int cmd_gen(const Globals& g, const GenConfig& cfg, std::size_t n_test, std::size_t n_shot, const std::string& out) {
  const Corpus c = generate_corpus(cfg, n_test, n_shot);
  const fs::path manifest = save_corpus(c, g.at(out));
  std::cout << "wrote " << c.entries.size() << " mazes to " << manifest.string() << "\n";
  return 0;
}

int cmd_render(const Globals& g, const std::string& maze_file, bool with_solution) {
  const Maze m = load_maze_file(g.at(maze_file));
  std::vector<Cell> path;
  if (with_solution) path = reference_solution(m).cells;
  std::cout << render_ascii(m, path);
  return 0;
}

int cmd_solve(const Globals& g, const std::string& maze_file) {
  std::cout << render_solution_text(reference_solution(load_maze_file(g.at(maze_file))).instructions);
  return 0;
}

int cmd_serialize(const Globals& g, const std::string& maze_file, std::optional<std::uint64_t> seed) {
  Maze m = [&] {
    if (!maze_file.empty()) return load_maze_file(g.at(maze_file));
    GenConfig cfg;
    cfg.seed = seed.value_or(0);
    return generate(cfg);
  }();
  std::cout << serialize_text(m);
  return 0;
}

int cmd_verify(const Globals& g, const std::string& maze_file, const std::string& answer_file, ScoringMode mode,
               bool lenient) {
  const Maze m = load_maze_file(g.at(maze_file));
  const ParsedResponse parsed = parse_response(read_text_file(g.at(answer_file)));
  const SimOptions sim{lenient};
  const RunScore s = score_run(m, parsed, mode, sim);
  char partial[32];
  std::snprintf(partial, sizeof partial, "%.3f", s.partial);
  std::cout << "complete=" << (s.complete ? "true" : "false") << " partial=" << partial << "\n";
  std::cout << "mode=" << scoring_mode_name(mode) << " first_fault=";
  if (s.first_fault) {
    std::cout << fault_kind_name(s.first_fault->kind) << "@" << s.first_fault->index + 1 << "\n";
  } else {
    std::cout << "none\n";
  }
  for (const auto& r : parsed.rejected_lines)
    std::cout << "rejected line " << r.line << " (" << reject_reason_name(r.reason) << "): " << r.text << "\n";

  const auto usable = parsed.usable_prefix();
  const ExecutionTrace trace = execute(m, usable, sim);
  std::cout << "trace:\n";
  std::size_t pose_i = 0;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    std::cout << "  " << i + 1 << ". " << describe_step(usable[i]) << " -> ";
    if (const FailedAt* f = trace.failure(); f && f->index == i) {
      std::cout << fault_kind_name(f->fault.kind) << ": " << f->fault.detail << "\n";
      break;
    }
    if (std::holds_alternative<ExitAt>(usable[i])) {
      std::cout << "exited\n";
    } else {
      std::cout << pose_text(trace.poses[pose_i++]) << "\n";
    }
  }
  if (const FailedAt* f = trace.failure(); f && f->index >= usable.size())
    std::cout << "  end: " << fault_kind_name(f->fault.kind) << ": " << f->fault.detail << "\n";
  return 0;
}

struct EvalOverrides {
  std::optional<std::string> mode;
  std::vector<std::string> scenarios;
  std::optional<std::size_t> concurrency;
  std::optional<std::size_t> limit;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<std::string> output;
  bool lenient_exit = false;

  void apply(ExperimentSpec& spec, const Globals& g) const {
    if (mode) spec.mode = scoring_mode_from_name(*mode);
    if (!scenarios.empty()) {
      spec.scenarios.clear();
      for (const auto& s : scenarios) spec.scenarios.push_back(scenario_from_name(s));
    }
    if (concurrency) spec.concurrency = *concurrency;
    if (limit) spec.limit = *limit;
    if (seed) spec.seed = *seed;
    if (repeats) spec.repeats = *repeats;
    if (output) spec.output_dir = g.at(*output);
    if (lenient_exit) spec.sim.lenient_exit = true;
    spec.validate();
  }
};

int print_run(const RunResult& r, const fs::path& out_dir) {
  std::cout << read_text_file(out_dir / "report.txt");
  std::cout << "\n" << r.executed << " trial(s) run, " << r.skipped << " already logged, " << r.total_trials
            << " total; log " << r.log_path.string() << "\n";
  return 0;
}

int cmd_eval(const Globals& g, const std::string& spec_file, const EvalOverrides& ov) {
  ExperimentSpec spec = load_spec(g.at(spec_file), fs::path(g.workdir));
  ov.apply(spec, g);
  return print_run(run(spec), spec.output_dir);
}

int cmd_mock_eval(const Globals& g, MockExperimentOptions opts, const std::string& out, const EvalOverrides& ov) {
  opts.dir = g.at(out);
  if (ov.seed) opts.seed = *ov.seed;
  if (ov.concurrency) opts.concurrency = *ov.concurrency;
  if (ov.limit) opts.limit = *ov.limit;
  if (ov.mode) opts.mode = scoring_mode_from_name(*ov.mode);
  opts.lenient_exit = ov.lenient_exit;
  if (!ov.scenarios.empty()) {
    opts.scenarios.clear();
    for (const auto& s : ov.scenarios) opts.scenarios.push_back(scenario_from_name(s));
  }
  ExperimentSpec spec = prepare_mock_experiment(opts);
  return print_run(run(spec), spec.output_dir);
}

int cmd_report(const Globals& g, const std::string& log, const std::optional<std::string>& mode,
               const std::string& format, const std::string& out) {
  std::optional<ScoringMode> m;
  if (mode) m = scoring_mode_from_name(*mode);
  const Report rep = report_from_log(g.at(log), m);
  if (!out.empty()) write_report_files(rep, g.at(out));
  if (format == "csv") {
    std::cout << rep.summary_csv;
  } else {
    std::cout << rep.text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maze navigation test: generate mazes, score first-person route instructions, run model experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--workdir", g.workdir, "Base directory for relative paths")->capture_default_str();

  auto add_mode = [](CLI::App* c, std::optional<std::string>& mode) {
    c->add_option("--mode", mode, "Scoring mode")->check(CLI::IsMember({"oracle-match", "execution"}));
  };

  // gen
  GenConfig gen_cfg;
  std::size_t n_test = 34, n_shot = 6;
  std::string gen_out;
  bool allow_ties = false, any_sides = false;
  auto* gen = app.add_subcommand("gen", "Generate a maze corpus (manifest plus description files)");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_cfg.seed, "Corpus seed")->capture_default_str();
  gen->add_option("--tests", n_test, "Number of test mazes")->capture_default_str();
  gen->add_option("--shots", n_shot, "Number of example mazes")->capture_default_str();
  gen->add_option("--rows", gen_cfg.rows)->capture_default_str();
  gen->add_option("--cols", gen_cfg.cols)->capture_default_str();
  gen->add_option("--walls", gen_cfg.wall_count)->capture_default_str();
  gen->add_option("--min-path", gen_cfg.min_path, "Minimum entrance-to-exit distance in moves")->capture_default_str();
  gen->add_option("--max-path", gen_cfg.max_path, "Maximum entrance-to-exit distance in moves")->capture_default_str();
  gen->add_flag("--allow-ties", allow_ties, "Do not require a unique optimal solution");
  gen->add_flag("--any-sides", any_sides, "Place openings on any boundary sides");

  // render / solve / serialize
  std::string maze_file;
  bool with_solution = false;
  auto* render = app.add_subcommand("render", "Print an ASCII drawing of a maze");
  render->add_option("--maze", maze_file, "Maze description file")->required();
  render->add_flag("--solution", with_solution, "Mark the reference route");
  auto* solve = app.add_subcommand("solve", "Print the reference solution");
  solve->add_option("--maze", maze_file, "Maze description file")->required();
  std::optional<std::uint64_t> ser_seed;
  auto* serialize = app.add_subcommand("serialize", "Print the canonical text description of a maze");
  auto* ser_maze = serialize->add_option("--maze", maze_file, "Maze description file");
  serialize->add_option("--seed", ser_seed, "Generate with default settings from this seed instead")->excludes(ser_maze);

  // verify
  std::string answer_file;
  std::optional<std::string> verify_mode;
  bool verify_lenient = false;
  auto* verify = app.add_subcommand("verify", "Score one answer file against a maze");
  verify->add_option("--maze", maze_file, "Maze description file")->required();
  verify->add_option("--answer", answer_file, "Answer text file")->required();
  add_mode(verify, verify_mode);
  verify->add_flag("--lenient-exit", verify_lenient, "Do not check the heading at the exit");

  // eval / mock-eval
  EvalOverrides ov;
  auto add_overrides = [&](CLI::App* c) {
    add_mode(c, ov.mode);
    c->add_option("--scenario", ov.scenarios, "Scenarios to run (zero, one, few)")
        ->check(CLI::IsMember({"zero", "one", "few", "zero-shot", "one-shot", "few-shot"}));
    c->add_option("--concurrency", ov.concurrency, "Worker count")->check(CLI::PositiveNumber);
    c->add_option("--limit", ov.limit, "Only the first N test mazes");
    c->add_option("--seed", ov.seed, "Experiment seed");
    c->add_flag("--lenient-exit", ov.lenient_exit, "Do not check the heading at the exit");
  };
  std::string spec_file;
  auto* eval = app.add_subcommand("eval", "Run an experiment from a spec file");
  eval->add_option("--spec", spec_file, "Experiment spec (JSON)")->required();
  eval->add_option("--repeats", ov.repeats, "Runs per trial")->check(CLI::PositiveNumber);
  eval->add_option("--output", ov.output, "Output directory");
  add_overrides(eval);

  MockExperimentOptions mock_opts;
  std::string mock_out = "mock-eval";
  auto* mock = app.add_subcommand("mock-eval", "Run the full pipeline against two scripted mock models");
  mock->add_option("--out", mock_out, "Experiment directory")->capture_default_str();
  mock->add_option("--tests", mock_opts.n_test, "Test mazes when generating the corpus")->capture_default_str();
  mock->add_option("--shots", mock_opts.n_shot, "Example mazes when generating the corpus")->capture_default_str();
  add_overrides(mock);

  // report
  std::string log_file, report_format = "text", report_out;
  std::optional<std::string> report_mode;
  auto* report = app.add_subcommand("report", "Render tables from a record log");
  report->add_option("--log", log_file, "records.jsonl")->required();
  report->add_option("--format", report_format)->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
  report->add_option("--out", report_out, "Also write report files to this directory");
  add_mode(report, report_mode);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "mazetest: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*gen) {
      gen_cfg.require_unique_optimal = !allow_ties;
      gen_cfg.opposite_sides = !any_sides;
      return cmd_gen(g, gen_cfg, n_test, n_shot, gen_out);
    }
    if (*render) return cmd_render(g, maze_file, with_solution);
    if (*solve) return cmd_solve(g, maze_file);
    if (*serialize) {
      if (maze_file.empty() && !ser_seed) throw DomainError("serialize needs --maze or --seed");
      return cmd_serialize(g, maze_file, ser_seed);
    }
    if (*verify)
      return cmd_verify(g, maze_file, answer_file,
                        verify_mode ? scoring_mode_from_name(*verify_mode) : ScoringMode::OracleMatch, verify_lenient);
    if (*eval) return cmd_eval(g, spec_file, ov);
    if (*mock) return cmd_mock_eval(g, mock_opts, mock_out, ov);
    if (*report) return cmd_report(g, log_file, report_mode, report_format, report_out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "mazetest: error: " << msg << "\n";
    return 1;
  }
  return 0;
}
