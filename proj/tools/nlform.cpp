// Scenario-driven command line for the nonlocal-form toolkit. Subcommands
// mirror the tasks; `all` runs whatever the scenario declares. Reports are
// deterministic; timings go to stderr only.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nlform/runner.hpp"

namespace {

int thread_count_from_env() {
  const char* env = std::getenv("NLFORM_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n > 0 ? n : 1;
}

std::optional<nlform::Scenario> load_scenario(const std::string& configPath,
                                              const std::string& builtinName) {
  if (!configPath.empty()) {
    std::ifstream is(configPath);
    if (!is) {
      std::cerr << "error: cannot open config " << configPath << "\n";
      return std::nullopt;
    }
    std::stringstream ss;
    ss << is.rdbuf();
    nlform::ParseResult res = nlform::parse_scenario_text(ss.str());
    if (!res.ok()) {
      std::cerr << "invalid scenario config:\n";
      for (const auto& e : res.errors) std::cerr << "  - " << e << "\n";
      return std::nullopt;
    }
    return res.scenario;
  }
  auto s = nlform::find_scenario(builtinName);
  if (!s) {
    std::cerr << "error: unknown built-in scenario '" << builtinName << "' (see `nlform list`)\n";
    return std::nullopt;
  }
  return s;
}

int run_and_emit(nlform::Scenario s, const std::string& outDir, const std::string& format,
                 std::uint64_t seed, int threads, bool dumpForm) {
  s.seed = seed;
  s.threads = threads;
  nlform::finalize_echo(s);
  auto t0 = std::chrono::steady_clock::now();
  nlform::RunReport report = nlform::run(s);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  std::cerr << "[nlform] scenario '" << s.name << "' finished in " << ms << " ms\n";

  std::vector<std::filesystem::path> files;
  if (format == "json" || format == "both")
    for (auto& p : nlform::emit(report, nlform::EmitFormat::Json, outDir)) files.push_back(p);
  if (format == "csv" || format == "both")
    for (auto& p : nlform::emit(report, nlform::EmitFormat::CsvTables, outDir))
      files.push_back(p);
  for (const auto& p : files) std::cout << p.string() << "\n";

  if (dumpForm) {
    nlform::Grid g = nlform::make_grid(s.dimension(), s.gridRadius, s.pointsPerAxis);
    nlform::DiscreteForm form = nlform::assemble(s.potential, s.kernel, s.weight, g,
                                                 s.formKind, {s.tol.quadTol, s.threads});
    std::ofstream os(std::filesystem::path(outDir) / "form_matrix.txt");
    nlform::dump_form(form, os);
    std::cout << (std::filesystem::path(outDir) / "form_matrix.txt").string() << "\n";
  }

  for (const auto& t : report.tasks)
    if (t.errored) std::cerr << "[nlform] task '" << t.task << "' failed: " << t.error << "\n";
  return report.any_errored() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for weighted Poincare inequalities of nonlocal forms"};
  app.require_subcommand(1);

  std::string config, scenarioName = "steep-linear-tempered";
  std::string outDir = "out", format = "json";
  std::uint64_t seed = 12345;
  int threads = thread_count_from_env();
  bool dumpForm = false;

  auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "scenario config file (JSON)");
    cmd->add_option("--scenario", scenarioName, "built-in scenario name");
    cmd->add_option("--out", outDir, "output directory");
    cmd->add_option("--format", format, "json | csv | both")
        ->check(CLI::IsMember({"json", "csv", "both"}));
    cmd->add_option("--seed", seed, "seed for randomized diagnostics");
    cmd->add_option("--threads", threads, "worker threads (or NLFORM_THREADS)");
    cmd->add_flag("--dump-form", dumpForm, "dump the assembled form matrix as text");
  };

  std::vector<std::pair<CLI::App*, std::string>> taskCommands;
  for (const char* task :
       {"check", "gap", "lyapunov", "sharpness", "beta", "concentration"}) {
    CLI::App* cmd = app.add_subcommand(task, std::string("run the ") + task + " task only");
    addCommon(cmd);
    taskCommands.emplace_back(cmd, task);
  }
  CLI::App* all = app.add_subcommand("all", "run every task the scenario declares");
  addCommon(all);
  CLI::App* list = app.add_subcommand("list", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& s : nlform::builtin_scenarios()) {
      std::cout << s.name << "  [";
      for (size_t i = 0; i < s.tasks.size(); ++i)
        std::cout << (i ? "," : "") << s.tasks[i];
      std::cout << "]\n";
    }
    return 0;
  }

  auto scenario = load_scenario(config, scenarioName);
  if (!scenario) return 2;

  for (auto& [cmd, task] : taskCommands)
    if (cmd->parsed()) scenario->tasks = {task};

  return run_and_emit(std::move(*scenario), outDir, format, seed, threads, dumpForm);
}
