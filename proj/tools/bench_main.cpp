#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biot/acceptance.hpp"
#include "biot/bench.hpp"
#include "biot/errors.hpp"

namespace {

std::string analysis_path(const std::string& out) {
  const std::string suffix = ".csv";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return out.substr(0, out.size() - suffix.size()) + ".analysis.csv";
  }
  return out + ".analysis.csv";
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const std::string& p : parts) {
    if (!s.empty()) s += ",";
    s += p;
  }
  return s;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& levels,
            const std::vector<std::string>& taus, const std::vector<std::string>& Ks,
            const std::vector<std::string>& nus, const std::vector<std::string>& preconds,
            bool analysis, const std::string& out_override) {
  biot::BenchConfig cfg = biot::load_bench_config(config_path);
  if (!levels.empty()) biot::apply_override(cfg, "levels", join(levels));
  if (!taus.empty()) biot::apply_override(cfg, "tau", join(taus));
  if (!Ks.empty()) biot::apply_override(cfg, "K", join(Ks));
  if (!nus.empty()) biot::apply_override(cfg, "nu", join(nus));
  if (!preconds.empty()) biot::apply_override(cfg, "precond", join(preconds));
  if (analysis) biot::apply_override(cfg, "analysis", "on");
  if (!out_override.empty()) biot::apply_override(cfg, "out", out_override);

  const std::vector<biot::BenchRow> rows = biot::run_benchmark(cfg);
  {
    std::ofstream f(cfg.out);
    if (!f) throw biot::IoError("cannot open '" + cfg.out + "' for writing");
    biot::write_results_csv(rows, f);
  }
  if (cfg.analysis) {
    const std::string path = analysis_path(cfg.out);
    std::ofstream f(path);
    if (!f) throw biot::IoError("cannot open '" + path + "' for writing");
    biot::write_analysis_csv(rows, f);
  }
  std::cout << biot::render_markdown_tables(rows, &cfg);
  std::cerr << "wrote " << cfg.out;
  if (cfg.analysis) std::cerr << " and " << analysis_path(cfg.out);
  std::cerr << "\n";
  return 0;
}

int cmd_tables(const std::string& results_path) {
  const std::vector<biot::BenchRow> rows = biot::load_results_csv(results_path);
  std::cout << biot::render_markdown_tables(rows);
  return 0;
}

int cmd_verify(const std::string& results_path) {
  bool ok = true;
  if (!results_path.empty()) {
    const std::vector<std::string> issues = biot::verify_results_file(results_path);
    for (const std::string& s : issues) std::cout << "ISSUE  " << s << "\n";
    std::cout << results_path << ": "
              << (issues.empty() ? "clean" : std::to_string(issues.size()) + " issue(s)") << "\n";
    ok = ok && issues.empty();
  }
  const std::vector<biot::CriterionResult> results = biot::run_acceptance(std::cout);
  ok = ok && biot::all_passed(results);
  std::cout << (ok ? "ALL CHECKS PASSED" : "CHECKS FAILED") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark and verification driver for block-preconditioned consolidation solves"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a sweep from a config file and write a results CSV");
  std::string config_path;
  run->add_option("config", config_path, "plain-text key = value config file")
      ->required()
      ->check(CLI::ExistingFile);
  std::vector<std::string> levels, taus, Ks, nus, preconds;
  run->add_option("--h-levels", levels, "refinement levels override, e.g. 1 2 3");
  run->add_option("--tau", taus, "time step override");
  run->add_option("--K", Ks, "hydraulic conductivity override");
  run->add_option("--nu", nus, "Poisson ratio override");
  run->add_option("--precond", preconds, "preconditioner subset of B_D B_L B_U M_D M_L M_U");
  bool analysis = false;
  run->add_flag("--analysis", analysis, "attach dense spectral measurements where affordable");
  std::string out_override;
  run->add_option("--out", out_override, "results CSV path (overrides the config)");

  auto* tables = app.add_subcommand("tables", "Render markdown tables from a results CSV");
  std::string results_path;
  tables->add_option("results", results_path, "results CSV")->required()->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite; exit 0 iff all pass");
  std::string verify_path;
  verify->add_option("results", verify_path, "results CSV to sanity-check first")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, levels, taus, Ks, nus, preconds, analysis, out_override);
    }
    if (tables->parsed()) return cmd_tables(results_path);
    if (verify->parsed()) return cmd_verify(verify_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
