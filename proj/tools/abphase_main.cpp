#include <abphase/errors.hpp>
#include <abphase/report.hpp>
#include <abphase/scenario.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace abphase;

namespace {

fs::path fixture_dir() {
  if (const char* env = std::getenv("ABPHASE_FIXTURES"); env && *env) return env;
  return ABPHASE_FIXTURE_DIR;
}

// A path that exists wins; otherwise look the name up among the fixtures.
std::string resolve(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const auto& cand : {fixture_dir() / arg, fixture_dir() / (arg + ".json")})
    if (fs::exists(cand)) return cand.string();
  return arg;
}

struct Overrides {
  std::string units;
  double rel_tol = 0;
  int threads = 0;
};

ScenarioConfig load(const std::string& arg, const Overrides& o) {
  ScenarioConfig cfg = load_scenario(resolve(arg));
  if (!o.units.empty()) cfg.units = unit_system_from_string(o.units);
  if (o.rel_tol > 0) cfg.quadrature.rel_tol = o.rel_tol;
  if (o.threads > 0) cfg.quadrature.threads = o.threads;
  validate(cfg.quadrature);
  return cfg;
}

void write_file(const std::string& path, auto&& writer) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot write");
  writer(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aharonov-Bohm phase calculator"};
  app.require_subcommand(1);

  Overrides ov;
  std::string file, csv;
  bool diagnostics = false;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("file", file, "scenario file or fixture name")->required();
    sub->add_option("--csv", csv, "also write results as CSV to this path");
    sub->add_option("--units", ov.units, "override the scenario's unit system")
        ->check(CLI::IsMember({"si", "natural"}));
    sub->add_option("--rel-tol", ov.rel_tol, "override the relative quadrature tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", ov.threads, "worker threads for cubature")->check(CLI::PositiveNumber);
    sub->add_flag("--diagnostics", diagnostics, "report self-term magnitude and field-line statistics");
  };

  auto* run = app.add_subcommand("run", "run every method of a scenario");
  add_run_flags(run);
  auto* sweep = app.add_subcommand("sweep", "run a scenario over its sweep values");
  add_run_flags(sweep);
  auto* check = app.add_subcommand("validate", "parse and validate a scenario file");
  check->add_option("file", file, "scenario file or fixture name")->required();
  auto* list = app.add_subcommand("list-fixtures", "list the scenario files in the fixture directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      std::vector<std::string> names;
      if (fs::is_directory(fixture_dir()))
        for (const auto& e : fs::directory_iterator(fixture_dir()))
          if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
      std::sort(names.begin(), names.end());
      for (const auto& n : names) {
        std::string desc;
        try {
          const auto cfg = load_scenario((fixture_dir() / (n + ".json")).string());
          desc = std::string(to_string(cfg.kind)) + (cfg.sweep ? ", sweep over " + cfg.sweep->parameter : "");
        } catch (const Error& e) {
          desc = std::string("invalid: ") + e.what();
        }
        std::cout << n << "  (" << desc << ")\n";
      }
      return 0;
    }
    if (*check) {
      const auto cfg = load_scenario(resolve(file));
      std::cout << cfg.name << ": ok (" << to_string(cfg.kind) << ", " << cfg.methods.size() << " methods"
                << (cfg.sweep ? ", " + std::to_string(cfg.sweep->values.size()) + " sweep values" : "") << ")\n";
      return 0;
    }
    const ScenarioConfig cfg = load(file, ov);
    const RunOptions opt{diagnostics};
    if (*run) {
      const auto rep = run_scenario(cfg, opt);
      print_table(std::cout, rep, diagnostics);
      if (!csv.empty()) write_file(csv, [&](std::ostream& os) { write_csv(os, rep); });
      return rep.all_converged() ? 0 : 1;
    }
    const auto rep = run_sweep(cfg, opt);
    print_sweep(std::cout, rep, diagnostics);
    if (!csv.empty()) write_file(csv, [&](std::ostream& os) { write_csv(os, rep); });
    return rep.all_converged() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
