#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "gkdv/lab.hpp"

namespace {

using gkdv::Json;

Json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  return Json::parse(in);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const std::string& file, const std::string& out, int stride, bool strict) {
  std::vector<std::string> warnings;
  gkdv::ScenarioConfig cfg = gkdv::load_scenario(file, strict, &warnings);
  if (stride > 0) cfg.evolve.observer_stride = stride;
  print_warnings(warnings);
  const std::string dir = !out.empty() ? out : (!cfg.output.empty() ? cfg.output : "out");
  const auto t0 = std::chrono::steady_clock::now();
  const gkdv::RunArtifact art = gkdv::run_scenario(cfg);
  gkdv::write_artifact(art, dir);
  for (const gkdv::MonitorVerdict& v : art.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.monitor << ": " << v.detail << "\n";
  std::cout << "artifacts in " << dir << " (" << seconds_since(t0) << " s)\n";
  return art.pass() ? 0 : 1;
}

int cmd_sweep(const std::string& file, const std::string& out, int stride, int workers,
              bool strict) {
  std::vector<std::string> warnings;
  Json j = read_json(file);
  if (stride > 0 && j.contains("base")) j["base"]["evolve"]["observer_stride"] = stride;
  const gkdv::SweepConfig sc = gkdv::parse_sweep(j, strict, &warnings);
  print_warnings(warnings);
  const std::string dir = !out.empty() ? out : sc.base.value("output", std::string("sweep_out"));
  const auto t0 = std::chrono::steady_clock::now();
  const gkdv::SweepResult res = gkdv::sweep(sc, workers, dir);
  gkdv::write_sweep(res, sc, dir);
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const gkdv::SweepPoint& p = res.points[i];
    const bool pass = p.ok && p.summary.value("pass", false);
    std::cout << (pass ? "PASS " : "FAIL ") << "point " << i << " " << p.parameters.dump();
    if (!p.ok) std::cout << " error: " << p.error;
    std::cout << "\n";
  }
  std::cout << "slopes " << res.slopes.dump() << "\n";
  std::cout << "artifacts in " << dir << " (" << seconds_since(t0) << " s)\n";
  return res.pass() ? 0 : 1;
}

int cmd_verify() {
  bool all = true;
  for (const gkdv::VerifyLine& l : gkdv::verify_suite()) {
    std::cout << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << "\n";
    all = all && l.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soliton stability lab for the generalized KdV equation"};
  app.require_subcommand(1);
  std::string out;
  int workers = 1;
  int stride = 0;
  bool strict = false;
  app.add_option("--out", out, "Output directory");
  app.add_option("--workers", workers, "Parallel runs in a sweep")->check(CLI::PositiveNumber);
  app.add_option("--observer-stride", stride, "Steps between observations")
      ->check(CLI::PositiveNumber);
  app.add_flag("--strict", strict, "Reject unknown keys; warnings become errors");

  std::string run_file;
  CLI::App* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", run_file, "Scenario JSON")->required();
  run->fallthrough();
  std::string sweep_file;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("config", sweep_file, "Sweep JSON")->required();
  sweep->fallthrough();
  CLI::App* verify = app.add_subcommand("verify", "Built-in identity and coercivity checks");
  verify->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_file, out, stride, strict);
    if (*sweep) return cmd_sweep(sweep_file, out, stride, workers, strict);
    if (*verify) return cmd_verify();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
