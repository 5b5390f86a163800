#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fembem/exec.hpp"
#include "fembem/experiments.hpp"
#include "fembem/output.hpp"

using namespace fembem;

namespace {

struct Options {
  std::string config, out;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run(const std::string& name, const Options& o) {
  ExperimentConfig c = default_config(name);
  if (!o.config.empty()) c = load_config(o.config, c);
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.seed_set) c.seed = o.seed;
  if (o.threads > 0) set_thread_count(o.threads);
  ExperimentResult res = run_experiment(name, c);
  std::filesystem::create_directories(c.out_dir);
  const std::string base = (std::filesystem::path(c.out_dir) / name).string();
  emit_results(res.records, OutputFormat::Csv, base + ".csv");
  emit_results(res.records, OutputFormat::Json, base + ".json", res.verdicts);
  if (name == "converge" || name == "quasiopt") emit_results(res.records, OutputFormat::Svg, base + ".svg");
  {
    std::ofstream t(base + "_timings.csv");
    t << timings_to_csv(res.records);
  }
  for (const Verdict& v : res.verdicts)
    std::printf("%s  %s%s%s\n", v.pass ? "PASS" : (v.asserted ? "FAIL" : "INFO"), v.name.c_str(),
                v.detail.empty() ? "" : "  ", v.detail.c_str());
  std::printf("results in %s.{csv,json}\n", base.c_str());
  return res.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FEM-BEM coupling benchmark harness for the Helmholtz transmission problem"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON config; missing keys keep the preset of the subcommand")
      ->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", o.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  auto* seed = app.add_option("--seed", o.seed, "RNG seed");
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"converge", "h-convergence against the exact solution"},
      {"quasiopt", "quasi-optimality ratios over the k sweep with a negative control"},
      {"garding", "Garding eigenvalues over the k sweep"},
      {"continuity", "energy-norm operator norms of T and T + Theta over the k sweep"},
      {"filters", "frequency filters on the circle"},
      {"jumps", "jump relations of the layer potentials"},
      {"calderon", "Calderon identity residual"},
      {"adjoint", "adjoint consistency of the discrete dual problem"},
      {"inverse", "inverse-inequality constant"},
  };
  for (const auto& [name, help] : subs) {
    auto* sc = app.add_subcommand(name, help);
    sc->fallthrough();
  }
  CLI11_PARSE(app, argc, argv);
  o.seed_set = seed->count() > 0;
  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
