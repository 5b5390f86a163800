#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fembem/experiments.hpp"
#include "fembem/specfun.hpp"

using namespace fembem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void absorb(Outcome& o, const ExperimentResult& r, const std::string& tag) {
  for (const Verdict& v : r.verdicts) {
    if (!v.asserted) continue;
    if (!v.pass) {
      o.pass = false;
      o.detail += "[" + tag + "] " + v.name + ": " + v.detail + "; ";
    }
  }
  if (!o.pass) return;
  std::string d;
  for (const Verdict& v : r.verdicts)
    if (v.asserted && !v.detail.empty()) d += (d.empty() ? "" : ", ") + v.detail;
  o.detail += "[" + tag + "] " + d + "; ";
}

Outcome experiment(const std::string& name, std::initializer_list<Formulation> forms) {
  Outcome o;
  for (Formulation f : forms) {
    ExperimentConfig c = default_config(name);
    c.formulation = f;
    absorb(o, run_experiment(name, c), to_string(f));
  }
  return o;
}

Outcome special_functions() {
  Outcome o;
  std::ifstream in(std::string(FEMBEM_TEST_DATA) + "/bessel_golden.txt");
  if (!in) return {false, "golden data missing"};
  double worst_j = 0, worst_y = 0;
  int n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    int order;
    double z, j, y;
    s >> order >> z >> j >> y;
    double env = std::hypot(j, y);
    worst_j = std::max(worst_j, std::abs(bessel_J(order, z) - j) / std::max(std::abs(j), 1e-3 * env));
    worst_y = std::max(worst_y, std::abs(bessel_Y(order, z) - y) / std::abs(y));
    ++n;
  }
  double worst_w = 0;
  for (int i = 0; i <= 60; ++i) {
    double x = 0.1 * std::pow(1000.0, i / 60.0);
    double w = bessel_J(0, x) * bessel_Y(1, x) - bessel_J(1, x) * bessel_Y(0, x);
    double ref = -2.0 / (std::numbers::pi * x);
    worst_w = std::max(worst_w, std::abs(w - ref) / std::abs(ref));
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_g = 0;
  for (int i = 0; i < 50; ++i) {
    Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
    if (std::hypot(x[0] - y[0], x[1] - y[1]) < 0.05) continue;
    double k = 10.0 * (u(rng) + 1.0);
    KernelEval g = green_kernel(k, x, y);
    for (int d = 0; d < 2; ++d) {
      Vec2 yp = y, ym = y;
      yp[d] += 1e-6;
      ym[d] -= 1e-6;
      cplx fd = (green_kernel(k, x, yp).value - green_kernel(k, x, ym).value) / 2e-6;
      worst_g = std::max(worst_g, std::abs(fd - g.grad_y[d]) / std::max(std::abs(g.grad_y[d]), 1e-2));
    }
  }
  o.pass = n > 150 && worst_j <= 1e-12 && worst_y <= 1e-11 && worst_w <= 1e-11 && worst_g <= 1e-6;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d golden values, J %.2e Y %.2e, Wronskian %.2e, gradient %.2e", n, worst_j,
                worst_y, worst_w, worst_g);
  o.detail = buf;
  return o;
}

}  // namespace

int main() {
  using C = Formulation;
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"special functions against oracle values", special_functions},
      {"jump relations of the potentials", [] { return experiment("jumps", {C::Conforming}); }},
      {"Calderon identity", [] { return experiment("calderon", {C::Conforming}); }},
      {"Garding inequality uniform in k", [] { return experiment("garding", {C::Conforming, C::DG}); }},
      {"k-uniform continuity of T + Theta", [] { return experiment("continuity", {C::Conforming, C::DG}); }},
      {"convergence rate and best approximation", [] { return experiment("converge", {C::Conforming, C::DG}); }},
      {"quasi-optimality under kh/p resolution", [] { return experiment("quasiopt", {C::Conforming, C::DG}); }},
      {"discrete adjoint consistency", [] { return experiment("adjoint", {C::DG}); }},
      {"frequency filter splitting and bounds", [] { return experiment("filters", {C::Conforming}); }},
      {"inverse inequality uniform in h and p", [] { return experiment("inverse", {C::Conforming}); }},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu: %s (%.1fs)  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), t,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
