#include <CLI11.hpp>
#include <chrono>
#include <cstdio>

#include "fembem/assembly.hpp"
#include "fembem/exec.hpp"
#include "fembem/filters.hpp"

using namespace fembem;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

double max_diff(const RSpMat& a, const RSpMat& b) { return RMatrix(a - b).cwiseAbs().maxCoeff(); }

void row(const char* name, double ts, double tp, double diff) {
  std::printf("%-28s %10.4f %10.4f %8.2f %12.3e\n", name, ts, tp, ts / tp, diff);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial reference path against the OpenMP path of the assembly kernels"};
  int level = 3, p = 2, reps = 3, threads = 0;
  double k = 4.0;
  app.add_option("--level", level, "mesh level")->check(CLI::Range(0, 5));
  app.add_option("--p", p, "polynomial degree")->check(CLI::Range(1, 6));
  app.add_option("--k", k, "wavenumber");
  app.add_option("--reps", reps, "repetitions (best time reported)")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  auto mesh = build_disk_mesh(make_circle(0.4), level, single_subdomain(1.5));
  auto bm = induced_boundary_mesh(mesh);
  std::printf("level %d  p %d  k %g  threads %d  elements %d  boundary elements %d\n", level, p, k,
              thread_count(), mesh.num_elements(), bm.size());
  std::printf("%-28s %10s %10s %8s %12s\n", "kernel", "serial[s]", "omp[s]", "speedup", "max|diff|");

  for (auto f : {Formulation::Conforming, Formulation::DG}) {
    auto sp = make_spaces(mesh, bm, f, p);
    VolumeForms a, b;
    double ts = best_of(reps, [&] { a = assemble_volume_forms(k, mesh, sp, {}, ExecPolicy::Serial); });
    double tp = best_of(reps, [&] { b = assemble_volume_forms(k, mesh, sp, {}, ExecPolicy::Parallel); });
    double d = std::max({max_diff(a.S, b.S), max_diff(a.Mn, b.Mn), max_diff(a.Mb, b.Mb)});
    if (f == Formulation::DG) d = std::max({d, max_diff(a.Jalpha, b.Jalpha), max_diff(a.Avg, b.Avg)});
    row(f == Formulation::DG ? "volume forms (dG)" : "volume forms (conforming)", ts, tp, d);
  }

  auto sp = make_spaces(mesh, bm, Formulation::Conforming, p);
  BemOperators a, b;
  double ts = best_of(reps, [&] { a = assemble_bem(k, bm, sp.W, sp.Z, ExecPolicy::Serial); });
  double tp = best_of(reps, [&] { b = assemble_bem(k, bm, sp.W, sp.Z, ExecPolicy::Parallel); });
  double d = std::max({(a.V_WW - b.V_WW).cwiseAbs().maxCoeff(), (a.K_ZZ - b.K_ZZ).cwiseAbs().maxCoeff(),
                       (a.W_ZZ - b.W_ZZ).cwiseAbs().maxCoeff()});
  row("boundary operators", ts, tp, d);

  auto v = [](const Vec2& x) { return cplx(std::pow(std::abs(x[0]), 1.5), x[1]); };
  std::vector<Vec2> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back({0.3 * std::cos(0.37 * i), 0.3 * std::sin(0.91 * i)});
  VolumeFilter vf(v, {0.0, 0.0}, 0.4, 0.5, k);
  std::pair<std::vector<cplx>, std::vector<cplx>> hp, hs;
  tp = best_of(reps, [&] { hp = vf.apply(pts); });
  set_thread_count(1);
  ts = best_of(reps, [&] { hs = vf.apply(pts); });
  set_thread_count(threads);
  double fd = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) fd = std::max(fd, std::abs(hp.first[i] - hs.first[i]));
  row("volume filter evaluation", ts, tp, fd);
  return 0;
}
