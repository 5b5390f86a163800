#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fembem/norms.hpp"

using namespace fembem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kR = 0.4;
const cplx kI(0.0, 1.0);

struct Setup {
  CurvedMesh mesh;
  BoundaryMesh bm;
  SpaceTriple sp;
  VolumeForms F;
  BemOperators ops0;
  EnergyNormContext ctx;
  Setup(int level, int p, Formulation f, double k, double n0 = 1.5)
      : mesh(build_disk_mesh(make_circle(kR), level, single_subdomain(n0))),
        bm(induced_boundary_mesh(mesh)),
        sp(make_spaces(mesh, bm, f, p)),
        F(assemble_volume_forms(k, mesh, sp)),
        ops0(assemble_bem(0.0, bm, sp.W, sp.Z)),
        ctx(make_norm_context(F, mesh, bm, sp, ops0)) {}
};

CVector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector x(n);
  for (int i = 0; i < n; ++i) x(i) = cplx(g(rng), g(rng));
  return x;
}

ThreeFieldVector random_triple(const SpaceTriple& sp, std::mt19937_64& rng) {
  return {random_vector(sp.V.ndof, rng), random_vector(sp.W.ndof, rng), random_vector(sp.Z.ndof, rng)};
}

double eoc(double e0, double e1, double h0, double h1) { return std::log(e0 / e1) / std::log(h0 / h1); }

}  // namespace

TEST_CASE("Fourier norm of single modes and of constants") {
  const int N = 8;
  CVector mode = CVector::Zero(2 * N + 1);
  mode(5 + N) = 1.3;
  CHECK(fourier_norm_sq(mode, 0.5) / fourier_norm_sq(mode, -0.5) == doctest::Approx(26.0).epsilon(1e-14));

  CVector sampled = fourier_modes([](double t) { return std::exp(kI * 5.0 * t); }, kR, N);
  CHECK(std::abs(sampled(5 + N) - std::sqrt(2.0 * kPi * kR)) < 1e-13);
  CHECK((sampled - sampled(5 + N) * CVector::Unit(2 * N + 1, 5 + N)).norm() < 1e-13);

  CurvedMesh mesh = build_disk_mesh(make_circle(kR), 1, single_subdomain(1.5));
  BoundaryMesh bm = induced_boundary_mesh(mesh);
  TraceSpace W = make_trace_space(bm, TraceSpace::W, 1);
  CVector one = CVector::Zero(W.ndof);
  for (int b = 0; b < bm.size(); ++b) one(W.dofs[b][0]) = 1.0;
  double n2 = std::pow(fractional_boundary_norm(bm, W, one, -0.5, NormRealization::Fourier), 2);
  CHECK(n2 == doctest::Approx(2.0 * kPi * kR).epsilon(1e-10));
  double n2s = std::pow(fractional_boundary_norm(bm, W, one, -0.3, NormRealization::Fourier), 2);
  CHECK(n2s == doctest::Approx(2.0 * kPi * kR).epsilon(1e-10));
}

TEST_CASE("Projected high mode: H^{1/2} over H^{-1/2} ratio approaches 1 + n^2") {
  CurvedMesh mesh = build_disk_mesh(make_circle(kR), 3, single_subdomain(1.5));
  BoundaryMesh bm = induced_boundary_mesh(mesh);
  TraceSpace Z = make_trace_space(bm, TraceSpace::Z, 4);
  std::vector<cplx> c = project_trace(bm, Z, [](double t) { return std::exp(kI * 5.0 * t); });
  CVector w = Eigen::Map<CVector>(c.data(), c.size());
  double a = fractional_boundary_norm(bm, Z, w, 0.5, NormRealization::Fourier);
  double b = fractional_boundary_norm(bm, Z, w, -0.5, NormRealization::Fourier);
  CHECK(a * a / (b * b) == doctest::Approx(26.0).epsilon(1e-6));
}

TEST_CASE("BoundaryFourier round trip on both trace spaces") {
  CurvedMesh mesh = build_disk_mesh(make_circle(kR), 1, single_subdomain(1.5));
  BoundaryMesh bm = induced_boundary_mesh(mesh);
  std::mt19937_64 rng(11);
  for (auto kind : {TraceSpace::W, TraceSpace::Z}) {
    TraceSpace S = make_trace_space(bm, kind, 2);
    BoundaryFourier F = boundary_fourier(bm, S, 2 * S.ndof);
    for (int r = 0; r < 5; ++r) {
      CVector c = random_vector(S.ndof, rng);
      CHECK((F.inverse(F.forward(c)) - c).norm() <= 1e-10 * c.norm());
    }
  }
  CHECK_THROWS_AS(boundary_fourier(uniform_boundary_mesh(make_kite(), 16),
                                   make_trace_space(uniform_boundary_mesh(make_kite(), 16), TraceSpace::W, 0), 8),
                  std::domain_error);
}

TEST_CASE("Riesz and Fourier H^{-1/2} norms are equivalent") {
  Setup s(2, 2, Formulation::Conforming, 4.0);
  std::mt19937_64 rng(5);
  RMatrix GR = gram_minus_half(s.ops0, nullptr, NormRealization::Riesz);
  for (int r = 0; r < 20; ++r) {
    CVector w = random_vector(s.sp.W.ndof, rng);
    double f = fractional_boundary_norm(s.bm, s.sp.W, w, -0.5, NormRealization::Fourier);
    double q = fractional_boundary_norm(s.bm, s.sp.W, w, -0.5, NormRealization::Riesz, &s.ops0);
    double g = std::sqrt((w.adjoint() * GR.cast<cplx>() * w)(0).real());
    CHECK(q == doctest::Approx(g).epsilon(1e-12));
    CHECK(q / f >= 0.25);
    CHECK(q / f <= 4.0);
  }
  CVector w = random_vector(s.sp.W.ndof, rng);
  CHECK_THROWS_AS(fractional_boundary_norm(s.bm, s.sp.W, w, 0.3, NormRealization::Riesz, &s.ops0),
                  std::invalid_argument);
}

TEST_CASE("Boundary Gram matrices are symmetric positive definite and match the circle norms") {
  Setup s(2, 3, Formulation::Conforming, 4.0);
  for (const RMatrix& G : {s.ctx.G_m, s.ctx.G_ext, gram_plus_half(s.ops0, s.ctx.mu, nullptr, NormRealization::Riesz)}) {
    CHECK((G - G.transpose()).norm() <= 1e-13 * G.norm());
    Eigen::LLT<RMatrix> llt(G);
    CHECK(llt.info() == Eigen::Success);
  }
  std::mt19937_64 rng(3);
  for (int r = 0; r < 5; ++r) {
    CVector w = random_vector(s.sp.Z.ndof, rng);
    double g = std::sqrt((w.adjoint() * s.ctx.G_ext.cast<cplx>() * w)(0).real());
    CHECK(g == doctest::Approx(fractional_boundary_norm(s.bm, s.sp.Z, w, 0.5, NormRealization::Fourier)).epsilon(1e-6));
  }
}

TEST_CASE("Energy norm: zero, constants and homogeneity") {
  const double k = 3.0;
  Setup s(1, 2, Formulation::Conforming, k, 1.0);
  ThreeFieldVector z{CVector::Zero(s.sp.V.ndof), CVector::Zero(s.sp.W.ndof), CVector::Zero(s.sp.Z.ndof)};
  CHECK(energy_norm(z, s.ctx) == 0.0);
  ThreeFieldVector one = z;
  for (int e = 0; e < s.mesh.num_elements(); ++e)
    for (int i = 0; i < 3; ++i) one.u(s.sp.V.dofs[e][i]) = 1.0;
  CHECK(std::pow(energy_norm(one, s.ctx), 2) == doctest::Approx(k * k * kPi * kR * kR).epsilon(1e-12));
  std::mt19937_64 rng(8);
  for (int r = 0; r < 20; ++r) {
    ThreeFieldVector v = random_triple(s.sp, rng);
    double n1 = energy_norm(v, s.ctx);
    CHECK(n1 > 0.0);
    ThreeFieldVector v2{2.0 * v.u, 2.0 * v.m, 2.0 * v.ext};
    CHECK(std::abs(energy_norm(v2, s.ctx) - 2.0 * n1) <= 1e-13 * n1);
    ThreeFieldVector vi{kI * v.u, kI * v.m, kI * v.ext};
    CHECK(std::abs(energy_norm(vi, s.ctx) - n1) <= 1e-13 * n1);
    for (NormKind kind : {NormKind::EnergyN, NormKind::DG, NormKind::DGPlus})
      CHECK(std::abs(s.ctx.norm(v2, kind) - 2.0 * s.ctx.norm(v, kind)) <= 1e-13 * s.ctx.norm(v, kind));
  }
}

TEST_CASE("dG norm terms: continuous input and plus variant") {
  const double k = 4.0;
  Setup c(1, 3, Formulation::Conforming, k);
  std::mt19937_64 rng(21);
  for (int r = 0; r < 10; ++r) {
    CVector u = random_vector(c.sp.V.ndof, rng);
    DgTerms t = dg_terms(u, c.ctx);
    double total = t.total(false);
    CHECK(t.alpha_jump <= 1e-12 * total);
    CHECK(t.beta_jump >= 0.0);
    double vol = (u.adjoint() * (c.F.S + k * k * c.F.Mn).cast<cplx>() * u)(0).real();
    CHECK(t.grad + t.mass_n == doctest::Approx(vol).epsilon(1e-12));
    CHECK(total == doctest::Approx(vol + t.beta_jump + t.delta_flux + t.boundary).epsilon(1e-12));
  }

  Setup d(1, 2, Formulation::DG, k);
  CHECK(dg_norm(CVector::Zero(d.sp.V.ndof), d.ctx, false) == 0.0);
  CHECK(dg_norm(CVector::Zero(d.sp.V.ndof), d.ctx, true) == 0.0);
  for (int r = 0; r < 50; ++r) {
    CVector u = random_vector(d.sp.V.ndof, rng);
    double a = dg_norm(u, d.ctx, false), b = dg_norm(u, d.ctx, true);
    CHECK(a > 0.0);
    CHECK(b >= a);
    DgTerms t = dg_terms(u, d.ctx);
    CHECK(t.alpha_jump > 0.0);
    ThreeFieldVector v{u, CVector::Zero(d.sp.W.ndof), CVector::Zero(d.sp.Z.ndof)};
    CHECK(d.ctx.norm(v, NormKind::DG) == doctest::Approx(a).epsilon(1e-12));
    CHECK(d.ctx.norm(v, NormKind::DGPlus) == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("Best approximation of discrete and constant targets") {
  const double k = 4.0;
  for (Formulation f : {Formulation::Conforming, Formulation::DG}) {
    Setup s(1, 2, f, k);
    AnalyticTriple t;
    t.u = [](const Vec2&, std::array<cplx, 2>* g) {
      if (g) *g = {0.0, 0.0};
      return cplx(2.0, -1.0);
    };
    const double amp = std::sqrt(2.0 * kPi * kR);
    t.m = [](double) { return cplx(0.5, 0.25); };
    t.ext = [](double) { return cplx(-1.0, 3.0); };
    t.m_mode = [amp](int n) { return n == 0 ? amp * cplx(0.5, 0.25) : cplx(0.0); };
    t.ext_mode = [amp](int n) { return n == 0 ? amp * cplx(-1.0, 3.0) : cplx(0.0); };
    t.max_mode = 0;
    std::mt19937_64 rng(9);
    ThreeFieldVector d = random_triple(s.sp, rng);
    for (NormKind n : {NormKind::Energy, NormKind::EnergyN, NormKind::DG, NormKind::DGPlus}) {
      CHECK(best_approximation_error(s.ctx, d, n) <= 1e-11);
      // analytic constants: exact up to the rounding floor of the boundary Gram tails
      ThreeFieldVector x = best_approximation(s.ctx, t, n);
      CHECK(std::abs(x.u(0) - cplx(2.0, -1.0)) <= 1e-11);
      double tn = std::sqrt(5.0 * k * k * kPi * kR * kR + (0.3125 / std::sqrt(2.0) + 10.0) * 2.0 * kPi * kR);
      CHECK(best_approximation_error(s.ctx, t, n) <= 1e-7 * tn);
    }
  }
}

TEST_CASE("Best approximation of the Mie solution converges at rate p") {
  const double k = 4.0;
  DiskTransmissionSolution mie = solve_disk_series(k, kR, 1.5);
  AnalyticTriple t = mie_triple(mie);
  std::vector<double> err, hs;
  for (int level = 1; level <= 4; ++level) {
    Setup s(level, 2, Formulation::Conforming, k);
    ThreeFieldVector ba = best_approximation(s.ctx, t, NormKind::EnergyN);
    err.push_back(error_norm(s.ctx, t, ba, NormKind::EnergyN));
    hs.push_back(s.mesh.max_h());
    // any other discrete triple is farther away
    std::mt19937_64 rng(level);
    ThreeFieldVector pert = random_triple(s.sp, rng);
    double scale = 1e-3 * err.back() / s.ctx.norm(pert, NormKind::EnergyN);
    ThreeFieldVector y{ba.u + scale * pert.u, ba.m + scale * pert.m, ba.ext + scale * pert.ext};
    CHECK(error_norm(s.ctx, t, y, NormKind::EnergyN) >= err.back());
  }
  for (size_t i = 1; i < err.size(); ++i) CHECK(eoc(err[i - 1], err[i], hs[i - 1], hs[i]) >= 1.8);
}

TEST_CASE("Best approximation of a smooth field under p-refinement beats any fixed algebraic rate") {
  const double k = 4.0;
  SmoothField pw = plane_wave_field(k * 1.5, 0.3);
  std::vector<double> err;
  for (int p = 1; p <= 6; ++p) {
    Setup s(1, p, Formulation::Conforming, k);
    AnalyticTriple t = smooth_triple(pw, k, s.mesh.curve, s.mesh.partition, 48);
    err.push_back(best_approximation_error(s.ctx, t, NormKind::EnergyN));
  }
  std::vector<double> rates;
  for (int p = 2; p <= 5; ++p) rates.push_back(std::log(err[p - 1] / err[p]) / std::log((p + 1.0) / p));
  for (size_t i = 1; i < rates.size(); ++i) CHECK(rates[i] > rates[i - 1]);
}

TEST_CASE("Error parts agree with the Gram matrices on discrete differences") {
  const double k = 4.0;
  DiskTransmissionSolution mie = solve_disk_series(k, kR, 1.5);
  AnalyticTriple t = mie_triple(mie);
  Setup s(1, 2, Formulation::DG, k);
  ThreeFieldVector ba = best_approximation(s.ctx, t, NormKind::DGPlus);
  std::mt19937_64 rng(4);
  ThreeFieldVector d = random_triple(s.sp, rng);
  ThreeFieldVector y{ba.u + d.u, ba.m + d.m, ba.ext + d.ext};
  // Pythagoras in the projection norm
  double e0 = std::pow(error_norm(s.ctx, t, ba, NormKind::DGPlus), 2);
  double e1 = std::pow(error_norm(s.ctx, t, y, NormKind::DGPlus), 2);
  double dn = std::pow(s.ctx.norm(d, NormKind::DGPlus), 2);
  CHECK(e1 == doctest::Approx(e0 + dn).epsilon(1e-9));
}

TEST_CASE("Triple norms are equivalent to the energy norm on discrete triples") {
  for (double k : {2.0, 8.0}) {
    Setup s(1, 2, Formulation::Conforming, k);
    std::mt19937_64 rng(static_cast<unsigned>(k));
    for (int r = 0; r < 20; ++r) {
      ThreeFieldVector v = random_triple(s.sp, rng);
      double q = triple_norm_V0(v, s.ctx) / energy_norm(v, s.ctx);
      CHECK(q >= 0.25);
      CHECK(q <= 4.0);
    }
  }
  const double k = 4.0;
  DiskTransmissionSolution mie = solve_disk_series(k, kR, 1.5);
  AnalyticTriple t = mie_triple(mie);
  CurvedMesh mesh = build_disk_mesh(make_circle(kR), 2, single_subdomain(1.5));
  double n0 = triple_norm_V(t, mesh, k, 0), n1 = triple_norm_V(t, mesh, k, 1);
  CHECK(n0 > 0.0);
  CHECK(n1 >= n0);
  double r = triple_norm_Vprime1([](const Vec2&) { return cplx(1.0); }, [](double) { return cplx(1.0); },
                                 [](double) { return cplx(0.0); }, mesh, k);
  CHECK(r == doctest::Approx(std::sqrt(kPi * kR * kR) + (1.0 + k) * std::sqrt(2.0 * kPi * kR)).epsilon(1e-10));
}

TEST_CASE("Inverse inequality constant") {
  std::vector<double> c;
  for (int level = 1; level <= 3; ++level) {
    BoundaryMesh bm = induced_boundary_mesh(build_disk_mesh(make_circle(kR), level, single_subdomain(1.5)));
    c.push_back(measure_inverse_inequality(bm, 2));
    CHECK(std::isfinite(c.back()));
    CHECK(c.back() > 0.0);
  }
  double mx = *std::max_element(c.begin(), c.end()), mn = *std::min_element(c.begin(), c.end());
  CHECK(mx / mn - 1.0 < 0.25);
  CHECK_THROWS_AS(measure_inverse_inequality(uniform_boundary_mesh(make_circle(kR), 8), 0), std::invalid_argument);
}
