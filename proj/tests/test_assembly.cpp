#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fembem/assembly.hpp"
#include "fembem/quadrature.hpp"
#include "fembem/reference.hpp"
#include "fembem/solver.hpp"

using namespace fembem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kR = 0.4;
const cplx kI(0.0, 1.0);

struct Setup {
  CurvedMesh mesh;
  BoundaryMesh bm;
  SpaceTriple sp;
  Setup(int level, int p, Formulation f, double n0 = 1.5, Mat2 nu = Mat2::Identity())
      : mesh(build_disk_mesh(make_circle(kR), level, single_subdomain(n0, nu))),
        bm(induced_boundary_mesh(mesh)),
        sp(make_spaces(mesh, bm, f, p)) {}
};

CVector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector x(n);
  for (int i = 0; i < n; ++i) x(i) = cplx(g(rng), g(rng));
  return x;
}

// Conforming coefficients of the constant 1 (vertex functions form a partition of unity).
CVector constant_one(const Setup& s) {
  CVector c = CVector::Zero(s.sp.V.ndof);
  for (int e = 0; e < s.mesh.num_elements(); ++e)
    for (int i = 0; i < 3; ++i) c(s.sp.V.dofs[e][i]) = 1.0;
  return c;
}

// DG coefficients of a conforming function.
CVector conforming_to_dg(const Setup& c, const Setup& d, const CVector& x) {
  CVector y(d.sp.V.ndof);
  for (int e = 0; e < c.mesh.num_elements(); ++e)
    for (size_t i = 0; i < c.sp.V.dofs[e].size(); ++i) y(d.sp.V.dofs[e][i]) = x(c.sp.V.dofs[e][i]);
  return y;
}

// L2 projection of a function onto the volume space.
CVector project_volume(const Setup& s, const VolumeForms& F, const std::function<cplx(const Vec2&)>& f) {
  CVector b = load_vector(s.mesh, s.bm, s.sp, f, nullptr, nullptr).head(s.sp.V.ndof);
  Eigen::SimplicialLDLT<RSpMat> ldlt(F.M);
  CVector x(b.size());
  x.real() = ldlt.solve(RVector(b.real()));
  x.imag() = ldlt.solve(RVector(b.imag()));
  return x;
}

CVector to_cvec(const std::vector<cplx>& v) { return Eigen::Map<const CVector>(v.data(), v.size()); }

double max_abs(const CMatrix& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("penalty validation") {
  CHECK_NOTHROW(PenaltyParams{}.validate());
  CHECK_THROWS_AS((PenaltyParams{0.0, 0.1, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PenaltyParams{10.0, -1.0, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PenaltyParams{10.0, 0.1, 0.0}.validate()), std::invalid_argument);
  Setup s(0, 1, Formulation::DG);
  // delta = d k h / p^2 >= 1/2 must be rejected
  CHECK_THROWS_AS(assemble_volume_forms(4.0, s.mesh, s.sp, PenaltyParams{10.0, 0.1, 100.0}), std::invalid_argument);
  auto F = assemble_volume_forms(4.0, s.mesh, s.sp);
  CHECK(F.delta_min > 0.0);
  CHECK(F.delta_max < 0.5);
}

TEST_CASE("conforming volume forms on constants") {
  Setup s(2, 2, Formulation::Conforming, 1.0);
  auto F = assemble_volume_forms(3.0, s.mesh, s.sp);
  CVector one = constant_one(s);
  CHECK(std::abs(one.dot(F.S.cast<cplx>() * one)) < 1e-12);
  CHECK(std::abs(one.dot(F.M.cast<cplx>() * one) - kPi * kR * kR) < 1e-12);
  CHECK(std::abs(one.dot(F.Mb.cast<cplx>() * one) - 2 * kPi * kR) < 1e-12);
  SpMat A = volume_block(F);
  cplx expected = -9.0 * kPi * kR * kR + kI * 3.0 * 2.0 * kPi * kR;
  CHECK(std::abs(one.dot(A * one) - expected) < 1e-11);
  CHECK(RMatrix(F.S - RSpMat(F.S.transpose())).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(RMatrix(F.M - RSpMat(F.M.transpose())).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(RMatrix(F.Mb - RSpMat(F.Mb.transpose())).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stiffness kernel is the constants") {
  Setup s(0, 2, Formulation::Conforming);
  auto F = assemble_volume_forms(2.0, s.mesh, s.sp);
  Eigen::SelfAdjointEigenSolver<RMatrix> es{RMatrix(F.S)};
  CHECK(std::abs(es.eigenvalues()(0)) <= 1e-10);
  CHECK(es.eigenvalues()(1) > 1e-6);
}

TEST_CASE("patch test with x1 and anisotropic nu") {
  Mat2 nu;
  nu << 2.0, 0.5, 0.5, 1.0;
  Setup s(1, 4, Formulation::Conforming, 1.0, nu);
  auto F = assemble_volume_forms(1.0, s.mesh, s.sp);
  // H1 projection of x1; curved elements make x1 non-polynomial in reference coordinates
  CVector x = project_volume(s, F, [](const Vec2& x) { return cplx(x[0]); });
  double val = std::real(x.dot(F.S.cast<cplx>() * x));
  CHECK(std::abs(val - nu(0, 0) * kPi * kR * kR) < 1e-9);
}

TEST_CASE("load vector of f = 1 for p = 1 on affine patches") {
  Setup s(1, 1, Formulation::Conforming);
  CVector b = load_vector(s.mesh, s.bm, s.sp, [](const Vec2&) { return cplx(1.0); }, nullptr, nullptr);
  const int nv = static_cast<int>(s.mesh.vertices.size());
  std::vector<double> area(nv, 0.0);
  std::vector<bool> curved(nv, false);
  for (int e = 0; e < s.mesh.num_elements(); ++e) {
    const Element& el = s.mesh.elements[e];
    const Vec2 &a = s.mesh.vertices[el.v[0]], &b2 = s.mesh.vertices[el.v[1]], &c = s.mesh.vertices[el.v[2]];
    double A = 0.5 * std::abs((b2[0] - a[0]) * (c[1] - a[1]) - (b2[1] - a[1]) * (c[0] - a[0]));
    for (int i = 0; i < 3; ++i) {
      area[el.v[i]] += A;
      if (el.curved) curved[el.v[i]] = true;
    }
  }
  int checked = 0;
  for (int e = 0; e < s.mesh.num_elements(); ++e)
    for (int i = 0; i < 3; ++i) {
      int v = s.mesh.elements[e].v[i];
      if (curved[v]) continue;
      CHECK(std::abs(b(s.sp.V.dofs[e][i]) - area[v] / 3.0) < 1e-14);
      ++checked;
    }
  CHECK(checked > 0);
  CVector z = assemble_rhs(s.mesh, s.bm, s.sp, nullptr, nullptr, nullptr);
  CHECK(z.norm() == 0.0);
}

TEST_CASE("DG forms on continuous functions") {
  Setup c(1, 2, Formulation::Conforming), d(1, 2, Formulation::DG);
  const double k = 3.0;
  auto Fc = assemble_volume_forms(k, c.mesh, c.sp);
  auto Fd0 = assemble_volume_forms(k, d.mesh, d.sp, PenaltyParams{10.0, 0.0, 0.01});
  auto Fd = assemble_volume_forms(k, d.mesh, d.sp, PenaltyParams{10.0, 0.1, 0.01});
  CHECK(Fd0.Jbeta.nonZeros() == 0);
  std::mt19937_64 rng(7);
  CVector xc = random_vector(c.sp.V.ndof, rng), yc = random_vector(c.sp.V.ndof, rng);
  CVector xd = conforming_to_dg(c, d, xc), yd = conforming_to_dg(c, d, yc);
  SpMat Sc = Fc.S.cast<cplx>() - cplx(k * k) * Fc.Mn.cast<cplx>();
  cplx conf = yc.dot(Sc * xc);
  // interior part a_h: volume terms minus consistency terms plus penalties
  auto interior = [&](const VolumeForms& F) {
    SpMat A = F.S.cast<cplx>() - cplx(k * k) * F.Mn.cast<cplx>();
    A -= SpMat((F.Cons + RSpMat(F.Cons.transpose())).cast<cplx>());
    A += (kI / k) * SpMat(F.Jbeta.cast<cplx>()) + (kI * k) * SpMat(F.Jalpha.cast<cplx>());
    return A;
  };
  double scale = std::abs(conf);
  CHECK(std::abs(yd.dot(interior(Fd0) * xd) - conf) < 1e-12 * scale);
  CHECK(std::abs(yd.dot(Fd.Jalpha.cast<cplx>() * xd)) < 1e-12 * scale);
  CHECK(std::abs(yd.dot(Fd.Cons.cast<cplx>() * xd)) < 1e-12 * scale);
  // with b > 0 the only difference is the flux-jump penalty of the discrete function
  cplx beta_term = (kI / k) * yd.dot(Fd.Jbeta.cast<cplx>() * xd);
  CHECK(std::abs(yd.dot(interior(Fd) * xd) - conf - beta_term) < 1e-12 * scale);
}

TEST_CASE("alpha penalty entries across one straight facet, p = 1") {
  Setup d(1, 1, Formulation::DG);
  const double k = 2.0;
  PenaltyParams pen;
  auto F = assemble_volume_forms(k, d.mesh, d.sp, pen);
  int checked = 0;
  for (const InteriorFacet& fc : d.mesh.interior_facets) {
    if (d.mesh.elements[fc.e[0]].curved || d.mesh.elements[fc.e[1]].curved) continue;
    const Vec2 &a = d.mesh.vertices[fc.gv[0]], &b = d.mesh.vertices[fc.gv[1]];
    double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    double alpha = pen.a * 1.0 * 1.0 / (k * fc.h);
    auto local = [&](int side, int gv) {
      const Element& el = d.mesh.elements[fc.e[side]];
      for (int i = 0; i < 3; ++i)
        if (el.v[i] == gv) return d.sp.V.dofs[fc.e[side]][i];
      return -1;
    };
    int a0 = local(0, fc.gv[0]), a1 = local(1, fc.gv[0]), b1 = local(1, fc.gv[1]);
    CHECK(std::abs(F.Jalpha.coeff(a0, a1) + alpha * len / 3.0) < 1e-12 * alpha);
    CHECK(std::abs(F.Jalpha.coeff(a0, b1) + alpha * len / 6.0) < 1e-12 * alpha);
    if (++checked == 5) break;
  }
  CHECK(checked == 5);
}

TEST_CASE("serial and parallel volume assembly agree") {
  Setup d(2, 3, Formulation::DG);
  auto Fs = assemble_volume_forms(4.0, d.mesh, d.sp, {}, ExecPolicy::Serial);
  auto Fp = assemble_volume_forms(4.0, d.mesh, d.sp, {}, ExecPolicy::Parallel);
  CHECK(RMatrix(Fs.S - Fp.S).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(RMatrix(Fs.Jalpha - Fp.Jalpha).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(RMatrix(Fs.Cons - Fp.Cons).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(RMatrix(Fs.Dvw_delta - Fp.Dvw_delta).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((Fs.Mww_delta - Fp.Mww_delta).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("coupled system blocks") {
  Setup s(1, 2, Formulation::Conforming);
  const double k = 4.0;
  auto F = assemble_volume_forms(k, s.mesh, s.sp);
  auto ops = assemble_bem(k, s.bm, s.sp.W, s.sp.Z);
  auto sys = assemble_coupled(F, ops);
  CHECK(sys.size() == s.sp.size());
  // lambda-u block is the boundary pairing (psi_i, phi_j)_Gamma
  CMatrix lam_u = CMatrix(sys.Abu).topRows(sys.nm);
  CHECK((lam_u - CMatrix(F.Nvw.transpose().cast<cplx>())).cwiseAbs().maxCoeff() == 0.0);
  // independent assembly of the same pairing from the boundary-mesh parametrization
  RMatrix N = RMatrix::Zero(s.sp.W.ndof, s.sp.V.ndof);
  const QuadratureRule1D& r = gauss_rule01(8);
  LocalEval le;
  std::vector<double> psi(s.sp.W.nloc);
  for (int b = 0; b < s.bm.size(); ++b) {
    const BoundaryElement& be = s.bm.elems[b];
    const BoundaryFacet& bf = s.mesh.boundary_facets[be.facet];
    for (int iq = 0; iq < r.size(); ++iq) {
      double t = be.t0 + r.x[iq] * (be.t1 - be.t0);
      double w = r.w[iq] * s.bm.curve->speed(t) * (be.t1 - be.t0);
      eval_volume(s.mesh, s.sp.V, bf.e, boundary_facet_point(s.mesh, be.facet, r.x[iq]), le);
      s.sp.W.eval(r.x[iq], psi.data());
      for (int i = 0; i < s.sp.W.nloc; ++i)
        for (size_t j = 0; j < le.val.size(); ++j) N(s.sp.W.dofs[b][i], s.sp.V.dofs[bf.e][j]) += w * psi[i] * le.val[j];
    }
  }
  CHECK((lam_u.real() - N).cwiseAbs().maxCoeff() < 1e-13);
  // no coupling between volume and exterior trace
  CHECK(max_abs(CMatrix(sys.Aub).rightCols(sys.ne)) == 0.0);
  CHECK(max_abs(CMatrix(sys.Abu).bottomRows(sys.ne)) == 0.0);
  // mismatched wavenumber or missing operators
  auto ops2 = assemble_bem(2.0, s.bm, s.sp.W, s.sp.Z);
  CHECK_THROWS_AS(assemble_coupled(F, ops2), std::invalid_argument);
  CHECK_THROWS_AS(assemble_coupled(F, BemOperators{}), std::invalid_argument);
}

TEST_CASE("zero data gives the zero solution") {
  for (Formulation f : {Formulation::Conforming, Formulation::DG}) {
    Setup s(1, 2, f);
    auto F = assemble_volume_forms(4.0, s.mesh, s.sp);
    auto sys = assemble_coupled(F, assemble_bem(4.0, s.bm, s.sp.W, s.sp.Z));
    sys.rhs = assemble_rhs(s.mesh, s.bm, s.sp, nullptr, nullptr, nullptr);
    auto r = solve_system(sys);
    CHECK(r.x.norm() <= 1e-10);
    CHECK(r.valid);
  }
}

TEST_CASE("exact-solution interpolant residual decreases under refinement") {
  const double k = 4.0;
  auto mie = solve_disk_series(k, kR, 1.5);
  double prev = 1e300;
  for (int level = 1; level <= 3; ++level) {
    Setup s(level, 2, Formulation::Conforming);
    auto F = assemble_volume_forms(k, s.mesh, s.sp);
    auto sys = assemble_coupled(F, assemble_bem(k, s.bm, s.sp.W, s.sp.Z));
    CVector b = assemble_rhs(
        s.mesh, s.bm, s.sp, nullptr, [&](double t) { return mie.data_g(t); },
        [&](double t) { return mie.data_h(t); });
    ThreeFieldVector x;
    x.u = project_volume(s, F, [&](const Vec2& p) { return mie.value(p); });
    x.m = to_cvec(project_trace(s.bm, s.sp.W, [&](double t) { return mie.impedance_trace(t); }));
    x.ext = to_cvec(project_trace(s.bm, s.sp.Z, [&](double t) { return mie.dirichlet_trace(t); }));
    double res = (sys.apply(x.stacked()) - b).norm() / b.norm();
    CHECK(res < prev);
    prev = res;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("DG and conforming forms agree on smooth continuous triples") {
  const double k = 3.0;
  auto fu = [](const Vec2& x) { return cplx(std::cos(2 * x[0]) * (1 + x[1]), x[0] * x[1]); };
  auto fv = [](const Vec2& x) { return cplx(std::exp(x[0] - x[1]), std::sin(3 * x[1])); };
  std::vector<double> diffs, hs;
  for (int level = 1; level <= 3; ++level) {
    Setup c(level, 2, Formulation::Conforming), d(level, 2, Formulation::DG);
    double hb = 0.0;
    for (const BoundaryFacet& bf : d.mesh.boundary_facets) hb = std::max(hb, bf.h);
    hs.push_back(hb);
    auto Fc = assemble_volume_forms(k, c.mesh, c.sp);
    auto Fd = assemble_volume_forms(k, d.mesh, d.sp);
    auto ops = assemble_bem(k, c.bm, c.sp.W, c.sp.Z);
    auto Tc = assemble_coupled(Fc, ops);
    auto Td = assemble_coupled(Fd, ops);
    CVector uc = project_volume(c, Fc, fu), vc = project_volume(c, Fc, fv);
    auto m = to_cvec(project_trace(c.bm, c.sp.W, [](double t) { return cplx(std::cos(t), 1.0); }));
    auto lam = to_cvec(project_trace(c.bm, c.sp.W, [](double t) { return cplx(std::sin(2 * t), 0.5); }));
    auto ue = to_cvec(project_trace(c.bm, c.sp.Z, [](double t) { return cplx(1.0, std::cos(t)); }));
    auto ve = to_cvec(project_trace(c.bm, c.sp.Z, [](double t) { return cplx(std::sin(t), 0.0); }));
    ThreeFieldVector xc{uc, m, ue}, yc{vc, lam, ve};
    ThreeFieldVector xd{conforming_to_dg(c, d, uc), m, ue}, yd{conforming_to_dg(c, d, vc), lam, ve};
    diffs.push_back(std::abs(Td.form(xd.stacked(), yd.stacked()) - Tc.form(xc.stacked(), yc.stacked())));
  }
  for (size_t i = 1; i < diffs.size(); ++i) {
    double rate = std::log(diffs[i - 1] / diffs[i]) / std::log(hs[i - 1] / hs[i]);
    CHECK(rate >= 1.0);
  }
}

TEST_CASE("Theta and T_plus") {
  const double k = 4.0;
  Setup s(1, 2, Formulation::Conforming, 1.0);
  auto F = assemble_volume_forms(k, s.mesh, s.sp);
  auto ops = assemble_bem(k, s.bm, s.sp.W, s.sp.Z);
  auto ops0 = assemble_bem(0.0, s.bm, s.sp.W, s.sp.Z);
  RVector mu = mean_vector(s.bm, s.sp.Z);
  CHECK(std::abs(mu.head(s.bm.size()).sum() - 2 * kPi * kR) < 1e-12);
  auto T = assemble_coupled(F, ops);
  auto Th = assemble_theta(F, ops, ops0, mu);
  auto Tp = assemble_tplus(F, ops0, mu);
  // n = 1: volume block of Theta is 2 k^2 M
  CHECK(CMatrix(Th.Auu - cplx(2 * k * k) * SpMat(F.M.cast<cplx>())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((T + Th).to_dense().isApprox(Tp.to_dense(), 1e-12));
  CHECK(((T + Th).to_dense() - Tp.to_dense()).cwiseAbs().maxCoeff() < 1e-10);
  // Re T_+(v, v) for v = (1, 0, 0) is k^2 |Omega|
  CVector v = CVector::Zero(Tp.size());
  v.head(Tp.nu) = constant_one(s);
  CHECK(std::abs(std::real(Tp.form(v, v)) - k * k * kPi * kR * kR) < 1e-10);
  // V_k replaced by V_0: the (m, lambda) block of Theta vanishes
  BemOperators forced = ops;
  forced.V_WW = ops0.V_WW;
  auto Th2 = assemble_theta(F, forced, ops0, mu);
  CHECK(max_abs(Th2.Abb.topLeftCorner(Th2.nm, Th2.nm)) == 0.0);
  CHECK_THROWS_AS(assemble_theta(F, ops, ops, mu), std::invalid_argument);
}

TEST_CASE("adjoint system") {
  const double k = 4.0;
  Setup s(2, 2, Formulation::DG);
  auto F = assemble_volume_forms(k, s.mesh, s.sp);
  auto T = assemble_coupled(F, assemble_bem(k, s.bm, s.sp.W, s.sp.Z));
  // zero data
  auto A0 = assemble_adjoint(T, CVector::Zero(T.size()));
  CHECK(solve_system(A0).x.norm() == 0.0);
  auto r = [](const Vec2& x) { return cplx(1.0 + x[0], x[1] * x[1]); };
  auto Rm = [](double t) { return cplx(std::cos(t), std::sin(2 * t)); };
  auto Re = [](double t) { return cplx(0.5, std::cos(3 * t)); };
  CVector load = load_vector(s.mesh, s.bm, s.sp, r, Rm, Re);
  auto A = assemble_adjoint(T, load);
  auto psi = solve_system(A);
  CHECK(psi.valid);
  // adjoint consistency: T(Phi, Psi) = (Phi, r) + <m, R_m> + <u_ext, R_ext> for random discrete Phi
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    CVector phi = random_vector(T.size(), rng);
    cplx lhs = T.form(phi, psi.x);
    cplx rhs = load.dot(phi);
    worst = std::max(worst, std::abs(lhs - rhs) / (phi.norm() * load.norm()));
  }
  CHECK(worst <= 1e-10);
  // conjugation identity: primal with data D conj(load) returns D conj(psi), D = diag(1, -1, 1)
  auto D = [&](const CVector& x) {
    CVector y = x.conjugate();
    y.segment(T.nu, T.nm) *= -1.0;
    return y;
  };
  CoupledSystem P = T;
  P.rhs = D(load);
  auto x = solve_system(P);
  CHECK((x.x - D(psi.x)).norm() <= 1e-10 * psi.x.norm());
}

TEST_CASE("solver paths") {
  const double k = 4.0;
  Setup s(2, 2, Formulation::DG);
  auto F = assemble_volume_forms(k, s.mesh, s.sp);
  auto T = assemble_coupled(F, assemble_bem(k, s.bm, s.sp.W, s.sp.Z));
  std::mt19937_64 rng(3);
  T.rhs = random_vector(T.size(), rng);
  auto a = solve_system(T, SolverKind::Dense);
  auto b = solve_system(T, SolverKind::Schur);
  CHECK(a.residual <= 1e-12);
  CHECK(b.residual <= 1e-12);
  CHECK((a.x - b.x).norm() <= 1e-9 * a.x.norm());
  // identity blocks
  CoupledSystem I;
  I.nu = 5;
  I.nm = 2;
  I.ne = 3;
  I.Auu = SpMat(5, 5);
  I.Auu.setIdentity();
  I.Aub = SpMat(5, 5);
  I.Abu = SpMat(5, 5);
  I.Abb = CMatrix::Identity(5, 5);
  I.rhs = random_vector(10, rng);
  CHECK((solve_system(I, SolverKind::Schur).x - I.rhs).norm() < 1e-15);
  // random Hermitian positive definite system of size 50
  CMatrix R(50, 50);
  for (int j = 0; j < 50; ++j) R.col(j) = random_vector(50, rng);
  CMatrix H = R * R.adjoint() + 50.0 * CMatrix::Identity(50, 50);
  CoupledSystem Hs;
  Hs.nu = 30;
  Hs.nm = 10;
  Hs.ne = 10;
  Hs.Auu = H.topLeftCorner(30, 30).sparseView();
  Hs.Aub = H.topRightCorner(30, 20).sparseView();
  Hs.Abu = H.bottomLeftCorner(20, 30).sparseView();
  Hs.Abb = H.bottomRightCorner(20, 20);
  Hs.rhs = random_vector(50, rng);
  CHECK(solve_system(Hs, SolverKind::Dense).residual <= 1e-12);
  CHECK(solve_system(Hs, SolverKind::Schur).residual <= 1e-12);
  // singular matrix
  CoupledSystem Z = I;
  Z.Abb.setZero();
  CHECK_THROWS_AS(solve_system(Z, SolverKind::Dense), std::runtime_error);
}
