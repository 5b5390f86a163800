#include "fembem/eigen_tools.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fembem {

namespace {

const cplx kI(0.0, 1.0);

template <class M>
M herm_combination(const M& A, const M& AH, double eps) {
  return M(0.5 * (A + AH) + (eps * 0.5 / kI) * (A - AH));
}

// Extreme eigenvalues of a real symmetric tridiagonal matrix with the bottom components of their eigenvectors.
void tridiag_extremes(const std::vector<double>& a, const std::vector<double>& b, double& lmin, double& lmax,
                      double& zmin, double& zmax) {
  const int m = static_cast<int>(a.size());
  RMatrix T = RMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = a[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = b[i];
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(T);
  lmin = es.eigenvalues()(0);
  lmax = es.eigenvalues()(m - 1);
  zmin = es.eigenvectors()(m - 1, 0);
  zmax = es.eigenvectors()(m - 1, m - 1);
}

}  // namespace

CMatrix hermitian_part(const CMatrix& A) { return 0.5 * (A + A.adjoint()); }
CMatrix skew_part(const CMatrix& A) { return (A - A.adjoint()) / (2.0 * kI); }

GramSolver::GramSolver(const RSpMat& Gu, const RMatrix& Gm, const RMatrix& Ge)
    : Gu_(Gu), Gm_(Gm), Ge_(Ge), nu_(static_cast<int>(Gu.rows())), nm_(static_cast<int>(Gm.rows())),
      ne_(static_cast<int>(Ge.rows())) {
  Lu_ = std::make_shared<Eigen::SimplicialLLT<RSpMat>>(Gu_);
  if (Lu_->info() != Eigen::Success) throw std::runtime_error("GramSolver: volume Gram not positive definite");
  Lm_.compute(Gm_);
  Le_.compute(Ge_);
  if ((nm_ > 0 && Lm_.info() != Eigen::Success) || (ne_ > 0 && Le_.info() != Eigen::Success))
    throw std::runtime_error("GramSolver: boundary Gram not positive definite");
}

GramSolver::GramSolver(const EnergyNormContext& ctx, NormKind n)
    : GramSolver(ctx.volume_gram(n), ctx.m_gram(n), ctx.G_ext) {}

CVector GramSolver::apply(const CVector& x) const {
  CVector y(size());
  y.head(nu_) = Gu_ * x.head(nu_).real() + kI * (Gu_ * x.head(nu_).imag());
  y.segment(nu_, nm_) = Gm_ * x.segment(nu_, nm_).real() + kI * (Gm_ * x.segment(nu_, nm_).imag());
  y.tail(ne_) = Ge_ * x.tail(ne_).real() + kI * (Ge_ * x.tail(ne_).imag());
  return y;
}

CVector GramSolver::solve(const CVector& x) const {
  CVector y(size());
  RVector re = Lu_->solve(RVector(x.head(nu_).real())), im = Lu_->solve(RVector(x.head(nu_).imag()));
  y.head(nu_) = re.cast<cplx>() + kI * im.cast<cplx>();
  if (nm_ > 0) y.segment(nu_, nm_) = Lm_.solve(CVector(x.segment(nu_, nm_)).real()).cast<cplx>() +
                                     kI * Lm_.solve(CVector(x.segment(nu_, nm_)).imag()).cast<cplx>();
  if (ne_ > 0) y.tail(ne_) = Le_.solve(CVector(x.tail(ne_)).real()).cast<cplx>() +
                             kI * Le_.solve(CVector(x.tail(ne_)).imag()).cast<cplx>();
  return y;
}

RMatrix GramSolver::dense() const {
  RMatrix G = RMatrix::Zero(size(), size());
  G.topLeftCorner(nu_, nu_) = RMatrix(Gu_);
  G.block(nu_, nu_, nm_, nm_) = Gm_;
  G.bottomRightCorner(ne_, ne_) = Ge_;
  return G;
}

GramSolver GramSolver::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("GramSolver: scale must be positive");
  return GramSolver(RSpMat(s * Gu_), s * Gm_, s * Ge_);
}

ExtremeEigen generalized_extremes(const LinearOp& H, const GramSolver& G, const LanczosOptions& opt) {
  const int n = G.size();
  if (n == 0) throw std::invalid_argument("generalized_extremes: empty problem");
  const int mmax = std::min(opt.max_iter, n);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  CVector q(n);
  for (int i = 0; i < n; ++i) q(i) = cplx(g(rng), g(rng));
  CVector Gq = G.apply(q);
  double nq = std::sqrt(std::real(q.dot(Gq)));
  q /= nq;
  Gq /= nq;
  CMatrix Q(n, mmax), GQ(n, mmax);
  std::vector<double> a, b;
  ExtremeEigen out;
  out.method = "lanczos";
  double last_min = std::numeric_limits<double>::quiet_NaN(), last_max = last_min;
  for (int j = 0; j < mmax; ++j) {
    Q.col(j) = q;
    GQ.col(j) = Gq;
    CVector Hq = H(q);
    double alpha = std::real(q.dot(Hq));
    CVector w = G.solve(Hq);
    w -= alpha * q;
    if (j > 0) w -= b.back() * Q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      CVector c = GQ.leftCols(j + 1).adjoint() * w;
      w -= Q.leftCols(j + 1) * c;
    }
    a.push_back(alpha);
    CVector Gw = G.apply(w);
    double beta = std::sqrt(std::max(0.0, std::real(w.dot(Gw))));
    double lmin, lmax, zmin, zmax;
    if ((j + 1) % 10 == 0 || j + 1 == mmax || beta < 1e-14 * std::abs(alpha)) {
      tridiag_extremes(a, b, lmin, lmax, zmin, zmax);
      double scale = std::max(std::abs(lmin), std::abs(lmax));
      out.min = lmin;
      out.max = lmax;
      out.iterations = j + 1;
      double rmin = beta * std::abs(zmin) / scale, rmax = beta * std::abs(zmax) / scale;
      out.residual = opt.which == LanczosOptions::Which::Min   ? rmin
                     : opt.which == LanczosOptions::Which::Max ? rmax
                                                               : std::max(rmin, rmax);
      double vmin = lmin - last_min, vmax = lmax - last_max;
      bool settled = (opt.which == LanczosOptions::Which::Max || std::abs(vmin) <= opt.settle * scale) &&
                     (opt.which == LanczosOptions::Which::Min || std::abs(vmax) <= opt.settle * scale);
      last_min = lmin;
      last_max = lmax;
      if (out.residual <= opt.tol || settled || beta < 1e-14 * scale || j + 1 == n) {
        out.converged = true;
        return out;
      }
    }
    b.push_back(beta);
    q = w / beta;
    Gq = Gw / beta;
  }
  return out;
}

ExtremeEigen generalized_extremes_dense(const CMatrix& H, const RMatrix& G) {
  if (H.rows() != G.rows() || H.rows() != H.cols()) throw std::invalid_argument("generalized_extremes: size mismatch");
  Eigen::LLT<RMatrix> L(G);
  if (L.info() != Eigen::Success) throw std::runtime_error("generalized_extremes: Gram not positive definite");
  CMatrix Lc = RMatrix(L.matrixL()).cast<cplx>();
  CMatrix X = Lc.triangularView<Eigen::Lower>().solve(H);
  CMatrix C = Lc.triangularView<Eigen::Lower>().solve(CMatrix(X.adjoint())).adjoint();
  C = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(C, Eigen::EigenvaluesOnly);
  ExtremeEigen out;
  out.min = es.eigenvalues()(0);
  out.max = es.eigenvalues()(C.rows() - 1);
  out.converged = es.info() == Eigen::Success;
  out.method = "dense";
  return out;
}

ExtremeEigen generalized_extremes(const CoupledSystem& Hsys, const GramSolver& G, int dense_limit,
                                  const LanczosOptions& opt) {
  if (Hsys.size() != G.size()) throw std::invalid_argument("generalized_extremes: size mismatch");
  if (Hsys.size() <= dense_limit) return generalized_extremes_dense(Hsys.to_dense(), G.dense());
  return generalized_extremes([&](const CVector& x) { return Hsys.apply(x); }, G, opt);
}

double energy_operator_norm(const CoupledSystem& A, const GramSolver& G, int dense_limit, const LanczosOptions& opt) {
  if (A.size() != G.size()) throw std::invalid_argument("energy_operator_norm: size mismatch");
  if (A.size() <= dense_limit) {
    Eigen::LLT<RMatrix> L(G.dense());
    if (L.info() != Eigen::Success) throw std::runtime_error("energy_operator_norm: Gram not positive definite");
    CMatrix Lc = RMatrix(L.matrixL()).cast<cplx>();
    CMatrix X = Lc.triangularView<Eigen::Lower>().solve(A.to_dense());
    CMatrix C = Lc.triangularView<Eigen::Lower>().solve(CMatrix(X.adjoint())).adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(C.adjoint() * C, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues()(C.cols() - 1)));
  }
  // sigma_max^2 is the top eigenvalue of A^H G^{-1} A x = lambda G x.
  auto op = [&](const CVector& x) { return A.apply_adjoint(G.solve(A.apply(x))); };
  ExtremeEigen e = generalized_extremes(op, G, opt);
  return std::sqrt(std::max(0.0, e.max));
}

CoupledSystem garding_part(const CoupledSystem& A, double eps) {
  CoupledSystem h = A;
  h.Auu = herm_combination<SpMat>(A.Auu, SpMat(A.Auu.adjoint()), eps);
  h.Aub = herm_combination<SpMat>(A.Aub, SpMat(A.Abu.adjoint()), eps);
  h.Abu = SpMat(h.Aub.adjoint());
  h.Abb = herm_combination<CMatrix>(A.Abb, CMatrix(A.Abb.adjoint()), eps);
  h.rhs = CVector::Zero(A.size());
  return h;
}

}  // namespace fembem
