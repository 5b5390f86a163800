#include "fembem/solver.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fembem {

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Auto: return "auto";
    case SolverKind::Dense: return "dense";
    case SolverKind::Schur: return "schur";
  }
  return "auto";
}

SolverKind solver_from_string(const std::string& s) {
  if (s == "auto") return SolverKind::Auto;
  if (s == "dense") return SolverKind::Dense;
  if (s == "schur") return SolverKind::Schur;
  throw std::invalid_argument("unknown solver: " + s);
}

namespace {

void check_rcond(double rc, const char* what) {
  if (!(rc > 1e-15) || !std::isfinite(rc)) {
    std::ostringstream os;
    os << what << ": matrix is numerically singular (reciprocal condition estimate " << rc << ")";
    throw std::runtime_error(os.str());
  }
}

}  // namespace

BlockSolver::BlockSolver(const CoupledSystem& sys, SolverKind kind) : sys_(sys), kind_(kind) {
  if (kind_ == SolverKind::Auto) kind_ = sys.size() <= 2000 ? SolverKind::Dense : SolverKind::Schur;
  if (sys.nb() == 0) kind_ = SolverKind::Dense;
  if (kind_ == SolverKind::Dense) {
    dense_.compute(sys.to_dense());
    rcond_ = dense_.rcond();
    check_rcond(rcond_, "solve_system");
    return;
  }
  SpMat Auu = sys.Auu;
  Auu.makeCompressed();
  sparse_ = std::make_unique<Eigen::SparseLU<SpMat>>();
  sparse_->analyzePattern(Auu);
  sparse_->factorize(Auu);
  if (sparse_->info() != Eigen::Success)
    throw std::runtime_error("solve_system: sparse LU of the volume block failed: " + sparse_->lastErrorMessage());
  const int nb = sys.nb();
  CMatrix S = sys.Abb;
  std::vector<int> cols;
  for (int j = 0; j < nb; ++j)
    if (sys.Aub.col(j).nonZeros() > 0) cols.push_back(j);
  const int chunk = 64;
  for (size_t c0 = 0; c0 < cols.size(); c0 += chunk) {
    int nc = static_cast<int>(std::min<size_t>(chunk, cols.size() - c0));
    CMatrix rhs(sys.nu, nc);
    for (int c = 0; c < nc; ++c) rhs.col(c) = CVector(sys.Aub.col(cols[c0 + c]));
    CMatrix y = sparse_->solve(rhs);
    CMatrix z = sys.Abu * y;
    for (int c = 0; c < nc; ++c) S.col(cols[c0 + c]) -= z.col(c);
  }
  schur_.compute(S);
  rcond_ = schur_.rcond();
  check_rcond(rcond_, "solve_system (Schur complement)");
}

CVector BlockSolver::raw_solve(const CVector& b) const {
  if (kind_ == SolverKind::Dense) return dense_.solve(b);
  const int nu = sys_.nu, nb = sys_.nb();
  CVector y = sparse_->solve(CVector(b.head(nu)));
  CVector xb = schur_.solve(CVector(b.tail(nb) - sys_.Abu * y));
  CVector x(sys_.size());
  x.head(nu) = sparse_->solve(CVector(b.head(nu) - sys_.Aub * xb));
  x.tail(nb) = xb;
  return x;
}

SolveResult BlockSolver::solve(const CVector& b) const {
  if (b.size() != sys_.size()) throw std::invalid_argument("solve_system: right-hand side size mismatch");
  SolveResult r;
  r.rcond = rcond_;
  double bn = b.norm();
  if (bn == 0.0) {
    r.x = CVector::Zero(b.size());
    r.valid = true;
    return r;
  }
  r.x = raw_solve(b);
  CVector res = b - sys_.apply(r.x);
  r.residual = res.norm() / bn;
  while (r.residual > 1e-13 && r.refinements < 3) {
    CVector x1 = r.x + raw_solve(res);
    CVector res1 = b - sys_.apply(x1);
    double n1 = res1.norm() / bn;
    if (!(n1 < r.residual)) break;
    r.x = x1;
    res = res1;
    r.residual = n1;
    ++r.refinements;
  }
  if (!r.x.allFinite()) throw std::runtime_error("solve_system: non-finite solution");
  r.valid = r.residual <= 1e-10;
  return r;
}

SolveResult solve_system(const CoupledSystem& sys, SolverKind kind) {
  BlockSolver s(sys, kind);
  return s.solve(sys.rhs);
}

}  // namespace fembem
