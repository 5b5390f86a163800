#pragma once

#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>

#include "fembem/norms.hpp"

namespace fembem {

/// (A + A^H) / 2 and (A - A^H) / (2i); x^H A x = x^H Herm x + i x^H Skew x.
CMatrix hermitian_part(const CMatrix& A);
CMatrix skew_part(const CMatrix& A);

/// Block-diagonal SPD Gram matrix diag(G_u, G_m, G_ext) of a three-field norm.
class GramSolver {
 public:
  GramSolver(const RSpMat& Gu, const RMatrix& Gm, const RMatrix& Ge);
  GramSolver(const EnergyNormContext& ctx, NormKind n);
  int size() const { return nu_ + nm_ + ne_; }
  CVector apply(const CVector& x) const;
  CVector solve(const CVector& x) const;
  RMatrix dense() const;
  /// Multiply all blocks by s > 0.
  GramSolver scaled(double s) const;

 private:
  RSpMat Gu_;
  RMatrix Gm_, Ge_;
  int nu_ = 0, nm_ = 0, ne_ = 0;
  std::shared_ptr<Eigen::SimplicialLLT<RSpMat>> Lu_;
  Eigen::LLT<RMatrix> Lm_, Le_;
};

using LinearOp = std::function<CVector(const CVector&)>;

struct ExtremeEigen {
  double min = 0.0, max = 0.0;
  int iterations = 0;
  double residual = 0.0;  // largest Ritz residual relative to max(|min|, |max|)
  bool converged = false;
  std::string method;     // "dense" or "lanczos"
};

struct LanczosOptions {
  enum class Which { Both, Min, Max };
  /// Monitored ends; they count as converged once the Ritz residual is below tol or the Ritz value
  /// changes by less than `settle` (relative) over 10 steps.
  Which which = Which::Both;
  double settle = 1e-8;
  int max_iter = 800;
  double tol = 1e-7;
  std::uint64_t seed = 1;
};

/// Extreme eigenvalues of H x = lambda G x for Hermitian H (applied as an operator) and SPD G.
/// Lanczos in the G inner product with full reorthogonalization.
ExtremeEigen generalized_extremes(const LinearOp& H, const GramSolver& G, const LanczosOptions& opt = {});
/// Dense reference: Cholesky reduction and a Hermitian eigensolver.
ExtremeEigen generalized_extremes_dense(const CMatrix& H, const RMatrix& G);
/// Dense for n <= dense_limit, Lanczos otherwise.
ExtremeEigen generalized_extremes(const CoupledSystem& Hsys, const GramSolver& G, int dense_limit = 400,
                                  const LanczosOptions& opt = {});

/// sup |y^H A x| / (||x||_G ||y||_G), the largest singular value of A between G-normed spaces.
double energy_operator_norm(const CoupledSystem& A, const GramSolver& G, int dense_limit = 400,
                            const LanczosOptions& opt = {});

/// The Hermitian matrix of (Re + eps Im) x^H A x as a coupled system.
CoupledSystem garding_part(const CoupledSystem& A, double eps);

}  // namespace fembem
