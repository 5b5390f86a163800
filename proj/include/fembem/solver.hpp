#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "fembem/assembly.hpp"

namespace fembem {

/// Dense: LU of the full matrix. Schur: sparse LU of the volume block, dense LU of the boundary
/// Schur complement. Auto picks Dense up to 2000 unknowns.
enum class SolverKind { Auto, Dense, Schur };
std::string to_string(SolverKind s);
SolverKind solver_from_string(const std::string& s);

struct SolveResult {
  CVector x;
  double residual = 0.0;  // ||Ax - b|| / ||b|| (0 for b = 0)
  int refinements = 0;
  bool valid = false;     // residual <= 1e-10
  double rcond = 0.0;     // reciprocal condition estimate of the dense factor
};

/// Factorization of a coupled system, reusable for several right-hand sides.
class BlockSolver {
 public:
  BlockSolver(const CoupledSystem& sys, SolverKind kind = SolverKind::Auto);
  SolveResult solve(const CVector& b) const;
  SolverKind kind() const { return kind_; }

 private:
  CVector raw_solve(const CVector& b) const;
  const CoupledSystem& sys_;
  SolverKind kind_;
  Eigen::PartialPivLU<CMatrix> dense_;
  std::unique_ptr<Eigen::SparseLU<SpMat>> sparse_;
  Eigen::PartialPivLU<CMatrix> schur_;
  double rcond_ = 0.0;
};

/// Solve with sys.rhs.
SolveResult solve_system(const CoupledSystem& sys, SolverKind kind = SolverKind::Auto);

}  // namespace fembem
