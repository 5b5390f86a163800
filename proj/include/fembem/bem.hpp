#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "fembem/exec.hpp"
#include "fembem/geometry.hpp"
#include "fembem/spaces.hpp"

namespace fembem {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

enum class BoundaryOp { V, K, Kp, W };
std::string to_string(BoundaryOp op);

/// Dense Galerkin matrix (i, j) = <Op phi_j, psi_i> on Gamma.
struct BoundaryOperatorMatrix {
  BoundaryOp op = BoundaryOp::V;
  double k = 0.0;
  CMatrix A;
};

/// Galerkin matrix of V_k, K_k, K'_k or W_k (W through the Maue identity; needs continuous spaces).
BoundaryOperatorMatrix assemble_boundary_operator(BoundaryOp op, double k, const BoundaryMesh& bmesh,
                                                  const TraceSpace& test, const TraceSpace& trial,
                                                  ExecPolicy policy = ExecPolicy::Parallel);

/// Boundary mass matrix int psi_i phi_j ds.
RMatrix boundary_mass(const BoundaryMesh& bmesh, const TraceSpace& test, const TraceSpace& trial);

/// All boundary blocks needed by the coupled systems at one wavenumber.
struct BemOperators {
  double k = 0.0;
  int nW = 0, nZ = 0;
  CMatrix V_WW, V_WZ, V_ZW, V_ZZ;
  CMatrix K_WZ, K_ZZ;    // K on Z trial functions
  CMatrix Kp_ZW, Kp_ZZ;  // K' tested with Z
  CMatrix W_ZZ;
  RMatrix M_WW, M_WZ, M_ZZ;
};
BemOperators assemble_bem(double k, const BoundaryMesh& bmesh, const TraceSpace& W, const TraceSpace& Z,
                          ExecPolicy policy = ExecPolicy::Parallel);

/// B_k = -W_k - ik(1/2 - K_k) on Z x Z and A'_k = 1/2 + K'_k + ik V_k tested with Z (trial Z and W).
struct BkApk {
  CMatrix B_ZZ, Ap_ZZ, Ap_ZW;
};
BkApk assemble_Bk_Apk(const BemOperators& ops);

/// Eigenvalue of the operator on the circle of radius R for the mode exp(i n theta).
cplx circle_symbol(BoundaryOp op, double k, double R, int n);

enum class PotentialKind { Single, Double };

/// Layer potential of a discrete density.
struct PotentialField {
  PotentialKind kind = PotentialKind::Single;
  double k = 0.0;
  const BoundaryMesh* bmesh = nullptr;
  const TraceSpace* space = nullptr;
  std::vector<cplx> density;

  /// Value at x (and gradient if requested); x must stay away from Gamma.
  cplx eval(const Vec2& x, std::array<cplx, 2>* grad = nullptr) const;
};
std::vector<cplx> evaluate_potential(const PotentialField& field, const std::vector<Vec2>& points);

/// L2 projection of f(t) (a function of the curve parameter) onto a trace space.
std::vector<cplx> project_trace(const BoundaryMesh& bmesh, const TraceSpace& space,
                                const std::function<cplx(double)>& f);
/// Value of a trace-space function at curve parameter t.
cplx eval_trace(const BoundaryMesh& bmesh, const TraceSpace& space, const std::vector<cplx>& c, double t);

/// Errors of the four jump relations (interior minus exterior) at element midpoints, each relative to
/// max |f|: [Vf] = 0, [d_n Vf] = f, [Kf] = -f, [d_n Kf] = 0. Traces come from cubic extrapolation of
/// potential values at offsets {1,2,3,4} * 0.04 * (element length) along the normal.
struct JumpErrors {
  double single_value = 0.0, single_flux = 0.0, double_value = 0.0, double_flux = 0.0;
  double max() const;
};
/// Density = L2 projection of f(t) onto Z_h of degree p.
JumpErrors measure_jumps(double k, const BoundaryMesh& bmesh, int p, const std::function<cplx(double)>& f);

/// Relative L2 residual of V W - (1/4 - K^2) on the modes exp(i n t), |n| <= nmax, for Z_h of degree p.
double calderon_residual(double k, const BoundaryMesh& bmesh, int p, int nmax = 2);

/// Write a matrix as little-endian f64 re/im pairs, row-major, plus a JSON sidecar.
void dump_matrix(const std::string& path, const CMatrix& A, const std::string& tag, double k);

}  // namespace fembem
