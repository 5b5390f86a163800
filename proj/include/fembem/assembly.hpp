#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "fembem/bem.hpp"

namespace fembem {

using SpMat = Eigen::SparseMatrix<cplx>;
using RSpMat = Eigen::SparseMatrix<double>;
using RVector = Eigen::VectorXd;

/// Penalty constants; alpha = a p^2 nu~/(k h), beta = b k h/(p nu~), delta = d k h/p^2.
struct PenaltyParams {
  double a = 10.0, b = 0.1, d = 0.01;
  void validate() const;
};

/// Real matrices from which the volume forms, couplings and dG norms are combined.
/// Rows are test functions, columns trial functions.
struct VolumeForms {
  Formulation kind = Formulation::Conforming;
  double k = 0.0;
  int p = 1;
  PenaltyParams pen;
  RSpMat S, M, Mn;  // (nu grad u, grad v), (u, v), (n^2 u, v)
  RSpMat Mb;        // (u, v)_Gamma
  RSpMat Nvw;       // (psi_j, phi_i)_Gamma, phi in V_h, psi in W_h
  // facet and boundary penalty terms (empty for k = 0 conforming forms)
  RSpMat Jalpha;    // int alpha [[u]].[[v]]
  RSpMat Jbeta;     // int beta [[nu grad u]] [[nu grad v]]
  RSpMat Cons;      // int [[u]].{{nu grad v}}
  RSpMat Avg;       // int alpha^{-1} {{nu grad u}}.{{nu grad v}}
  RSpMat Mb_delta;  // int delta u v on Gamma
  RSpMat Nb_delta;  // int delta (nu grad u . n)(nu grad v . n)
  RSpMat Cb_delta;  // int delta u (nu grad v . n)
  RSpMat Nvw_delta; // int delta psi_j phi_i
  RSpMat Dvw_delta; // int delta psi_j (nu grad phi_i . n)
  RMatrix Mww_delta;  // int delta psi_j psi_i
  double delta_min = 0.0, delta_max = 0.0;
};

VolumeForms assemble_volume_forms(double k, const CurvedMesh& mesh, const SpaceTriple& spaces,
                                  const PenaltyParams& pen = {}, ExecPolicy policy = ExecPolicy::Parallel);

/// Conforming: S - k^2 Mn + ik Mb. DG: a_h + b_h.
SpMat volume_block(const VolumeForms& f);

/// Coefficients (u, m, u_ext).
struct ThreeFieldVector {
  CVector u, m, ext;
  CVector stacked() const;
  static ThreeFieldVector split(const CVector& x, int nu, int nm, int ne);
};

/// Block matrix with unknowns ordered (u, m, u_ext) and tests (v, lambda, v_ext);
/// entry (i, j) = T(phi_j, psi_i), so T(x, y) = y^H A x.
struct CoupledSystem {
  Formulation formulation = Formulation::Conforming;
  double k = 0.0;
  int nu = 0, nm = 0, ne = 0;
  SpMat Auu;    // nu x nu
  SpMat Aub;    // nu x (nm + ne)
  SpMat Abu;    // (nm + ne) x nu
  CMatrix Abb;  // (nm + ne) x (nm + ne)
  CVector rhs;

  int nb() const { return nm + ne; }
  int size() const { return nu + nm + ne; }
  CVector apply(const CVector& x) const;
  CVector apply_adjoint(const CVector& y) const;
  CMatrix to_dense() const;
  /// T(x, y) = y^H A x.
  cplx form(const CVector& x, const CVector& y) const { return y.dot(apply(x)); }
};

CoupledSystem operator+(const CoupledSystem& a, const CoupledSystem& b);
CoupledSystem operator*(double s, const CoupledSystem& a);

/// T_C or T_DG (by the volume-space kind) at the wavenumber of `forms`; `ops` must be at the same k.
CoupledSystem assemble_coupled(const VolumeForms& forms, const BemOperators& ops);

/// Stacked load ((f, phi_i), (fm, psi_i)_Gamma, (fe, z_i)_Gamma); null functions give zero blocks.
/// Boundary functions take the curve parameter.
CVector load_vector(const CurvedMesh& mesh, const BoundaryMesh& bmesh, const SpaceTriple& spaces,
                    const std::function<cplx(const Vec2&)>& f, const std::function<cplx(double)>& fm,
                    const std::function<cplx(double)>& fe);

/// Right-hand side of the three-field system: (f, v), <g, lambda>, -<h, v_ext>.
CVector assemble_rhs(const CurvedMesh& mesh, const BoundaryMesh& bmesh, const SpaceTriple& spaces,
                     const std::function<cplx(const Vec2&)>& f, const std::function<cplx(double)>& g,
                     const std::function<cplx(double)>& h);

/// Mean-value vector mu_i = int z_i ds on Z_h.
RVector mean_vector(const BoundaryMesh& bmesh, const TraceSpace& Z);

/// Matrix of <u, Theta v> (added to T); ops_k at k and ops_0 at k = 0 on identical spaces.
CoupledSystem assemble_theta(const VolumeForms& forms, const BemOperators& ops_k, const BemOperators& ops_0,
                             const RVector& mu);

/// T_+ = T_C(k=0) + k^2 (n^2 u, v) + ik (u, v)_Gamma + <u_ext, 1><1, v_ext> (conforming forms).
CoupledSystem assemble_tplus(const VolumeForms& forms, const BemOperators& ops_0, const RVector& mu);

/// Adjoint system: A^H with right-hand side `load` = stacked ((phi_i, r), (psi_i, R_m), (z_i, R_ext)).
CoupledSystem assemble_adjoint(const CoupledSystem& primal, const CVector& load);

/// Write the four blocks with a JSON sidecar listing their offsets.
void dump_system(const std::string& path, const CoupledSystem& sys);

}  // namespace fembem
