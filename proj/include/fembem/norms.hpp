#pragma once

#include <functional>
#include <optional>

#include "fembem/assembly.hpp"
#include "fembem/reference.hpp"

namespace fembem {

/// (1 + n^2)^s.
double sobolev_weight(double s, int n);

/// Trigonometric analysis of a trace space on a circle. Mode n is the amplitude of
/// e_n = (2 pi R)^{-1/2} e^{i n theta}, so ||f||_{L2}^2 = sum |f_n|^2.
struct BoundaryFourier {
  double R = 0.0;
  int N = 0;
  CMatrix B;  // row n + N: (psi_j, e_n)_Gamma

  int modes() const { return 2 * N + 1; }
  CVector forward(const CVector& c) const { return B * c; }
  /// Least-squares preimage of a mode vector (exact inverse of forward on the trace space when 2N + 1 >= ndof).
  CVector inverse(const CVector& modes) const;
};

/// Needs a circular boundary curve.
BoundaryFourier boundary_fourier(const BoundaryMesh& bmesh, const TraceSpace& space, int N);

/// Normalized Fourier amplitudes, |n| <= N, of a function of the angle on the circle of radius R.
CVector fourier_modes(const std::function<cplx(double)>& f, double R, int N, int samples = 0);

/// sum (1 + n^2)^s |f_n|^2 over the modes n = -N..N of `modes`.
double fourier_norm_sq(const CVector& modes, double s);

enum class NormRealization { Fourier, Riesz };
std::string to_string(NormRealization r);
NormRealization realization_from_string(const std::string& s);

/// H^{-1/2} Gram matrix on W_h. Fourier: exact circle norm (finite sum plus V_0 tail); Riesz: V_0.
RMatrix gram_minus_half(const BemOperators& ops0, const BoundaryFourier* FW, NormRealization r);
/// H^{1/2} Gram matrix on Z_h. Fourier: exact circle norm (finite sum plus W_0, V_0 tail); Riesz: W_0 + mu mu^T.
RMatrix gram_plus_half(const BemOperators& ops0, const RVector& mu, const BoundaryFourier* FZ, NormRealization r);

/// ||w||_s of a trace-space function. Fourier: s in [-3/2, 3/2] on circles; Riesz: s = +-1/2 only.
/// `ops0` (k = 0 operators on the spaces of `space`) is needed by Riesz.
double fractional_boundary_norm(const BoundaryMesh& bmesh, const TraceSpace& space, const CVector& w, double s,
                                NormRealization method, const BemOperators* ops0 = nullptr);

/// Which norm of a three-field triple: the energy norm (k ||u||), the energy norm with k n weight,
/// the coupled dG norm, and the coupled dG+ norm with the h^{1/2} p^{-1} L2 term on m.
enum class NormKind { Energy, EnergyN, DG, DGPlus };
std::string to_string(NormKind n);

/// Assembled Gram matrices of all norms on one space triple at one wavenumber.
struct EnergyNormContext {
  double k = 0.0;
  int p = 1;
  Formulation kind = Formulation::Conforming;
  NormRealization realization = NormRealization::Fourier;
  PenaltyParams pen;
  const CurvedMesh* mesh = nullptr;
  const BoundaryMesh* bmesh = nullptr;
  const SpaceTriple* spaces = nullptr;
  RSpMat S, M, Mn;
  RSpMat Jalpha, Jbeta, Avg, Nb_delta, Mb_tilde;  // Mb_tilde = int (1 - delta) u v
  RMatrix G_m, G_ext;  // H^{-1/2}(W_h), H^{1/2}(Z_h)
  RMatrix Mh_m;        // int (h / p^2) psi_j psi_i
  RVector mu;
  std::optional<BoundaryFourier> FW, FZ;  // circle only, N = Nf
  RMatrix tail_m, tail_ext;               // Gram minus its truncated Fourier sum

  /// Volume Gram matrix of the norm kind.
  RSpMat volume_gram(NormKind n) const;
  RMatrix m_gram(NormKind n) const;
  double norm(const ThreeFieldVector& v, NormKind n) const;
  /// Squared norms of the three parts (volume, m, u_ext).
  std::array<double, 3> parts_sq(const ThreeFieldVector& v, NormKind n) const;
};

/// `forms` must carry the facet matrices (k > 0); ops0 are the k = 0 operators on the same spaces.
EnergyNormContext make_norm_context(const VolumeForms& forms, const CurvedMesh& mesh, const BoundaryMesh& bmesh,
                                    const SpaceTriple& spaces, const BemOperators& ops0,
                                    NormRealization r = NormRealization::Fourier, int Nf = 64);

/// ||nu^{1/2} grad u||^2 + k^2 ||u||^2 + ||m||_{-1/2}^2 + ||u_ext||_{1/2}^2, square-rooted.
double energy_norm(const ThreeFieldVector& v, const EnergyNormContext& ctx);
/// Volume dG norm of u; plus adds k^{-1} ||alpha^{-1/2} {{nu grad u}}||^2.
double dg_norm(const CVector& u, const EnergyNormContext& ctx, bool plus);

/// Individual squared terms of the volume dG norm.
struct DgTerms {
  double grad = 0.0, mass_n = 0.0, beta_jump = 0.0, alpha_jump = 0.0, delta_flux = 0.0, boundary = 0.0, avg = 0.0;
  double total(bool plus) const;
};
DgTerms dg_terms(const CVector& u, const EnergyNormContext& ctx);

/// Exact triple (u, m, u_ext); boundary parts as functions of the curve parameter and, on circles,
/// as normalized Fourier modes (zero for |n| > max_mode).
struct AnalyticTriple {
  std::function<cplx(const Vec2&, std::array<cplx, 2>*)> u;
  std::function<cplx(double)> m, ext;
  std::function<cplx(int)> m_mode, ext_mode;
  int max_mode = 0;
  /// Optional second derivatives (xx, xy, yy) for the s = 1 triple norm.
  std::function<std::array<cplx, 3>(const Vec2&)> hessian;
};
AnalyticTriple mie_triple(const DiskTransmissionSolution& sol);
/// Needs a circle; modes from sampled traces.
AnalyticTriple smooth_triple(const SmoothField& u, double k, std::shared_ptr<BoundaryCurve> curve,
                             const SubdomainPartition& partition, int modes = 64);

/// Squared error parts (volume, m, u_ext) of target - discrete in the norm kind. The boundary parts use
/// the Fourier realization and need a circle.
struct ErrorParts {
  double vol = 0.0, m = 0.0, ext = 0.0;
  double total() const;
};
ErrorParts error_parts(const EnergyNormContext& ctx, const AnalyticTriple& target, const ThreeFieldVector& x,
                       NormKind n);
double error_norm(const EnergyNormContext& ctx, const AnalyticTriple& target, const ThreeFieldVector& x, NormKind n);

/// Orthogonal projection of the target in the norm kind; throws if a Gram block is not positive definite.
ThreeFieldVector best_approximation(const EnergyNormContext& ctx, const AnalyticTriple& target, NormKind n);
double best_approximation_error(const EnergyNormContext& ctx, const AnalyticTriple& target, NormKind n);
/// Same for a discrete target on the context spaces.
ThreeFieldVector best_approximation(const EnergyNormContext& ctx, const ThreeFieldVector& target, NormKind n);
double best_approximation_error(const EnergyNormContext& ctx, const ThreeFieldVector& target, NormKind n);

/// |||u|||_{k,V,s} for s in {0, 1} of an analytic triple (s = 1 needs the Hessian and a circle).
/// Volume part uses the broken norms over the subdomains.
double triple_norm_V(const AnalyticTriple& t, const CurvedMesh& mesh, double k, int s);
/// |||u|||_{k,V,0} of a discrete triple.
double triple_norm_V0(const ThreeFieldVector& v, const EnergyNormContext& ctx);
/// |||(r, R_m, R_ext)|||_{k,V',1}; boundary data on a circle through Fourier modes.
double triple_norm_Vprime1(const std::function<cplx(const Vec2&)>& r, const std::function<cplx(double)>& Rm,
                           const std::function<cplx(double)>& Rext, const CurvedMesh& mesh, double k,
                           int modes = 128);

/// Largest c with ||h^{1/2} p^{-1} w||_{0,Gamma} <= c ||w||_{-1/2} over the multiplier space W_h
/// (discontinuous, degree p - 1) that goes with volume degree p >= 1; h from the adjacent volume elements.
double measure_inverse_inequality(const BoundaryMesh& bmesh, int p, NormRealization r = NormRealization::Fourier);

}  // namespace fembem
