#pragma once

#include <string>
#include <vector>

#include "fembem/geometry.hpp"
#include "fembem/shapes.hpp"

namespace fembem {

enum class Formulation { Conforming, DG };

std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& s);

/// Volume space S^{p,1}(Omega_h) (conforming) or S^{p,0}(Omega_h) (DG).
struct VolumeSpace {
  Formulation kind = Formulation::Conforming;
  int p = 1;
  int ndof = 0;
  TriangleBasis basis{1};
  std::vector<std::vector<int>> dofs;      // per element: local -> global
  std::vector<std::vector<double>> signs;  // per element: orientation signs of local functions
};

/// Trace space on the boundary mesh: W_h = S^{p-1,0}(Gamma_h) or Z_h = S^{p,1}(Gamma_h).
struct TraceSpace {
  enum Kind { W, Z };
  Kind kind = W;
  int p = 1;     // polynomial degree of the space
  int nloc = 1;  // local functions per boundary element
  int ndof = 0;
  std::vector<std::vector<int>> dofs;  // per boundary element

  /// Local values and derivatives with respect to the element coordinate s in [0,1].
  void eval(double s, double* val, double* der = nullptr) const;
};

TraceSpace make_trace_space(const BoundaryMesh& bmesh, TraceSpace::Kind kind, int degree);

/// V_h x W_h x Z_h with W_h of degree p-1 and Z_h of degree p.
struct SpaceTriple {
  VolumeSpace V;
  TraceSpace W, Z;
  int p = 1;
  int offset_m() const { return V.ndof; }
  int offset_ext() const { return V.ndof + W.ndof; }
  int size() const { return V.ndof + W.ndof + Z.ndof; }
};

VolumeSpace make_volume_space(const CurvedMesh& mesh, Formulation kind, int p);
SpaceTriple make_spaces(const CurvedMesh& mesh, const BoundaryMesh& bmesh, Formulation kind, int p);

/// Triangle quadrature degree used for element e: 2p+2 on affine elements, 2p+6 on curved ones.
int volume_quadrature_degree(const CurvedMesh& mesh, int e, int p);

/// Reference point of boundary facet f at facet coordinate s (s = 0 at t0).
Vec2 boundary_facet_point(const CurvedMesh& mesh, int f, double s);
/// Reference point of interior facet f, side `side`, at facet coordinate s (s = 0 at gv[0]).
Vec2 interior_facet_point(const CurvedMesh& mesh, int f, int side, double s);

/// Values and physical gradients of all local volume functions of element e at xi.
struct LocalEval {
  std::vector<double> val, gx, gy;
  Vec2 x;
  Mat2 J;
  double detJ = 0.0;
};
void eval_volume(const CurvedMesh& mesh, const VolumeSpace& V, int e, const Vec2& xi, LocalEval& out);

/// Evaluate a volume coefficient vector at reference point xi of element e (value and gradient).
cplx eval_volume_function(const CurvedMesh& mesh, const VolumeSpace& V, const std::vector<cplx>& c, int e,
                          const Vec2& xi, std::array<cplx, 2>* grad = nullptr);

}  // namespace fembem
