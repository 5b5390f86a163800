#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fembem/specfun.hpp"

namespace fembem {

using Mat2 = Eigen::Matrix2d;

/// Smooth closed curve parametrized counter-clockwise over [0, 2pi).
class BoundaryCurve {
 public:
  virtual ~BoundaryCurve() = default;
  /// m-th derivative of the parametrization.
  virtual Vec2 deriv(double t, int m) const = 0;
  virtual std::string name() const = 0;
  virtual bool is_circle() const { return false; }
  virtual double radius() const { return 0.0; }
  virtual Vec2 center() const { return {0.0, 0.0}; }

  Vec2 position(double t) const { return deriv(t, 0); }
  double speed(double t) const;
  Vec2 normal(double t) const;
  double curvature(double t) const;
  /// y(tau) - y(t), accurate for tau close to t.
  Vec2 chord(double t, double tau) const;
  /// (y(b) - y(a)) . (y2'(b), -y1'(b)); the unnormalized outward normal at b carries the speed.
  double chord_cross(double a, double b) const;
};

std::shared_ptr<BoundaryCurve> make_circle(double radius, Vec2 center = {0.0, 0.0});
/// Kite (cos t + 0.65 cos 2t - 0.65, 1.5 sin t) scaled by 0.3 (diameter about 0.78).
std::shared_ptr<BoundaryCurve> make_kite();

struct Coefficients {
  std::function<Mat2(const Vec2&)> nu;
  std::function<double(const Vec2&)> n;
};

/// Concentric subdomain partition of the disk-like domain; subdomain 0 touches the boundary.
struct SubdomainPartition {
  /// Radius of an interior interface circle (0 for a single subdomain).
  double interface_radius = 0.0;
  std::vector<Coefficients> coeffs;  // one record per subdomain
  /// Width of a boundary collar in which nu = I and n = 1 (0: no collar declared).
  double collar = 0.0;
  Vec2 center{0.0, 0.0};

  int count() const { return static_cast<int>(coeffs.size()); }
  int classify(const Vec2& x) const;
  Mat2 nu(const Vec2& x, int tag) const { return coeffs[tag].nu(x); }
  double n(const Vec2& x, int tag) const { return coeffs[tag].n(x); }
};

SubdomainPartition single_subdomain(double n0, Mat2 nu = Mat2::Identity());
/// Two subdomains: inner disk of radius r_interface with (nu_in, n_in), outer annulus with (nu_out, n_out).
SubdomainPartition two_layer(double r_interface, Mat2 nu_in, double n_in, Mat2 nu_out, double n_out);
/// Smallest eigenvalue of nu over a sample of points; throws if not uniformly SPD.
double check_coefficients(const SubdomainPartition& part, const std::vector<Vec2>& samples, int tag_hint = -1);

/// Curved coarse triangle: straight vertices plus an optional exact edge.
struct CoarseElement {
  std::array<int, 3> v;
  std::array<Vec2, 3> x;
  int curved_edge = -1;   // local edge index (opposite vertex) or -1
  int curve_id = -1;      // 0: boundary curve, 1: interface circle
  double ta = 0.0, tb = 0.0;  // curve parameters at local vertices (e+1)%3 and (e+2)%3
  int tag = 0;
};

struct Element {
  std::array<int, 3> v;          // global vertex ids, counter-clockwise
  int coarse = 0;
  std::array<Vec2, 3> ref;       // vertex positions in the reference triangle of the coarse element
  int tag = 0;
  bool curved = false;
  double h = 0.0;
};

/// Interior facet shared by elements e[0] < e[1]; local edge index = opposite local vertex.
struct InteriorFacet {
  std::array<int, 2> e;
  std::array<int, 2> ledge;
  std::array<int, 2> gv;  // global vertex ids, gv[0] < gv[1]; facet parameter runs gv[0] -> gv[1]
  double h = 0.0;         // min of adjacent element diameters
};

struct BoundaryFacet {
  int e = 0;
  int ledge = 0;
  int first_local = 0;   // local vertex sitting at parameter t0
  double t0 = 0.0, t1 = 0.0;
  std::array<int, 2> gv;  // global ids at t0, t1
  double h = 0.0;         // diameter of the adjacent element
};

class CurvedMesh {
 public:
  std::vector<Vec2> vertices;
  std::vector<Element> elements;
  std::vector<CoarseElement> coarse;
  std::vector<InteriorFacet> interior_facets;
  std::vector<BoundaryFacet> boundary_facets;  // sorted by t0
  std::shared_ptr<BoundaryCurve> curve;
  std::shared_ptr<BoundaryCurve> interface_curve;
  SubdomainPartition partition;
  int level = 0;

  int num_elements() const { return static_cast<int>(elements.size()); }
  Vec2 map(int e, const Vec2& xi) const;
  /// Jacobian columns d x / d xi_1, d x / d xi_2.
  Mat2 jacobian(int e, const Vec2& xi) const;
  void map_and_jacobian(int e, const Vec2& xi, Vec2& x, Mat2& J) const;
  /// Affine factor A_K: reference triangle -> coarse straight triangle (Phi_K = R_K o A_K).
  Mat2 affine_factor(int e) const;
  /// Reference point of element e at parameter s in [0,1] along local edge from vertex la to lb.
  static Vec2 edge_point(const Element& el, int la, int lb, double s);
  /// Unit outward normal of element e on local edge at reference point xi.
  Vec2 outward_normal(int e, int ledge, const Vec2& xi, double* jac_len = nullptr) const;
  double max_h() const;

  /// Coarse-level evaluation of the curved map on reference coordinates eta.
  void coarse_map(int c, const Vec2& eta, Vec2& x, Mat2& J) const;
};

CurvedMesh build_disk_mesh(std::shared_ptr<BoundaryCurve> curve, int level, const SubdomainPartition& partition);

struct BoundaryElement {
  double t0 = 0.0, t1 = 0.0;
  int facet = 0;
  double h = 0.0;
};

struct BoundaryMesh {
  std::shared_ptr<BoundaryCurve> curve;
  std::vector<BoundaryElement> elems;
  int size() const { return static_cast<int>(elems.size()); }
  double length(int i) const;
};

BoundaryMesh induced_boundary_mesh(const CurvedMesh& mesh);
/// Boundary mesh of n uniform parameter intervals, without a volume mesh.
BoundaryMesh uniform_boundary_mesh(std::shared_ptr<BoundaryCurve> curve, int n);

std::string mesh_to_json(const CurvedMesh& mesh);

}  // namespace fembem
