#pragma once

#include <array>
#include <vector>

#include "fembem/quadrature.hpp"
#include "fembem/specfun.hpp"

namespace fembem {

constexpr int kMaxDegree = 12;

/// Value and first derivatives in the two reference coordinates.
struct Dual2 {
  double v = 0.0, dx = 0.0, dy = 0.0;
};
inline Dual2 operator+(Dual2 a, Dual2 b) { return {a.v + b.v, a.dx + b.dx, a.dy + b.dy}; }
inline Dual2 operator-(Dual2 a, Dual2 b) { return {a.v - b.v, a.dx - b.dx, a.dy - b.dy}; }
inline Dual2 operator*(Dual2 a, Dual2 b) { return {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy}; }
inline Dual2 operator*(double s, Dual2 a) { return {s * a.v, s * a.dx, s * a.dy}; }

/// Hierarchic basis of P_p on the reference triangle (0,0), (1,0), (0,1).
///
/// Local layout: three vertex functions, then p-1 functions per edge (edge e is opposite
/// vertex e, n = 2..p), then (p-1)(p-2)/2 bubbles. Edge functions are oriented from the
/// endpoint with the lower global vertex id; reversing an edge flips the sign of odd n.
class TriangleBasis {
 public:
  explicit TriangleBasis(int p);
  int degree() const { return p_; }
  int size() const { return (p_ + 1) * (p_ + 2) / 2; }
  int edge_index(int e, int n) const { return 3 + e * (p_ - 1) + (n - 2); }
  int bubble_offset() const { return 3 + 3 * (p_ - 1); }

  /// Values and reference gradients with all edges in reference orientation.
  void eval(const Vec2& xi, std::vector<Dual2>& out) const;
  /// +1/-1 per local function for the given edge reversals.
  std::vector<double> signs(const std::array<bool, 3>& flip) const;

  struct Table {
    int nq = 0, nloc = 0;
    std::vector<double> val;   // nq x nloc
    std::vector<double> gx, gy;
  };
  Table tabulate(const std::vector<Vec2>& pts) const;

 private:
  int p_;
};

/// Legendre values P_0..P_n at x in [-1,1].
void legendre(int n, double x, double* out);
/// Scaled Legendre P^S_0..P^S_n(x, t) = t^j P_j(x/t) in dual arithmetic.
void scaled_legendre(int n, Dual2 x, Dual2 t, Dual2* out);

/// Discontinuous trace basis on a boundary element: P_0..P_{nf-1}(2s-1), s in [0,1].
void segment_legendre(int nf, double s, double* val, double* der = nullptr);
/// Continuous trace basis of degree p: 1-s, s, then integrated Legendre l_n(2s-1), n = 2..p.
void segment_lobatto(int p, double s, double* val, double* der = nullptr);

}  // namespace fembem
