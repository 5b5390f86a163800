#pragma once

#include <vector>

#include "fembem/specfun.hpp"

namespace fembem {

struct QuadratureRule1D {
  std::vector<double> x, w;
  int size() const { return static_cast<int>(x.size()); }
};

struct QuadratureRule2D {
  std::vector<Vec2> x;
  std::vector<double> w;
  int exactness = 0;
  int size() const { return static_cast<int>(x.size()); }
};

/// Gauss-Legendre rule with n points on [-1, 1]; exact to degree 2n - 1.
const QuadratureRule1D& gauss_rule(int n);
/// Gauss-Legendre rule with n points on [0, 1].
const QuadratureRule1D& gauss_rule01(int n);
/// Collapsed tensor rule on the reference triangle {x, y >= 0, x + y <= 1}, exact to the given degree.
const QuadratureRule2D& triangle_rule(int degree);

/// Gauss rule for the weight -ln(x) on [0, 1]:  int_0^1 f(x) ln x dx = -sum w_i f(x_i).
/// Exact for polynomials of degree <= 2n - 1.
struct LogQuadratureRule {
  QuadratureRule1D log_part;
  QuadratureRule1D smooth;  // companion Gauss-Legendre rule on [0, 1]
};
const LogQuadratureRule& log_rule(int n);

}  // namespace fembem
