#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fembem/geometry.hpp"
#include "fembem/specfun.hpp"

namespace fembem {

/// Plane wave exp(i k d.x) with d = (cos angle, sin angle).
struct PlaneWave {
  double k = 1.0;
  double angle = 0.0;
  cplx value(const Vec2& x, std::array<cplx, 2>* grad = nullptr) const;
};

/// Scattering of a plane wave by the penetrable disk |x| < a with index n0 (nu = 1):
/// u = sum c_n J_n(k n0 r) e^{in theta} inside, u = incident + sum d_n H_n(k r) e^{in theta} outside.
struct DiskTransmissionSolution {
  double k = 1.0, a = 1.0, n0 = 1.0, angle = 0.0;
  int N = 0;  // modes -N..N
  std::vector<cplx> c, d;
  double matching_residual = 0.0;  // worst relative residual of the per-mode 2x2 systems
  double tail = 0.0;               // |c_N J_N(k n0 a)| + |d_N H_N(k a)| relative to the largest mode

  cplx coeff_c(int n) const { return c[n + N]; }
  cplx coeff_d(int n) const { return d[n + N]; }
  PlaneWave incident() const { return {k, angle}; }
  /// Total field and gradient.
  cplx value(const Vec2& x, std::array<cplx, 2>* grad = nullptr) const;
  /// Refractive index at x (n0 inside, 1 outside).
  double index(const Vec2& x) const;
  /// u_ext = gamma_0 u and m = d_r u + i k u on r = a at angle theta.
  cplx dirichlet_trace(double theta) const;
  cplx impedance_trace(double theta) const;
  /// Normalized Fourier coefficients (2 pi a)^{-1/2} int f e^{-in theta} ds of the two traces.
  cplx dirichlet_mode(int n) const;
  cplx impedance_mode(int n) const;
  /// Data (g, h) of the three-field system for this incident wave (g = gamma_0 u_inc, h = -(d_n + ik) u_inc).
  cplx data_g(double theta) const;
  cplx data_h(double theta) const;
};

/// Truncation N = ceil(k a) + 20 unless given.
DiskTransmissionSolution solve_disk_series(double k, double a, double n0, double angle = 0.0, int N = -1);

/// Smooth field on R^2 given in closed form.
struct SmoothField {
  std::function<cplx(const Vec2&)> value;
  std::function<std::array<cplx, 2>(const Vec2&)> grad;
  std::function<std::array<cplx, 3>(const Vec2&)> hessian;  // xx, xy, yy
};

SmoothField plane_wave_field(double k, double angle);
SmoothField quadratic_x1_field();
/// J_0(kappa |x|).
SmoothField bessel_j0_field(double kappa);

/// Source and boundary data of the three-field system for which a chosen smooth u (with
/// u_ext = gamma_0 u and m = nu grad u . n + i k u) is the exact solution.
struct ManufacturedSolution {
  double k = 1.0;
  SmoothField u;
  std::shared_ptr<BoundaryCurve> curve;
  SubdomainPartition partition;
  int modes = 0;                      // Fourier truncation used for g and h
  std::vector<cplx> g_hat, h_hat;     // Fourier coefficients of g and h in the curve parameter

  cplx f(const Vec2& x) const;
  cplx m(double t) const;
  cplx u_ext(double t) const;
  cplx g(double t) const;
  cplx h(double t) const;
};

/// Needs a circular boundary (operators applied through their Fourier symbols). nu must be
/// constant within each subdomain.
ManufacturedSolution manufactured_solution(const SmoothField& u, double k, std::shared_ptr<BoundaryCurve> curve,
                                           const SubdomainPartition& partition, int modes = 128);

}  // namespace fembem
