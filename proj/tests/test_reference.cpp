#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fembem/reference.hpp"

using namespace fembem;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

Vec2 polar(double r, double th) { return {r * std::cos(th), r * std::sin(th)}; }

cplx laplacian_fd(const DiskTransmissionSolution& s, const Vec2& x, double h) {
  cplx c = s.value(x);
  return (s.value({x[0] + h, x[1]}) + s.value({x[0] - h, x[1]}) + s.value({x[0], x[1] + h}) +
          s.value({x[0], x[1] - h}) - 4.0 * c) /
         (h * h);
}

// Interior field of a disk solution as a smooth field (Hessian unused).
SmoothField interior_field(const DiskTransmissionSolution& s) {
  SmoothField f;
  double a = s.a;
  auto inside = [a](const Vec2& x) {
    double r = std::hypot(x[0], x[1]);
    double sc = r >= a ? a * (1.0 - 1e-13) / r : 1.0;
    return Vec2{x[0] * sc, x[1] * sc};
  };
  f.value = [s, inside](const Vec2& x) { return s.value(inside(x)); };
  f.grad = [s, inside](const Vec2& x) {
    std::array<cplx, 2> g;
    s.value(inside(x), &g);
    return g;
  };
  f.hessian = [](const Vec2&) { return std::array<cplx, 3>{0.0, 0.0, 0.0}; };
  return f;
}

}  // namespace

TEST_CASE("plane wave gradient") {
  PlaneWave w{3.0, 0.7};
  Vec2 x{0.3, -0.2};
  std::array<cplx, 2> g;
  w.value(x, &g);
  double h = 1e-6;
  cplx gx = (w.value({x[0] + h, x[1]}) - w.value({x[0] - h, x[1]})) / (2 * h);
  cplx gy = (w.value({x[0], x[1] + h}) - w.value({x[0], x[1] - h})) / (2 * h);
  CHECK(std::abs(gx - g[0]) < 1e-8);
  CHECK(std::abs(gy - g[1]) < 1e-8);
}

TEST_CASE("disk series: index 1 gives no scattered field") {
  auto s = solve_disk_series(4.0, 0.4, 1.0, 0.3);
  for (int n = -s.N; n <= s.N; ++n) CHECK(std::abs(s.coeff_d(n)) < 1e-13);
  for (double th : {0.0, 1.0, 2.5}) {
    Vec2 x = polar(0.3, th);
    CHECK(std::abs(s.value(x) - s.incident().value(x)) < 1e-12);
  }
}

TEST_CASE("disk series: matching, tail and truncation stability") {
  auto s = solve_disk_series(4.0, 0.4, 1.5);
  CHECK(s.N == 22);
  CHECK(s.matching_residual < 1e-12);
  CHECK(s.tail < 1e-12);
  auto t = solve_disk_series(4.0, 0.4, 1.5, 0.0, s.N + 10);
  for (int n = -s.N; n <= s.N; ++n) {
    CHECK(std::abs(s.coeff_c(n) - t.coeff_c(n)) < 1e-14);
    CHECK(std::abs(s.coeff_d(n) - t.coeff_d(n)) < 1e-14);
  }
  for (double r : {0.1, 0.39, 0.41, 1.0}) {
    Vec2 x = polar(r, 0.9);
    CHECK(std::abs(s.value(x) - t.value(x)) < 1e-12);
  }
}

TEST_CASE("disk series: Helmholtz equation on both sides") {
  auto s = solve_disk_series(4.0, 0.4, 1.5, 0.4);
  double h = 1e-4;
  for (double th : {0.2, 1.7, 3.9, 5.5}) {
    for (double r : {0.15, 0.3, 0.55, 0.9}) {
      Vec2 x = polar(r, th);
      double kap = s.k * s.index(x);
      cplx u = s.value(x);
      cplx res = laplacian_fd(s, x, h) + kap * kap * u;
      CHECK(std::abs(res) < 1e-5 * kap * kap * std::max(std::abs(u), 0.1));
    }
  }
}

TEST_CASE("disk series: interface continuity of value and normal derivative") {
  auto s = solve_disk_series(4.0, 0.4, 1.5, 0.25);
  double worst_v = 0.0, worst_d = 0.0;
  for (int j = 0; j < 64; ++j) {
    double th = 2 * kPi * j / 64;
    std::array<cplx, 2> gi, go;
    cplx vi = s.value(polar(s.a * (1 - 1e-12), th), &gi);
    cplx vo = s.value(polar(s.a, th), &go);
    cplx di = gi[0] * std::cos(th) + gi[1] * std::sin(th);
    cplx dout = go[0] * std::cos(th) + go[1] * std::sin(th);
    worst_v = std::max(worst_v, std::abs(vi - vo));
    worst_d = std::max(worst_d, std::abs(di - dout) / s.k);
  }
  CHECK(worst_v < 1e-10);
  CHECK(worst_d < 1e-10);
}

TEST_CASE("disk series: traces and energy balance") {
  auto s = solve_disk_series(6.0, 0.4, 1.5, 1.1);
  const int M = 256;
  cplx flux = 0.0;
  for (int j = 0; j < M; ++j) {
    double th = 2 * kPi * j / M;
    std::array<cplx, 2> g;
    cplx u = s.value(polar(s.a * (1 - 1e-12), th), &g);
    cplx dr = g[0] * std::cos(th) + g[1] * std::sin(th);
    CHECK(std::abs(s.dirichlet_trace(th) - u) < 1e-10);
    CHECK(std::abs(s.impedance_trace(th) - (dr + kI * s.k * u)) < 1e-9 * s.k);
    flux += std::conj(u) * dr * (2 * kPi * s.a / M);
  }
  // lossless interior: no net power enters the disk
  CHECK(std::abs(flux.imag()) < 1e-10);
}

TEST_CASE("manufactured data: source term") {
  auto curve = make_circle(0.4);
  Mat2 nu;
  nu << 2.0, 0.3, 0.3, 1.5;
  auto part = single_subdomain(1.5, nu);
  auto ms = manufactured_solution(quadratic_x1_field(), 3.0, curve, part, 16);
  for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.25, 0.05}}) {
    cplx expected = -2.0 * nu(0, 0) - 9.0 * 2.25 * x[0] * x[0];
    CHECK(std::abs(ms.f(x) - expected) < 1e-13);
  }
  auto pw = manufactured_solution(plane_wave_field(3.0, 0.5), 3.0, curve, single_subdomain(1.0), 16);
  for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.25, 0.05}}) CHECK(std::abs(pw.f(x)) < 1e-12);
  auto j0 = manufactured_solution(bessel_j0_field(4.5), 3.0, curve, single_subdomain(1.5), 16);
  for (Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.1, 0.2}, Vec2{-0.25, 0.05}}) CHECK(std::abs(j0.f(x)) < 1e-12);
}

TEST_CASE("manufactured data: J0 mode reproduces incident data") {
  double k = 4.0, a = 0.4, n0 = 1.5;
  auto s = solve_disk_series(k, a, n0);
  cplx c0 = s.coeff_c(0);
  SmoothField base = bessel_j0_field(k * n0), u;
  u.value = [=](const Vec2& x) { return c0 * base.value(x); };
  u.grad = [=](const Vec2& x) {
    auto g = base.grad(x);
    return std::array<cplx, 2>{c0 * g[0], c0 * g[1]};
  };
  u.hessian = base.hessian;
  auto ms = manufactured_solution(u, k, make_circle(a), single_subdomain(n0), 16);
  double J = bessel_J(0, k * a), Jd = -bessel_J(1, k * a);
  cplx g_exp = J, h_exp = -(k * Jd + kI * k * J);
  for (double t : {0.0, 1.3, 4.0}) {
    CHECK(std::abs(ms.g(t) - g_exp) < 1e-9);
    CHECK(std::abs(ms.h(t) - h_exp) < 1e-9 * k);
  }
}

TEST_CASE("manufactured data: full disk solution reproduces plane-wave data") {
  double k = 4.0, a = 0.4, n0 = 1.5;
  auto s = solve_disk_series(k, a, n0, 0.6);
  auto ms = manufactured_solution(interior_field(s), k, make_circle(a), single_subdomain(n0), 48);
  for (double t : {0.0, 0.8, 2.2, 5.0}) {
    CHECK(std::abs(ms.g(t) - s.data_g(t)) < 1e-9);
    CHECK(std::abs(ms.h(t) - s.data_h(t)) < 1e-9 * k);
  }
}

TEST_CASE("disk series rejects bad parameters") {
  CHECK_THROWS_AS(solve_disk_series(-1.0, 0.4, 1.5), std::domain_error);
  CHECK_THROWS_AS(solve_disk_series(200.0, 0.4, 1.5), std::domain_error);
  CHECK_THROWS_AS(manufactured_solution(quadratic_x1_field(), 1.0, make_kite(), single_subdomain(1.0)),
                  std::domain_error);
}
