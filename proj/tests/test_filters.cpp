#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fembem/filters.hpp"

using namespace fembem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kR = 0.4;

CVector decaying_modes(int N, double power, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  CVector f(2 * N + 1);
  for (int n = -N; n <= N; ++n) f(n + N) = std::polar(std::pow(1.0 + n * n, -power / 2.0), ph(rng));
  return f;
}

std::vector<Vec2> disk_points(int count, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> pts;
  for (int i = 0; i < count; ++i) {
    double r = rho * std::sqrt(u(rng)), t = 2.0 * kPi * u(rng);
    pts.push_back({r * std::cos(t), r * std::sin(t)});
  }
  return pts;
}

}  // namespace

TEST_CASE("Cutoff rejects eta outside (0, 1)") {
  CHECK(filter_cutoff(0.5, 4.0) == doctest::Approx(8.0));
  for (double eta : {0.0, 1.0, -0.2, 1.5}) CHECK_THROWS_AS(filter_cutoff(eta, 4.0), std::domain_error);
  CHECK_THROWS_AS(filter_cutoff(0.5, 0.0), std::domain_error);
  CVector f = decaying_modes(8, 2.0, 1);
  CHECK_THROWS_AS(boundary_filter(f, kR, FilterKind::Low, FilterVariant::Plus, 1.0, 4.0), std::domain_error);
  CHECK_THROWS_AS(filter_bound_ratio(f, -0.5, -0.5, FilterVariant::Plus, 0.5, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(filter_bound_ratio(f, 1.5, 0.5, FilterVariant::Minus, 0.5, 4.0), std::invalid_argument);
}

TEST_CASE("Boundary filters split every mode vector") {
  for (auto variant : {FilterVariant::Plus, FilterVariant::Minus})
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CVector f = decaying_modes(40, 1.0, seed);
      auto hi = boundary_filter(f, kR, FilterKind::High, variant, 0.4, 3.0 + seed % 5);
      auto lo = boundary_filter(f, kR, FilterKind::Low, variant, 0.4, 3.0 + seed % 5);
      CVector sum = hi.modes + lo.modes;
      if (variant == FilterVariant::Minus) CHECK(std::abs(hi.modes(40)) <= 1e-13 * f.norm());
      CHECK((sum - f).norm() <= 1e-13 * f.norm());
    }
}

TEST_CASE("Constants are low and modes beyond the cutoff are high") {
  CVector c = CVector::Zero(33);
  c(16) = 2.0;
  auto hi = boundary_filter(c, kR, FilterKind::High, FilterVariant::Plus, 0.5, 4.0);
  auto lo = boundary_filter(c, kR, FilterKind::Low, FilterVariant::Plus, 0.5, 4.0);
  CHECK(hi.modes.norm() == 0.0);
  CHECK((lo.modes - c).norm() == 0.0);
  CVector w = CVector::Zero(33);
  w(16 + 9) = 1.0;
  w(16 - 12) = cplx(0.0, 1.0);
  hi = boundary_filter(w, kR, FilterKind::High, FilterVariant::Minus, 0.5, 4.0);
  CHECK((hi.modes - w).norm() == 0.0);
}

TEST_CASE("Low-pass extension reproduces the trace and is harmonic") {
  CVector f = decaying_modes(12, 2.0, 7);
  auto lo = boundary_filter(f, kR, FilterKind::Low, FilterVariant::Plus, 0.5, 4.0);
  REQUIRE(lo.extension);
  for (int i = 0; i < 25; ++i) {
    double t = 2.0 * kPi * i / 25.0;
    cplx trace = 0.0;
    for (int n = -12; n <= 12; ++n) trace += lo.modes(n + 12) * std::polar(1.0 / std::sqrt(2.0 * kPi * kR), n * t);
    CHECK(std::abs(lo.extension({kR * std::cos(t), kR * std::sin(t)}) - trace) <= 1e-13);
  }
  for (Vec2 x : disk_points(10, 0.6, 3)) {
    cplx mean = 0.0;
    for (int i = 0; i < 32; ++i) {
      double t = 2.0 * kPi * i / 32.0;
      mean += lo.extension({x[0] + 0.1 * std::cos(t), x[1] + 0.1 * std::sin(t)}) / 32.0;
    }
    CHECK(std::abs(mean - lo.extension(x)) <= 1e-12 * std::max(1.0, std::abs(lo.extension(x))));
  }
}

TEST_CASE("High-pass bound: critical data gives a k-stable constant") {
  double cmin = 1e300, cmax = 0.0;
  for (double k : {4.0, 8.0, 16.0}) {
    double c = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
      c = std::max(c, filter_bound_ratio(decaying_modes(256, 2.0, seed), 1.5, 0.5, FilterVariant::Plus, 0.5, k));
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  CHECK(cmax <= 2.0);
  CHECK(cmax / cmin <= 2.0);
}

TEST_CASE("High-pass bound holds for both variants and is sharp at the cutoff") {
  for (auto [s, sp, variant] : {std::tuple{1.5, 0.5, FilterVariant::Plus}, std::tuple{2.0, 0.0, FilterVariant::Plus},
                                std::tuple{0.5, -0.5, FilterVariant::Minus}, std::tuple{1.0, -1.0, FilterVariant::Minus},
                                std::tuple{0.0, 0.0, FilterVariant::Minus}}) {
    for (double k : {4.0, 8.0, 16.0}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed)
        CHECK(filter_bound_ratio(decaying_modes(256, 1.0 + seed * 0.3, seed), s, sp, variant, 0.5, k) <= 2.0);
      const int n = static_cast<int>(std::ceil(filter_cutoff(0.5, k)));
      CVector single = CVector::Zero(513);
      single(256 + n) = 1.0;
      double c = filter_bound_ratio(single, s, sp, variant, 0.5, k);
      CHECK(c >= 0.5);
      CHECK(c <= 2.0);
    }
  }
}

TEST_CASE("Volume filter: constants, plane waves and the identity") {
  const double k = 4.0, eta = 0.5;
  auto pts = disk_points(1000, kR, 11);
  VolumeFilter one([](const Vec2&) { return cplx(1.0); }, {0.0, 0.0}, kR, eta, k);
  double worst = 0.0;
  for (size_t i = 0; i < 100; ++i) worst = std::max(worst, std::abs(one.high(pts[i])));
  CHECK(worst <= 1e-12);

  const double kappa = 2.0 * one.cutoff();
  VolumeFilter wave([kappa](const Vec2& x) { return std::polar(1.0, kappa * (0.6 * x[0] + 0.8 * x[1])); }, {0.0, 0.0},
                    kR, eta, k);
  worst = 0.0;
  for (size_t i = 0; i < 100; ++i) worst = std::max(worst, std::abs(wave.low(pts[i])));
  CHECK(worst <= 1e-8);

  auto v = [](const Vec2& x) { return cplx(std::exp(x[0]) * std::cos(3.0 * x[1]), std::pow(std::abs(x[1]), 1.5)); };
  VolumeFilter vf(v, {0.0, 0.0}, kR, eta, k);
  auto [hi, lo] = vf.apply(pts);
  worst = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, std::abs(hi[i] + lo[i] - v(pts[i])));
  CHECK(worst <= 1e-13);
}

TEST_CASE("Volume high-pass of a limited-smoothness field decays with the cutoff") {
  auto v = [](const Vec2& x) { return cplx(std::pow(std::abs(x[0]), 1.5)); };
  auto pts = disk_points(400, kR, 5);
  std::vector<double> rms;
  for (double k : {4.0, 8.0, 16.0}) {
    VolumeFilter f(v, {0.0, 0.0}, kR, 0.5, k);
    double s = 0.0;
    for (const Vec2& x : pts) s += std::norm(f.high(x));
    rms.push_back(std::sqrt(s / pts.size()));
  }
  for (size_t i = 1; i < rms.size(); ++i) CHECK(std::log2(rms[i - 1] / rms[i]) >= 1.5);
}
