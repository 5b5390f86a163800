#include "fembem/reference.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fembem/bem.hpp"

namespace fembem {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

cplx ipow(int n) {
  static const cplx p[4] = {1.0, kI, -1.0, -kI};
  return p[((n % 4) + 4) % 4];
}

// J_n and J_n' for n = 0..nmax at z, with J_{nmax+1} available for the derivative.
void bessel_jd(int nmax, double z, std::vector<double>& J, std::vector<double>& Jd) {
  J = bessel_J_array(nmax + 1, z);
  Jd.resize(nmax + 1);
  Jd[0] = -J[1];
  for (int n = 1; n <= nmax; ++n) Jd[n] = 0.5 * (J[n - 1] - J[n + 1]);
}

void hankel_hd(int nmax, double z, std::vector<cplx>& H, std::vector<cplx>& Hd) {
  std::vector<double> J = bessel_J_array(nmax + 1, z), Y = bessel_Y_array(nmax + 1, z);
  H.resize(nmax + 2);
  for (int n = 0; n <= nmax + 1; ++n) H[n] = cplx(J[n], Y[n]);
  Hd.resize(nmax + 1);
  Hd[0] = -H[1];
  for (int n = 1; n <= nmax; ++n) Hd[n] = 0.5 * (H[n - 1] - H[n + 1]);
}

double parity(int n) { return (n % 2) ? -1.0 : 1.0; }

}  // namespace

cplx PlaneWave::value(const Vec2& x, std::array<cplx, 2>* grad) const {
  double dx = std::cos(angle), dy = std::sin(angle);
  cplx v = std::exp(kI * (k * (dx * x[0] + dy * x[1])));
  if (grad) *grad = {kI * k * dx * v, kI * k * dy * v};
  return v;
}

DiskTransmissionSolution solve_disk_series(double k, double a, double n0, double angle, int N) {
  if (!(k > 0.0) || !(a > 0.0) || !(n0 > 0.0)) throw std::domain_error("solve_disk_series: parameters must be positive");
  if (k * a > 60.0) throw std::domain_error("solve_disk_series: k a exceeds 60");
  DiskTransmissionSolution s;
  s.k = k;
  s.a = a;
  s.n0 = n0;
  s.angle = angle;
  s.N = N >= 0 ? N : static_cast<int>(std::ceil(k * a)) + 20;
  const int M = s.N;
  double kap = k * n0;
  std::vector<double> Ji, Jid, Jo, Jod;
  std::vector<cplx> Ho, Hod;
  bessel_jd(M, kap * a, Ji, Jid);
  bessel_jd(M, k * a, Jo, Jod);
  hankel_hd(M, k * a, Ho, Hod);
  s.c.assign(2 * M + 1, 0.0);
  s.d.assign(2 * M + 1, 0.0);
  double cmax = 0.0;
  for (int n = -M; n <= M; ++n) {
    int m = std::abs(n);
    cplx an = ipow(n) * std::exp(-kI * (n * angle));
    Eigen::Matrix2cd A;
    A << Ji[m], -Ho[m], kap * Jid[m], -k * Hod[m];
    Eigen::Vector2cd b(an * Jo[m], an * k * Jod[m]);
    Eigen::PartialPivLU<Eigen::Matrix2cd> lu(A);
    if (std::abs(A.determinant()) < 1e-300)
      throw std::runtime_error("solve_disk_series: singular matching system at mode " + std::to_string(n));
    Eigen::Vector2cd x = lu.solve(b);
    double res = (A * x - b).norm() / std::max(b.norm(), 1e-300);
    s.matching_residual = std::max(s.matching_residual, b.norm() > 0 ? res : 0.0);
    s.c[n + M] = x(0);
    s.d[n + M] = x(1);
    cmax = std::max({cmax, std::abs(x(0)), std::abs(x(1))});
  }
  cmax = 0.0;
  double tail = 0.0;
  for (int n = -M; n <= M; ++n) {
    int m = std::abs(n);
    double t = std::abs(s.c[n + M] * Ji[m]) + std::abs(s.d[n + M] * Ho[m]);
    cmax = std::max(cmax, t);
    if (m == M) tail = std::max(tail, t);
  }
  s.tail = tail / cmax;
  return s;
}

double DiskTransmissionSolution::index(const Vec2& x) const { return std::hypot(x[0], x[1]) < a ? n0 : 1.0; }

cplx DiskTransmissionSolution::value(const Vec2& x, std::array<cplx, 2>* grad) const {
  double r = std::max(std::hypot(x[0], x[1]), 1e-14);
  double th = std::atan2(x[1], x[0]);
  bool inside = r < a;
  cplx v = 0.0, dr = 0.0, dth = 0.0;
  if (inside) {
    std::vector<double> J, Jd;
    bessel_jd(N, k * n0 * r, J, Jd);
    for (int n = -N; n <= N; ++n) {
      int m = std::abs(n);
      double sg = n < 0 ? parity(m) : 1.0;
      cplx e = std::exp(kI * (n * th)) * coeff_c(n) * sg;
      v += e * J[m];
      dr += e * k * n0 * Jd[m];
      dth += kI * double(n) * e * J[m];
    }
  } else {
    std::vector<cplx> H, Hd;
    hankel_hd(N, k * r, H, Hd);
    for (int n = -N; n <= N; ++n) {
      int m = std::abs(n);
      double sg = n < 0 ? parity(m) : 1.0;
      cplx e = std::exp(kI * (n * th)) * coeff_d(n) * sg;
      v += e * H[m];
      dr += e * k * Hd[m];
      dth += kI * double(n) * e * H[m];
    }
  }
  double c = std::cos(th), s = std::sin(th);
  std::array<cplx, 2> g{c * dr - s * dth / r, s * dr + c * dth / r};
  if (!inside) {
    std::array<cplx, 2> gi;
    v += incident().value(x, &gi);
    g[0] += gi[0];
    g[1] += gi[1];
  }
  if (grad) *grad = g;
  return v;
}

cplx DiskTransmissionSolution::dirichlet_trace(double theta) const {
  cplx v = 0.0;
  for (int n = -N; n <= N; ++n) v += dirichlet_mode(n) * std::exp(kI * (n * theta));
  return v / std::sqrt(2.0 * kPi * a);
}

cplx DiskTransmissionSolution::impedance_trace(double theta) const {
  cplx v = 0.0;
  for (int n = -N; n <= N; ++n) v += impedance_mode(n) * std::exp(kI * (n * theta));
  return v / std::sqrt(2.0 * kPi * a);
}

cplx DiskTransmissionSolution::dirichlet_mode(int n) const {
  if (std::abs(n) > N) return 0.0;
  int m = std::abs(n);
  double sg = n < 0 ? parity(m) : 1.0;
  return std::sqrt(2.0 * kPi * a) * coeff_c(n) * sg * bessel_J(m, k * n0 * a);
}

cplx DiskTransmissionSolution::impedance_mode(int n) const {
  if (std::abs(n) > N) return 0.0;
  int m = std::abs(n);
  double sg = n < 0 ? parity(m) : 1.0;
  double z = k * n0 * a;
  double J = bessel_J(m, z);
  double Jd = m == 0 ? -bessel_J(1, z) : 0.5 * (bessel_J(m - 1, z) - bessel_J(m + 1, z));
  return std::sqrt(2.0 * kPi * a) * coeff_c(n) * sg * (k * n0 * Jd + kI * k * J);
}

cplx DiskTransmissionSolution::data_g(double theta) const {
  return incident().value({a * std::cos(theta), a * std::sin(theta)});
}

cplx DiskTransmissionSolution::data_h(double theta) const {
  Vec2 x{a * std::cos(theta), a * std::sin(theta)};
  std::array<cplx, 2> g;
  cplx v = incident().value(x, &g);
  return -(g[0] * std::cos(theta) + g[1] * std::sin(theta) + kI * k * v);
}

SmoothField plane_wave_field(double k, double angle) {
  double dx = std::cos(angle), dy = std::sin(angle);
  SmoothField f;
  f.value = [=](const Vec2& x) { return std::exp(kI * (k * (dx * x[0] + dy * x[1]))); };
  f.grad = [=](const Vec2& x) {
    cplx v = std::exp(kI * (k * (dx * x[0] + dy * x[1])));
    return std::array<cplx, 2>{kI * k * dx * v, kI * k * dy * v};
  };
  f.hessian = [=](const Vec2& x) {
    cplx v = std::exp(kI * (k * (dx * x[0] + dy * x[1])));
    return std::array<cplx, 3>{-k * k * dx * dx * v, -k * k * dx * dy * v, -k * k * dy * dy * v};
  };
  return f;
}

SmoothField quadratic_x1_field() {
  SmoothField f;
  f.value = [](const Vec2& x) { return cplx(x[0] * x[0]); };
  f.grad = [](const Vec2& x) { return std::array<cplx, 2>{2.0 * x[0], 0.0}; };
  f.hessian = [](const Vec2&) { return std::array<cplx, 3>{2.0, 0.0, 0.0}; };
  return f;
}

SmoothField bessel_j0_field(double kappa) {
  SmoothField f;
  f.value = [=](const Vec2& x) { return cplx(bessel_J(0, kappa * std::hypot(x[0], x[1]))); };
  f.grad = [=](const Vec2& x) {
    double r = std::hypot(x[0], x[1]);
    if (r < 1e-14) return std::array<cplx, 2>{0.0, 0.0};
    double d = -kappa * bessel_J(1, kappa * r);
    return std::array<cplx, 2>{d * x[0] / r, d * x[1] / r};
  };
  f.hessian = [=](const Vec2& x) {
    double r = std::hypot(x[0], x[1]);
    double z = kappa * r;
    // f'/r and f'' of f(r) = J_0(kappa r)
    double d1r = z < 1e-6 ? -0.5 * kappa * kappa : -kappa * bessel_J(1, z) / r;
    double d2 = z < 1e-6 ? -0.5 * kappa * kappa : -kappa * kappa * (bessel_J(0, z) - bessel_J(1, z) / z);
    double ex = r > 0 ? x[0] / r : 1.0, ey = r > 0 ? x[1] / r : 0.0;
    return std::array<cplx, 3>{d2 * ex * ex + d1r * (1 - ex * ex), (d2 - d1r) * ex * ey,
                               d2 * ey * ey + d1r * (1 - ey * ey)};
  };
  return f;
}

cplx ManufacturedSolution::f(const Vec2& x) const {
  int tag = partition.classify(x);
  Mat2 nu = partition.nu(x, tag);
  double n = partition.n(x, tag);
  auto H = u.hessian(x);
  return -(nu(0, 0) * H[0] + (nu(0, 1) + nu(1, 0)) * H[1] + nu(1, 1) * H[2]) - k * k * n * n * u.value(x);
}

cplx ManufacturedSolution::u_ext(double t) const { return u.value(curve->position(t)); }

cplx ManufacturedSolution::m(double t) const {
  Vec2 x = curve->position(t), nrm = curve->normal(t);
  Vec2 xin{x[0] - 1e-9 * nrm[0], x[1] - 1e-9 * nrm[1]};
  Mat2 nu = partition.nu(x, partition.classify(xin));
  auto g = u.grad(x);
  cplx fx = nu(0, 0) * g[0] + nu(0, 1) * g[1], fy = nu(1, 0) * g[0] + nu(1, 1) * g[1];
  return fx * nrm[0] + fy * nrm[1] + kI * k * u.value(x);
}

cplx ManufacturedSolution::g(double t) const {
  cplx v = 0.0;
  for (int n = -modes; n <= modes; ++n) v += g_hat[n + modes] * std::exp(kI * (n * t));
  return v;
}

cplx ManufacturedSolution::h(double t) const {
  cplx v = 0.0;
  for (int n = -modes; n <= modes; ++n) v += h_hat[n + modes] * std::exp(kI * (n * t));
  return v;
}

ManufacturedSolution manufactured_solution(const SmoothField& u, double k, std::shared_ptr<BoundaryCurve> curve,
                                           const SubdomainPartition& partition, int modes) {
  if (!curve->is_circle()) throw std::domain_error("manufactured_solution: boundary data need a circular boundary");
  ManufacturedSolution s;
  s.k = k;
  s.u = u;
  s.curve = curve;
  s.partition = partition;
  s.modes = modes;
  const int M = 4 * modes;
  std::vector<cplx> ue(M), mm(M);
  for (int j = 0; j < M; ++j) {
    double t = 2.0 * kPi * j / M;
    ue[j] = s.u_ext(t);
    mm[j] = s.m(t);
  }
  double R = curve->radius();
  s.g_hat.assign(2 * modes + 1, 0.0);
  s.h_hat.assign(2 * modes + 1, 0.0);
  for (int n = -modes; n <= modes; ++n) {
    cplx uh = 0.0, mh = 0.0;
    for (int j = 0; j < M; ++j) {
      cplx e = std::exp(-kI * (2.0 * kPi * n * j / M));
      uh += ue[j] * e;
      mh += mm[j] * e;
    }
    uh /= double(M);
    mh /= double(M);
    cplx V = circle_symbol(BoundaryOp::V, k, R, n), K = circle_symbol(BoundaryOp::K, k, R, n);
    cplx W = circle_symbol(BoundaryOp::W, k, R, n);
    cplx Ap = 0.5 + K + kI * k * V;
    s.g_hat[n + modes] = (0.5 - K) * uh + V * (mh - kI * k * uh);
    s.h_hat[n + modes] = (-W + 2.0 * kI * k * K - k * k * V) * uh - Ap * mh;
  }
  return s;
}

}  // namespace fembem
