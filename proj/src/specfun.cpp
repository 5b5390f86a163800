#include "fembem/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fembem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEuler = 0.57721566490153286061;
constexpr double kSwitch = 25.0;  // Miller/Neumann below, Hankel asymptotics above

void check_args(int order, double z, bool allow_zero) {
  if (order < 0 || order > 200)
    throw std::domain_error("bessel: order out of range: " + std::to_string(order));
  if (!(z <= 1e4) || z < 0.0 || (!allow_zero && z == 0.0))
    throw std::domain_error("bessel: argument out of range: " + std::to_string(z));
}

int miller_start(int nmax, double z) {
  double m = std::max(static_cast<double>(nmax), z);
  int n = static_cast<int>(m + 40.0 + 12.0 * std::cbrt(m));
  return n + (n % 2);
}

// Unnormalized minimal solution of the three-term recurrence, indices 0..N.
std::vector<double> miller_raw(int N, double z) {
  std::vector<double> b(N + 2, 0.0);
  b[N] = 1e-30;
  for (int m = N; m >= 1; --m) {
    b[m - 1] = (2.0 * m / z) * b[m] - b[m + 1];
    if (std::abs(b[m - 1]) > 1e250) {
      for (int j = m - 1; j <= N; ++j) b[j] *= 1e-250;
    }
  }
  return b;
}

// Leading Hankel asymptotics for orders 0 and 1.
void hankel_asymptotic(double nu, double z, double& J, double& Y) {
  double mu = 4.0 * nu * nu;
  double P = 0.0, Q = 0.0;
  double t = 1.0;
  double prev = 1e300;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) t *= (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * z);
    double at = std::abs(t);
    if (at > prev) break;
    prev = at;
    switch (k % 4) {
      case 0: P += t; break;
      case 1: Q += t; break;
      case 2: P -= t; break;
      case 3: Q -= t; break;
    }
    if (at < 1e-18 * (std::abs(P) + std::abs(Q))) break;
  }
  double phase = (0.5 * nu + 0.25) * kPi;
  double cz = std::cos(z), sz = std::sin(z);
  double cp = std::cos(phase), sp = std::sin(phase);
  double cchi = cz * cp + sz * sp;
  double schi = sz * cp - cz * sp;
  double amp = std::sqrt(2.0 / (kPi * z));
  J = amp * (P * cchi - Q * schi);
  Y = amp * (P * schi + Q * cchi);
}

// Normalized J_0..J_N from Miller's algorithm for z < kSwitch.
std::vector<double> miller_small(int nmax, double z) {
  int N = miller_start(nmax, z);
  std::vector<double> b = miller_raw(N, z);
  double s = b[0];
  for (int m = 2; m <= N; m += 2) s += 2.0 * b[m];
  for (double& v : b) v /= s;
  return b;
}

struct Small01 {
  double J0, J1, Y0, Y1;
  double sum_even;  // sum_{k>=1} (-1)^k J_{2k} / k
  double sum_odd;   // sum_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k
};

Small01 small01(double z) {
  // Miller sweep on the stack; z < kSwitch keeps the start index below 128
  int N = miller_start(1, z);
  double J[130];
  J[N + 1] = 0.0;
  J[N] = 1e-30;
  for (int m = N; m >= 1; --m) {
    J[m - 1] = (2.0 * m / z) * J[m] - J[m + 1];
    if (std::abs(J[m - 1]) > 1e250)
      for (int j = m - 1; j <= N; ++j) J[j] *= 1e-250;
  }
  double nrm = J[0];
  for (int m = 2; m <= N; m += 2) nrm += 2.0 * J[m];
  for (int m = 0; m <= N; ++m) J[m] /= nrm;
  double se = 0.0, so = 0.0;
  for (int k = 1; 2 * k + 1 <= N; ++k) {
    double sg = (k % 2 == 0) ? 1.0 : -1.0;
    se += sg * J[2 * k] / k;
    so += sg * (J[2 * k - 1] - J[2 * k + 1]) / k;
  }
  double L = std::log(0.5 * z) + kEuler;
  Small01 r;
  r.J0 = J[0];
  r.J1 = J[1];
  r.sum_even = se;
  r.sum_odd = so;
  r.Y0 = (2.0 / kPi) * L * J[0] - (4.0 / kPi) * se;
  r.Y1 = (2.0 / kPi) * L * J[1] - (2.0 / kPi) * J[0] / z + (2.0 / kPi) * so;
  return r;
}

void bessel01(double z, double& J0, double& J1, double& Y0, double& Y1) {
  if (z < kSwitch) {
    Small01 s = small01(z);
    J0 = s.J0;
    J1 = s.J1;
    Y0 = s.Y0;
    Y1 = s.Y1;
  } else {
    hankel_asymptotic(0.0, z, J0, Y0);
    hankel_asymptotic(1.0, z, J1, Y1);
  }
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw std::range_error(std::string(what) + ": result not representable");
  return v;
}

}  // namespace

std::vector<double> bessel_J_array(int nmax, double z) {
  check_args(nmax, z, true);
  std::vector<double> out(nmax + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (z < kSwitch) {
    std::vector<double> J = miller_small(nmax, z);
    for (int n = 0; n <= nmax; ++n) out[n] = J[n];
    return out;
  }
  int N = miller_start(nmax, z);
  std::vector<double> b = miller_raw(N, z);
  double J0, J1, Y0, Y1;
  hankel_asymptotic(0.0, z, J0, Y0);
  hankel_asymptotic(1.0, z, J1, Y1);
  double scale = (J0 * b[0] + J1 * b[1]) / (b[0] * b[0] + b[1] * b[1]);
  for (int n = 0; n <= nmax; ++n) out[n] = b[n] * scale;
  out[0] = J0;
  if (nmax >= 1) out[1] = J1;
  return out;
}

std::vector<double> bessel_Y_array(int nmax, double z) {
  check_args(nmax, z, false);
  double J0, J1, Y0, Y1;
  bessel01(z, J0, J1, Y0, Y1);
  std::vector<double> out(nmax + 1);
  out[0] = Y0;
  if (nmax >= 1) out[1] = Y1;
  for (int n = 1; n < nmax; ++n) {
    out[n + 1] = (2.0 * n / z) * out[n] - out[n - 1];
    if (!std::isfinite(out[n + 1])) {
      for (int m = n + 1; m <= nmax; ++m) out[m] = -INFINITY;
      break;
    }
  }
  return out;
}

double bessel_J(int order, double z) {
  check_args(order, z, true);
  return finite_or_throw(bessel_J_array(order, z)[order], "bessel_J");
}

double bessel_Y(int order, double z) {
  check_args(order, z, false);
  return finite_or_throw(bessel_Y_array(order, z)[order], "bessel_Y");
}

cplx hankel1(int order, double z) {
  check_args(order, z, false);
  if (order <= 1) {
    double J0, J1, Y0, Y1;
    bessel01(z, J0, J1, Y0, Y1);
    return order == 0 ? cplx(J0, Y0) : cplx(J1, Y1);
  }
  return {bessel_J(order, z), bessel_Y(order, z)};
}

KernelEval green_kernel(double k, const Vec2& x, const Vec2& y) {
  if (k < 0.0) throw std::domain_error("green_kernel: negative wavenumber");
  double d0 = y[0] - x[0], d1 = y[1] - x[1];
  double r = std::hypot(d0, d1);
  if (r == 0.0) throw std::domain_error("green_kernel: coincident points");
  KernelEval e;
  cplx dr;
  if (k == 0.0) {
    e.value = -std::log(r) / (2.0 * kPi);
    dr = -1.0 / (2.0 * kPi * r);
  } else {
    double J0, J1, Y0, Y1;
    bessel01(k * r, J0, J1, Y0, Y1);
    e.value = cplx(0.0, 0.25) * cplx(J0, Y0);
    dr = cplx(0.0, -0.25) * k * cplx(J1, Y1);
  }
  e.grad_y = {dr * (d0 / r), dr * (d1 / r)};
  return e;
}

LogSplit kernel_log_split(double k, double r) {
  if (k < 0.0) throw std::domain_error("kernel_log_split: negative wavenumber");
  if (k == 0.0) return {cplx(-1.0 / (2.0 * kPi), 0.0), cplx(0.0, 0.0)};
  double z = k * r;
  double c = std::log(0.5 * k) + kEuler;
  if (z == 0.0) return {cplx(-1.0 / (2.0 * kPi), 0.0), cplx(-c / (2.0 * kPi), 0.25)};
  if (z < kSwitch) {
    Small01 s = small01(z);
    cplx smooth = cplx(-c / (2.0 * kPi), 0.25) * s.J0 + s.sum_even / kPi;
    return {cplx(-s.J0 / (2.0 * kPi), 0.0), smooth};
  }
  double J0, Y0;
  hankel_asymptotic(0.0, z, J0, Y0);
  cplx A(-J0 / (2.0 * kPi), 0.0);
  cplx G = cplx(0.0, 0.25) * cplx(J0, Y0);
  return {A, G - A * std::log(r)};
}

LogSplit kernel_log_split(double k, const Vec2& x, const Vec2& y) {
  double r = std::hypot(y[0] - x[0], y[1] - x[1]);
  if (r == 0.0) throw std::domain_error("kernel_log_split: coincident points");
  return kernel_log_split(k, r);
}

LogSplit kernel_dr_log_split(double k, double r) {
  if (k < 0.0) throw std::domain_error("kernel_dr_log_split: negative wavenumber");
  if (k == 0.0) return {cplx(0.0, 0.0), cplx(-1.0 / (2.0 * kPi), 0.0)};
  double z = k * r;
  if (z == 0.0) return {cplx(0.0, 0.0), cplx(-1.0 / (2.0 * kPi), 0.0)};
  double c = std::log(0.5 * k) + kEuler;
  if (z < kSwitch) {
    Small01 s = small01(z);
    cplx A(z * s.J1 / (2.0 * kPi), 0.0);
    cplx smooth = cplx(0.0, -0.25) * z * s.J1 + (c * z * s.J1 - s.J0 + z * s.sum_odd) / (2.0 * kPi);
    return {A, smooth};
  }
  double J1, Y1;
  hankel_asymptotic(1.0, z, J1, Y1);
  cplx A(z * J1 / (2.0 * kPi), 0.0);
  cplx full = cplx(0.0, -0.25) * z * cplx(J1, Y1);
  return {A, full - A * std::log(r)};
}

KernelSplits kernel_splits(double k, double r) {
  if (k < 0.0) throw std::domain_error("kernel_splits: negative wavenumber");
  KernelSplits ks;
  double z = k * r;
  if (k == 0.0 || z == 0.0 || z >= kSwitch) {
    ks.g = kernel_log_split(k, r);
    ks.rdg = kernel_dr_log_split(k, r);
    return ks;
  }
  double c = std::log(0.5 * k) + kEuler;
  Small01 s = small01(z);
  ks.g = {cplx(-s.J0 / (2.0 * kPi), 0.0), cplx(-c / (2.0 * kPi), 0.25) * s.J0 + s.sum_even / kPi};
  ks.rdg = {cplx(z * s.J1 / (2.0 * kPi), 0.0),
            cplx(0.0, -0.25) * z * s.J1 + (c * z * s.J1 - s.J0 + z * s.sum_odd) / (2.0 * kPi)};
  return ks;
}

void green_radial(double k, double r, cplx& G, cplx& Gr) {
  if (k == 0.0) {
    G = -std::log(r) / (2.0 * kPi);
    Gr = -1.0 / (2.0 * kPi * r);
    return;
  }
  double J0, J1, Y0, Y1;
  bessel01(k * r, J0, J1, Y0, Y1);
  G = cplx(0.0, 0.25) * cplx(J0, Y0);
  Gr = cplx(0.0, -0.25) * k * cplx(J1, Y1);
}

void green_radial2(double k, double r, cplx& G, cplx& Gr, cplx& Grr) {
  if (k == 0.0) {
    G = -std::log(r) / (2.0 * kPi);
    Gr = -1.0 / (2.0 * kPi * r);
    Grr = 1.0 / (2.0 * kPi * r * r);
    return;
  }
  double z = k * r;
  double J0, J1, Y0, Y1;
  bessel01(z, J0, J1, Y0, Y1);
  cplx H0(J0, Y0), H1(J1, Y1);
  G = cplx(0.0, 0.25) * H0;
  Gr = cplx(0.0, -0.25) * k * H1;
  Grr = cplx(0.0, -0.25) * k * k * (H0 - H1 / z);
}

cplx green_dr(double k, double r) {
  if (k == 0.0) return -1.0 / (2.0 * kPi * r);
  double J0, J1, Y0, Y1;
  bessel01(k * r, J0, J1, Y0, Y1);
  return cplx(0.0, -0.25) * k * cplx(J1, Y1);
}

cplx green_drr(double k, double r) {
  if (k == 0.0) return 1.0 / (2.0 * kPi * r * r);
  double z = k * r;
  double J0, J1, Y0, Y1;
  bessel01(z, J0, J1, Y0, Y1);
  cplx H0(J0, Y0), H1(J1, Y1);
  return cplx(0.0, -0.25) * k * k * (H0 - H1 / z);
}

}  // namespace fembem
