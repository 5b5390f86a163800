// Arbitrary-precision power-series evaluator for J_n and Y_n; writes the golden fixture.
//
// Each series is summed in MPFR; the working precision starts above the size of the largest
// intermediate term and is raised until two runs 40 digits apart agree.  Past k > z the
// terms decrease by at least a factor 1/4 per step, so stopping once a term drops below
// 1e-40 min(|t_0|, 1) bounds the truncation error by 4/3 of that term.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

using boost::multiprecision::mpfr_float;

namespace {

struct Pair {
  mpfr_float J, Y;
};

Pair series(int n, const mpfr_float& z) {
  mpfr_float h = z / 2;
  mpfr_float h2 = h * h;
  mpfr_float euler = boost::math::constants::euler<mpfr_float>();
  mpfr_float pi = boost::math::constants::pi<mpfr_float>();

  // t_k = (-1)^k h^{2k+n} / (k! (n+k)!)
  mpfr_float nf = 1;
  for (int j = 2; j <= n; ++j) nf *= j;
  mpfr_float t = pow(h, n) / nf;
  mpfr_float Hk = 0;  // harmonic number H_k
  mpfr_float Hnk = 0; // H_{n+k}
  for (int j = 1; j <= n; ++j) Hnk += mpfr_float(1) / j;
  mpfr_float J = 0, S = 0;
  // J and Y are at least of size min(|t_0|, 1/sqrt(z)) away from their zeros
  mpfr_float tol = mpfr_float("1e-40") * (t < 1 ? t : mpfr_float(1));
  for (int k = 0;; ++k) {
    if (k > 0) {
      t *= -h2 / (mpfr_float(k) * (n + k));
      Hk += mpfr_float(1) / k;
      Hnk += mpfr_float(1) / (n + k);
    }
    J += t;
    S += (Hk + Hnk - 2 * euler) * t;
    if (k > z && abs(t) * (Hk + Hnk + 2) < tol)
      break;
  }
  // finite sum
  mpfr_float F = 0;
  if (n > 0) {
    mpfr_float fact_nk1 = 1;  // (n-k-1)! for k = 0
    for (int j = 2; j <= n - 1; ++j) fact_nk1 *= j;
    mpfr_float kf = 1;
    for (int k = 0; k <= n - 1; ++k) {
      if (k > 0) {
        kf *= k;
        fact_nk1 /= (n - k);
      }
      F += fact_nk1 / kf * pow(h, 2 * k - n);
    }
  }
  mpfr_float Y = -F / pi + 2 / pi * log(h) * J - S / pi;
  return {J, Y};
}

}  // namespace

int main(int argc, char** argv) {
  std::string out = argc > 1 ? argv[1] : "bessel_golden.txt";
  std::vector<int> orders = {0, 1, 2, 3, 5, 10, 25, 50, 100, 200};
  std::vector<double> zs = {1e-3, 0.05, 0.3,  1.0,  2.5,  7.25,  11.0,  13.5,   19.9,  24.75,
                            25.5, 33.3, 48.1, 75.0, 99.9, 150.7, 420.3, 1003.7, 2500.1, 9999.5};
  std::ofstream f(out);
  f << "# order z Re(H1_n(z))=J_n(z) Im(H1_n(z))=Y_n(z)\n";
  int count = 0;
  for (int n : orders) {
    for (double zd : zs) {
      // raise the working precision until two runs 40 digits apart agree to 30 digits
      unsigned digits = 60 + static_cast<unsigned>(zd / std::log(10.0) + n * std::log10(zd + 2.0));
      Pair p;
      for (;;) {
        mpfr_float::default_precision(digits);
        p = series(n, mpfr_float(zd));
        mpfr_float::default_precision(digits + 40);
        Pair q = series(n, mpfr_float(zd));
        mpfr_float tol("1e-30");
        if (abs(q.J - p.J) <= tol * abs(q.J) && abs(q.Y - p.Y) <= tol * abs(q.Y)) {
          p = q;
          break;
        }
        digits = digits * 3 / 2;
      }
      double J = p.J.convert_to<double>();
      double Y = p.Y.convert_to<double>();
      // keep values representable in double and away from zeros of J or Y
      if (!std::isfinite(J) || !std::isfinite(Y) || std::abs(J) < 1e-280 || std::abs(Y) > 1e280) continue;
      double env = zd > n + 5 ? std::sqrt(2.0 / (M_PI * zd)) : 0.0;
      if (env > 0 && (std::abs(J) < 0.05 * env || std::abs(Y) < 0.05 * env)) continue;
      f << n << ' ' << std::setprecision(17) << zd << ' ' << J << ' ' << Y << '\n';
      ++count;
    }
  }
  std::cerr << "wrote " << count << " records to " << out << '\n';
  return 0;
}
