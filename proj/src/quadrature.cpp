#include "fembem/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fembem {

namespace {

QuadratureRule1D compute_gauss(int n) {
  QuadratureRule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // final derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Gauss rule for the weight -ln x on [0,1] via the modified Chebyshev algorithm with
// monic shifted Legendre polynomials as the auxiliary basis.
QuadratureRule1D compute_log_gauss(int n) {
  int m = 2 * n;
  // modified moments of monic shifted Legendre p_j:  int p_j (-ln x) dx
  std::vector<double> nu(m);
  double lead = 1.0;  // leading coefficient of P*_j is binom(2j, j)
  for (int j = 0; j < m; ++j) {
    if (j > 0) lead *= (2.0 * j) * (2.0 * j - 1.0) / (double(j) * j);
    double v = j == 0 ? 1.0 : ((j % 2 == 0) ? 1.0 : -1.0) / (double(j) * (j + 1));
    nu[j] = v / lead;
  }
  std::vector<double> a(m, 0.5), b(m);
  for (int k = 0; k < m; ++k) b[k] = k == 0 ? 1.0 : double(k) * k / (4.0 * (4.0 * k * k - 1.0));
  std::vector<double> alpha(n), beta(n);
  alpha[0] = a[0] + nu[1] / nu[0];
  beta[0] = nu[0];
  std::vector<double> s_km1(m, 0.0), s_k = nu;
  for (int k = 1; k < n; ++k) {
    std::vector<double> s_kp1(m, 0.0);
    for (int l = k; l < m - k; ++l) {
      s_kp1[l] = s_k[l + 1] - (alpha[k - 1] - a[l]) * s_k[l] - beta[k - 1] * s_km1[l] + b[l] * s_k[l - 1];
    }
    alpha[k] = a[k] + s_kp1[k + 1] / s_kp1[k] - s_k[k] / s_k[k - 1];
    beta[k] = s_kp1[k] / s_k[k - 1];
    s_km1 = s_k;
    s_k = s_kp1;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    T(k, k) = alpha[k];
    if (k + 1 < n) T(k, k + 1) = T(k + 1, k) = std::sqrt(beta[k + 1]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  QuadratureRule1D r;
  for (int k = 0; k < n; ++k) {
    double v0 = es.eigenvectors()(0, k);
    r.x.push_back(es.eigenvalues()(k));
    r.w.push_back(beta[0] * v0 * v0);
  }
  return r;
}

template <class T>
struct Cache {
  std::mutex mu;
  std::map<int, std::unique_ptr<T>> items;
  template <class F>
  const T& get(int key, F make) {
    std::lock_guard<std::mutex> lk(mu);
    auto it = items.find(key);
    if (it != items.end()) return *it->second;
    auto p = std::make_unique<T>(make());
    const T& ref = *p;
    items[key] = std::move(p);
    return ref;
  }
};

}  // namespace

const QuadratureRule1D& gauss_rule(int n) {
  if (n < 1 || n > 64) throw std::domain_error("gauss_rule: unsupported point count");
  static Cache<QuadratureRule1D> cache;
  return cache.get(n, [n] { return compute_gauss(n); });
}

const QuadratureRule1D& gauss_rule01(int n) {
  if (n < 1 || n > 64) throw std::domain_error("gauss_rule01: unsupported point count");
  static Cache<QuadratureRule1D> cache;
  return cache.get(n, [n] {
    QuadratureRule1D r = gauss_rule(n);
    for (int i = 0; i < n; ++i) {
      r.x[i] = 0.5 * (r.x[i] + 1.0);
      r.w[i] *= 0.5;
    }
    return r;
  });
}

const QuadratureRule2D& triangle_rule(int degree) {
  if (degree < 0 || degree > 40) throw std::domain_error("triangle_rule: unsupported degree");
  static Cache<QuadratureRule2D> cache;
  return cache.get(degree, [degree] {
    // int_T f = int_0^1 int_0^1 f(u, (1-u) v) (1-u) du dv
    int nu = (degree + 2) / 2 + 1;
    int nv = (degree + 1) / 2 + 1;
    const QuadratureRule1D& gu = gauss_rule01(nu);
    const QuadratureRule1D& gv = gauss_rule01(nv);
    QuadratureRule2D r;
    r.exactness = degree;
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        double u = gu.x[i], v = gv.x[j];
        r.x.push_back({u, (1.0 - u) * v});
        r.w.push_back(gu.w[i] * gv.w[j] * (1.0 - u));
      }
    return r;
  });
}

const LogQuadratureRule& log_rule(int n) {
  if (n < 1 || n > 40) throw std::domain_error("log_rule: unsupported point count");
  static Cache<LogQuadratureRule> cache;
  return cache.get(n, [n] {
    LogQuadratureRule r;
    r.log_part = compute_log_gauss(n);
    r.smooth = gauss_rule01(n);
    return r;
  });
}

}  // namespace fembem
