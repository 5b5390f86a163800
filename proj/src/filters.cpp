#include "fembem/filters.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace fembem {

namespace {

const double kPi = 3.14159265358979323846;

void check_range(double s, double sp, FilterVariant v) {
  if (sp > s) throw std::invalid_argument("filter: s' must not exceed s");
  if (v == FilterVariant::Plus && !(sp >= 0.0 && s > 0.0))
    throw std::invalid_argument("filter: plus variant needs 0 <= s' <= s, s > 0");
  if (v == FilterVariant::Minus && !(sp >= -1.0 && s <= 1.0))
    throw std::invalid_argument("filter: minus variant needs -1 <= s' <= s <= 1");
}

}  // namespace

std::string to_string(FilterKind k) { return k == FilterKind::High ? "high" : "low"; }
std::string to_string(FilterVariant v) { return v == FilterVariant::Plus ? "plus" : "minus"; }

double filter_cutoff(double eta, double k) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("filter: eta must lie in (0, 1)");
  if (!(k > 0.0)) throw std::domain_error("filter: k must be positive");
  return k / eta;
}

BoundaryFilterOutput boundary_filter(const CVector& modes, double R, FilterKind kind, FilterVariant variant, double eta,
                                     double k, Vec2 center) {
  const double cut = filter_cutoff(eta, k);
  if (modes.size() % 2 != 1) throw std::invalid_argument("boundary_filter: mode vector must have odd length");
  if (!(R > 0.0)) throw std::invalid_argument("boundary_filter: radius must be positive");
  const int N = static_cast<int>(modes.size() - 1) / 2;
  BoundaryFilterOutput out;
  out.R = R;
  out.modes = CVector::Zero(modes.size());
  for (int n = -N; n <= N; ++n) {
    bool low = std::abs(n) < cut;
    if (low == (kind == FilterKind::Low)) out.modes(n + N) = modes(n + N);
  }
  if (variant == FilterVariant::Minus && kind == FilterKind::High) out.modes(N) = 0.0;
  if (kind == FilterKind::Low) {
    auto m = std::make_shared<CVector>(out.modes);
    const double norm = 1.0 / std::sqrt(2.0 * kPi * R);
    out.extension = [m, N, R, norm, center](const Vec2& x) {
      cplx z((x[0] - center[0]) / R, (x[1] - center[1]) / R);
      cplx s = (*m)(N), zp = 1.0;
      for (int n = 1; n <= N; ++n) {
        zp *= z;
        s += (*m)(N + n) * zp + (*m)(N - n) * std::conj(zp);
      }
      return norm * s;
    };
  }
  return out;
}

BoundaryFilterOutput boundary_filter(const BoundaryFourier& F, const CVector& coeffs, FilterKind kind,
                                     FilterVariant variant, double eta, double k) {
  return boundary_filter(F.forward(coeffs), F.R, kind, variant, eta, k);
}

double filter_bound_ratio(const CVector& modes, double s, double sp, FilterVariant variant, double eta, double k) {
  check_range(s, sp, variant);
  BoundaryFilterOutput h = boundary_filter(modes, 1.0, FilterKind::High, variant, eta, k);
  double fs = std::sqrt(fourier_norm_sq(modes, s));
  if (fs == 0.0) return 0.0;
  return std::sqrt(fourier_norm_sq(h.modes, sp)) / (std::pow(eta / k, s - sp) * fs);
}

VolumeFilter::VolumeFilter(std::function<cplx(const Vec2&)> v, Vec2 center, double rho, double eta, double k, int grid)
    : v_(std::move(v)), c_(center), rho_(rho) {
  cut_ = filter_cutoff(eta, k);
  if (!(rho > 0.0)) throw std::invalid_argument("VolumeFilter: radius must be positive");
  sigma_ = 12.0 / cut_;
  r0_ = rho_ + 5.6 * sigma_;
  L_ = r0_ + 6.0 * sigma_;
  if (grid <= 0) {
    int need = static_cast<int>(std::ceil(2.0 * L_ * 4.0 * cut_ / kPi));
    grid = 16;
    while (grid < need) grid *= 2;
  }
  if (grid % 2) ++grid;
  n_ = grid;
  const int n = n_;
  const double dx = 2.0 * L_ / n;
  std::vector<cplx> a(static_cast<size_t>(n) * n);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Vec2 x{c_[0] - L_ + i * dx, c_[1] - L_ + j * dx};
      double w = window(x);
      a[static_cast<size_t>(j) * n + i] = w > 1e-300 ? w * v_(x) : cplx(0.0);
    }
  Eigen::FFT<double> fft;
  std::vector<cplx> in(n), out(n);
  for (int j = 0; j < n; ++j) {
    std::copy(a.begin() + static_cast<long>(j) * n, a.begin() + static_cast<long>(j + 1) * n, in.begin());
    fft.fwd(out, in);
    std::copy(out.begin(), out.end(), a.begin() + static_cast<long>(j) * n);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) in[j] = a[static_cast<size_t>(j) * n + i];
    fft.fwd(out, in);
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(j) * n + i] = out[j];
  }
  const double dxi = kPi / L_;
  const double inv = 1.0 / (double(n) * n);
  for (int j = 0; j < n; ++j) {
    int mj = j < n / 2 ? j : j - n;
    for (int i = 0; i < n; ++i) {
      int mi = i < n / 2 ? i : i - n;
      double xi = mi * dxi, eta2 = mj * dxi;
      if (std::hypot(xi, eta2) < cut_) {
        kx_.push_back(xi);
        ky_.push_back(eta2);
        amp_.push_back(a[static_cast<size_t>(j) * n + i] * inv);
      }
    }
  }
}

double VolumeFilter::window(const Vec2& x) const {
  double r = std::hypot(x[0] - c_[0], x[1] - c_[1]);
  return 0.5 * std::erfc((r - r0_) / sigma_);
}

cplx VolumeFilter::low(const Vec2& x) const {
  const double X = x[0] - (c_[0] - L_), Y = x[1] - (c_[1] - L_);
  cplx s = 0.0;
  for (size_t m = 0; m < amp_.size(); ++m) s += amp_[m] * std::polar(1.0, kx_[m] * X + ky_[m] * Y);
  return s;
}

std::pair<std::vector<cplx>, std::vector<cplx>> VolumeFilter::apply(const std::vector<Vec2>& pts) const {
  std::vector<cplx> hi(pts.size()), lo(pts.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(pts.size()); ++i) {
    lo[i] = low(pts[i]);
    hi[i] = v_(pts[i]) - lo[i];
  }
  return {hi, lo};
}

}  // namespace fembem
