#pragma once

#include <functional>
#include <vector>

#include "fembem/norms.hpp"

namespace fembem {

enum class FilterKind { High, Low };
/// Plus: H^s -> H^s for s > 0, low part extends to an entire function on R^2.
/// Minus: -1 <= s' <= s <= 1, high part has zero mean.
enum class FilterVariant { Plus, Minus };
std::string to_string(FilterKind k);
std::string to_string(FilterVariant v);

/// Mode cutoff k / eta; throws std::domain_error unless eta in (0, 1) and k > 0.
double filter_cutoff(double eta, double k);

/// Filtered mode vector on the circle of radius R (modes as in BoundaryFourier, n = -N..N).
/// Low keeps |n| < k / eta, high keeps |n| >= k / eta.
struct BoundaryFilterOutput {
  CVector modes;
  double R = 0.0;
  /// Low only: harmonic polynomial extension sum f_n (2 pi R)^{-1/2} (r / R)^{|n|} e^{i n theta}.
  std::function<cplx(const Vec2&)> extension;
};
BoundaryFilterOutput boundary_filter(const CVector& modes, double R, FilterKind kind, FilterVariant variant, double eta,
                                     double k, Vec2 center = {0.0, 0.0});
/// Filter of a trace-space function through its Fourier modes.
BoundaryFilterOutput boundary_filter(const BoundaryFourier& F, const CVector& coeffs, FilterKind kind,
                                     FilterVariant variant, double eta, double k);

/// ||H f||_{s'} / ((eta / k)^{s - s'} ||f||_s) for the variant's admissible (s, s').
double filter_bound_ratio(const CVector& modes, double s, double sp, FilterVariant variant, double eta, double k);

/// Volume filter: v is multiplied by a radial erfc window that equals 1 on the disk of radius rho about
/// `center`, sampled on a periodic box and cut off at |xi| = k / eta in the 2D Fourier domain.
/// low(x) is the trigonometric interpolant of the retained spectrum, high(x) = v(x) - low(x).
class VolumeFilter {
 public:
  VolumeFilter(std::function<cplx(const Vec2&)> v, Vec2 center, double rho, double eta, double k, int grid = 0);
  cplx low(const Vec2& x) const;
  cplx high(const Vec2& x) const { return v_(x) - low(x); }
  /// (high, low) at the given points.
  std::pair<std::vector<cplx>, std::vector<cplx>> apply(const std::vector<Vec2>& pts) const;
  double cutoff() const { return cut_; }
  int grid() const { return n_; }
  double box_half_width() const { return L_; }
  double window(const Vec2& x) const;

 private:
  std::function<cplx(const Vec2&)> v_;
  Vec2 c_;
  double rho_, cut_, sigma_, r0_, L_;
  int n_;
  std::vector<double> kx_, ky_;
  std::vector<cplx> amp_;
};

}  // namespace fembem
