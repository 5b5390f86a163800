#pragma once

#include <array>
#include <complex>
#include <vector>

namespace fembem {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;

/// Bessel function of the first kind J_n(z) for integer order 0 <= n <= 200 and 0 <= z <= 1e4.
double bessel_J(int order, double z);

/// Bessel function of the second kind Y_n(z), z > 0.
double bessel_Y(int order, double z);

/// Hankel function of the first kind H_n(z) = J_n(z) + i Y_n(z), z > 0.
cplx hankel1(int order, double z);

/// Values J_0..J_nmax at z in one sweep.
std::vector<double> bessel_J_array(int nmax, double z);

/// Values Y_0..Y_nmax at z in one sweep.
std::vector<double> bessel_Y_array(int nmax, double z);

struct KernelEval {
  cplx value;
  std::array<cplx, 2> grad_y;
};

/// Helmholtz fundamental solution G_k(x,y) = (i/4) H_0(k|x-y|); k = 0 gives -(1/2pi) ln|x-y|.
KernelEval green_kernel(double k, const Vec2& x, const Vec2& y);

struct LogSplit {
  cplx log_coeff;
  cplx smooth;
};

/// G_k(r) = log_coeff * ln r + smooth, with smooth continuous at r = 0.
LogSplit kernel_log_split(double k, double r);
LogSplit kernel_log_split(double k, const Vec2& x, const Vec2& y);

/// r G_k'(r) = log_coeff * ln r + smooth; this is the radial factor of the double layer kernel.
LogSplit kernel_dr_log_split(double k, double r);

struct KernelSplits {
  LogSplit g;    // G_k(r)
  LogSplit rdg;  // r G_k'(r)
};
/// Both log splits from a single Bessel evaluation.
KernelSplits kernel_splits(double k, double r);

/// G_k(r) and G_k'(r) (and G_k''(r)) for r > 0 from a single Bessel evaluation.
void green_radial(double k, double r, cplx& G, cplx& Gr);
void green_radial2(double k, double r, cplx& G, cplx& Gr, cplx& Grr);

/// G_k'(r) and G_k''(r) for r > 0.
cplx green_dr(double k, double r);
cplx green_drr(double k, double r);

}  // namespace fembem
