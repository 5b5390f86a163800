#include "fembem/shapes.hpp"

#include <stdexcept>

namespace fembem {

void legendre(int n, double x, double* out) {
  out[0] = 1.0;
  if (n >= 1) out[1] = x;
  for (int j = 2; j <= n; ++j) out[j] = ((2.0 * j - 1.0) * x * out[j - 1] - (j - 1.0) * out[j - 2]) / j;
}

void scaled_legendre(int n, Dual2 x, Dual2 t, Dual2* out) {
  out[0] = {1.0, 0.0, 0.0};
  if (n >= 1) out[1] = x;
  Dual2 t2 = t * t;
  for (int j = 2; j <= n; ++j)
    out[j] = (1.0 / j) * ((2.0 * j - 1.0) * (x * out[j - 1]) - (j - 1.0) * (t2 * out[j - 2]));
}

TriangleBasis::TriangleBasis(int p) : p_(p) {
  if (p < 1 || p > kMaxDegree) throw std::domain_error("TriangleBasis: unsupported degree");
}

void TriangleBasis::eval(const Vec2& xi, std::vector<Dual2>& out) const {
  out.assign(size(), Dual2{});
  Dual2 lam[3] = {{1.0 - xi[0] - xi[1], -1.0, -1.0}, {xi[0], 1.0, 0.0}, {xi[1], 0.0, 1.0}};
  for (int i = 0; i < 3; ++i) out[i] = lam[i];
  if (p_ < 2) return;
  Dual2 ps[kMaxDegree + 1];
  for (int e = 0; e < 3; ++e) {
    const Dual2& la = lam[(e + 1) % 3];
    const Dual2& lb = lam[(e + 2) % 3];
    Dual2 x = lb - la, t = la + lb;
    scaled_legendre(p_, x, t, ps);
    Dual2 t2 = t * t;
    for (int n = 2; n <= p_; ++n) out[edge_index(e, n)] = (1.0 / (2.0 * n - 1.0)) * (ps[n] - t2 * ps[n - 2]);
  }
  if (p_ < 3) return;
  Dual2 b = lam[0] * lam[1] * lam[2];
  scaled_legendre(p_ - 3, lam[1] - lam[0], lam[0] + lam[1], ps);
  Dual2 one{1.0, 0.0, 0.0};
  Dual2 y = 2.0 * lam[2] - one;
  Dual2 pl[kMaxDegree + 1];
  scaled_legendre(p_ - 3, y, one, pl);
  int idx = bubble_offset();
  for (int i = 0; i <= p_ - 3; ++i)
    for (int j = 0; i + j <= p_ - 3; ++j) out[idx++] = b * ps[i] * pl[j];
}

std::vector<double> TriangleBasis::signs(const std::array<bool, 3>& flip) const {
  std::vector<double> s(size(), 1.0);
  for (int e = 0; e < 3; ++e)
    if (flip[e])
      for (int n = 3; n <= p_; n += 2) s[edge_index(e, n)] = -1.0;
  return s;
}

TriangleBasis::Table TriangleBasis::tabulate(const std::vector<Vec2>& pts) const {
  Table t;
  t.nq = static_cast<int>(pts.size());
  t.nloc = size();
  t.val.resize(t.nq * t.nloc);
  t.gx.resize(t.nq * t.nloc);
  t.gy.resize(t.nq * t.nloc);
  std::vector<Dual2> buf;
  for (int q = 0; q < t.nq; ++q) {
    eval(pts[q], buf);
    for (int i = 0; i < t.nloc; ++i) {
      t.val[q * t.nloc + i] = buf[i].v;
      t.gx[q * t.nloc + i] = buf[i].dx;
      t.gy[q * t.nloc + i] = buf[i].dy;
    }
  }
  return t;
}

void segment_legendre(int nf, double s, double* val, double* der) {
  double x = 2.0 * s - 1.0;
  legendre(nf - 1, x, val);
  if (der) {
    double dP[kMaxDegree + 2];
    for (int j = 0; j < nf; ++j) {
      dP[j] = j == 0 ? 0.0 : j == 1 ? 1.0 : dP[j - 2] + (2.0 * j - 1.0) * val[j - 1];
      der[j] = 2.0 * dP[j];
    }
  }
}

void segment_lobatto(int p, double s, double* val, double* der) {
  val[0] = 1.0 - s;
  val[1] = s;
  if (der) {
    der[0] = -1.0;
    der[1] = 1.0;
  }
  if (p < 2) return;
  double x = 2.0 * s - 1.0;
  double P[kMaxDegree + 2];
  legendre(p, x, P);
  for (int n = 2; n <= p; ++n) {
    val[n] = (P[n] - P[n - 2]) / (2.0 * n - 1.0);
    if (der) der[n] = 2.0 * P[n - 1];
  }
}

}  // namespace fembem
