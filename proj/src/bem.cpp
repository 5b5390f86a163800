#include "fembem/bem.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <stdexcept>

#include "fembem/quadrature.hpp"

namespace fembem {

namespace {

constexpr double kPi = std::numbers::pi;

// Local basis of one trace space or of the union of two (second block offset by off_b).
struct Basis {
  const TraceSpace* a = nullptr;
  const TraceSpace* b = nullptr;
  int off_b = 0;
  int nloc() const { return a->nloc + (b ? b->nloc : 0); }
  int pmax() const { return std::max(a->p, b ? b->p : 0); }
  void dofs(int e, int* out) const {
    for (int i = 0; i < a->nloc; ++i) out[i] = a->dofs[e][i];
    if (b)
      for (int i = 0; i < b->nloc; ++i) out[a->nloc + i] = off_b + b->dofs[e][i];
  }
  void eval(double s, double* val, double* der) const {
    a->eval(s, val, der);
    if (b) b->eval(s, val + a->nloc, der + a->nloc);
  }
};

struct Node {
  double s, sig;
  double w;      // weight of the regular part
  double wl;     // weight of the log-rule part
  double lres;   // ln(delta) minus the logarithms handled by the log rules
  double delta;  // parameter distance |t - tau|
};

void push_region(std::vector<Node>& out, int n, bool self, double A, double Bc,
                 const std::function<void(double x, double y, double& s, double& sig)>& map,
                 const std::function<double(double x, double y)>& delta) {
  const QuadratureRule1D& g = gauss_rule01(n);
  const LogQuadratureRule& lr = log_rule(n);
  const QuadratureRule1D& l = lr.log_part;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double x = g.x[a], y = g.x[b], s, sig;
      map(x, y, s, sig);
      double lres = self ? std::log(A) : std::log(A + y * Bc);
      out.push_back({s, sig, g.w[a] * g.w[b] * x, 0.0, lres, delta(x, y)});
    }
  for (int a = 0; a < l.size(); ++a)
    for (int b = 0; b < n; ++b) {
      double x = l.x[a], y = g.x[b], s, sig;
      map(x, y, s, sig);
      out.push_back({s, sig, 0.0, -l.w[a] * g.w[b] * x, 0.0, delta(x, y)});
    }
  if (self)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < l.size(); ++b) {
        double x = g.x[a], y = l.x[b], s, sig;
        map(x, y, s, sig);
        out.push_back({s, sig, 0.0, -g.w[a] * l.w[b] * x, 0.0, delta(x, y)});
      }
}

void self_nodes(int n, double L, std::vector<Node>& out) {
  out.clear();
  auto dl = [L](double x, double y) { return x * y * L; };
  push_region(out, n, true, L, 0.0, [](double x, double y, double& s, double& sig) { s = x, sig = x * (1.0 - y); },
              dl);
  push_region(out, n, true, L, 0.0, [](double x, double y, double& s, double& sig) { sig = x, s = x * (1.0 - y); },
              dl);
}

// i_first: the end of element i touches the start of element j.
void adjacent_nodes(int n, double Li, double Lj, bool i_first, std::vector<Node>& out) {
  out.clear();
  auto d1 = [Li, Lj](double x, double y) { return x * (Li + y * Lj); };
  auto d2 = [Li, Lj](double x, double y) { return x * (Lj + y * Li); };
  if (i_first) {
    push_region(out, n, false, Li, Lj, [](double x, double y, double& s, double& sig) { s = 1.0 - x, sig = x * y; },
                d1);
    push_region(out, n, false, Lj, Li, [](double x, double y, double& s, double& sig) { sig = x, s = 1.0 - x * y; },
                d2);
  } else {
    push_region(out, n, false, Li, Lj, [](double x, double y, double& s, double& sig) { s = x, sig = 1.0 - x * y; },
                d1);
    push_region(out, n, false, Lj, Li, [](double x, double y, double& s, double& sig) { sig = 1.0 - x, s = x * y; },
                d2);
  }
}

struct GeoPt {
  double t;
  Vec2 x, d1;
  double sp;
};

struct Ops {
  bool V = false, K = false, Kp = false, W = false;
};

struct Accum {
  CMatrix V, K, Kp, W;
  void init(const Ops& o, int m, int n) {
    if (o.V) V = CMatrix::Zero(m, n);
    if (o.K) K = CMatrix::Zero(m, n);
    if (o.Kp) Kp = CMatrix::Zero(m, n);
    if (o.W) W = CMatrix::Zero(m, n);
  }
  void add(const Accum& o) {
    if (V.size()) V += o.V;
    if (K.size()) K += o.K;
    if (Kp.size()) Kp += o.Kp;
    if (W.size()) W += o.W;
  }
};

int far_order(double rho, int pmax) {
  int n = static_cast<int>(std::ceil(14.0 / std::asinh(2.0 * rho))) + 2;
  n = std::max(n, pmax + 3);
  return std::clamp(n, 4, 40);
}

int near_order(int pmax) { return std::max(10, pmax + 7); }

void assemble_core(double k, const BoundaryMesh& bm, const Basis& test, const Basis& trial, const Ops& ops,
                   Accum& result, ExecPolicy policy) {
  if (k < 0.0) throw std::domain_error("boundary operator: negative wavenumber");
  const BoundaryCurve& cv = *bm.curve;
  int N = bm.size();
  if (N < 3) throw std::domain_error("boundary operator: need at least 3 boundary elements");
  int mt = test.a->ndof + (test.b ? test.b->ndof : 0);
  int mr = trial.a->ndof + (trial.b ? trial.b->ndof : 0);
  int nlt = test.nloc(), nlr = trial.nloc();
  int pmax = std::max(test.pmax(), trial.pmax());

  std::vector<double> L(N), plen(N);
  std::vector<std::array<Vec2, 5>> samples(N);
  for (int e = 0; e < N; ++e) {
    L[e] = bm.elems[e].t1 - bm.elems[e].t0;
    plen[e] = bm.length(e);
    for (int q = 0; q < 5; ++q) samples[e][q] = cv.position(bm.elems[e].t0 + 0.25 * q * L[e]);
  }
  auto adjacent_kind = [N](int i, int j) {
    if (i == j) return 0;
    if (j == (i + 1) % N) return 1;   // i before j
    if (i == (j + 1) % N) return -1;  // j before i
    return 2;
  };
  // far-field orders and per-order geometry and basis tables
  std::vector<int> order(N * N, 0);
  std::map<int, int> used;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (adjacent_kind(i, j) != 2) continue;
      double d = 1e300;
      for (const Vec2& a : samples[i])
        for (const Vec2& b : samples[j]) d = std::min(d, std::hypot(a[0] - b[0], a[1] - b[1]));
      int n = far_order(d / std::max(plen[i], plen[j]), pmax);
      order[i * N + j] = n;
      used[n] = 0;
    }
  struct Table {
    int n;
    std::vector<std::vector<GeoPt>> geo;
    std::vector<double> tv, td, rv, rd;
  };
  std::vector<Table> tables;
  for (auto& [n, idx] : used) {
    idx = static_cast<int>(tables.size());
    Table tb;
    tb.n = n;
    const QuadratureRule1D& g = gauss_rule01(n);
    tb.geo.resize(N);
    for (int e = 0; e < N; ++e)
      for (int q = 0; q < n; ++q) {
        double t = bm.elems[e].t0 + g.x[q] * L[e];
        Vec2 d1 = cv.deriv(t, 1);
        tb.geo[e].push_back({t, cv.position(t), d1, std::hypot(d1[0], d1[1])});
      }
    tb.tv.resize(n * nlt);
    tb.td.resize(n * nlt);
    tb.rv.resize(n * nlr);
    tb.rd.resize(n * nlr);
    for (int q = 0; q < n; ++q) {
      test.eval(g.x[q], &tb.tv[q * nlt], &tb.td[q * nlt]);
      trial.eval(g.x[q], &tb.rv[q * nlr], &tb.rd[q * nlr]);
    }
    tables.push_back(std::move(tb));
  }

  const int nnear = near_order(pmax);
  const double k2 = k * k;
  result.init(ops, mt, mr);

  int nthreads = policy == ExecPolicy::Serial ? 1 : std::max(1, omp_get_max_threads());
  std::vector<Accum> partial(nthreads);

#pragma omp parallel num_threads(nthreads) if (nthreads > 1)
  {
    int tid = omp_get_thread_num();
    Accum& acc = partial[tid];
    acc.init(ops, mt, mr);
    std::vector<Node> nodes;
    std::vector<double> tv(nlt), td(nlt), rv(nlr), rd(nlr);
    std::vector<int> dt(nlt), dr(nlr);
    std::vector<cplx> lV(nlt * nlr), lK(nlt * nlr), lKp(nlt * nlr), lW(nlt * nlr);

#pragma omp for schedule(dynamic, 1)
    for (int i = 0; i < N; ++i) {
      test.dofs(i, dt.data());
      for (int j = 0; j < N; ++j) {
        trial.dofs(j, dr.data());
        std::fill(lV.begin(), lV.end(), 0.0);
        std::fill(lK.begin(), lK.end(), 0.0);
        std::fill(lKp.begin(), lKp.end(), 0.0);
        std::fill(lW.begin(), lW.end(), 0.0);
        auto accumulate = [&](const double* pv, const double* pd, const double* qv, const double* qd, cplx cV, cplx cK,
                              cplx cKp, cplx cW1, cplx cW2) {
          for (int a = 0; a < nlt; ++a)
            for (int b = 0; b < nlr; ++b) {
              double vv = pv[a] * qv[b];
              int ix = a * nlr + b;
              if (ops.V) lV[ix] += cV * vv;
              if (ops.K) lK[ix] += cK * vv;
              if (ops.Kp) lKp[ix] += cKp * vv;
              if (ops.W) lW[ix] += cW1 * (pd[a] * qd[b]) + cW2 * vv;
            }
        };
        int kind = adjacent_kind(i, j);
        if (kind == 2) {
          const Table& tb = tables[used.at(order[i * N + j])];
          const QuadratureRule1D& g = gauss_rule01(tb.n);
          double LL = L[i] * L[j];
          for (int qa = 0; qa < tb.n; ++qa) {
            const GeoPt& P = tb.geo[i][qa];
            for (int qb = 0; qb < tb.n; ++qb) {
              const GeoPt& Q = tb.geo[j][qb];
              double d0 = Q.x[0] - P.x[0], d1 = Q.x[1] - P.x[1];
              double r = std::hypot(d0, d1);
              cplx G, Gr;
              green_radial(k, r, G, Gr);
              double ww = g.w[qa] * g.w[qb];
              double w = ww * LL;
              double crossK = d0 * Q.d1[1] - d1 * Q.d1[0];
              double crossKp = -(d0 * P.d1[1] - d1 * P.d1[0]);
              cplx gr = Gr / r;
              double tdot = P.d1[0] * Q.d1[0] + P.d1[1] * Q.d1[1];
              accumulate(&tb.tv[qa * nlt], &tb.td[qa * nlt], &tb.rv[qb * nlr], &tb.rd[qb * nlr],
                         G * (w * P.sp * Q.sp), gr * (w * crossK * P.sp), gr * (w * crossKp * Q.sp), G * ww,
                         -k2 * G * (w * tdot));
            }
          }
        } else {
          if (kind == 0)
            self_nodes(nnear, L[i], nodes);
          else
            adjacent_nodes(nnear, L[i], L[j], kind == 1, nodes);
          double LL = L[i] * L[j];
          for (const Node& nd : nodes) {
            double t = bm.elems[i].t0 + nd.s * L[i];
            double tau = bm.elems[j].t0 + nd.sig * L[j];
            if (kind == 1 && j == 0 && i == N - 1) tau += 2.0 * kPi;
            if (kind == -1 && i == 0 && j == N - 1) tau -= 2.0 * kPi;
            Vec2 ch = cv.chord(t, tau);
            double r = std::hypot(ch[0], ch[1]);
            Vec2 pd1 = cv.deriv(t, 1), qd1 = cv.deriv(tau, 1);
            double spt = std::hypot(pd1[0], pd1[1]), sptau = std::hypot(qd1[0], qd1[1]);
            KernelSplits ks = kernel_splits(k, r);
            double lnrat = std::log(r / nd.delta);
            cplx Geff = nd.wl * ks.g.log_coeff;
            cplx Reff = nd.wl * ks.rdg.log_coeff;
            if (nd.w != 0.0) {
              Geff += nd.w * (ks.g.log_coeff * (nd.lres + lnrat) + ks.g.smooth);
              Reff += nd.w * (ks.rdg.log_coeff * (nd.lres + lnrat) + ks.rdg.smooth);
            }
            double r2 = r * r;
            double crossK = ops.K ? cv.chord_cross(t, tau) : 0.0;
            double crossKp = ops.Kp ? cv.chord_cross(tau, t) : 0.0;
            double tdot = pd1[0] * qd1[0] + pd1[1] * qd1[1];
            test.eval(nd.s, tv.data(), td.data());
            trial.eval(nd.sig, rv.data(), rd.data());
            accumulate(tv.data(), td.data(), rv.data(), rd.data(), Geff * (LL * spt * sptau),
                       Reff * (LL * crossK * spt / r2), Reff * (LL * crossKp * sptau / r2), Geff,
                       -k2 * Geff * (LL * tdot));
          }
        }
        for (int a = 0; a < nlt; ++a)
          for (int b = 0; b < nlr; ++b) {
            int ix = a * nlr + b;
            if (ops.V) acc.V(dt[a], dr[b]) += lV[ix];
            if (ops.K) acc.K(dt[a], dr[b]) += lK[ix];
            if (ops.Kp) acc.Kp(dt[a], dr[b]) += lKp[ix];
            if (ops.W) acc.W(dt[a], dr[b]) += lW[ix];
          }
      }
    }
  }
  for (const Accum& a : partial) result.add(a);
}

}  // namespace

std::string to_string(BoundaryOp op) {
  switch (op) {
    case BoundaryOp::V: return "V";
    case BoundaryOp::K: return "K";
    case BoundaryOp::Kp: return "Kp";
    case BoundaryOp::W: return "W";
  }
  return "?";
}

BoundaryOperatorMatrix assemble_boundary_operator(BoundaryOp op, double k, const BoundaryMesh& bmesh,
                                                  const TraceSpace& test, const TraceSpace& trial,
                                                  ExecPolicy policy) {
  if (k < 0.0) throw std::domain_error("assemble_boundary_operator: negative wavenumber");
  if (op == BoundaryOp::W && (test.kind != TraceSpace::Z || trial.kind != TraceSpace::Z))
    throw std::domain_error("assemble_boundary_operator: W needs continuous trace spaces");
  Basis bt{&test}, br{&trial};
  Ops o;
  o.V = op == BoundaryOp::V;
  o.K = op == BoundaryOp::K;
  o.Kp = op == BoundaryOp::Kp;
  o.W = op == BoundaryOp::W;
  Accum acc;
  assemble_core(k, bmesh, bt, br, o, acc, policy);
  BoundaryOperatorMatrix m;
  m.op = op;
  m.k = k;
  m.A = o.V ? acc.V : o.K ? acc.K : o.Kp ? acc.Kp : acc.W;
  return m;
}

RMatrix boundary_mass(const BoundaryMesh& bmesh, const TraceSpace& test, const TraceSpace& trial) {
  RMatrix M = RMatrix::Zero(test.ndof, trial.ndof);
  int n = (test.p + trial.p) / 2 + 4;
  const QuadratureRule1D& g = gauss_rule01(n);
  std::vector<double> a(test.nloc), b(trial.nloc);
  for (int e = 0; e < bmesh.size(); ++e) {
    double t0 = bmesh.elems[e].t0, L = bmesh.elems[e].t1 - t0;
    for (int q = 0; q < n; ++q) {
      double w = g.w[q] * L * bmesh.curve->speed(t0 + g.x[q] * L);
      test.eval(g.x[q], a.data());
      trial.eval(g.x[q], b.data());
      for (int i = 0; i < test.nloc; ++i)
        for (int j = 0; j < trial.nloc; ++j) M(test.dofs[e][i], trial.dofs[e][j]) += w * a[i] * b[j];
    }
  }
  return M;
}

BemOperators assemble_bem(double k, const BoundaryMesh& bmesh, const TraceSpace& W, const TraceSpace& Z,
                          ExecPolicy policy) {
  BemOperators r;
  r.k = k;
  r.nW = W.ndof;
  r.nZ = Z.ndof;
  Basis u{&W, &Z, W.ndof};
  Ops o;
  o.V = o.K = true;
  Accum acc;
  assemble_core(k, bmesh, u, u, o, acc, policy);
  int nW = W.ndof, nZ = Z.ndof;
  r.V_WW = acc.V.topLeftCorner(nW, nW);
  r.V_WZ = acc.V.topRightCorner(nW, nZ);
  r.V_ZW = acc.V.bottomLeftCorner(nZ, nW);
  r.V_ZZ = acc.V.bottomRightCorner(nZ, nZ);
  r.K_WZ = acc.K.topRightCorner(nW, nZ);
  r.K_ZZ = acc.K.bottomRightCorner(nZ, nZ);
  r.Kp_ZW = r.K_WZ.transpose();
  r.Kp_ZZ = r.K_ZZ.transpose();
  Basis z{&Z};
  Ops ow;
  ow.W = true;
  Accum accw;
  assemble_core(k, bmesh, z, z, ow, accw, policy);
  r.W_ZZ = accw.W;
  r.M_WW = boundary_mass(bmesh, W, W);
  r.M_WZ = boundary_mass(bmesh, W, Z);
  r.M_ZZ = boundary_mass(bmesh, Z, Z);
  return r;
}

BkApk assemble_Bk_Apk(const BemOperators& ops) {
  const cplx ik(0.0, ops.k);
  BkApk r;
  r.B_ZZ = -ops.W_ZZ - ik * (0.5 * ops.M_ZZ.cast<cplx>() - ops.K_ZZ);
  r.Ap_ZZ = 0.5 * ops.M_ZZ.cast<cplx>() + ops.Kp_ZZ + ik * ops.V_ZZ;
  r.Ap_ZW = 0.5 * ops.M_WZ.transpose().cast<cplx>() + ops.Kp_ZW + ik * ops.V_ZW;
  return r;
}

cplx circle_symbol(BoundaryOp op, double k, double R, int n) {
  int m = std::abs(n);
  if (k == 0.0) {
    switch (op) {
      case BoundaryOp::V: return m == 0 ? -R * std::log(R) : R / (2.0 * m);
      case BoundaryOp::K:
      case BoundaryOp::Kp: return m == 0 ? -0.5 : 0.0;
      case BoundaryOp::W: return m / (2.0 * R);
    }
  }
  double z = k * R;
  double J = bessel_J(m, z), Jp = m == 0 ? -bessel_J(1, z) : 0.5 * (bessel_J(m - 1, z) - bessel_J(m + 1, z));
  cplx H = hankel1(m, z);
  cplx Hp = m == 0 ? -hankel1(1, z) : 0.5 * (hankel1(m - 1, z) - hankel1(m + 1, z));
  const cplx i(0.0, 1.0);
  switch (op) {
    case BoundaryOp::V: return i * kPi * R / 2.0 * J * H;
    case BoundaryOp::K:
    case BoundaryOp::Kp: return -0.5 + i * kPi * z / 2.0 * Jp * H;
    case BoundaryOp::W: return -i * kPi * k * k * R / 2.0 * Jp * Hp;
  }
  return 0.0;
}

cplx PotentialField::eval(const Vec2& x, std::array<cplx, 2>* grad) const {
  const BoundaryCurve& cv = *bmesh->curve;
  const TraceSpace& sp = *space;
  cplx val = 0.0, gx = 0.0, gy = 0.0;
  std::vector<double> phi(sp.nloc);
  int nq = std::max(12, sp.p + 6);
  const QuadratureRule1D& g = gauss_rule01(nq);
  for (int e = 0; e < bmesh->size(); ++e) {
    double t0 = bmesh->elems[e].t0, L = bmesh->elems[e].t1 - t0;
    double dist = 1e300;
    for (int q = 0; q <= 8; ++q) {
      Vec2 y = cv.position(t0 + q * L / 8.0);
      dist = std::min(dist, std::hypot(y[0] - x[0], y[1] - x[1]));
    }
    double len = bmesh->length(e);
    int nsub = std::clamp(static_cast<int>(std::ceil(len / std::max(dist, 1e-14))), 1, 4096);
    for (int sb = 0; sb < nsub; ++sb)
      for (int q = 0; q < nq; ++q) {
        double s = (sb + g.x[q]) / nsub;
        double t = t0 + s * L;
        double w = g.w[q] * L / nsub;
        Vec2 y = cv.position(t), d1 = cv.deriv(t, 1);
        sp.eval(s, phi.data());
        cplx dens = 0.0;
        for (int a = 0; a < sp.nloc; ++a) dens += density[sp.dofs[e][a]] * phi[a];
        double d0 = y[0] - x[0], dd1 = y[1] - x[1];
        double r = std::hypot(d0, dd1);
        if (r < 1e-12) throw std::domain_error("evaluate_potential: point on the boundary");
        double spd = std::hypot(d1[0], d1[1]);
        if (kind == PotentialKind::Single) {
          cplx G, Gr;
          green_radial(k, r, G, Gr);
          val += w * spd * G * dens;
          if (grad) {
            // grad_x G = G'(r) (x - y) / r
            gx += w * spd * Gr * (-d0 / r) * dens;
            gy += w * spd * Gr * (-dd1 / r) * dens;
          }
        } else {
          cplx G, Gr, Grr;
          green_radial2(k, r, G, Gr, Grr);
          double Nx = d1[1], Ny = -d1[0];  // speed-scaled outward normal
          double dn = d0 * Nx + dd1 * Ny;
          val += w * Gr / r * dn * dens;
          if (grad) {
            cplx c1 = (Grr / (r * r) - Gr / (r * r * r)) * dn;
            cplx c2 = Gr / r;
            gx += -w * (c1 * d0 + c2 * Nx) * dens;
            gy += -w * (c1 * dd1 + c2 * Ny) * dens;
          }
        }
      }
  }
  if (grad) *grad = {gx, gy};
  return val;
}

std::vector<cplx> evaluate_potential(const PotentialField& field, const std::vector<Vec2>& points) {
  const BoundaryCurve& cv = *field.bmesh->curve;
  std::vector<Vec2> samples;
  for (int i = 0; i < 512; ++i) samples.push_back(cv.position(2.0 * kPi * i / 512));
  double diam = 0.0;
  for (const Vec2& a : samples)
    for (const Vec2& b : samples) diam = std::max(diam, std::hypot(a[0] - b[0], a[1] - b[1]));
  for (const Vec2& x : points) {
    auto d = [&](double t) {
      Vec2 y = cv.position(t);
      return std::hypot(y[0] - x[0], y[1] - x[1]);
    };
    int best = 0;
    for (int i = 1; i < 512; ++i)
      if (d(2.0 * kPi * i / 512) < d(2.0 * kPi * best / 512)) best = i;
    double lo = 2.0 * kPi * (best - 1) / 512, hi = 2.0 * kPi * (best + 1) / 512;
    for (int it = 0; it < 60; ++it) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (d(m1) < d(m2))
        hi = m2;
      else
        lo = m1;
    }
    if (d(0.5 * (lo + hi)) < 1e-3 * diam)
      throw std::domain_error("evaluate_potential: point closer than 1e-3 diam to the boundary");
  }
  std::vector<cplx> out(points.size());
  for (size_t i = 0; i < points.size(); ++i) out[i] = field.eval(points[i]);
  return out;
}

std::vector<cplx> project_trace(const BoundaryMesh& bmesh, const TraceSpace& space,
                                const std::function<cplx(double)>& f) {
  RMatrix M = boundary_mass(bmesh, space, space);
  CVector rhs = CVector::Zero(space.ndof);
  int n = space.p + 10;
  const QuadratureRule1D& g = gauss_rule01(n);
  std::vector<double> a(space.nloc);
  for (int e = 0; e < bmesh.size(); ++e) {
    double t0 = bmesh.elems[e].t0, L = bmesh.elems[e].t1 - t0;
    for (int q = 0; q < n; ++q) {
      double t = t0 + g.x[q] * L;
      double w = g.w[q] * L * bmesh.curve->speed(t);
      cplx fv = f(t);
      space.eval(g.x[q], a.data());
      for (int i = 0; i < space.nloc; ++i) rhs(space.dofs[e][i]) += w * fv * a[i];
    }
  }
  CVector c = M.cast<cplx>().ldlt().solve(rhs);
  return std::vector<cplx>(c.data(), c.data() + c.size());
}

cplx eval_trace(const BoundaryMesh& bmesh, const TraceSpace& space, const std::vector<cplx>& c, double t) {
  double tt = std::fmod(t, 2.0 * kPi);
  if (tt < 0) tt += 2.0 * kPi;
  int e = 0;
  for (int i = 0; i < bmesh.size(); ++i)
    if (bmesh.elems[i].t0 <= tt) e = i;
  double s = (tt - bmesh.elems[e].t0) / (bmesh.elems[e].t1 - bmesh.elems[e].t0);
  std::vector<double> a(space.nloc);
  space.eval(s, a.data());
  cplx v = 0.0;
  for (int i = 0; i < space.nloc; ++i) v += c[space.dofs[e][i]] * a[i];
  return v;
}

double JumpErrors::max() const { return std::max({single_value, single_flux, double_value, double_flux}); }

JumpErrors measure_jumps(double k, const BoundaryMesh& bmesh, int p, const std::function<cplx(double)>& f) {
  TraceSpace Z = make_trace_space(bmesh, TraceSpace::Z, p);
  PotentialField sl{PotentialKind::Single, k, &bmesh, &Z, project_trace(bmesh, Z, f)};
  PotentialField dl{PotentialKind::Double, k, &bmesh, &Z, sl.density};
  const BoundaryCurve& cv = *bmesh.curve;
  // cubic extrapolation to 0 from offsets d, 2d, 3d, 4d
  const double wts[4] = {4.0, -6.0, 4.0, -1.0};
  JumpErrors err;
  double fmax = 0.0;
  for (int e = 0; e < bmesh.size(); ++e) {
    double t = 0.5 * (bmesh.elems[e].t0 + bmesh.elems[e].t1);
    cplx fv = f(t);
    fmax = std::max(fmax, std::abs(fv));
    Vec2 x = cv.position(t), n = cv.normal(t);
    double d = 0.04 * bmesh.length(e);
    cplx tr[2][2][2] = {};  // [potential][interior/exterior][value/flux]
    for (int side = 0; side < 2; ++side)
      for (int j = 1; j <= 4; ++j) {
        double off = (side == 0 ? -1.0 : 1.0) * j * d;
        Vec2 y{x[0] + off * n[0], x[1] + off * n[1]};
        const PotentialField* fields[2] = {&sl, &dl};
        for (int a = 0; a < 2; ++a) {
          std::array<cplx, 2> g;
          cplx v = fields[a]->eval(y, &g);
          tr[a][side][0] += wts[j - 1] * v;
          tr[a][side][1] += wts[j - 1] * (g[0] * n[0] + g[1] * n[1]);
        }
      }
    err.single_value = std::max(err.single_value, std::abs(tr[0][0][0] - tr[0][1][0]));
    err.single_flux = std::max(err.single_flux, std::abs(tr[0][0][1] - tr[0][1][1] - fv));
    err.double_value = std::max(err.double_value, std::abs(tr[1][0][0] - tr[1][1][0] + fv));
    err.double_flux = std::max(err.double_flux, std::abs(tr[1][0][1] - tr[1][1][1]));
  }
  err.single_value /= fmax;
  err.single_flux /= fmax;
  err.double_value /= fmax;
  err.double_flux /= fmax;
  return err;
}

double calderon_residual(double k, const BoundaryMesh& bmesh, int p, int nmax) {
  TraceSpace Z = make_trace_space(bmesh, TraceSpace::Z, p);
  Basis z{&Z};
  Ops o;
  o.V = o.K = o.W = true;
  Accum acc;
  assemble_core(k, bmesh, z, z, o, acc, ExecPolicy::Parallel);
  CMatrix M = boundary_mass(bmesh, Z, Z).cast<cplx>();
  Eigen::LDLT<CMatrix> Mf(M);
  double worst = 0.0;
  for (int n = -nmax; n <= nmax; ++n) {
    std::vector<cplx> cv = project_trace(bmesh, Z, [n](double t) { return std::exp(cplx(0.0, n * t)); });
    CVector c = Eigen::Map<CVector>(cv.data(), cv.size());
    CVector Mc = M * c;
    CVector r = acc.V * Mf.solve(acc.W * c) - (0.25 * Mc - acc.K * Mf.solve(acc.K * c));
    double num = std::sqrt(std::abs(r.dot(Mf.solve(r))));
    double den = std::sqrt(std::abs(c.dot(Mc)));
    worst = std::max(worst, num / den);
  }
  return worst;
}

void dump_matrix(const std::string& path, const CMatrix& A, const std::string& tag, double k) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("dump_matrix: cannot open " + path);
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) {
      double re = A(i, j).real(), im = A(i, j).imag();
      f.write(reinterpret_cast<const char*>(&re), sizeof(double));
      f.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
  if (!f) throw std::runtime_error("dump_matrix: write failed for " + path);
  nlohmann::json j;
  j["rows"] = A.rows();
  j["cols"] = A.cols();
  j["k"] = k;
  j["tag"] = tag;
  j["layout"] = "row-major, little-endian f64 (re, im)";
  std::ofstream s(path + ".json");
  s << j.dump(2) << "\n";
  if (!s) throw std::runtime_error("dump_matrix: write failed for " + path + ".json");
}

}  // namespace fembem
