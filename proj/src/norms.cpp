#include "fembem/norms.hpp"

#include <omp.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

#include "fembem/quadrature.hpp"

namespace fembem {

namespace {

const double kPi = 3.14159265358979323846;

double spectral_norm(const Mat2& A) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (A + A.transpose()));
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(1)));
}

double quad(const RSpMat& A, const CVector& u) {
  if (A.rows() == 0) return 0.0;
  RVector a = u.real(), b = u.imag();
  return a.dot(A * a) + b.dot(A * b);
}

double quad(const RMatrix& A, const CVector& u) {
  if (A.rows() == 0) return 0.0;
  RVector a = u.real(), b = u.imag();
  return a.dot(A * a) + b.dot(A * b);
}

void require_circle(const BoundaryMesh& bmesh, const char* what) {
  if (!bmesh.curve || !bmesh.curve->is_circle())
    throw std::domain_error(std::string(what) + ": needs a circular boundary");
}

/// Mode weights of the boundary Grams: s = -1/2 on W, s = +1/2 on Z.
double mode_weight(bool minus, NormRealization r, double R, int n) {
  if (r == NormRealization::Fourier) return sobolev_weight(minus ? -0.5 : 0.5, n);
  if (minus) return circle_symbol(BoundaryOp::V, 0.0, R, n).real();
  return circle_symbol(BoundaryOp::W, 0.0, R, n).real() + (n == 0 ? 2.0 * kPi * R : 0.0);
}

RMatrix weighted_sum(const BoundaryFourier& F, const std::function<double(int)>& d) {
  CMatrix DB = F.B;
  for (int n = -F.N; n <= F.N; ++n) DB.row(n + F.N) *= d(n);
  RMatrix G = (F.B.adjoint() * DB).real();
  return 0.5 * (G + G.transpose());
}

RMatrix boundary_weighted_mass(const BoundaryMesh& bmesh, const TraceSpace& W, const std::function<double(int)>& wt) {
  RMatrix M = RMatrix::Zero(W.ndof, W.ndof);
  const QuadratureRule1D& r = gauss_rule01(W.p + 4);
  std::vector<double> val(W.nloc);
  for (int b = 0; b < bmesh.size(); ++b) {
    const BoundaryElement& be = bmesh.elems[b];
    double scale = wt(b);
    for (int iq = 0; iq < r.size(); ++iq) {
      double t = be.t0 + r.x[iq] * (be.t1 - be.t0);
      double w = r.w[iq] * bmesh.curve->speed(t) * (be.t1 - be.t0) * scale;
      W.eval(r.x[iq], val.data());
      for (int i = 0; i < W.nloc; ++i)
        for (int j = 0; j < W.nloc; ++j) M(W.dofs[b][i], W.dofs[b][j]) += w * val[i] * val[j];
    }
  }
  return M;
}

bool is_dg_kind(NormKind n) { return n == NormKind::DG || n == NormKind::DGPlus; }

/// Q(t - u_h(c)) for the volume part of the norm kind, and optionally rhs_i = Q(t, phi_i).
double volume_target(const EnergyNormContext& ctx, const AnalyticTriple& t, const CVector* c, NormKind kind,
                     CVector* rhs) {
  const CurvedMesh& mesh = *ctx.mesh;
  const VolumeSpace& V = ctx.spaces->V;
  const double k = ctx.k;
  const int p = ctx.p;
  const int nloc = V.basis.size();
  const bool dg = is_dg_kind(kind);
  const bool plus = kind == NormKind::DGPlus;
  if (dg && !(k > 0.0)) throw std::invalid_argument("dG norms need k > 0");
  const PenaltyParams& pen = ctx.pen;
  const int ne = mesh.num_elements();
  const int nbf = static_cast<int>(mesh.boundary_facets.size());
  const int nif = dg ? static_cast<int>(mesh.interior_facets.size()) : 0;
  std::vector<double> err_e(ne + nbf + nif, 0.0);
  std::vector<std::vector<cplx>> loc(rhs ? ne + nbf + nif : 0);
  const QuadratureRule1D& fr = gauss_rule01(p + 8);

  auto coeff = [&](int dof) { return c ? (*c)(dof) : cplx(0.0); };

#pragma omp parallel
  {
    LocalEval le, le1;
#pragma omp for schedule(static)
    for (int e = 0; e < ne; ++e) {
      const Element& el = mesh.elements[e];
      const QuadratureRule2D& q = triangle_rule(volume_quadrature_degree(mesh, e, p) + 4);
      const std::vector<int>& d = V.dofs[e];
      std::vector<cplx> r(rhs ? nloc : 0, 0.0);
      double acc = 0.0;
      for (int iq = 0; iq < q.size(); ++iq) {
        eval_volume(mesh, V, e, q.x[iq], le);
        double w = q.w[iq] * le.detJ;
        std::array<cplx, 2> gu;
        cplx u = t.u(le.x, &gu);
        cplx uh = 0.0, gx = 0.0, gy = 0.0;
        for (int i = 0; i < nloc; ++i) {
          cplx ci = coeff(d[i]);
          uh += ci * le.val[i];
          gx += ci * le.gx[i];
          gy += ci * le.gy[i];
        }
        Mat2 nu = mesh.partition.nu(le.x, el.tag);
        double nn = mesh.partition.n(le.x, el.tag);
        double mw = kind == NormKind::Energy ? k * k : k * k * nn * nn;
        cplx ex = gu[0] - gx, ey = gu[1] - gy, ev = u - uh;
        cplx fx = nu(0, 0) * ex + nu(0, 1) * ey, fy = nu(1, 0) * ex + nu(1, 1) * ey;
        acc += w * (std::real(fx * std::conj(ex) + fy * std::conj(ey)) + mw * std::norm(ev));
        if (rhs) {
          cplx ux = nu(0, 0) * gu[0] + nu(0, 1) * gu[1], uy = nu(1, 0) * gu[0] + nu(1, 1) * gu[1];
          for (int i = 0; i < nloc; ++i) r[i] += w * (ux * le.gx[i] + uy * le.gy[i] + mw * u * le.val[i]);
        }
      }
      err_e[e] = acc;
      if (rhs) loc[e] = std::move(r);
    }

    if (dg) {
#pragma omp for schedule(static)
      for (int f = 0; f < nbf; ++f) {
        const BoundaryFacet& bf = mesh.boundary_facets[f];
        const Element& el = mesh.elements[bf.e];
        const std::vector<int>& d = V.dofs[bf.e];
        const double delta = pen.d * k * bf.h / (p * p);
        std::vector<cplx> r(rhs ? nloc : 0, 0.0);
        double acc = 0.0;
        for (int iq = 0; iq < fr.size(); ++iq) {
          Vec2 xi = boundary_facet_point(mesh, f, fr.x[iq]);
          eval_volume(mesh, V, bf.e, xi, le);
          double jl;
          Vec2 nrm = mesh.outward_normal(bf.e, bf.ledge, xi, &jl);
          double w = fr.w[iq] * jl;
          Mat2 nu = mesh.partition.nu(le.x, el.tag);
          std::array<cplx, 2> gu;
          cplx u = t.u(le.x, &gu);
          cplx uh = 0.0, gx = 0.0, gy = 0.0;
          for (int i = 0; i < nloc; ++i) {
            cplx ci = coeff(d[i]);
            uh += ci * le.val[i];
            gx += ci * le.gx[i];
            gy += ci * le.gy[i];
          }
          auto flux = [&](cplx ax, cplx ay) {
            return (nu(0, 0) * ax + nu(0, 1) * ay) * nrm[0] + (nu(1, 0) * ax + nu(1, 1) * ay) * nrm[1];
          };
          cplx fe = flux(gu[0] - gx, gu[1] - gy);
          acc += w * (delta / k * std::norm(fe) + k * (1.0 - delta) * std::norm(u - uh));
          if (rhs) {
            cplx fu = flux(gu[0], gu[1]);
            for (int i = 0; i < nloc; ++i) {
              double fi = (nu(0, 0) * le.gx[i] + nu(0, 1) * le.gy[i]) * nrm[0] +
                          (nu(1, 0) * le.gx[i] + nu(1, 1) * le.gy[i]) * nrm[1];
              r[i] += w * (delta / k * fu * fi + k * (1.0 - delta) * u * le.val[i]);
            }
          }
        }
        err_e[ne + f] = acc;
        if (rhs) loc[ne + f] = std::move(r);
      }

#pragma omp for schedule(static)
      for (int f = 0; f < nif; ++f) {
        const InteriorFacet& fc = mesh.interior_facets[f];
        const int tag0 = mesh.elements[fc.e[0]].tag, tag1 = mesh.elements[fc.e[1]].tag;
        std::vector<cplx> r(rhs ? 2 * nloc : 0, 0.0);
        double acc = 0.0;
        for (int iq = 0; iq < fr.size(); ++iq) {
          Vec2 xi0 = interior_facet_point(mesh, f, 0, fr.x[iq]), xi1 = interior_facet_point(mesh, f, 1, fr.x[iq]);
          eval_volume(mesh, V, fc.e[0], xi0, le);
          eval_volume(mesh, V, fc.e[1], xi1, le1);
          double jl;
          Vec2 nrm = mesh.outward_normal(fc.e[0], fc.ledge[0], xi0, &jl);
          double w = fr.w[iq] * jl;
          Mat2 nus[2] = {mesh.partition.nu(le.x, tag0), mesh.partition.nu(le.x, tag1)};
          double nut = std::max(spectral_norm(nus[0]), spectral_norm(nus[1]));
          double alpha = pen.a * p * p * nut / (k * fc.h);
          double beta = pen.b * k * fc.h / (p * nut);
          std::array<cplx, 2> gu;
          cplx u = t.u(le.x, &gu);
          cplx jump = 0.0, fjump = 0.0, ax = 0.0, ay = 0.0;
          cplx fju = 0.0, aux = 0.0, auy = 0.0;
          for (int side = 0; side < 2; ++side) {
            const LocalEval& L = side == 0 ? le : le1;
            const std::vector<int>& d = V.dofs[fc.e[side]];
            const Mat2& nu = nus[side];
            double sg = side == 0 ? 1.0 : -1.0;
            cplx uh = 0.0, gx = 0.0, gy = 0.0;
            for (int i = 0; i < nloc; ++i) {
              cplx ci = coeff(d[i]);
              uh += ci * L.val[i];
              gx += ci * L.gx[i];
              gy += ci * L.gy[i];
            }
            cplx ex = gu[0] - gx, ey = gu[1] - gy;
            cplx fx = nu(0, 0) * ex + nu(0, 1) * ey, fy = nu(1, 0) * ex + nu(1, 1) * ey;
            jump += sg * (u - uh);
            fjump += sg * (fx * nrm[0] + fy * nrm[1]);
            ax += 0.5 * fx;
            ay += 0.5 * fy;
            cplx ux = nu(0, 0) * gu[0] + nu(0, 1) * gu[1], uy = nu(1, 0) * gu[0] + nu(1, 1) * gu[1];
            fju += sg * (ux * nrm[0] + uy * nrm[1]);
            aux += 0.5 * ux;
            auy += 0.5 * uy;
          }
          acc += w * (beta / k * std::norm(fjump) + k * alpha * std::norm(jump));
          if (plus) acc += w / (k * alpha) * (std::norm(ax) + std::norm(ay));
          if (rhs) {
            for (int side = 0; side < 2; ++side) {
              const LocalEval& L = side == 0 ? le : le1;
              const Mat2& nu = nus[side];
              double sg = side == 0 ? 1.0 : -1.0;
              for (int i = 0; i < nloc; ++i) {
                double fx = nu(0, 0) * L.gx[i] + nu(0, 1) * L.gy[i];
                double fy = nu(1, 0) * L.gx[i] + nu(1, 1) * L.gy[i];
                cplx v = beta / k * fju * (sg * (fx * nrm[0] + fy * nrm[1]));
                if (plus) v += 1.0 / (k * alpha) * (aux * 0.5 * fx + auy * 0.5 * fy);
                r[side * nloc + i] += w * v;
              }
            }
          }
        }
        err_e[ne + nbf + f] = acc;
        if (rhs) loc[ne + nbf + f] = std::move(r);
      }
    }
  }

  double err = 0.0;
  for (double v : err_e) err += v;
  if (rhs) {
    *rhs = CVector::Zero(V.ndof);
    for (int e = 0; e < ne; ++e)
      for (int i = 0; i < nloc; ++i) (*rhs)(V.dofs[e][i]) += loc[e][i];
    if (dg) {
      for (int f = 0; f < nbf; ++f)
        for (int i = 0; i < nloc; ++i) (*rhs)(V.dofs[mesh.boundary_facets[f].e][i]) += loc[ne + f][i];
      for (int f = 0; f < nif; ++f)
        for (int side = 0; side < 2; ++side)
          for (int i = 0; i < nloc; ++i)
            (*rhs)(V.dofs[mesh.interior_facets[f].e[side]][i]) += loc[ne + nbf + f][side * nloc + i];
    }
  }
  return err;
}

/// int (h / p^2) |t - w_h|^2 on Gamma and optionally rhs_i = int (h / p^2) t psi_i.
double boundary_h_mass_target(const EnergyNormContext& ctx, const std::function<cplx(double)>& t, const CVector* c,
                              CVector* rhs) {
  const BoundaryMesh& bmesh = *ctx.bmesh;
  const TraceSpace& W = ctx.spaces->W;
  const QuadratureRule1D& r = gauss_rule01(W.p + 12);
  std::vector<double> val(W.nloc);
  if (rhs) *rhs = CVector::Zero(W.ndof);
  double err = 0.0;
  const double p2 = double(ctx.p) * ctx.p;
  for (int b = 0; b < bmesh.size(); ++b) {
    const BoundaryElement& be = bmesh.elems[b];
    for (int iq = 0; iq < r.size(); ++iq) {
      double tt = be.t0 + r.x[iq] * (be.t1 - be.t0);
      double w = r.w[iq] * bmesh.curve->speed(tt) * (be.t1 - be.t0) * be.h / p2;
      W.eval(r.x[iq], val.data());
      cplx tv = t(tt), wh = 0.0;
      for (int i = 0; i < W.nloc; ++i) {
        if (c) wh += (*c)(W.dofs[b][i]) * val[i];
        if (rhs) (*rhs)(W.dofs[b][i]) += w * tv * val[i];
      }
      err += w * std::norm(tv - wh);
    }
  }
  return err;
}

CVector target_modes(const std::function<cplx(int)>& mode, int N, int max_mode) {
  if (max_mode > N) throw std::invalid_argument("target has more Fourier modes than the norm context resolves");
  CVector t(2 * N + 1);
  for (int n = -N; n <= N; ++n) t(n + N) = std::abs(n) <= max_mode ? mode(n) : cplx(0.0);
  return t;
}

/// sum d_n |t_n - (B c)_n|^2 + c^H tail c.
double boundary_error(const BoundaryFourier& F, const RMatrix& tail, bool minus, NormRealization r, const CVector& t,
                      const CVector& c) {
  CVector e = t - F.B * c;
  double s = 0.0;
  for (int n = -F.N; n <= F.N; ++n) s += mode_weight(minus, r, F.R, n) * std::norm(e(n + F.N));
  return s + quad(tail, c);
}

CVector boundary_rhs(const BoundaryFourier& F, bool minus, NormRealization r, const CVector& t) {
  CVector dt = t;
  for (int n = -F.N; n <= F.N; ++n) dt(n + F.N) *= mode_weight(minus, r, F.R, n);
  return F.B.adjoint() * dt;
}

CVector solve_spd(const RMatrix& G, const CVector& b, const char* what) {
  Eigen::LLT<RMatrix> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string("best_approximation: singular projection (") + what + ")");
  CVector x(b.size());
  x.real() = llt.solve(RVector(b.real()));
  x.imag() = llt.solve(RVector(b.imag()));
  return x;
}

}  // namespace

double sobolev_weight(double s, int n) { return std::pow(1.0 + double(n) * n, s); }

CVector BoundaryFourier::inverse(const CVector& modes) const {
  if (modes.size() != B.rows()) throw std::invalid_argument("BoundaryFourier::inverse: mode vector size mismatch");
  return B.colPivHouseholderQr().solve(modes);
}

BoundaryFourier boundary_fourier(const BoundaryMesh& bmesh, const TraceSpace& space, int N) {
  require_circle(bmesh, "boundary_fourier");
  if (N < 0) throw std::invalid_argument("boundary_fourier: N must be nonnegative");
  BoundaryFourier F;
  F.R = bmesh.curve->radius();
  F.N = N;
  struct Pt {
    double t, w;
    int b;
    std::vector<double> val;
  };
  std::vector<Pt> pts;
  std::vector<double> val(space.nloc);
  for (int b = 0; b < bmesh.size(); ++b) {
    const BoundaryElement& be = bmesh.elems[b];
    double dt = be.t1 - be.t0;
    int nsub = std::max(1, static_cast<int>(std::ceil(N * dt / 16.0)));
    const QuadratureRule1D& r = gauss_rule01(space.p + 8 + static_cast<int>(std::ceil(N * dt / nsub)));
    for (int sub = 0; sub < nsub; ++sub)
      for (int iq = 0; iq < r.size(); ++iq) {
        double s = (sub + r.x[iq]) / nsub;
        double t = be.t0 + s * dt;
        space.eval(s, val.data());
        pts.push_back({t, r.w[iq] / nsub * bmesh.curve->speed(t) * dt, b, val});
      }
  }
  const double norm = 1.0 / std::sqrt(2.0 * kPi * F.R);
  const Vec2 c0 = bmesh.curve->center();
  F.B = CMatrix::Zero(2 * N + 1, space.ndof);
#pragma omp parallel for schedule(static)
  for (int n = -N; n <= N; ++n) {
    auto row = F.B.row(n + N);
    for (const Pt& pt : pts) {
      Vec2 x = bmesh.curve->position(pt.t);
      double theta = std::atan2(x[1] - c0[1], x[0] - c0[0]);
      cplx e = std::polar(norm * pt.w, -n * theta);
      for (int j = 0; j < space.nloc; ++j) row(space.dofs[pt.b][j]) += e * pt.val[j];
    }
  }
  return F;
}

CVector fourier_modes(const std::function<cplx(double)>& f, double R, int N, int samples) {
  int M = std::max(samples, 4 * N + 16);
  std::vector<cplx> fv(M);
  for (int j = 0; j < M; ++j) fv[j] = f(2.0 * kPi * j / M);
  CVector out(2 * N + 1);
  double scale = std::sqrt(R / (2.0 * kPi)) * 2.0 * kPi / M;
  for (int n = -N; n <= N; ++n) {
    cplx s = 0.0;
    for (int j = 0; j < M; ++j) s += fv[j] * std::polar(1.0, -2.0 * kPi * double(n) * j / M);
    out(n + N) = scale * s;
  }
  return out;
}

double fourier_norm_sq(const CVector& modes, double s) {
  int N = static_cast<int>(modes.size() - 1) / 2;
  double r = 0.0;
  for (int n = -N; n <= N; ++n) r += sobolev_weight(s, n) * std::norm(modes(n + N));
  return r;
}

std::string to_string(NormRealization r) { return r == NormRealization::Fourier ? "fourier" : "riesz"; }

NormRealization realization_from_string(const std::string& s) {
  if (s == "fourier") return NormRealization::Fourier;
  if (s == "riesz") return NormRealization::Riesz;
  throw std::invalid_argument("unknown norm realization: " + s);
}

std::string to_string(NormKind n) {
  switch (n) {
    case NormKind::Energy: return "energy";
    case NormKind::EnergyN: return "energy_n";
    case NormKind::DG: return "dg";
    case NormKind::DGPlus: return "dg_plus";
  }
  return "energy";
}

namespace {

RMatrix sym(const CMatrix& A) {
  RMatrix R = A.real();
  return 0.5 * (R + R.transpose());
}

RMatrix fourier_minus_half(const RMatrix& V0, const BoundaryFourier& F) {
  const double R = F.R;
  return (2.0 / R) * V0 + weighted_sum(F, [R](int n) {
           return sobolev_weight(-0.5, n) - (2.0 / R) * circle_symbol(BoundaryOp::V, 0.0, R, n).real();
         });
}

RMatrix fourier_plus_half(const RMatrix& W0, const RMatrix& V0, const BoundaryFourier& F) {
  const double R = F.R;
  return 2.0 * R * W0 + (1.0 / R) * V0 + weighted_sum(F, [R](int n) {
           return sobolev_weight(0.5, n) - std::abs(n) - circle_symbol(BoundaryOp::V, 0.0, R, n).real() / R;
         });
}

}  // namespace

RMatrix gram_minus_half(const BemOperators& ops0, const BoundaryFourier* FW, NormRealization r) {
  if (ops0.k != 0.0) throw std::invalid_argument("gram_minus_half: operators must be assembled at k = 0");
  RMatrix V0 = sym(ops0.V_WW);
  if (r == NormRealization::Riesz) return V0;
  if (!FW) throw std::invalid_argument("gram_minus_half: Fourier realization needs the boundary transform");
  return fourier_minus_half(V0, *FW);
}

RMatrix gram_plus_half(const BemOperators& ops0, const RVector& mu, const BoundaryFourier* FZ, NormRealization r) {
  if (ops0.k != 0.0) throw std::invalid_argument("gram_plus_half: operators must be assembled at k = 0");
  RMatrix W0 = sym(ops0.W_ZZ);
  if (r == NormRealization::Riesz) return W0 + mu * mu.transpose();
  if (!FZ) throw std::invalid_argument("gram_plus_half: Fourier realization needs the boundary transform");
  return fourier_plus_half(W0, sym(ops0.V_ZZ), *FZ);
}

double fractional_boundary_norm(const BoundaryMesh& bmesh, const TraceSpace& space, const CVector& w, double s,
                                NormRealization method, const BemOperators* ops0) {
  if (w.size() != space.ndof) throw std::invalid_argument("fractional_boundary_norm: coefficient size mismatch");
  const bool half = std::abs(std::abs(s) - 0.5) < 1e-14;
  if (method == NormRealization::Riesz && !half)
    throw std::invalid_argument("fractional_boundary_norm: Riesz realization supports s = -1/2, 1/2 only");
  if (half && s > 0.0 && space.kind != TraceSpace::Z)
    throw std::invalid_argument("fractional_boundary_norm: H^{1/2} needs a continuous space");
  if (method == NormRealization::Fourier) {
    require_circle(bmesh, "fractional_boundary_norm");
    if (s < -1.5 || s > 1.5) throw std::invalid_argument("fractional_boundary_norm: s must lie in [-3/2, 3/2]");
  }
  if (ops0 && ops0->k != 0.0) throw std::invalid_argument("fractional_boundary_norm: operators must be at k = 0");
  auto pick = [&](const CMatrix& A) { return A.rows() == space.ndof && A.cols() == space.ndof; };
  auto op = [&](BoundaryOp o) -> RMatrix {
    if (ops0) {
      const bool w = space.kind == TraceSpace::W;
      const CMatrix& A = o == BoundaryOp::V ? (w ? ops0->V_WW : ops0->V_ZZ) : ops0->W_ZZ;
      if (pick(A)) return sym(A);
    }
    return sym(assemble_boundary_operator(o, 0.0, bmesh, space, space).A);
  };
  if (half) {
    RMatrix G;
    if (method == NormRealization::Riesz) {
      if (s < 0.0) {
        G = op(BoundaryOp::V);
      } else {
        RVector mu = mean_vector(bmesh, space);
        G = op(BoundaryOp::W) + mu * mu.transpose();
      }
    } else {
      BoundaryFourier F = boundary_fourier(bmesh, space, 32);
      G = s < 0.0 ? fourier_minus_half(op(BoundaryOp::V), F) : fourier_plus_half(op(BoundaryOp::W), op(BoundaryOp::V), F);
    }
    return std::sqrt(std::max(0.0, quad(G, w)));
  }
  int N = std::max(256, 4 * space.ndof);
  BoundaryFourier F = boundary_fourier(bmesh, space, N);
  return std::sqrt(fourier_norm_sq(F.forward(w), s));
}

RSpMat EnergyNormContext::volume_gram(NormKind n) const {
  switch (n) {
    case NormKind::Energy: return S + (k * k) * M;
    case NormKind::EnergyN: return S + (k * k) * Mn;
    case NormKind::DG:
    case NormKind::DGPlus: {
      if (Jalpha.rows() == 0) throw std::invalid_argument("dG norms need the facet matrices (k > 0)");
      RSpMat G = S + (k * k) * Mn + k * Jalpha + (1.0 / k) * Nb_delta + k * Mb_tilde;
      if (Jbeta.rows() > 0) G += (1.0 / k) * Jbeta;
      if (n == NormKind::DGPlus) G += (1.0 / k) * Avg;
      return G;
    }
  }
  return S;
}

RMatrix EnergyNormContext::m_gram(NormKind n) const { return n == NormKind::DGPlus ? RMatrix(G_m + Mh_m) : G_m; }

std::array<double, 3> EnergyNormContext::parts_sq(const ThreeFieldVector& v, NormKind n) const {
  if (v.u.size() != S.rows() || v.m.size() != G_m.rows() || v.ext.size() != G_ext.rows())
    throw std::invalid_argument("norm: vector does not match the context spaces");
  return {quad(volume_gram(n), v.u), quad(m_gram(n), v.m), quad(G_ext, v.ext)};
}

double EnergyNormContext::norm(const ThreeFieldVector& v, NormKind n) const {
  auto p = parts_sq(v, n);
  return std::sqrt(std::max(0.0, p[0] + p[1] + p[2]));
}

EnergyNormContext make_norm_context(const VolumeForms& forms, const CurvedMesh& mesh, const BoundaryMesh& bmesh,
                                    const SpaceTriple& spaces, const BemOperators& ops0, NormRealization r, int Nf) {
  if (ops0.k != 0.0) throw std::invalid_argument("make_norm_context: boundary operators must be at k = 0");
  if (ops0.nW != spaces.W.ndof || ops0.nZ != spaces.Z.ndof || forms.S.rows() != spaces.V.ndof)
    throw std::invalid_argument("make_norm_context: matrices do not match the spaces");
  EnergyNormContext c;
  c.k = forms.k;
  c.p = spaces.p;
  c.kind = spaces.V.kind;
  c.realization = r;
  c.pen = forms.pen;
  c.mesh = &mesh;
  c.bmesh = &bmesh;
  c.spaces = &spaces;
  c.S = forms.S;
  c.M = forms.M;
  c.Mn = forms.Mn;
  c.Jalpha = forms.Jalpha;
  c.Jbeta = forms.Jbeta;
  c.Avg = forms.Avg;
  c.Nb_delta = forms.Nb_delta;
  if (forms.Mb_delta.rows() > 0) c.Mb_tilde = forms.Mb - forms.Mb_delta;
  c.mu = mean_vector(bmesh, spaces.Z);
  const bool circle = bmesh.curve && bmesh.curve->is_circle();
  if (r == NormRealization::Fourier && !circle)
    throw std::domain_error("make_norm_context: Fourier realization needs a circular boundary");
  if (circle) {
    c.FW = boundary_fourier(bmesh, spaces.W, Nf);
    c.FZ = boundary_fourier(bmesh, spaces.Z, Nf);
  }
  c.G_m = gram_minus_half(ops0, c.FW ? &*c.FW : nullptr, r);
  c.G_ext = gram_plus_half(ops0, c.mu, c.FZ ? &*c.FZ : nullptr, r);
  const double p2 = double(c.p) * c.p;
  c.Mh_m = boundary_weighted_mass(bmesh, spaces.W, [&](int b) { return bmesh.elems[b].h / p2; });
  if (circle) {
    const double R = c.FW->R;
    c.tail_m = c.G_m - weighted_sum(*c.FW, [&](int n) { return mode_weight(true, r, R, n); });
    c.tail_ext = c.G_ext - weighted_sum(*c.FZ, [&](int n) { return mode_weight(false, r, R, n); });
  }
  return c;
}

double energy_norm(const ThreeFieldVector& v, const EnergyNormContext& ctx) { return ctx.norm(v, NormKind::Energy); }

double DgTerms::total(bool plus) const {
  return grad + mass_n + beta_jump + alpha_jump + delta_flux + boundary + (plus ? avg : 0.0);
}

DgTerms dg_terms(const CVector& u, const EnergyNormContext& ctx) {
  if (ctx.Jalpha.rows() == 0) throw std::invalid_argument("dg_terms: context has no facet matrices (k > 0 needed)");
  if (u.size() != ctx.S.rows()) throw std::invalid_argument("dg_terms: vector does not match the volume space");
  const double k = ctx.k;
  DgTerms t;
  t.grad = quad(ctx.S, u);
  t.mass_n = k * k * quad(ctx.Mn, u);
  t.beta_jump = quad(ctx.Jbeta, u) / k;
  t.alpha_jump = k * quad(ctx.Jalpha, u);
  t.delta_flux = quad(ctx.Nb_delta, u) / k;
  t.boundary = k * quad(ctx.Mb_tilde, u);
  t.avg = quad(ctx.Avg, u) / k;
  return t;
}

double dg_norm(const CVector& u, const EnergyNormContext& ctx, bool plus) {
  return std::sqrt(std::max(0.0, dg_terms(u, ctx).total(plus)));
}

AnalyticTriple mie_triple(const DiskTransmissionSolution& sol) {
  AnalyticTriple t;
  auto s = std::make_shared<DiskTransmissionSolution>(sol);
  t.u = [s](const Vec2& x, std::array<cplx, 2>* g) { return s->value(x, g); };
  t.m = [s](double th) { return s->impedance_trace(th); };
  t.ext = [s](double th) { return s->dirichlet_trace(th); };
  t.m_mode = [s](int n) { return s->impedance_mode(n); };
  t.ext_mode = [s](int n) { return s->dirichlet_mode(n); };
  t.max_mode = sol.N;
  t.hessian = [s](const Vec2& x) {
    const double h = 1e-5 * std::max(1.0, s->a);
    std::array<cplx, 2> gp, gm, hp, hm;
    s->value({x[0] + h, x[1]}, &gp);
    s->value({x[0] - h, x[1]}, &gm);
    s->value({x[0], x[1] + h}, &hp);
    s->value({x[0], x[1] - h}, &hm);
    cplx xx = (gp[0] - gm[0]) / (2 * h), yy = (hp[1] - hm[1]) / (2 * h);
    cplx xy = 0.5 * ((gp[1] - gm[1]) / (2 * h) + (hp[0] - hm[0]) / (2 * h));
    return std::array<cplx, 3>{xx, xy, yy};
  };
  return t;
}

AnalyticTriple smooth_triple(const SmoothField& u, double k, std::shared_ptr<BoundaryCurve> curve,
                             const SubdomainPartition& partition, int modes) {
  if (!curve || !curve->is_circle()) throw std::domain_error("smooth_triple: needs a circle");
  AnalyticTriple t;
  auto f = std::make_shared<SmoothField>(u);
  auto part = std::make_shared<SubdomainPartition>(partition);
  t.u = [f](const Vec2& x, std::array<cplx, 2>* g) {
    if (g) *g = f->grad(x);
    return f->value(x);
  };
  t.ext = [f, curve](double th) { return f->value(curve->position(th)); };
  t.m = [f, curve, part, k](double th) {
    Vec2 x = curve->position(th), n = curve->normal(th);
    int tag = part->classify({x[0] - 1e-9 * n[0], x[1] - 1e-9 * n[1]});
    Mat2 nu = part->nu(x, tag);
    auto g = f->grad(x);
    cplx fl = (nu(0, 0) * g[0] + nu(0, 1) * g[1]) * n[0] + (nu(1, 0) * g[0] + nu(1, 1) * g[1]) * n[1];
    return fl + cplx(0.0, k) * f->value(x);
  };
  const double R = curve->radius();
  auto mm = std::make_shared<CVector>(fourier_modes(t.m, R, modes, 8 * modes));
  auto em = std::make_shared<CVector>(fourier_modes(t.ext, R, modes, 8 * modes));
  t.m_mode = [mm, modes](int n) { return (*mm)(n + modes); };
  t.ext_mode = [em, modes](int n) { return (*em)(n + modes); };
  t.max_mode = modes;
  if (u.hessian) t.hessian = u.hessian;
  return t;
}

double ErrorParts::total() const { return vol + m + ext; }

ErrorParts error_parts(const EnergyNormContext& ctx, const AnalyticTriple& target, const ThreeFieldVector& x,
                       NormKind n) {
  if (!ctx.FW || !ctx.FZ) throw std::domain_error("error_parts: needs a circular boundary");
  if (x.u.size() != ctx.S.rows() || x.m.size() != ctx.G_m.rows() || x.ext.size() != ctx.G_ext.rows())
    throw std::invalid_argument("error_parts: vector does not match the context spaces");
  ErrorParts e;
  e.vol = volume_target(ctx, target, &x.u, n, nullptr);
  CVector tm = target_modes(target.m_mode, ctx.FW->N, target.max_mode);
  CVector te = target_modes(target.ext_mode, ctx.FZ->N, target.max_mode);
  e.m = boundary_error(*ctx.FW, ctx.tail_m, true, ctx.realization, tm, x.m);
  if (n == NormKind::DGPlus) e.m += boundary_h_mass_target(ctx, target.m, &x.m, nullptr);
  e.ext = boundary_error(*ctx.FZ, ctx.tail_ext, false, ctx.realization, te, x.ext);
  e.vol = std::max(0.0, e.vol);
  e.m = std::max(0.0, e.m);
  e.ext = std::max(0.0, e.ext);
  return e;
}

double error_norm(const EnergyNormContext& ctx, const AnalyticTriple& target, const ThreeFieldVector& x, NormKind n) {
  return std::sqrt(error_parts(ctx, target, x, n).total());
}

ThreeFieldVector best_approximation(const EnergyNormContext& ctx, const AnalyticTriple& target, NormKind n) {
  if (!ctx.FW || !ctx.FZ) throw std::domain_error("best_approximation: needs a circular boundary");
  ThreeFieldVector x;
  CVector rhs;
  volume_target(ctx, target, nullptr, n, &rhs);
  Eigen::SimplicialLDLT<RSpMat> ldlt(ctx.volume_gram(n));
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw std::runtime_error("best_approximation: singular projection (volume Gram not positive definite)");
  x.u.resize(rhs.size());
  x.u.real() = ldlt.solve(RVector(rhs.real()));
  x.u.imag() = ldlt.solve(RVector(rhs.imag()));

  CVector tm = target_modes(target.m_mode, ctx.FW->N, target.max_mode);
  CVector bm = boundary_rhs(*ctx.FW, true, ctx.realization, tm);
  if (n == NormKind::DGPlus) {
    CVector bh;
    boundary_h_mass_target(ctx, target.m, nullptr, &bh);
    bm += bh;
  }
  x.m = solve_spd(ctx.m_gram(n), bm, "H^{-1/2} Gram");
  CVector te = target_modes(target.ext_mode, ctx.FZ->N, target.max_mode);
  x.ext = solve_spd(ctx.G_ext, boundary_rhs(*ctx.FZ, false, ctx.realization, te), "H^{1/2} Gram");
  return x;
}

double best_approximation_error(const EnergyNormContext& ctx, const AnalyticTriple& target, NormKind n) {
  return error_norm(ctx, target, best_approximation(ctx, target, n), n);
}

ThreeFieldVector best_approximation(const EnergyNormContext& ctx, const ThreeFieldVector& target, NormKind n) {
  if (target.u.size() != ctx.S.rows() || target.m.size() != ctx.G_m.rows() || target.ext.size() != ctx.G_ext.rows())
    throw std::invalid_argument("best_approximation: target does not match the context spaces");
  RSpMat Gv = ctx.volume_gram(n);
  Eigen::SimplicialLDLT<RSpMat> ldlt(Gv);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw std::runtime_error("best_approximation: singular projection (volume Gram not positive definite)");
  ThreeFieldVector x;
  CVector bu = Gv.cast<cplx>() * target.u;
  x.u.resize(bu.size());
  x.u.real() = ldlt.solve(RVector(bu.real()));
  x.u.imag() = ldlt.solve(RVector(bu.imag()));
  RMatrix Gm = ctx.m_gram(n);
  x.m = solve_spd(Gm, Gm.cast<cplx>() * target.m, "H^{-1/2} Gram");
  x.ext = solve_spd(ctx.G_ext, ctx.G_ext.cast<cplx>() * target.ext, "H^{1/2} Gram");
  return x;
}

double best_approximation_error(const EnergyNormContext& ctx, const ThreeFieldVector& target, NormKind n) {
  ThreeFieldVector x = best_approximation(ctx, target, n);
  return ctx.norm({x.u - target.u, x.m - target.m, x.ext - target.ext}, n);
}

namespace {

struct VolumeSums {
  double l2 = 0.0, h1 = 0.0, h2 = 0.0;
};

VolumeSums analytic_volume_sums(const AnalyticTriple& t, const CurvedMesh& mesh, bool hess) {
  VolumeSums s;
  const QuadratureRule2D& q = triangle_rule(16);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int iq = 0; iq < q.size(); ++iq) {
      Vec2 x;
      Mat2 J;
      mesh.map_and_jacobian(e, q.x[iq], x, J);
      double w = q.w[iq] * J.determinant();
      std::array<cplx, 2> g;
      cplx u = t.u(x, &g);
      s.l2 += w * std::norm(u);
      s.h1 += w * (std::norm(g[0]) + std::norm(g[1]));
      if (hess) {
        auto H = t.hessian(x);
        s.h2 += w * (std::norm(H[0]) + 2.0 * std::norm(H[1]) + std::norm(H[2]));
      }
    }
  }
  return s;
}

double modes_norm(const std::function<cplx(int)>& mode, int N, double s) {
  double r = 0.0;
  for (int n = -N; n <= N; ++n) r += sobolev_weight(s, n) * std::norm(mode(n));
  return std::sqrt(r);
}

}  // namespace

double triple_norm_V(const AnalyticTriple& t, const CurvedMesh& mesh, double k, int s) {
  if (s != 0 && s != 1) throw std::invalid_argument("triple_norm_V: s must be 0 or 1");
  if (s == 1 && !t.hessian) throw std::invalid_argument("triple_norm_V: s = 1 needs second derivatives");
  if (!t.m_mode || !t.ext_mode) throw std::invalid_argument("triple_norm_V: boundary modes needed");
  VolumeSums v = analytic_volume_sums(t, mesh, s == 1);
  const int N = t.max_mode;
  double vol = std::sqrt(v.l2 + v.h1 + (s == 1 ? v.h2 : 0.0)) + std::pow(k, s + 1) * std::sqrt(v.l2);
  double m = modes_norm(t.m_mode, N, s - 0.5) + std::pow(k, s) * modes_norm(t.m_mode, N, -0.5);
  double e = modes_norm(t.ext_mode, N, s + 0.5) + std::pow(k, s) * modes_norm(t.ext_mode, N, 0.5);
  return vol + m + e;
}

double triple_norm_V0(const ThreeFieldVector& v, const EnergyNormContext& ctx) {
  const CurvedMesh& mesh = *ctx.mesh;
  const VolumeSpace& V = ctx.spaces->V;
  double l2 = quad(ctx.M, v.u), h1 = 0.0;
  LocalEval le;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const QuadratureRule2D& q = triangle_rule(volume_quadrature_degree(mesh, e, ctx.p));
    for (int iq = 0; iq < q.size(); ++iq) {
      eval_volume(mesh, V, e, q.x[iq], le);
      cplx gx = 0.0, gy = 0.0;
      for (size_t i = 0; i < V.dofs[e].size(); ++i) {
        gx += v.u(V.dofs[e][i]) * le.gx[i];
        gy += v.u(V.dofs[e][i]) * le.gy[i];
      }
      h1 += q.w[iq] * le.detJ * (std::norm(gx) + std::norm(gy));
    }
  }
  double m = std::sqrt(std::max(0.0, quad(ctx.G_m, v.m)));
  double ext = std::sqrt(std::max(0.0, quad(ctx.G_ext, v.ext)));
  return std::sqrt(l2 + h1) + ctx.k * std::sqrt(l2) + 2.0 * m + 2.0 * ext;
}

double triple_norm_Vprime1(const std::function<cplx(const Vec2&)>& r, const std::function<cplx(double)>& Rm,
                           const std::function<cplx(double)>& Rext, const CurvedMesh& mesh, double k, int modes) {
  if (!mesh.curve || !mesh.curve->is_circle()) throw std::domain_error("triple_norm_Vprime1: needs a circle");
  const QuadratureRule2D& q = triangle_rule(16);
  double l2 = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int iq = 0; iq < q.size(); ++iq) {
      Vec2 x;
      Mat2 J;
      mesh.map_and_jacobian(e, q.x[iq], x, J);
      l2 += q.w[iq] * J.determinant() * std::norm(r(x));
    }
  const double R = mesh.curve->radius();
  CVector mm = fourier_modes(Rm, R, modes), em = fourier_modes(Rext, R, modes);
  return std::sqrt(l2) + std::sqrt(fourier_norm_sq(mm, 1.5)) + k * std::sqrt(fourier_norm_sq(mm, 0.5)) +
         std::sqrt(fourier_norm_sq(em, 0.5)) + k * std::sqrt(fourier_norm_sq(em, -0.5));
}

double measure_inverse_inequality(const BoundaryMesh& bmesh, int p, NormRealization r) {
  if (p < 1) throw std::invalid_argument("measure_inverse_inequality: p >= 1 required");
  TraceSpace W = make_trace_space(bmesh, TraceSpace::W, p - 1);
  BemOperators ops0;
  ops0.k = 0.0;
  ops0.V_WW = assemble_boundary_operator(BoundaryOp::V, 0.0, bmesh, W, W).A;
  std::optional<BoundaryFourier> F;
  if (r == NormRealization::Fourier) F = boundary_fourier(bmesh, W, 64);
  RMatrix G = gram_minus_half(ops0, F ? &*F : nullptr, r);
  const double p2 = double(p) * p;
  RMatrix Mh = boundary_weighted_mass(bmesh, W, [&](int b) { return bmesh.elems[b].h / p2; });
  Eigen::LLT<RMatrix> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("measure_inverse_inequality: H^{-1/2} Gram matrix is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<RMatrix> es(Mh, G);
  if (es.info() != Eigen::Success) throw std::runtime_error("measure_inverse_inequality: eigensolver failed");
  return std::sqrt(es.eigenvalues().maxCoeff());
}

}  // namespace fembem
