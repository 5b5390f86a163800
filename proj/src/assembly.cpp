#include "fembem/assembly.hpp"

#include <omp.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "fembem/quadrature.hpp"

namespace fembem {

namespace {

const cplx kI(0.0, 1.0);

using Trip = Eigen::Triplet<double>;
using TripList = std::vector<Trip>;

enum Slot { kS, kM, kMn, kMb, kNvw, kJalpha, kJbeta, kCons, kAvg, kMbd, kNbd, kCbd, kNvwd, kDvwd, kSlots };

struct Lists {
  std::array<TripList, kSlots> t;
};

RSpMat build(int rows, int cols, const std::vector<Lists>& parts, Slot s) {
  size_t n = 0;
  for (const Lists& l : parts) n += l.t[s].size();
  TripList all;
  all.reserve(n);
  for (const Lists& l : parts) all.insert(all.end(), l.t[s].begin(), l.t[s].end());
  RSpMat A(rows, cols);
  A.setFromTriplets(all.begin(), all.end());
  return A;
}

void push_local(TripList& out, const std::vector<int>& rows, const std::vector<int>& cols, const RMatrix& A) {
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0.0) out.emplace_back(rows[i], cols[j], A(i, j));
}

double spectral_norm(const Mat2& A) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (A + A.transpose()));
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(1)));
}

int facet_points(int p) { return p + 4; }

SpMat to_complex(const RSpMat& A) { return A.cast<cplx>(); }

CMatrix cplx_of(const RMatrix& A) { return A.cast<cplx>(); }

void check_same_k(double a, double b, const char* what) {
  if (std::abs(a - b) > 1e-14 * std::max(1.0, std::abs(a))) throw std::invalid_argument(what);
}

}  // namespace

void PenaltyParams::validate() const {
  if (!(a > 0.0)) throw std::invalid_argument("penalty constant a must be positive");
  if (!(b >= 0.0)) throw std::invalid_argument("penalty constant b must be nonnegative");
  if (!(d > 0.0)) throw std::invalid_argument("penalty constant d must be positive");
}

VolumeForms assemble_volume_forms(double k, const CurvedMesh& mesh, const SpaceTriple& spaces,
                                  const PenaltyParams& pen, ExecPolicy policy) {
  const VolumeSpace& V = spaces.V;
  const TraceSpace& W = spaces.W;
  const bool dg = V.kind == Formulation::DG;
  const int p = spaces.p;
  VolumeForms F;
  F.kind = V.kind;
  F.k = k;
  F.p = p;
  F.pen = pen;
  if (dg) {
    pen.validate();
    if (!(k > 0.0)) throw std::invalid_argument("assemble_volume_forms: DG forms need k > 0");
  }
  const int nloc = V.basis.size();
  const int ne = mesh.num_elements();
  const int nbf = static_cast<int>(mesh.boundary_facets.size());
  const int nif = static_cast<int>(mesh.interior_facets.size());

  BoundaryMesh bmesh = induced_boundary_mesh(mesh);
  if (bmesh.size() != nbf || W.ndof <= 0 || static_cast<int>(W.dofs.size()) != nbf)
    throw std::invalid_argument("assemble_volume_forms: trace space does not match the mesh boundary");
  std::vector<int> belem(nbf, -1);
  for (int b = 0; b < bmesh.size(); ++b) belem[bmesh.elems[b].facet] = b;

  const bool facets = dg || (k > 0.0 && pen.a > 0.0 && pen.b >= 0.0 && pen.d > 0.0);
  if (facets) {
    F.delta_min = 1e300;
    F.delta_max = 0.0;
    for (const BoundaryFacet& bf : mesh.boundary_facets) {
      double delta = pen.d * k * bf.h / (p * p);
      F.delta_min = std::min(F.delta_min, delta);
      F.delta_max = std::max(F.delta_max, delta);
    }
    if (dg && (!(F.delta_min > 0.0) || !(F.delta_max < 0.5)))
      throw std::invalid_argument("assemble_volume_forms: delta = d k h / p^2 must lie in (0, 1/2) on every boundary facet");
  }

  const int nthreads = policy == ExecPolicy::Parallel ? omp_get_max_threads() : 1;
  std::vector<Lists> parts(nthreads);
  std::vector<RMatrix> mww_parts(nthreads, RMatrix::Zero(W.ndof, W.ndof));
  const QuadratureRule1D& fr = gauss_rule01(facet_points(p));

#pragma omp parallel num_threads(nthreads)
  {
    Lists& L = parts[omp_get_thread_num()];
    RMatrix& Mww = mww_parts[omp_get_thread_num()];
    LocalEval le, le1;
    RMatrix S(nloc, nloc), M(nloc, nloc), Mn(nloc, nloc);

#pragma omp for schedule(static)
    for (int e = 0; e < ne; ++e) {
      const Element& el = mesh.elements[e];
      const QuadratureRule2D& q = triangle_rule(volume_quadrature_degree(mesh, e, p));
      S.setZero();
      M.setZero();
      Mn.setZero();
      for (int iq = 0; iq < q.size(); ++iq) {
        eval_volume(mesh, V, e, q.x[iq], le);
        double w = q.w[iq] * le.detJ;
        Mat2 nu = mesh.partition.nu(le.x, el.tag);
        double n = mesh.partition.n(le.x, el.tag);
        for (int j = 0; j < nloc; ++j) {
          double fx = nu(0, 0) * le.gx[j] + nu(0, 1) * le.gy[j];
          double fy = nu(1, 0) * le.gx[j] + nu(1, 1) * le.gy[j];
          for (int i = 0; i < nloc; ++i) {
            double vv = w * le.val[i] * le.val[j];
            S(i, j) += w * (fx * le.gx[i] + fy * le.gy[i]);
            M(i, j) += vv;
            Mn(i, j) += n * n * vv;
          }
        }
      }
      push_local(L.t[kS], V.dofs[e], V.dofs[e], S);
      push_local(L.t[kM], V.dofs[e], V.dofs[e], M);
      push_local(L.t[kMn], V.dofs[e], V.dofs[e], Mn);
    }

#pragma omp for schedule(static)
    for (int f = 0; f < nbf; ++f) {
      const BoundaryFacet& bf = mesh.boundary_facets[f];
      const int b = belem[f];
      const Element& el = mesh.elements[bf.e];
      const std::vector<int>& vd = V.dofs[bf.e];
      const std::vector<int>& wd = W.dofs[b];
      const int nw = W.nloc;
      const double delta = pen.d * k * bf.h / (p * p);
      RMatrix Mb = RMatrix::Zero(nloc, nloc), Nvw = RMatrix::Zero(nloc, nw);
      RMatrix Mbd = RMatrix::Zero(nloc, nloc), Nbd = RMatrix::Zero(nloc, nloc), Cbd = RMatrix::Zero(nloc, nloc);
      RMatrix Nvwd = RMatrix::Zero(nloc, nw), Dvwd = RMatrix::Zero(nloc, nw), Mwd = RMatrix::Zero(nw, nw);
      std::vector<double> psi(nw), flux(nloc);
      for (int iq = 0; iq < fr.size(); ++iq) {
        double s = fr.x[iq];
        Vec2 xi = boundary_facet_point(mesh, f, s);
        eval_volume(mesh, V, bf.e, xi, le);
        double jl;
        Vec2 nrm = mesh.outward_normal(bf.e, bf.ledge, xi, &jl);
        double w = fr.w[iq] * jl;
        W.eval(s, psi.data());
        Mat2 nu = mesh.partition.nu(le.x, el.tag);
        for (int i = 0; i < nloc; ++i)
          flux[i] = (nu(0, 0) * le.gx[i] + nu(0, 1) * le.gy[i]) * nrm[0] +
                    (nu(1, 0) * le.gx[i] + nu(1, 1) * le.gy[i]) * nrm[1];
        for (int i = 0; i < nloc; ++i) {
          for (int j = 0; j < nloc; ++j) Mb(i, j) += w * le.val[i] * le.val[j];
          for (int j = 0; j < nw; ++j) Nvw(i, j) += w * psi[j] * le.val[i];
        }
        if (facets) {
          double wdl = w * delta;
          for (int i = 0; i < nloc; ++i) {
            for (int j = 0; j < nloc; ++j) {
              Mbd(i, j) += wdl * le.val[i] * le.val[j];
              Nbd(i, j) += wdl * flux[i] * flux[j];
              Cbd(i, j) += wdl * le.val[j] * flux[i];
            }
            for (int j = 0; j < nw; ++j) {
              Nvwd(i, j) += wdl * psi[j] * le.val[i];
              Dvwd(i, j) += wdl * psi[j] * flux[i];
            }
          }
          for (int i = 0; i < nw; ++i)
            for (int j = 0; j < nw; ++j) Mwd(i, j) += wdl * psi[i] * psi[j];
        }
      }
      push_local(L.t[kMb], vd, vd, Mb);
      push_local(L.t[kNvw], vd, wd, Nvw);
      if (facets) {
        push_local(L.t[kMbd], vd, vd, Mbd);
        push_local(L.t[kNbd], vd, vd, Nbd);
        push_local(L.t[kCbd], vd, vd, Cbd);
        push_local(L.t[kNvwd], vd, wd, Nvwd);
        push_local(L.t[kDvwd], vd, wd, Dvwd);
        for (int i = 0; i < nw; ++i)
          for (int j = 0; j < nw; ++j) Mww(wd[i], wd[j]) += Mwd(i, j);
      }
    }

    if (facets) {
#pragma omp for schedule(static)
      for (int f = 0; f < nif; ++f) {
        const InteriorFacet& fc = mesh.interior_facets[f];
        const int n2 = 2 * nloc;
        std::vector<int> dofs(n2);
        for (int i = 0; i < nloc; ++i) {
          dofs[i] = V.dofs[fc.e[0]][i];
          dofs[nloc + i] = V.dofs[fc.e[1]][i];
        }
        const int tag0 = mesh.elements[fc.e[0]].tag, tag1 = mesh.elements[fc.e[1]].tag;
        RMatrix Ja = RMatrix::Zero(n2, n2), Jb = RMatrix::Zero(n2, n2), Cn = RMatrix::Zero(n2, n2),
                Av = RMatrix::Zero(n2, n2);
        std::vector<double> jump(n2), fjump(n2), ax(n2), ay(n2);
        for (int iq = 0; iq < fr.size(); ++iq) {
          double s = fr.x[iq];
          Vec2 xi0 = interior_facet_point(mesh, f, 0, s), xi1 = interior_facet_point(mesh, f, 1, s);
          eval_volume(mesh, V, fc.e[0], xi0, le);
          eval_volume(mesh, V, fc.e[1], xi1, le1);
          double jl;
          Vec2 nrm = mesh.outward_normal(fc.e[0], fc.ledge[0], xi0, &jl);
          double w = fr.w[iq] * jl;
          Mat2 nu0 = mesh.partition.nu(le.x, tag0), nu1 = mesh.partition.nu(le.x, tag1);
          double nut = std::max(spectral_norm(nu0), spectral_norm(nu1));
          double alpha = pen.a * p * p * nut / (k * fc.h);
          double beta = pen.b * k * fc.h / (p * nut);
          for (int side = 0; side < 2; ++side) {
            const LocalEval& L2 = side == 0 ? le : le1;
            const Mat2& nu = side == 0 ? nu0 : nu1;
            double sg = side == 0 ? 1.0 : -1.0;
            for (int i = 0; i < nloc; ++i) {
              int ii = side * nloc + i;
              double fx = nu(0, 0) * L2.gx[i] + nu(0, 1) * L2.gy[i];
              double fy = nu(1, 0) * L2.gx[i] + nu(1, 1) * L2.gy[i];
              jump[ii] = sg * L2.val[i];
              fjump[ii] = sg * (fx * nrm[0] + fy * nrm[1]);
              ax[ii] = 0.5 * fx;
              ay[ii] = 0.5 * fy;
            }
          }
          for (int i = 0; i < n2; ++i) {
            double an = ax[i] * nrm[0] + ay[i] * nrm[1];
            for (int j = 0; j < n2; ++j) {
              Ja(i, j) += w * alpha * jump[i] * jump[j];
              Jb(i, j) += w * beta * fjump[i] * fjump[j];
              Cn(i, j) += w * jump[j] * an;
              Av(i, j) += w / alpha * (ax[i] * ax[j] + ay[i] * ay[j]);
            }
          }
        }
        push_local(L.t[kJalpha], dofs, dofs, Ja);
        if (pen.b > 0.0) push_local(L.t[kJbeta], dofs, dofs, Jb);
        push_local(L.t[kCons], dofs, dofs, Cn);
        push_local(L.t[kAvg], dofs, dofs, Av);
      }
    }
  }

  const int nv = V.ndof, nw = W.ndof;
  F.S = build(nv, nv, parts, kS);
  F.M = build(nv, nv, parts, kM);
  F.Mn = build(nv, nv, parts, kMn);
  F.Mb = build(nv, nv, parts, kMb);
  F.Nvw = build(nv, nw, parts, kNvw);
  if (facets) {
    F.Jalpha = build(nv, nv, parts, kJalpha);
    F.Jbeta = build(nv, nv, parts, kJbeta);
    F.Cons = build(nv, nv, parts, kCons);
    F.Avg = build(nv, nv, parts, kAvg);
    F.Mb_delta = build(nv, nv, parts, kMbd);
    F.Nb_delta = build(nv, nv, parts, kNbd);
    F.Cb_delta = build(nv, nv, parts, kCbd);
    F.Nvw_delta = build(nv, nw, parts, kNvwd);
    F.Dvw_delta = build(nv, nw, parts, kDvwd);
    F.Mww_delta = RMatrix::Zero(nw, nw);
    for (const RMatrix& m : mww_parts) F.Mww_delta += m;
  }
  return F;
}

SpMat volume_block(const VolumeForms& f) {
  const double k = f.k;
  SpMat A = to_complex(f.S) - cplx(k * k) * to_complex(f.Mn);
  if (f.kind == Formulation::Conforming) return A + (kI * k) * to_complex(f.Mb);
  RSpMat C = f.Cons + RSpMat(f.Cons.transpose());
  RSpMat Cb = f.Cb_delta + RSpMat(f.Cb_delta.transpose());
  A -= to_complex(C);
  A += (kI / k) * to_complex(f.Jbeta);
  A += (kI * k) * to_complex(f.Jalpha);
  A += (kI / k) * to_complex(f.Nb_delta);
  A -= to_complex(Cb);
  A += (kI * k) * to_complex(RSpMat(f.Mb - f.Mb_delta));
  return A;
}

CVector ThreeFieldVector::stacked() const {
  CVector x(u.size() + m.size() + ext.size());
  x << u, m, ext;
  return x;
}

ThreeFieldVector ThreeFieldVector::split(const CVector& x, int nu, int nm, int ne) {
  if (x.size() != nu + nm + ne) throw std::invalid_argument("ThreeFieldVector::split: size mismatch");
  return {x.head(nu), x.segment(nu, nm), x.tail(ne)};
}

CVector CoupledSystem::apply(const CVector& x) const {
  CVector y(size());
  y.head(nu) = Auu * x.head(nu) + Aub * x.tail(nb());
  y.tail(nb()) = Abu * x.head(nu) + Abb * x.tail(nb());
  return y;
}

CVector CoupledSystem::apply_adjoint(const CVector& y) const {
  CVector x(size());
  x.head(nu) = Auu.adjoint() * y.head(nu) + Abu.adjoint() * y.tail(nb());
  x.tail(nb()) = Aub.adjoint() * y.head(nu) + Abb.adjoint() * y.tail(nb());
  return x;
}

CMatrix CoupledSystem::to_dense() const {
  CMatrix A(size(), size());
  A.topLeftCorner(nu, nu) = CMatrix(Auu);
  A.topRightCorner(nu, nb()) = CMatrix(Aub);
  A.bottomLeftCorner(nb(), nu) = CMatrix(Abu);
  A.bottomRightCorner(nb(), nb()) = Abb;
  return A;
}

CoupledSystem operator+(const CoupledSystem& a, const CoupledSystem& b) {
  if (a.nu != b.nu || a.nm != b.nm || a.ne != b.ne) throw std::invalid_argument("CoupledSystem: block size mismatch");
  CoupledSystem c = a;
  c.Auu = a.Auu + b.Auu;
  c.Aub = a.Aub + b.Aub;
  c.Abu = a.Abu + b.Abu;
  c.Abb = a.Abb + b.Abb;
  c.rhs = CVector();
  return c;
}

CoupledSystem operator*(double s, const CoupledSystem& a) {
  CoupledSystem c = a;
  c.Auu *= s;
  c.Aub *= s;
  c.Abu *= s;
  c.Abb *= s;
  return c;
}

namespace {

// Sparse nu x nb block whose first nm columns hold B (nu x nm).
SpMat pad_cols(const SpMat& B, int ne) {
  SpMat out(B.rows(), B.cols() + ne);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int j = 0; j < B.outerSize(); ++j)
    for (SpMat::InnerIterator it(B, j); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

CoupledSystem empty_system(const VolumeForms& forms, int nm, int ne) {
  CoupledSystem s;
  s.formulation = forms.kind;
  s.k = forms.k;
  s.nu = static_cast<int>(forms.S.rows());
  s.nm = nm;
  s.ne = ne;
  s.Auu = SpMat(s.nu, s.nu);
  s.Aub = SpMat(s.nu, s.nb());
  s.Abu = SpMat(s.nb(), s.nu);
  s.Abb = CMatrix::Zero(s.nb(), s.nb());
  return s;
}

void check_ops(const VolumeForms& forms, const BemOperators& ops) {
  if (ops.V_WW.size() == 0 || ops.W_ZZ.size() == 0 || ops.K_WZ.size() == 0 || ops.Kp_ZW.size() == 0)
    throw std::invalid_argument("assemble_coupled: boundary operators are missing");
  if (ops.nW != forms.Nvw.cols()) throw std::invalid_argument("assemble_coupled: W_h size mismatch");
}

}  // namespace

CoupledSystem assemble_coupled(const VolumeForms& forms, const BemOperators& ops) {
  check_ops(forms, ops);
  check_same_k(forms.k, ops.k, "assemble_coupled: boundary operators assembled at a different k");
  const double k = forms.k;
  const int nm = ops.nW, ne = ops.nZ;
  CoupledSystem s = empty_system(forms, nm, ne);
  s.Auu = volume_block(forms);
  SpMat vm, mu;
  if (forms.kind == Formulation::Conforming) {
    vm = -to_complex(forms.Nvw);
    mu = to_complex(RSpMat(forms.Nvw.transpose()));
  } else {
    RSpMat N1 = forms.Nvw - forms.Nvw_delta;
    vm = -(kI / k) * to_complex(forms.Dvw_delta) - to_complex(N1);
    mu = SpMat((kI / k) * to_complex(RSpMat(forms.Dvw_delta.transpose()))) + to_complex(RSpMat(N1.transpose()));
  }
  s.Aub = pad_cols(vm, ne);
  s.Abu = SpMat(pad_cols(SpMat(mu.transpose()), ne).transpose());
  CMatrix& B = s.Abb;
  B.topLeftCorner(nm, nm) = ops.V_WW;
  if (forms.kind == Formulation::DG) B.topLeftCorner(nm, nm) -= (kI / k) * cplx_of(forms.Mww_delta);
  B.topRightCorner(nm, ne) = -(0.5 * cplx_of(ops.M_WZ) + ops.K_WZ) - (kI * k) * ops.V_WZ;
  B.bottomLeftCorner(ne, nm) = 0.5 * cplx_of(RMatrix(ops.M_WZ.transpose())) + ops.Kp_ZW + (kI * k) * ops.V_ZW;
  B.bottomRightCorner(ne, ne) = ops.W_ZZ - (kI * k) * (ops.K_ZZ + ops.Kp_ZZ) + (k * k) * ops.V_ZZ;
  return s;
}

CVector load_vector(const CurvedMesh& mesh, const BoundaryMesh& bmesh, const SpaceTriple& spaces,
                    const std::function<cplx(const Vec2&)>& f, const std::function<cplx(double)>& fm,
                    const std::function<cplx(double)>& fe) {
  const VolumeSpace& V = spaces.V;
  CVector b = CVector::Zero(spaces.size());
  const int p = spaces.p;
  if (f) {
    const int nloc = V.basis.size();
    LocalEval le;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const QuadratureRule2D& q = triangle_rule(volume_quadrature_degree(mesh, e, p) + 4);
      CVector loc = CVector::Zero(nloc);
      for (int iq = 0; iq < q.size(); ++iq) {
        eval_volume(mesh, V, e, q.x[iq], le);
        cplx fv = f(le.x) * (q.w[iq] * le.detJ);
        for (int i = 0; i < nloc; ++i) loc(i) += fv * le.val[i];
      }
      for (int i = 0; i < nloc; ++i) b(V.dofs[e][i]) += loc(i);
    }
  }
  auto boundary = [&](const TraceSpace& sp, const std::function<cplx(double)>& g, int offset) {
    const QuadratureRule1D& r = gauss_rule01(p + 10);
    std::vector<double> val(sp.nloc);
    for (int i = 0; i < bmesh.size(); ++i) {
      const BoundaryElement& be = bmesh.elems[i];
      for (int iq = 0; iq < r.size(); ++iq) {
        double t = be.t0 + r.x[iq] * (be.t1 - be.t0);
        double w = r.w[iq] * bmesh.curve->speed(t) * (be.t1 - be.t0);
        sp.eval(r.x[iq], val.data());
        cplx gv = g(t) * w;
        for (int j = 0; j < sp.nloc; ++j) b(offset + sp.dofs[i][j]) += gv * val[j];
      }
    }
  };
  if (fm) boundary(spaces.W, fm, spaces.offset_m());
  if (fe) boundary(spaces.Z, fe, spaces.offset_ext());
  return b;
}

CVector assemble_rhs(const CurvedMesh& mesh, const BoundaryMesh& bmesh, const SpaceTriple& spaces,
                     const std::function<cplx(const Vec2&)>& f, const std::function<cplx(double)>& g,
                     const std::function<cplx(double)>& h) {
  std::function<cplx(double)> mh;
  if (h) mh = [&h](double t) { return -h(t); };
  return load_vector(mesh, bmesh, spaces, f, g, mh);
}

RVector mean_vector(const BoundaryMesh& bmesh, const TraceSpace& Z) {
  RVector mu = RVector::Zero(Z.ndof);
  const QuadratureRule1D& r = gauss_rule01(Z.p + 8);
  std::vector<double> val(Z.nloc);
  for (int i = 0; i < bmesh.size(); ++i) {
    const BoundaryElement& be = bmesh.elems[i];
    for (int iq = 0; iq < r.size(); ++iq) {
      double t = be.t0 + r.x[iq] * (be.t1 - be.t0);
      double w = r.w[iq] * bmesh.curve->speed(t) * (be.t1 - be.t0);
      Z.eval(r.x[iq], val.data());
      for (int j = 0; j < Z.nloc; ++j) mu(Z.dofs[i][j]) += w * val[j];
    }
  }
  return mu;
}

CoupledSystem assemble_theta(const VolumeForms& forms, const BemOperators& ops_k, const BemOperators& ops_0,
                             const RVector& mu) {
  check_ops(forms, ops_k);
  check_ops(forms, ops_0);
  check_same_k(forms.k, ops_k.k, "assemble_theta: operators assembled at a different k");
  if (ops_0.k != 0.0) throw std::invalid_argument("assemble_theta: second operator set must be at k = 0");
  if (ops_k.nW != ops_0.nW || ops_k.nZ != ops_0.nZ || mu.size() != ops_k.nZ)
    throw std::invalid_argument("assemble_theta: space mismatch between operator sets");
  const double k = forms.k;
  const int nm = ops_k.nW, ne = ops_k.nZ;
  CoupledSystem s = empty_system(forms, nm, ne);
  s.Auu = cplx(2.0 * k * k) * to_complex(forms.Mn);
  CMatrix& B = s.Abb;
  B.topLeftCorner(nm, nm) = -(ops_k.V_WW - ops_0.V_WW);
  B.topRightCorner(nm, ne) = (ops_k.K_WZ - ops_0.K_WZ) + (kI * k) * ops_k.V_WZ;
  B.bottomLeftCorner(ne, nm) = -(ops_k.Kp_ZW - ops_0.Kp_ZW) - (kI * k) * ops_k.V_ZW;
  B.bottomRightCorner(ne, ne) = -(ops_k.W_ZZ - ops_0.W_ZZ) + (kI * k) * (ops_k.K_ZZ + ops_k.Kp_ZZ) -
                                (k * k) * ops_k.V_ZZ + cplx_of(mu * mu.transpose());
  return s;
}

CoupledSystem assemble_tplus(const VolumeForms& forms, const BemOperators& ops_0, const RVector& mu) {
  check_ops(forms, ops_0);
  if (ops_0.k != 0.0) throw std::invalid_argument("assemble_tplus: operators must be at k = 0");
  if (mu.size() != ops_0.nZ) throw std::invalid_argument("assemble_tplus: mean vector size mismatch");
  const double k = forms.k;
  const int nm = ops_0.nW, ne = ops_0.nZ;
  CoupledSystem s = empty_system(forms, nm, ne);
  s.formulation = Formulation::Conforming;
  s.Auu = to_complex(forms.S) + cplx(k * k) * to_complex(forms.Mn) + (kI * k) * to_complex(forms.Mb);
  s.Aub = pad_cols(-to_complex(forms.Nvw), ne);
  s.Abu = SpMat(pad_cols(to_complex(forms.Nvw), ne).transpose());
  CMatrix& B = s.Abb;
  B.topLeftCorner(nm, nm) = ops_0.V_WW;
  B.topRightCorner(nm, ne) = -(0.5 * cplx_of(ops_0.M_WZ) + ops_0.K_WZ);
  B.bottomLeftCorner(ne, nm) = 0.5 * cplx_of(RMatrix(ops_0.M_WZ.transpose())) + ops_0.Kp_ZW;
  B.bottomRightCorner(ne, ne) = ops_0.W_ZZ + cplx_of(mu * mu.transpose());
  return s;
}

CoupledSystem assemble_adjoint(const CoupledSystem& primal, const CVector& load) {
  if (load.size() != primal.size()) throw std::invalid_argument("assemble_adjoint: load size mismatch");
  CoupledSystem a = primal;
  a.Auu = primal.Auu.adjoint();
  a.Aub = primal.Abu.adjoint();
  a.Abu = primal.Aub.adjoint();
  a.Abb = primal.Abb.adjoint();
  a.rhs = load;
  return a;
}

void dump_system(const std::string& path, const CoupledSystem& sys) {
  dump_matrix(path, sys.to_dense(), to_string(sys.formulation), sys.k);
  nlohmann::json j;
  std::ifstream in(path + ".json");
  in >> j;
  j["blocks"] = {{{"name", "u"}, {"offset", 0}, {"size", sys.nu}},
                 {{"name", "m"}, {"offset", sys.nu}, {"size", sys.nm}},
                 {{"name", "u_ext"}, {"offset", sys.nu + sys.nm}, {"size", sys.ne}}};
  std::ofstream out(path + ".json");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("dump_system: write failed for " + path + ".json");
}

}  // namespace fembem
