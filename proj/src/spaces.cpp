#include "fembem/spaces.hpp"

#include <map>
#include <stdexcept>

namespace fembem {

std::string to_string(Formulation f) { return f == Formulation::Conforming ? "conforming" : "dg"; }

Formulation formulation_from_string(const std::string& s) {
  if (s == "conforming") return Formulation::Conforming;
  if (s == "dg" || s == "DG") return Formulation::DG;
  throw std::invalid_argument("unknown formulation: " + s);
}

void TraceSpace::eval(double s, double* val, double* der) const {
  if (kind == W)
    segment_legendre(nloc, s, val, der);
  else
    segment_lobatto(p, s, val, der);
}

TraceSpace make_trace_space(const BoundaryMesh& bmesh, TraceSpace::Kind kind, int degree) {
  int n = bmesh.size();
  if (n < 3) throw std::domain_error("make_trace_space: boundary mesh needs at least 3 elements");
  TraceSpace s;
  s.kind = kind;
  s.p = degree;
  if (kind == TraceSpace::W) {
    if (degree < 0 || degree > kMaxDegree) throw std::domain_error("make_trace_space: unsupported degree");
    s.nloc = degree + 1;
    s.ndof = n * s.nloc;
    s.dofs.resize(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < s.nloc; ++j) s.dofs[i].push_back(i * s.nloc + j);
  } else {
    if (degree < 1 || degree > kMaxDegree) throw std::domain_error("make_trace_space: unsupported degree");
    s.nloc = degree + 1;
    s.ndof = n * degree;
    s.dofs.resize(n);
    for (int i = 0; i < n; ++i) {
      s.dofs[i].push_back(i);
      s.dofs[i].push_back((i + 1) % n);
      for (int j = 2; j <= degree; ++j) s.dofs[i].push_back(n + i * (degree - 1) + (j - 2));
    }
  }
  return s;
}

VolumeSpace make_volume_space(const CurvedMesh& mesh, Formulation kind, int p) {
  VolumeSpace V;
  V.kind = kind;
  V.p = p;
  V.basis = TriangleBasis(p);
  int ne = mesh.num_elements();
  int nloc = V.basis.size();
  V.dofs.resize(ne);
  V.signs.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const Element& el = mesh.elements[e];
    std::array<bool, 3> flip;
    for (int ed = 0; ed < 3; ++ed) flip[ed] = el.v[(ed + 1) % 3] > el.v[(ed + 2) % 3];
    V.signs[e] = V.basis.signs(flip);
  }
  if (kind == Formulation::DG) {
    V.ndof = ne * nloc;
    for (int e = 0; e < ne; ++e)
      for (int i = 0; i < nloc; ++i) V.dofs[e].push_back(e * nloc + i);
    return V;
  }
  int nv = static_cast<int>(mesh.vertices.size());
  std::map<std::pair<int, int>, int> edge_id;
  for (int e = 0; e < ne; ++e)
    for (int ed = 0; ed < 3; ++ed) {
      int a = mesh.elements[e].v[(ed + 1) % 3], b = mesh.elements[e].v[(ed + 2) % 3];
      edge_id.emplace(std::make_pair(std::min(a, b), std::max(a, b)), 0);
    }
  int ned = 0;
  for (auto& kv : edge_id) kv.second = ned++;
  int nb = (p - 1) * (p - 2) / 2;
  V.ndof = nv + ned * (p - 1) + ne * nb;
  for (int e = 0; e < ne; ++e) {
    const Element& el = mesh.elements[e];
    std::vector<int>& d = V.dofs[e];
    d.resize(nloc);
    for (int i = 0; i < 3; ++i) d[i] = el.v[i];
    for (int ed = 0; ed < 3; ++ed) {
      int a = el.v[(ed + 1) % 3], b = el.v[(ed + 2) % 3];
      int id = edge_id.at({std::min(a, b), std::max(a, b)});
      for (int n = 2; n <= p; ++n) d[V.basis.edge_index(ed, n)] = nv + id * (p - 1) + (n - 2);
    }
    for (int j = 0; j < nb; ++j) d[V.basis.bubble_offset() + j] = nv + ned * (p - 1) + e * nb + j;
  }
  return V;
}

SpaceTriple make_spaces(const CurvedMesh& mesh, const BoundaryMesh& bmesh, Formulation kind, int p) {
  SpaceTriple s;
  s.p = p;
  s.V = make_volume_space(mesh, kind, p);
  s.W = make_trace_space(bmesh, TraceSpace::W, p - 1);
  s.Z = make_trace_space(bmesh, TraceSpace::Z, p);
  return s;
}

int volume_quadrature_degree(const CurvedMesh& mesh, int e, int p) {
  return mesh.elements[e].curved ? 2 * p + 6 : 2 * p + 2;
}

Vec2 boundary_facet_point(const CurvedMesh& mesh, int f, double s) {
  const BoundaryFacet& bf = mesh.boundary_facets[f];
  int la = (bf.ledge + 1) % 3, lb = (bf.ledge + 2) % 3;
  int other = bf.first_local == la ? lb : la;
  return CurvedMesh::edge_point(mesh.elements[bf.e], bf.first_local, other, s);
}

Vec2 interior_facet_point(const CurvedMesh& mesh, int f, int side, double s) {
  const InteriorFacet& fc = mesh.interior_facets[f];
  const Element& el = mesh.elements[fc.e[side]];
  int la = (fc.ledge[side] + 1) % 3, lb = (fc.ledge[side] + 2) % 3;
  if (el.v[la] != fc.gv[0]) std::swap(la, lb);
  return CurvedMesh::edge_point(el, la, lb, s);
}

void eval_volume(const CurvedMesh& mesh, const VolumeSpace& V, int e, const Vec2& xi, LocalEval& out) {
  thread_local std::vector<Dual2> buf;
  V.basis.eval(xi, buf);
  mesh.map_and_jacobian(e, xi, out.x, out.J);
  out.detJ = out.J.determinant();
  Mat2 Jit = out.J.inverse().transpose();
  int n = V.basis.size();
  out.val.resize(n);
  out.gx.resize(n);
  out.gy.resize(n);
  const std::vector<double>& sg = V.signs[e];
  for (int i = 0; i < n; ++i) {
    out.val[i] = sg[i] * buf[i].v;
    out.gx[i] = sg[i] * (Jit(0, 0) * buf[i].dx + Jit(0, 1) * buf[i].dy);
    out.gy[i] = sg[i] * (Jit(1, 0) * buf[i].dx + Jit(1, 1) * buf[i].dy);
  }
}

cplx eval_volume_function(const CurvedMesh& mesh, const VolumeSpace& V, const std::vector<cplx>& c, int e,
                          const Vec2& xi, std::array<cplx, 2>* grad) {
  LocalEval le;
  eval_volume(mesh, V, e, xi, le);
  cplx v = 0.0, gx = 0.0, gy = 0.0;
  const std::vector<int>& d = V.dofs[e];
  for (size_t i = 0; i < d.size(); ++i) {
    v += c[d[i]] * le.val[i];
    gx += c[d[i]] * le.gx[i];
    gy += c[d[i]] * le.gy[i];
  }
  if (grad) *grad = {gx, gy};
  return v;
}

}  // namespace fembem
