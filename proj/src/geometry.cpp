#include "fembem/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace fembem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTaylorSwitch = 0.05;
constexpr int kTaylorTerms = 14;

class Circle final : public BoundaryCurve {
 public:
  Circle(double r, Vec2 c) : r_(r), c_(c) {}
  Vec2 deriv(double t, int m) const override {
    double ph = t + 0.5 * kPi * m;
    Vec2 d{r_ * std::cos(ph), r_ * std::sin(ph)};
    if (m == 0) {
      d[0] += c_[0];
      d[1] += c_[1];
    }
    return d;
  }
  std::string name() const override { return "circle"; }
  bool is_circle() const override { return true; }
  double radius() const override { return r_; }
  Vec2 center() const override { return c_; }

 private:
  double r_;
  Vec2 c_;
};

class Kite final : public BoundaryCurve {
 public:
  Vec2 deriv(double t, int m) const override {
    double s = kScale;
    double h = 0.5 * kPi * m;
    double x = std::cos(t + h) + 0.65 * std::pow(2.0, m) * std::cos(2.0 * t + h);
    double y = 1.5 * std::sin(t + h);
    if (m == 0) x -= 0.65;
    return {s * x, s * y};
  }
  std::string name() const override { return "kite"; }
  Vec2 center() const override { return {-0.1, 0.0}; }

 private:
  static constexpr double kScale = 0.3;
};

}  // namespace

double BoundaryCurve::speed(double t) const {
  Vec2 d = deriv(t, 1);
  return std::hypot(d[0], d[1]);
}

Vec2 BoundaryCurve::normal(double t) const {
  Vec2 d = deriv(t, 1);
  double s = std::hypot(d[0], d[1]);
  return {d[1] / s, -d[0] / s};
}

double BoundaryCurve::curvature(double t) const {
  Vec2 a = deriv(t, 1), b = deriv(t, 2);
  double s = std::hypot(a[0], a[1]);
  return (a[0] * b[1] - a[1] * b[0]) / (s * s * s);
}

Vec2 BoundaryCurve::chord(double t, double tau) const {
  double d = tau - t;
  if (std::abs(d) >= kTaylorSwitch) {
    Vec2 a = position(t), b = position(tau);
    return {b[0] - a[0], b[1] - a[1]};
  }
  // y(tau) - y(t) = sum_{m>=1} y^(m)(t) d^m / m!
  Vec2 r{0.0, 0.0};
  double f = 1.0;
  for (int m = 1; m <= kTaylorTerms; ++m) {
    f *= d / m;
    Vec2 ym = deriv(t, m);
    r[0] += ym[0] * f;
    r[1] += ym[1] * f;
  }
  return r;
}

double BoundaryCurve::chord_cross(double a, double b) const {
  Vec2 yb1 = deriv(b, 1);
  double d = b - a;
  if (std::abs(d) >= kTaylorSwitch) {
    Vec2 c = chord(a, b);
    return c[0] * yb1[1] - c[1] * yb1[0];
  }
  // y(b) - y(a) = -sum_{m>=1} y^(m)(b) (-d)^m / m!; the m = 1 term is tangent to the normal
  double r = 0.0;
  double f = -d;
  for (int m = 2; m <= kTaylorTerms; ++m) {
    f *= -d / m;
    Vec2 ym = deriv(b, m);
    r -= (ym[0] * yb1[1] - ym[1] * yb1[0]) * f;
  }
  return r;
}

std::shared_ptr<BoundaryCurve> make_circle(double radius, Vec2 center) {
  if (!(radius > 0.0)) throw std::domain_error("make_circle: radius must be positive");
  return std::make_shared<Circle>(radius, center);
}

std::shared_ptr<BoundaryCurve> make_kite() { return std::make_shared<Kite>(); }

int SubdomainPartition::classify(const Vec2& x) const {
  if (interface_radius <= 0.0) return 0;
  double r = std::hypot(x[0] - center[0], x[1] - center[1]);
  return r < interface_radius ? 1 : 0;
}

SubdomainPartition single_subdomain(double n0, Mat2 nu) {
  SubdomainPartition p;
  p.coeffs.push_back({[nu](const Vec2&) { return nu; }, [n0](const Vec2&) { return n0; }});
  return p;
}

SubdomainPartition two_layer(double r_interface, Mat2 nu_in, double n_in, Mat2 nu_out, double n_out) {
  SubdomainPartition p;
  p.interface_radius = r_interface;
  p.coeffs.push_back({[nu_out](const Vec2&) { return nu_out; }, [n_out](const Vec2&) { return n_out; }});
  p.coeffs.push_back({[nu_in](const Vec2&) { return nu_in; }, [n_in](const Vec2&) { return n_in; }});
  return p;
}

double check_coefficients(const SubdomainPartition& part, const std::vector<Vec2>& samples, int tag_hint) {
  double mn = INFINITY;
  for (const Vec2& x : samples) {
    int tag = tag_hint >= 0 ? tag_hint : part.classify(x);
    Mat2 nu = part.nu(x, tag);
    if (std::abs(nu(0, 1) - nu(1, 0)) > 1e-14 * nu.norm()) throw std::domain_error("coefficient nu not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat2> es(nu);
    double lo = es.eigenvalues()(0);
    if (!(lo > 0.0)) throw std::domain_error("coefficient nu not positive definite");
    if (!(part.n(x, tag) > 0.0)) throw std::domain_error("coefficient n not positive");
    mn = std::min(mn, lo);
  }
  return mn;
}

void CurvedMesh::coarse_map(int c, const Vec2& eta, Vec2& x, Mat2& J) const {
  const CoarseElement& ce = coarse[c];
  double lam[3] = {1.0 - eta[0] - eta[1], eta[0], eta[1]};
  const double glam[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  x = {0.0, 0.0};
  J.setZero();
  for (int i = 0; i < 3; ++i) {
    x[0] += lam[i] * ce.x[i][0];
    x[1] += lam[i] * ce.x[i][1];
    for (int d = 0; d < 2; ++d) {
      J(0, d) += glam[i][d] * ce.x[i][0];
      J(1, d) += glam[i][d] * ce.x[i][1];
    }
  }
  if (ce.curved_edge < 0) return;
  int a = (ce.curved_edge + 1) % 3, b = (ce.curved_edge + 2) % 3;
  const BoundaryCurve& cv = ce.curve_id == 0 ? *curve : *interface_curve;
  double la = lam[a], lb = lam[b];
  double s = 0.5 * (1.0 + lb - la);
  double dt = ce.tb - ce.ta;
  Vec2 xab{ce.x[b][0] - ce.x[a][0], ce.x[b][1] - ce.x[a][1]};
  double q = s * (1.0 - s);
  Vec2 g, gp{0.0, 0.0};
  if (q < 1e-14) {
    double se = s < 0.5 ? 0.0 : 1.0;
    Vec2 d1 = cv.deriv(ce.ta + se * dt, 1);
    Vec2 fp{dt * d1[0] - xab[0], dt * d1[1] - xab[1]};
    double sg = s < 0.5 ? 1.0 : -1.0;
    g = {sg * fp[0], sg * fp[1]};
  } else {
    Vec2 ch = cv.chord(ce.ta, ce.ta + s * dt);
    Vec2 f{ch[0] - s * xab[0], ch[1] - s * xab[1]};
    Vec2 d1 = cv.deriv(ce.ta + s * dt, 1);
    Vec2 fp{dt * d1[0] - xab[0], dt * d1[1] - xab[1]};
    g = {f[0] / q, f[1] / q};
    for (int d = 0; d < 2; ++d) gp[d] = (fp[d] * q - f[d] * (1.0 - 2.0 * s)) / (q * q);
  }
  double w = la * lb;
  x[0] += w * g[0];
  x[1] += w * g[1];
  for (int d = 0; d < 2; ++d) {
    double dw = glam[a][d] * lb + la * glam[b][d];
    double ds = 0.5 * (glam[b][d] - glam[a][d]);
    J(0, d) += dw * g[0] + w * gp[0] * ds;
    J(1, d) += dw * g[1] + w * gp[1] * ds;
  }
}

void CurvedMesh::map_and_jacobian(int e, const Vec2& xi, Vec2& x, Mat2& J) const {
  const Element& el = elements[e];
  Mat2 B;
  B << el.ref[1][0] - el.ref[0][0], el.ref[2][0] - el.ref[0][0], el.ref[1][1] - el.ref[0][1],
      el.ref[2][1] - el.ref[0][1];
  Vec2 eta{el.ref[0][0] + B(0, 0) * xi[0] + B(0, 1) * xi[1], el.ref[0][1] + B(1, 0) * xi[0] + B(1, 1) * xi[1]};
  Mat2 Jc;
  coarse_map(el.coarse, eta, x, Jc);
  J = Jc * B;
}

Vec2 CurvedMesh::map(int e, const Vec2& xi) const {
  Vec2 x;
  Mat2 J;
  map_and_jacobian(e, xi, x, J);
  return x;
}

Mat2 CurvedMesh::jacobian(int e, const Vec2& xi) const {
  Vec2 x;
  Mat2 J;
  map_and_jacobian(e, xi, x, J);
  return J;
}

Mat2 CurvedMesh::affine_factor(int e) const {
  const Element& el = elements[e];
  const CoarseElement& ce = coarse[el.coarse];
  Mat2 A, B;
  A << ce.x[1][0] - ce.x[0][0], ce.x[2][0] - ce.x[0][0], ce.x[1][1] - ce.x[0][1], ce.x[2][1] - ce.x[0][1];
  B << el.ref[1][0] - el.ref[0][0], el.ref[2][0] - el.ref[0][0], el.ref[1][1] - el.ref[0][1],
      el.ref[2][1] - el.ref[0][1];
  return A * B;
}

Vec2 CurvedMesh::edge_point(const Element&, int la, int lb, double s) {
  static const Vec2 xv[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  return {(1.0 - s) * xv[la][0] + s * xv[lb][0], (1.0 - s) * xv[la][1] + s * xv[lb][1]};
}

Vec2 CurvedMesh::outward_normal(int e, int ledge, const Vec2& xi, double* jac_len) const {
  static const Vec2 xv[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  int la = (ledge + 1) % 3, lb = (ledge + 2) % 3;
  Mat2 J = jacobian(e, xi);
  double d0 = xv[lb][0] - xv[la][0], d1 = xv[lb][1] - xv[la][1];
  double tx = J(0, 0) * d0 + J(0, 1) * d1;
  double ty = J(1, 0) * d0 + J(1, 1) * d1;
  double len = std::hypot(tx, ty);
  if (jac_len) *jac_len = len;
  return {ty / len, -tx / len};
}

double CurvedMesh::max_h() const {
  double h = 0.0;
  for (const Element& el : elements) h = std::max(h, el.h);
  return h;
}

namespace {

double element_diameter(const CurvedMesh& m, int e) {
  constexpr int ns = 12;
  std::vector<Vec2> pts;
  pts.reserve(3 * ns);
  const Element& el = m.elements[e];
  for (int ed = 0; ed < 3; ++ed) {
    int la = (ed + 1) % 3, lb = (ed + 2) % 3;
    for (int i = 0; i < ns; ++i) pts.push_back(m.map(e, CurvedMesh::edge_point(el, la, lb, double(i) / ns)));
  }
  double d = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      d = std::max(d, std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
  return d;
}

}  // namespace

CurvedMesh build_disk_mesh(std::shared_ptr<BoundaryCurve> curve, int level, const SubdomainPartition& partition) {
  if (level < 0 || level > 8) throw std::domain_error("build_disk_mesh: refinement level out of range");
  if (partition.count() < 1) throw std::domain_error("build_disk_mesh: empty partition");
  bool has_interface = partition.interface_radius > 0.0;
  if (has_interface) {
    if (!curve->is_circle() || partition.count() != 2)
      throw std::domain_error("build_disk_mesh: interfaces require a circular boundary and two subdomains");
    double R = curve->radius();
    if (std::abs(partition.interface_radius - 0.5 * R) > 1e-12 * R)
      throw std::domain_error("build_disk_mesh: interface radius must be half the disk radius");
    Vec2 c = curve->center();
    if (std::hypot(c[0] - partition.center[0], c[1] - partition.center[1]) > 1e-12)
      throw std::domain_error("build_disk_mesh: interface not concentric with the boundary");
  } else if (partition.count() != 1) {
    throw std::domain_error("build_disk_mesh: multiple subdomains without interface");
  }

  CurvedMesh m;
  m.curve = curve;
  m.partition = partition;
  m.level = level;
  Vec2 c = curve->center();
  if (has_interface) m.interface_curve = make_circle(partition.interface_radius, c);

  // coarse vertices: center, inner ring (6), boundary ring (12)
  std::vector<Vec2> cv(19);
  std::vector<double> tin(7), tout(13);
  cv[0] = c;
  for (int j = 0; j <= 12; ++j) tout[j] = 2.0 * kPi * j / 12.0;
  for (int i = 0; i <= 6; ++i) tin[i] = 2.0 * kPi * i / 6.0;
  for (int j = 0; j < 12; ++j) cv[7 + j] = curve->position(tout[j]);
  for (int i = 0; i < 6; ++i) {
    if (has_interface) {
      cv[1 + i] = m.interface_curve->position(tin[i]);
    } else {
      Vec2 b = cv[7 + 2 * i];
      cv[1 + i] = {c[0] + 0.5 * (b[0] - c[0]), c[1] + 0.5 * (b[1] - c[1])};
    }
  }
  auto in = [](int i) { return 1 + (i % 6); };
  auto out = [](int j) { return 7 + (j % 12); };
  auto add = [&](std::array<int, 3> v, int cedge, int cid, double ta, double tb, int tag) {
    CoarseElement ce;
    ce.v = v;
    for (int k = 0; k < 3; ++k) ce.x[k] = cv[v[k]];
    ce.curved_edge = cedge;
    ce.curve_id = cid;
    ce.ta = ta;
    ce.tb = tb;
    ce.tag = tag;
    m.coarse.push_back(ce);
  };
  int inner_tag = has_interface ? 1 : 0;
  for (int i = 0; i < 6; ++i) {
    if (has_interface)
      add({0, in(i), in(i + 1)}, 0, 1, tin[i], tin[i + 1], inner_tag);
    else
      add({0, in(i), in(i + 1)}, -1, -1, 0, 0, inner_tag);
  }
  for (int i = 0; i < 6; ++i) {
    add({in(i), out(2 * i), out(2 * i + 1)}, 0, 0, tout[2 * i], tout[2 * i + 1], 0);
    if (has_interface)
      add({in(i), out(2 * i + 1), in(i + 1)}, 1, 1, tin[i + 1], tin[i], 0);
    else
      add({in(i), out(2 * i + 1), in(i + 1)}, -1, -1, 0, 0, 0);
    add({in(i + 1), out(2 * i + 1), out(2 * i + 2)}, 0, 0, tout[2 * i + 1], tout[2 * i + 2], 0);
  }

  // uniform red refinement in the reference coordinates of each coarse element
  const int n = 1 << level;
  std::map<std::tuple<int, int, int, int>, int> vid;
  auto vertex_id = [&](int ci, int i, int j) {
    const CoarseElement& ce = m.coarse[ci];
    int num[3] = {n - i - j, i, j};
    int zeros = (num[0] == 0) + (num[1] == 0) + (num[2] == 0);
    std::tuple<int, int, int, int> key;
    if (zeros == 2) {
      int k = num[0] ? 0 : (num[1] ? 1 : 2);
      key = {0, ce.v[k], 0, 0};
    } else if (zeros == 1) {
      int z = num[0] == 0 ? 0 : (num[1] == 0 ? 1 : 2);
      int p = (z + 1) % 3, q = (z + 2) % 3;
      int gp = ce.v[p], gq = ce.v[q];
      int hi = gp > gq ? p : q;
      key = {1, std::min(gp, gq), std::max(gp, gq), num[hi]};
    } else {
      key = {2, ci, i, j};
    }
    auto it = vid.find(key);
    if (it != vid.end()) return it->second;
    Vec2 x;
    Mat2 J;
    m.coarse_map(ci, {double(i) / n, double(j) / n}, x, J);
    int id = static_cast<int>(m.vertices.size());
    m.vertices.push_back(x);
    vid[key] = id;
    return id;
  };
  for (int ci = 0; ci < static_cast<int>(m.coarse.size()); ++ci) {
    bool curved = m.coarse[ci].curved_edge >= 0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i + j < n; ++i) {
        auto push = [&](std::array<std::array<int, 2>, 3> g) {
          Element el;
          for (int k = 0; k < 3; ++k) {
            el.v[k] = vertex_id(ci, g[k][0], g[k][1]);
            el.ref[k] = {double(g[k][0]) / n, double(g[k][1]) / n};
          }
          el.coarse = ci;
          el.tag = m.coarse[ci].tag;
          el.curved = curved;
          m.elements.push_back(el);
        };
        push({{{i, j}, {i + 1, j}, {i, j + 1}}});
        if (i + j + 1 < n) push({{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}});
      }
    }
  }
  for (int e = 0; e < m.num_elements(); ++e) m.elements[e].h = element_diameter(m, e);

  // facets
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
  for (int e = 0; e < m.num_elements(); ++e) {
    for (int le = 0; le < 3; ++le) {
      int a = m.elements[e].v[(le + 1) % 3], b = m.elements[e].v[(le + 2) % 3];
      edges[{std::min(a, b), std::max(a, b)}].push_back({e, le});
    }
  }
  for (const auto& [key, list] : edges) {
    if (list.size() == 2) {
      InteriorFacet f;
      f.e = {list[0].first, list[1].first};
      f.ledge = {list[0].second, list[1].second};
      if (f.e[0] > f.e[1]) {
        std::swap(f.e[0], f.e[1]);
        std::swap(f.ledge[0], f.ledge[1]);
      }
      f.gv = {key.first, key.second};
      f.h = std::min(m.elements[f.e[0]].h, m.elements[f.e[1]].h);
      m.interior_facets.push_back(f);
    } else if (list.size() == 1) {
      int e = list[0].first, le = list[0].second;
      const Element& el = m.elements[e];
      const CoarseElement& ce = m.coarse[el.coarse];
      if (ce.curved_edge < 0 || ce.curve_id != 0) throw std::logic_error("build_disk_mesh: stray boundary edge");
      int ca = (ce.curved_edge + 1) % 3, cb = (ce.curved_edge + 2) % 3;
      auto tparam = [&](int lv) {
        double lam[3] = {1.0 - el.ref[lv][0] - el.ref[lv][1], el.ref[lv][0], el.ref[lv][1]};
        double s = 0.5 * (1.0 + lam[cb] - lam[ca]);
        return ce.ta + s * (ce.tb - ce.ta);
      };
      int la = (le + 1) % 3, lb = (le + 2) % 3;
      double ta = tparam(la), tb = tparam(lb);
      BoundaryFacet f;
      f.e = e;
      f.ledge = le;
      if (ta < tb) {
        f.first_local = la;
        f.t0 = ta;
        f.t1 = tb;
      } else {
        f.first_local = lb;
        f.t0 = tb;
        f.t1 = ta;
      }
      f.gv = {el.v[f.first_local], el.v[f.first_local == la ? lb : la]};
      f.h = el.h;
      m.boundary_facets.push_back(f);
    } else {
      throw std::logic_error("build_disk_mesh: non-manifold edge");
    }
  }
  std::sort(m.boundary_facets.begin(), m.boundary_facets.end(),
            [](const BoundaryFacet& a, const BoundaryFacet& b) { return a.t0 < b.t0; });
  return m;
}

double BoundaryMesh::length(int i) const {
  // 16-point Gauss-Legendre on the parameter interval
  static const double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
                              0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
  static const double w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
                              0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
  const BoundaryElement& b = elems[i];
  double mid = 0.5 * (b.t0 + b.t1), half = 0.5 * (b.t1 - b.t0);
  double L = 0.0;
  for (int k = 0; k < 8; ++k) L += w[k] * (curve->speed(mid + half * x[k]) + curve->speed(mid - half * x[k]));
  return L * half;
}

BoundaryMesh induced_boundary_mesh(const CurvedMesh& mesh) {
  if (mesh.boundary_facets.empty()) throw std::domain_error("induced_boundary_mesh: mesh has no boundary facets");
  BoundaryMesh b;
  b.curve = mesh.curve;
  for (int f = 0; f < static_cast<int>(mesh.boundary_facets.size()); ++f) {
    const BoundaryFacet& bf = mesh.boundary_facets[f];
    b.elems.push_back({bf.t0, bf.t1, f, bf.h});
  }
  return b;
}

BoundaryMesh uniform_boundary_mesh(std::shared_ptr<BoundaryCurve> curve, int n) {
  BoundaryMesh b;
  b.curve = curve;
  for (int i = 0; i < n; ++i) {
    double t0 = 2.0 * kPi * i / n, t1 = 2.0 * kPi * (i + 1) / n;
    b.elems.push_back({t0, t1, -1, 0.0});
  }
  for (int i = 0; i < n; ++i) b.elems[i].h = b.length(i);
  return b;
}

std::string mesh_to_json(const CurvedMesh& mesh) {
  nlohmann::json j;
  j["curve"] = mesh.curve->name();
  j["level"] = mesh.level;
  j["vertices"] = mesh.vertices;
  nlohmann::json els = nlohmann::json::array();
  for (const Element& e : mesh.elements)
    els.push_back({{"v", e.v}, {"tag", e.tag}, {"curved", e.curved}, {"coarse", e.coarse}, {"h", e.h}});
  j["elements"] = els;
  nlohmann::json fi = nlohmann::json::array();
  for (const InteriorFacet& f : mesh.interior_facets)
    fi.push_back({{"elements", f.e}, {"local", f.ledge}, {"vertices", f.gv}, {"h", f.h}});
  j["interior_facets"] = fi;
  nlohmann::json fb = nlohmann::json::array();
  for (const BoundaryFacet& f : mesh.boundary_facets)
    fb.push_back({{"element", f.e}, {"local", f.ledge}, {"t", {f.t0, f.t1}}, {"vertices", f.gv}, {"h", f.h}});
  j["boundary_facets"] = fb;
  return j.dump();
}

}  // namespace fembem
