#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <random>

#include "fembem/geometry.hpp"
#include "fembem/quadrature.hpp"

using namespace fembem;

namespace {
constexpr double kShapeConstant = 16.0;
constexpr double kPi = std::numbers::pi;

double dist(const Vec2& a, const Vec2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }
}  // namespace

TEST_CASE("circle") {
  auto c = make_circle(1.0, {0.3, -0.2});
  CHECK(dist(c->position(0.0), {1.3, -0.2}) < 1e-15);
  auto c8 = make_circle(0.8);
  for (int i = 0; i < 16; ++i) {
    double t = 2 * kPi * i / 16;
    CHECK(std::abs(c8->curvature(t) - 1.25) < 1e-13);
    CHECK(std::abs(c8->speed(t) - 0.8) < 1e-15);
    Vec2 nrm = c8->normal(t);
    CHECK(std::abs(nrm[0] - std::cos(t)) < 1e-15);
    CHECK(std::abs(nrm[1] - std::sin(t)) < 1e-15);
  }
  const QuadratureRule1D& g = gauss_rule(64);
  double len = 0.0;
  for (int q = 0; q < g.size(); ++q) len += g.w[q] * kPi * c8->speed(kPi * (g.x[q] + 1.0));
  CHECK(std::abs(len - 2 * kPi * 0.8) < 1e-12);
  CHECK_THROWS_AS(make_circle(0.0), std::domain_error);
}

TEST_CASE("kite") {
  auto k = make_kite();
  CHECK(dist(k->position(0.0), k->position(2 * kPi - 1e-12)) <= 1e-9);
  std::vector<Vec2> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back(k->position(2 * kPi * i / 1024));
  double d = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, dist(pts[i], pts[j]));
  CHECK(d < 1.0);
  for (int i = 0; i < 32; ++i) {
    double t = 2 * kPi * i / 32;
    Vec2 n = k->normal(t), tg = k->deriv(t, 1);
    CHECK(std::abs(n[0] * tg[0] + n[1] * tg[1]) < 1e-12);
    CHECK(std::abs(std::hypot(n[0], n[1]) - 1.0) < 1e-14);
  }
  // outward: the normal at the rightmost sample points to +x
  CHECK(k->normal(0.0)[0] > 0.9);
}

TEST_CASE("chord and chord_cross agree with direct evaluation") {
  auto k = make_kite();
  for (double t : {0.1, 1.7, 4.0})
    for (double d : {-0.2, -0.04, -1e-3, 1e-3, 0.03, 0.3}) {
      Vec2 a = k->position(t), b = k->position(t + d);
      Vec2 c = k->chord(t, t + d);
      CHECK(std::abs(c[0] - (b[0] - a[0])) < 1e-14);
      CHECK(std::abs(c[1] - (b[1] - a[1])) < 1e-14);
      Vec2 yb = k->deriv(t + d, 1);
      double direct = (b[0] - a[0]) * yb[1] - (b[1] - a[1]) * yb[0];
      CHECK(std::abs(k->chord_cross(t, t + d) - direct) < 1e-13);
    }
}

TEST_CASE("disk mesh family") {
  auto c = make_circle(0.4);
  SubdomainPartition part = single_subdomain(1.5);
  std::vector<CurvedMesh> ms;
  for (int l = 0; l <= 3; ++l) ms.push_back(build_disk_mesh(c, l, part));
  CHECK(ms[0].num_elements() > 0);
  for (int l = 0; l < 3; ++l) {
    CHECK(ms[l + 1].num_elements() == 4 * ms[l].num_elements());
    double r = ms[l + 1].max_h() / ms[l].max_h();
    CHECK(r >= 0.45);
    CHECK(r <= 0.55);
  }
  CHECK_THROWS_AS(build_disk_mesh(c, -1, part), std::domain_error);
}

TEST_CASE("mesh facet compatibility, positivity and shape regularity") {
  for (int which = 0; which < 3; ++which) {
    std::shared_ptr<BoundaryCurve> c = which == 1 ? make_kite() : make_circle(0.4);
    SubdomainPartition part = which == 2 ? two_layer(0.2, Mat2::Identity() * 2.0, 1.5, Mat2::Identity(), 1.0)
                                         : single_subdomain(1.0);
    for (int l = 0; l <= 2; ++l) {
      CurvedMesh m = build_disk_mesh(c, l, part);
      const QuadratureRule1D& g = gauss_rule01(5);
      for (const InteriorFacet& f : m.interior_facets) {
        CHECK(std::abs(f.h - std::min(m.elements[f.e[0]].h, m.elements[f.e[1]].h)) == 0.0);
        for (int q = 0; q < g.size(); ++q) {
          Vec2 pts[2];
          for (int s = 0; s < 2; ++s) {
            const Element& el = m.elements[f.e[s]];
            int la = (f.ledge[s] + 1) % 3, lb = (f.ledge[s] + 2) % 3;
            if (el.v[la] != f.gv[0]) std::swap(la, lb);
            pts[s] = m.map(f.e[s], CurvedMesh::edge_point(el, la, lb, g.x[q]));
          }
          CHECK(dist(pts[0], pts[1]) <= 1e-12);
        }
      }
      for (const BoundaryFacet& f : m.boundary_facets) {
        const Element& el = m.elements[f.e];
        int la = (f.ledge + 1) % 3, lb = (f.ledge + 2) % 3;
        int other = f.first_local == la ? lb : la;
        for (int q = 0; q < g.size(); ++q) {
          Vec2 x = m.map(f.e, CurvedMesh::edge_point(el, f.first_local, other, g.x[q]));
          CHECK(dist(x, c->position(f.t0 + g.x[q] * (f.t1 - f.t0))) <= 1e-12);
        }
        Vec2 xi = CurvedMesh::edge_point(el, f.first_local, other, 0.5);
        Vec2 n = m.outward_normal(f.e, f.ledge, xi);
        Vec2 nc = c->normal(0.5 * (f.t0 + f.t1));
        CHECK(n[0] * nc[0] + n[1] * nc[1] > 1.0 - 1e-12);
      }
      const QuadratureRule2D& tr = triangle_rule(8);
      double worst = 0.0;
      for (int e = 0; e < m.num_elements(); ++e) {
        const Element& el = m.elements[e];
        int tag = -1;
        for (int q = 0; q < tr.size(); ++q) {
          Mat2 J = m.jacobian(e, tr.x[q]);
          CHECK(J.determinant() > 0.0);
          double hk = el.h;
          worst = std::max({worst, hk * J.inverse().norm(), J.norm() / hk});
          int t = part.classify(m.map(e, tr.x[q]));
          if (tag < 0) tag = t;
          CHECK(t == tag);
        }
        CHECK(tag == el.tag);
        Mat2 A = m.affine_factor(e);
        CHECK(A.norm() <= kShapeConstant * el.h);
        CHECK(A.inverse().norm() <= kShapeConstant / el.h);
      }
      CHECK(worst < kShapeConstant);
    }
  }
}

TEST_CASE("partition validation") {
  auto c = make_circle(0.4);
  CHECK_THROWS_AS(build_disk_mesh(make_kite(), 0, two_layer(0.2, Mat2::Identity(), 1, Mat2::Identity(), 1)),
                  std::domain_error);
  CHECK_THROWS_AS(build_disk_mesh(c, 0, two_layer(0.3, Mat2::Identity(), 1, Mat2::Identity(), 1)),
                  std::domain_error);
  Mat2 bad;
  bad << 1.0, 0.0, 0.0, -1.0;
  SubdomainPartition p = single_subdomain(1.0, bad);
  CHECK_THROWS_AS(check_coefficients(p, {{0.0, 0.0}}), std::domain_error);
  Mat2 good;
  good << 2.0, 0.5, 0.5, 1.0;
  CHECK(check_coefficients(single_subdomain(1.0, good), {{0.1, 0.1}}) > 0.0);
}

TEST_CASE("induced boundary mesh") {
  auto c = make_circle(0.4);
  for (int l = 0; l <= 3; ++l) {
    CurvedMesh m = build_disk_mesh(c, l, single_subdomain(1.0));
    BoundaryMesh b = induced_boundary_mesh(m);
    CHECK(b.size() == static_cast<int>(m.boundary_facets.size()));
    CHECK(std::abs(b.elems.front().t0) <= 1e-12);
    CHECK(std::abs(b.elems.back().t1 - 2 * kPi) <= 1e-12);
    double total = 0.0;
    for (int i = 0; i < b.size(); ++i) {
      if (i + 1 < b.size()) CHECK(std::abs(b.elems[i].t1 - b.elems[i + 1].t0) <= 1e-12);
      total += b.length(i);
      const BoundaryFacet& f = m.boundary_facets[b.elems[i].facet];
      CHECK(dist(m.vertices[f.gv[0]], c->position(b.elems[i].t0)) <= 1e-12);
      CHECK(dist(m.vertices[f.gv[1]], c->position(b.elems[i].t1)) <= 1e-12);
    }
    CHECK(std::abs(total - 2 * kPi * 0.4) < 1e-12);
  }
}

TEST_CASE("mesh json dump") {
  CurvedMesh m = build_disk_mesh(make_circle(0.4), 1, single_subdomain(1.0));
  auto j = nlohmann::json::parse(mesh_to_json(m));
  CHECK(j["elements"].size() == m.elements.size());
  CHECK(j["boundary_facets"].size() == m.boundary_facets.size());
  CHECK(j["vertices"].size() == m.vertices.size());
}
