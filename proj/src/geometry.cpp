#include "umix/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "umix/error.hpp"

namespace umix {

namespace {

constexpr double kPhiTol = 1e-12;

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double polygon_area(const std::vector<Point2>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * s;
}

void fan(const std::vector<Point2>& poly, std::vector<std::array<Point2, 3>>& out) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    if (std::abs(cross(poly[i] - poly[0], poly[i + 1] - poly[0])) > 0.0) out.push_back({poly[0], poly[i], poly[i + 1]});
  }
}

double snapped(double v) { return std::abs(v) <= kPhiTol ? kPhiTol : v; }

// Outward unit normal of the CCW polygon edge i -> i+1.
Point2 edge_normal(const ConvexPolygon& poly, std::size_t i) {
  const Point2 d = poly.vertices[(i + 1) % poly.vertices.size()] - poly.vertices[i];
  return Point2(d.y(), -d.x()).normalized();
}

double edge_distance(const ConvexPolygon& poly, std::size_t i, const Point2& x) {
  return edge_normal(poly, i).dot(x - poly.vertices[i]);
}

struct LevelSetResolver {
  const LevelSet& ls;
  std::vector<std::array<Point2, 3>>* inside;
  std::vector<std::array<Point2, 2>>* segments;

  void leaf(const std::array<Point2, 3>& t, const std::array<double, 3>& v) {
    const bool all_in = v[0] < 0 && v[1] < 0 && v[2] < 0;
    const bool all_out = v[0] > 0 && v[1] > 0 && v[2] > 0;
    if (all_in) {
      inside->push_back(t);
      return;
    }
    if (all_out) return;
    std::vector<Point2> poly;
    std::vector<Point2> crossings;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      if (v[i] < 0) poly.push_back(t[i]);
      if ((v[i] < 0) != (v[j] < 0)) {
        const double s = v[i] / (v[i] - v[j]);
        const Point2 x = t[i] + s * (t[j] - t[i]);
        poly.push_back(x);
        crossings.push_back(x);
      }
    }
    fan(poly, *inside);
    if (crossings.size() == 2 && (crossings[0] - crossings[1]).norm() > 0.0) segments->push_back({crossings[0], crossings[1]});
  }

  void run(const std::array<Point2, 3>& t, int depth) {
    const std::array<double, 3> v{snapped(ls.value(t[0])), snapped(ls.value(t[1])), snapped(ls.value(t[2]))};
    double diam = 0.0;
    for (int i = 0; i < 3; ++i) diam = std::max(diam, (t[i] - t[(i + 1) % 3]).norm());
    const double vmax = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
    if (depth == 0 || vmax > ls.lipschitz * diam) {
      leaf(t, v);
      return;
    }
    const Point2 m0 = 0.5 * (t[1] + t[2]), m1 = 0.5 * (t[2] + t[0]), m2 = 0.5 * (t[0] + t[1]);
    run({t[0], m2, m1}, depth - 1);
    run({m2, t[1], m0}, depth - 1);
    run({m1, m0, t[2]}, depth - 1);
    run({m0, m1, m2}, depth - 1);
  }
};

std::vector<Point2> clip_convex(std::vector<Point2> poly, const ConvexPolygon& domain, double tol) {
  const std::size_t m = domain.vertices.size();
  for (std::size_t i = 0; i < m && !poly.empty(); ++i) {
    std::vector<Point2> next;
    for (std::size_t a = 0; a < poly.size(); ++a) {
      const Point2& p = poly[a];
      const Point2& q = poly[(a + 1) % poly.size()];
      const double dp = edge_distance(domain, i, p), dq = edge_distance(domain, i, q);
      const bool pin = dp <= tol, qin = dq <= tol;
      if (pin) next.push_back(p);
      if (pin != qin && std::abs(dp - dq) > 0.0) {
        const double s = dp / (dp - dq);
        if (s > 0.0 && s < 1.0) next.push_back(p + s * (q - p));
      }
    }
    std::vector<Point2> dedup;
    for (const auto& x : next) {
      if (dedup.empty() || (x - dedup.back()).norm() > tol) dedup.push_back(x);
    }
    while (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= tol) dedup.pop_back();
    poly = std::move(dedup);
  }
  return poly.size() >= 3 ? poly : std::vector<Point2>{};
}

}  // namespace

LevelSet ring_level_set(int depth, double shift, double r1, double r2) {
  const double rbar = 0.5 * (r1 + r2), half = 0.5 * (r2 - r1);
  const Point2 c(shift, shift);
  LevelSet ls;
  ls.value = [=](const Point2& x) { return std::abs((x - c).norm() - rbar) - half; };
  ls.gradient = [=](const Point2& x) -> Point2 {
    const Point2 d = x - c;
    const double r = d.norm();
    if (r == 0.0) return Point2(0.0, 0.0);
    return (r >= rbar ? 1.0 : -1.0) * d / r;
  };
  ls.subdivision_depth = depth;
  ls.lipschitz = 1.0;
  return ls;
}

ConvexPolygon rotated_square(double radius, double angle) {
  ConvexPolygon p;
  for (int i = 0; i < 4; ++i) {
    const double t = angle + 0.25 * M_PI + 0.5 * M_PI * i;
    p.vertices.emplace_back(radius * std::cos(t), radius * std::sin(t));
  }
  return p;
}

CutMesh::CutMesh(const BackgroundMesh& mesh, DomainDescription domain)
    : mesh_(&mesh), domain_(std::move(domain)) {
  if (const auto* poly = std::get_if<ConvexPolygon>(&domain_)) {
    if (poly->vertices.size() < 3 || polygon_area(poly->vertices) <= 0.0)
      throw Error("polygon domain must be convex and counter-clockwise");
  }
  const int ne = mesh.num_elements();
  classes_.resize(ne);
  cut_index_.assign(ne, -1);
  for (int e = 0; e < ne; ++e) {
    Pieces p = resolve(e);
    double area = 0.0;
    for (const auto& t : p.inside) area += std::abs(0.5 * cross(t[1] - t[0], t[2] - t[0]));
    double len = 0.0;
    for (const auto& s : p.interface) len += (s.b - s.a).norm();
    const double full = mesh.area(e), h = mesh.element_diameters[e];
    if (area <= 1e-14 * full) {
      classes_[e] = ElementClass::Exterior;
    } else if (len <= 1e-14 * h) {
      if (area < (1.0 - 1e-10) * full) throw Error("degenerate cut in element " + std::to_string(e));
      classes_[e] = ElementClass::Interior;
    } else {
      classes_[e] = ElementClass::Cut;
      cut_index_[e] = static_cast<int>(pieces_.size());
      pieces_.push_back(std::move(p));
    }
  }
}

CutMesh::Pieces CutMesh::resolve(int e) const {
  const auto& t = mesh_->elements[e];
  const std::array<Point2, 3> tri{mesh_->vertices[t[0]], mesh_->vertices[t[1]], mesh_->vertices[t[2]]};
  Pieces out;
  if (const auto* ls = std::get_if<LevelSet>(&domain_)) {
    std::vector<std::array<Point2, 2>> segs;
    LevelSetResolver r{*ls, &out.inside, &segs};
    r.run(tri, ls->subdivision_depth);
    for (const auto& s : segs) {
      const Point2 d = s[1] - s[0];
      Point2 n = Point2(d.y(), -d.x()).normalized();
      if (n.dot(ls->gradient(0.5 * (s[0] + s[1]))) < 0.0) n = -n;
      out.interface.push_back({s[0], s[1], n});
    }
    return out;
  }
  const auto& poly = std::get<ConvexPolygon>(domain_);
  const double tol = 1e-13 * mesh_->element_diameters[e];
  const std::vector<Point2> clipped = clip_convex({tri[0], tri[1], tri[2]}, poly, tol);
  if (clipped.empty()) return out;
  fan(clipped, out.inside);
  for (std::size_t a = 0; a < clipped.size(); ++a) {
    const Point2& p = clipped[a];
    const Point2& q = clipped[(a + 1) % clipped.size()];
    if ((q - p).norm() <= tol) continue;
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
      if (std::abs(edge_distance(poly, i, p)) <= 1e-12 && std::abs(edge_distance(poly, i, q)) <= 1e-12) {
        out.interface.push_back({p, q, edge_normal(poly, i)});
        break;
      }
    }
  }
  return out;
}

Rule CutMesh::full_rule(int e, int degree) const {
  const auto& t = mesh_->elements[e];
  return triangle_rule(mesh_->vertices[t[0]], mesh_->vertices[t[1]], mesh_->vertices[t[2]], degree);
}

Rule CutMesh::volume_rule(int e, int degree) const {
  switch (classes_[e]) {
    case ElementClass::Interior:
      return full_rule(e, degree);
    case ElementClass::Exterior:
      throw Error("volume rule requested on exterior element " + std::to_string(e));
    case ElementClass::Cut:
      break;
  }
  const Pieces& p = pieces_[cut_index_[e]];
  std::vector<Rule> parts;
  parts.reserve(p.inside.size());
  for (const auto& t : p.inside) parts.push_back(triangle_rule(t[0], t[1], t[2], degree));
  return merge(parts);
}

InterfaceRule CutMesh::interface_rule(int e, int degree) const {
  if (classes_[e] != ElementClass::Cut) throw Error("interface rule requested on uncut element " + std::to_string(e));
  const Pieces& p = pieces_[cut_index_[e]];
  std::vector<Rule> parts;
  for (const auto& s : p.interface) parts.push_back(segment_rule(s.a, s.b, degree));
  InterfaceRule out{merge(parts), Eigen::Matrix2Xd()};
  out.normals.resize(2, out.rule.size());
  Eigen::Index q = 0;
  for (std::size_t i = 0; i < p.interface.size(); ++i) {
    for (Eigen::Index j = 0; j < parts[i].size(); ++j, ++q) {
      out.normals.col(q) = p.interface[i].normal;
    }
  }
  return out;
}

double CutMesh::volume(int e) const {
  if (classes_[e] == ElementClass::Exterior) return 0.0;
  if (classes_[e] == ElementClass::Interior) return mesh_->area(e);
  double a = 0.0;
  for (const auto& t : pieces_[cut_index_[e]].inside) a += std::abs(0.5 * cross(t[1] - t[0], t[2] - t[0]));
  return a;
}

double CutMesh::interface_length(int e) const {
  if (classes_[e] != ElementClass::Cut) return 0.0;
  double len = 0.0;
  for (const auto& s : pieces_[cut_index_[e]].interface) len += (s.b - s.a).norm();
  return len;
}

bool CutMesh::facet_cut(int f) const {
  const Facet& F = mesh_->facets[f];
  const Point2& a = mesh_->vertices[F.v[0]];
  const Point2& b = mesh_->vertices[F.v[1]];
  if (const auto* ls = std::get_if<LevelSet>(&domain_)) {
    // Subdivision children place vertices at these points along the facet.
    const int n = 1 << ls->subdivision_depth;
    bool neg = false, pos = false;
    for (int i = 0; i <= n; ++i) {
      const double v = snapped(ls->value(a + (static_cast<double>(i) / n) * (b - a)));
      (v < 0 ? neg : pos) = true;
    }
    return neg && pos;
  }
  const auto& poly = std::get<ConvexPolygon>(domain_);
  double t0 = 0.0, t1 = 1.0;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    const double da = edge_distance(poly, i, a), db = edge_distance(poly, i, b);
    if (da > 1e-12 && db > 1e-12) return false;
    if (da > 1e-12 || db > 1e-12) {
      const double s = da / (da - db);
      if (da > db) t0 = std::max(t0, s);
      else t1 = std::min(t1, s);
    }
  }
  const double len = t1 - t0;
  return len > 1e-12 && len < 1.0 - 1e-12;
}

Point2 CutMesh::quasi_normal(const Point2& x) const {
  if (const auto* ls = std::get_if<LevelSet>(&domain_)) {
    const Point2 g = ls->gradient(x);
    const double n = g.norm();
    return n > 0.0 ? Point2(g / n) : Point2(1.0, 0.0);
  }
  const auto& poly = std::get<ConvexPolygon>(domain_);
  std::size_t best = 0;
  double dbest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    const Point2& p = poly.vertices[i];
    const Point2& q = poly.vertices[(i + 1) % poly.vertices.size()];
    const double s = std::clamp((x - p).dot(q - p) / (q - p).squaredNorm(), 0.0, 1.0);
    const double d = (x - (p + s * (q - p))).norm();
    if (d < dbest) {
      dbest = d;
      best = i;
    }
  }
  return edge_normal(poly, best);
}

double CutMesh::phi(const Point2& x) const {
  if (const auto* ls = std::get_if<LevelSet>(&domain_)) return ls->value(x);
  const auto& poly = std::get<ConvexPolygon>(domain_);
  double d = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) d = std::max(d, edge_distance(poly, i, x));
  return d;
}

std::vector<ElementClass> classify(const BackgroundMesh& mesh, const DomainDescription& domain) {
  return CutMesh(mesh, domain).classes();
}

}  // namespace umix
