#include "umix/mesh.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "umix/error.hpp"

namespace umix {

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

void build_topology(BackgroundMesh& m) {
  m.facets.clear();
  m.element_facets.assign(m.elements.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> lookup;
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& t = m.elements[e];
    for (int i = 0; i < 3; ++i) {
      int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, fresh] = lookup.try_emplace({a, b}, m.num_facets());
      if (fresh) {
        m.facets.push_back(Facet{{a, b}, e, -1});
      } else {
        Facet& f = m.facets[it->second];
        if (f.right >= 0) throw Error("non-manifold edge in triangle soup");
        f.right = e;
      }
      m.element_facets[e][i] = it->second;
    }
  }
  m.element_diameters.resize(m.elements.size());
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& t = m.elements[e];
    double h = 0.0;
    for (int i = 0; i < 3; ++i) h = std::max(h, (m.vertices[t[i]] - m.vertices[t[(i + 1) % 3]]).norm());
    m.element_diameters[e] = h;
  }
}

}  // namespace

double BackgroundMesh::h_max() const {
  return element_diameters.empty() ? 0.0 : *std::max_element(element_diameters.begin(), element_diameters.end());
}

double BackgroundMesh::area(int e) const {
  const auto& t = elements[e];
  return signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
}

double BackgroundMesh::facet_length(int f) const {
  return (vertices[facets[f].v[0]] - vertices[facets[f].v[1]]).norm();
}

Point2 BackgroundMesh::facet_normal(int f) const {
  const Facet& F = facets[f];
  const Point2 d = vertices[F.v[1]] - vertices[F.v[0]];
  Point2 n(d.y(), -d.x());
  n.normalize();
  if (n.dot(vertices[F.v[0]] - centroid(F.left)) < 0.0) n = -n;
  return n;
}

Point2 BackgroundMesh::centroid(int e) const {
  const auto& t = elements[e];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

int BackgroundMesh::neighbor(int e, int f) const {
  const Facet& F = facets[f];
  return F.left == e ? F.right : F.left;
}

BackgroundMesh build_structured(int n) {
  if (n < 1) throw Error("build_structured: need at least one cell per axis");
  BackgroundMesh m;
  const double h = 2.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(-1.0 + i * h, -1.0 + j * h);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      m.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  build_topology(m);
  return m;
}

BackgroundMesh refine_uniform(const BackgroundMesh& mesh) {
  BackgroundMesh m;
  m.vertices = mesh.vertices;
  const int nv = static_cast<int>(mesh.vertices.size());
  for (const Facet& f : mesh.facets) m.vertices.push_back(0.5 * (mesh.vertices[f.v[0]] + mesh.vertices[f.v[1]]));
  m.elements.reserve(4 * mesh.elements.size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.elements[e];
    const auto& ef = mesh.element_facets[e];
    // mid[i] is the midpoint of the edge opposite local vertex i.
    const int m0 = nv + ef[0], m1 = nv + ef[1], m2 = nv + ef[2];
    m.elements.push_back({t[0], m2, m1});
    m.elements.push_back({m2, t[1], m0});
    m.elements.push_back({m1, m0, t[2]});
    m.elements.push_back({m0, m1, m2});
  }
  m.level = mesh.level + 1;
  build_topology(m);
  return m;
}

BackgroundMesh mesh_from_triangles(std::vector<Point2> vertices, std::vector<std::array<int, 3>> tris) {
  BackgroundMesh m;
  m.vertices = std::move(vertices);
  m.elements = std::move(tris);
  for (auto& t : m.elements) {
    const double a = signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    if (a == 0.0) throw Error("degenerate triangle");
    if (a < 0.0) std::swap(t[1], t[2]);
  }
  build_topology(m);
  return m;
}

std::pair<int, int> facet_patch(const BackgroundMesh& mesh, int facet) {
  const Facet& f = mesh.facets.at(facet);
  if (!f.interior()) throw Error("no patch: boundary facet " + std::to_string(facet));
  return {f.left, f.right};
}

void write_mesh(std::ostream& os, const BackgroundMesh& mesh) {
  os.precision(17);
  for (const auto& v : mesh.vertices) os << "v " << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.elements) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace umix
