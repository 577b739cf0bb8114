#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <utility>
#include <vector>

namespace umix {

using Point2 = Eigen::Vector2d;

// Edge between vertices v[0] < v[1]. `left` is the adjacent element with the
// smaller id, `right` the larger one or -1 on the boundary. The global facet
// normal points out of `left`.
struct Facet {
  std::array<int, 2> v;
  int left = -1;
  int right = -1;

  bool interior() const { return right >= 0; }
};

struct BackgroundMesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> elements;  // counter-clockwise
  std::vector<Facet> facets;
  // Local edge i of an element joins local vertices i+1 and i+2.
  std::vector<std::array<int, 3>> element_facets;
  std::vector<double> element_diameters;
  int level = 0;

  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_facets() const { return static_cast<int>(facets.size()); }
  double h_max() const;
  double area(int e) const;
  double facet_length(int f) const;
  // Unit normal of facet f pointing out of its left element.
  Point2 facet_normal(int f) const;
  Point2 centroid(int e) const;
  // Element on the other side of facet f, -1 if none.
  int neighbor(int e, int f) const;
};

// [-1,1]^2 split into n x n squares, each cut by its lower-left to
// upper-right diagonal.
BackgroundMesh build_structured(int n);

// Red refinement: every element is replaced by its four midpoint children,
// stored consecutively as 4e..4e+3.
BackgroundMesh refine_uniform(const BackgroundMesh& mesh);

// Build topology for an arbitrary triangle soup. Clockwise triangles are
// reoriented.
BackgroundMesh mesh_from_triangles(std::vector<Point2> vertices, std::vector<std::array<int, 3>> tris);

// The two elements sharing an interior facet, ordered (left, right).
std::pair<int, int> facet_patch(const BackgroundMesh& mesh, int facet);

// Text dump: "v x y" per vertex, then "t i j k" per element.
void write_mesh(std::ostream& os, const BackgroundMesh& mesh);

}  // namespace umix
