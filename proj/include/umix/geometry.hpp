#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "umix/mesh.hpp"
#include "umix/quadrature.hpp"

namespace umix {

// Omega = {phi < 0}. Cut elements are resolved by recursive red subdivision
// down to `subdivision_depth` and piecewise-linear interpolation of phi on
// the leaves. `lipschitz` bounds |grad phi| and lets far-away children skip
// subdivision without changing the result.
struct LevelSet {
  std::function<double(const Point2&)> value;
  std::function<Point2(const Point2&)> gradient;
  int subdivision_depth = 0;
  double lipschitz = 1.0;
};

// Strictly convex, counter-clockwise vertex list.
struct ConvexPolygon {
  std::vector<Point2> vertices;
};

using DomainDescription = std::variant<LevelSet, ConvexPolygon>;

// Annulus R1 < |x - (s, s)| < R2 as the signed distance | r - (R1+R2)/2 | - (R2-R1)/2.
LevelSet ring_level_set(int depth, double shift = 0.0, double r1 = 0.25, double r2 = 0.75);

// Square with corners at distance `radius` from the origin, rotated
// counter-clockwise by `angle`.
ConvexPolygon rotated_square(double radius = 0.8, double angle = 0.3);

enum class ElementClass { Interior, Cut, Exterior };

struct InterfaceRule {
  Rule rule;
  Eigen::Matrix2Xd normals;  // unit, pointing out of Omega
};

class CutMesh {
 public:
  CutMesh(const BackgroundMesh& mesh, DomainDescription domain);

  const BackgroundMesh& mesh() const { return *mesh_; }
  const DomainDescription& domain() const { return domain_; }
  const std::vector<ElementClass>& classes() const { return classes_; }
  ElementClass cls(int e) const { return classes_[e]; }
  bool active(int e) const { return classes_[e] != ElementClass::Exterior; }
  bool cut(int e) const { return classes_[e] == ElementClass::Cut; }

  // Quadrature on T ∩ Omega; the full element rule for Interior elements.
  Rule volume_rule(int e, int degree) const;
  // Quadrature on the whole element T.
  Rule full_rule(int e, int degree) const;
  // Quadrature on T ∩ Gamma with outward normals; Cut elements only.
  InterfaceRule interface_rule(int e, int degree) const;

  double volume(int e) const;
  double interface_length(int e) const;

  // True when Gamma crosses the interior of facet f (tangential contact of a
  // fitted boundary does not count).
  bool facet_cut(int f) const;

  // Smooth extension of the outward normal near Gamma.
  Point2 quasi_normal(const Point2& x) const;

  // phi for level sets; largest signed edge-line distance for polygons.
  double phi(const Point2& x) const;

 private:
  struct Segment {
    Point2 a, b, normal;
  };
  struct Pieces {
    std::vector<std::array<Point2, 3>> inside;
    std::vector<Segment> interface;
  };

  Pieces resolve(int e) const;

  const BackgroundMesh* mesh_;
  DomainDescription domain_;
  std::vector<ElementClass> classes_;
  std::vector<int> cut_index_;  // element -> slot in pieces_, -1 if uncut
  std::vector<Pieces> pieces_;
};

// Per-element classification only.
std::vector<ElementClass> classify(const BackgroundMesh& mesh, const DomainDescription& domain);

}  // namespace umix
