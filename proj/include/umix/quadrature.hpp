#pragma once

#include <Eigen/Dense>
#include <vector>

namespace umix {

// Points stored column-wise; weights sum to the measure of the domain.
struct Rule {
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return weights.size(); }
  double total() const { return weights.sum(); }
};

// Gauss-Legendre nodes and weights on [0, 1], exact to `degree`.
const Rule& gauss_unit_interval(int degree);  // points(1, :) is unused

// Collapsed Gauss rule on the reference triangle (0,0),(1,0),(0,1), exact
// for polynomials of total degree <= degree. Weights sum to 1/2.
const Rule& reference_triangle_rule(int degree);

// Rule on an arbitrary triangle; weights sum to its area.
Rule triangle_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                   int degree);

// Rule on a segment; weights sum to its length.
Rule segment_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int degree);

// Concatenate rules.
Rule merge(const std::vector<Rule>& parts);

}  // namespace umix
