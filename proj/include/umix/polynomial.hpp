#pragma once

// Bivariate polynomials in the monomial basis x^a y^b, ordered by total
// degree: index(a, b) = d(d+1)/2 + b with d = a + b.

#include <Eigen/Dense>

namespace umix {

constexpr int monomial_count(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }

constexpr int monomial_index(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }

// Column vector of all monomials of total degree <= degree at (x, y).
Eigen::VectorXd monomials(int degree, double x, double y);

// nmono x npts table; points given as a 2 x npts matrix.
Eigen::MatrixXd monomial_table(int degree, const Eigen::Matrix2Xd& pts);

// Coefficient-space derivative operators: if c is a row vector of monomial
// coefficients, c * derivative_x(d) holds the coefficients of d/dx.
Eigen::MatrixXd derivative_x(int degree);
Eigen::MatrixXd derivative_y(int degree);

// Directional derivative operator (dx * d/dx + dy * d/dy)^order.
Eigen::MatrixXd directional_derivative(int degree, double dx, double dy, int order);

// Exact integral of x^a y^b over the reference triangle (0,0),(1,0),(0,1).
double reference_monomial_integral(int a, int b);

// Coefficients (rows) of an L2(reference triangle)-orthonormal basis of
// P_degree, hierarchical: the first monomial_count(m) rows span P_m for
// every m <= degree and do not depend on `degree`.
const Eigen::MatrixXd& orthonormal_basis(int degree);

// Evaluate every polynomial stored as a row of coef at the given points.
inline Eigen::MatrixXd evaluate_rows(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& table) {
  return coef * table.topRows(coef.cols());
}

}  // namespace umix
