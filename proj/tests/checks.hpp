#pragma once

#include <vector>

#include "umix/harness.hpp"

namespace umix::checks {

// Each check returns the largest observed deviation from the identity it
// tests; the caller compares against a tolerance.

// max |div(I_RT u) - P_Q(div u)| over the coefficients, relative to |P_Q(div u)|,
// for a polynomial field of degree k+1 on the level-0 ring active mesh.
double commuting_interpolation_defect(int k);

// |J x| / (|J| |x|) with x the interpolant of a global polynomial of degree k:
// RT velocity fields and P_k scalars, on the level-0 ring patches.
double gp_kernel_defect_rt(int k, GPVariant variant);
double gp_kernel_defect_dg(int k, GPVariant variant);

// |(E0 q, r)_{Omega^T} - (q, r)_Omega| relative to |q| |r|, each side
// integrated with its own quadrature, for random r in P_k.
double e0_pairing_defect(int k);

// Largest relative error of cut-element volume rules of degree `degree` on
// monomials, against exact integration over the clipped polygon; both the
// rotated square and a straight level-set cut.
double quadrature_oracle_defect(int degree);

// Exact integral of x^a y^b over a simple counter-clockwise polygon.
double polygon_monomial_integral(const std::vector<Point2>& poly, int a, int b);

// Intersection of a triangle with a half plane {x : n.x <= c}.
std::vector<Point2> clip_half_plane(const std::vector<Point2>& poly, const Point2& n, double c);

}  // namespace umix::checks
