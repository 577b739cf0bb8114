#pragma once

#include "umix/systems.hpp"

namespace umix {

enum class PPScheme { Elementwise, Patchwise };

// p* in the DGSpace(active, k+1) layout.
struct PostProcessedScalar {
  PPScheme scheme = PPScheme::Elementwise;
  int degree = 1;
  Eigen::VectorXd coeffs;
};

enum class PatchConstraint {
  InteriorMean,  // (p*, 1) = (p_bar, 1) over the interior elements of the patch
  OmegaMean,     // (p*, 1) over patch ∩ Omega = (p_bar, 1) over the patch
};

struct PatchPPOptions {
  GPVariant variant = GPVariant::NormalJump;
  double gamma = 1.0;
  bool single_polynomial = false;  // one P_{k+1} per patch, no ghost penalty
  PatchConstraint constraint = PatchConstraint::InteriorMean;
};

// Gradient fit on each full element, mean fixed by p_bar (interior) or by
// the Dirichlet data on T ∩ Gamma (cut).
PostProcessedScalar pp_element(const Discretization& d, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                               const ScalarField& p_dirichlet);

// Gradient fit on patch ∩ Omega with an h^-2 scaled ghost penalty of degree k+1.
PostProcessedScalar pp_patch(const Discretization& d, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                             const PatchPPOptions& options = {});

}  // namespace umix
