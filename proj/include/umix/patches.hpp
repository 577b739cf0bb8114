#pragma once

#include <vector>

#include "umix/geometry.hpp"
#include "umix/mesh.hpp"

namespace umix {

struct Patch {
  std::vector<int> elements;  // root first, then in order of absorption
  int root = -1;
  std::vector<int> facets;  // facets with both neighbours in the patch, ascending
};

struct PatchOptions {
  int max_hops = 4;
  int max_size = 6;
};

struct PatchDecomposition {
  std::vector<Patch> patches;
  std::vector<int> element_to_patch;  // -1 for exterior elements
  std::vector<int> gp_facets;         // union of patch facets, ascending

  int patch_of(int e) const;
};

// Greedy aggregation: cut elements are visited by facet distance to the
// interior region, then by id. Each joins the smallest admissible patch of a
// neighbour one layer closer; elements next to the interior join a neighbouring
// interior element that is either unclaimed (it becomes a new root) or already
// a root. Unclaimed interior elements end up as singletons.
PatchDecomposition build_patches(const BackgroundMesh& mesh, const std::vector<ElementClass>& classes,
                                 PatchOptions options = {});

}  // namespace umix
