#include "umix/patches.hpp"

#include <algorithm>
#include <deque>

#include "umix/error.hpp"

namespace umix {

int PatchDecomposition::patch_of(int e) const {
  const int p = element_to_patch.at(e);
  if (p < 0) throw Error("element " + std::to_string(e) + " is not active");
  return p;
}

namespace {

std::vector<int> sorted_neighbors(const BackgroundMesh& mesh, int e) {
  std::vector<int> nb;
  for (int f : mesh.element_facets[e]) {
    const int o = mesh.neighbor(e, f);
    if (o >= 0) nb.push_back(o);
  }
  std::sort(nb.begin(), nb.end());
  return nb;
}

}  // namespace

PatchDecomposition build_patches(const BackgroundMesh& mesh, const std::vector<ElementClass>& classes,
                                 PatchOptions options) {
  const int ne = mesh.num_elements();
  PatchDecomposition out;
  out.element_to_patch.assign(ne, -1);
  auto& owner = out.element_to_patch;

  // Facet distance of every active element to the interior region.
  std::vector<int> dist(ne, -1);
  std::deque<int> queue;
  for (int e = 0; e < ne; ++e) {
    if (classes[e] == ElementClass::Interior) {
      dist[e] = 0;
      queue.push_back(e);
    }
  }
  while (!queue.empty()) {
    const int e = queue.front();
    queue.pop_front();
    for (int nb : sorted_neighbors(mesh, e)) {
      if (dist[nb] >= 0 || classes[nb] == ElementClass::Exterior) continue;
      dist[nb] = dist[e] + 1;
      queue.push_back(nb);
    }
  }

  std::vector<int> order;
  for (int e = 0; e < ne; ++e) {
    if (classes[e] != ElementClass::Cut) continue;
    if (dist[e] < 0) throw Error("isolated cut region at element " + std::to_string(e));
    order.push_back(e);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });

  // Cut elements attach layer by layer to an already assigned neighbour one
  // layer closer to the interior, preferring the smallest patch.
  std::vector<int> hops(ne, 0), parent(ne, -1);
  const auto size_of = [&](int p) { return static_cast<int>(out.patches[p].elements.size()); };

  // Moves a subtree of a full neighbouring patch to another patch so that the
  // current element can attach. Returns the neighbour to attach to, or -1.
  const auto relocate_for = [&](const std::vector<int>& nbs) {
    for (int nb : nbs) {
      const int p = owner[nb];
      if (p < 0 || classes[nb] == ElementClass::Exterior || hops[nb] + 1 > options.max_hops) continue;
      auto& P = out.patches[p];
      for (int x : P.elements) {
        if (x == P.root || x == nb) continue;
        std::vector<int> sub{x};
        std::vector<char> in_sub(ne, 0);
        in_sub[x] = 1;
        int depth = 0;
        for (int y : P.elements) {
          if (y != x && parent[y] >= 0 && in_sub[parent[y]]) {
            in_sub[y] = 1;
            sub.push_back(y);
            depth = std::max(depth, hops[y] - hops[x]);
          }
        }
        const int moved = static_cast<int>(sub.size());
        if (!in_sub[nb] && size_of(p) - moved + 1 > options.max_size) continue;
        for (int y : sorted_neighbors(mesh, x)) {
          const int q = owner[y];
          if (q < 0 || q == p || classes[y] == ElementClass::Exterior) continue;
          const int shift = hops[y] + 1 - hops[x];
          if (size_of(q) + moved + (in_sub[nb] ? 1 : 0) > options.max_size) continue;
          if (hops[x] + shift + depth > options.max_hops) continue;
          if (in_sub[nb] && hops[nb] + shift + 1 > options.max_hops) continue;
          parent[x] = y;
          for (int z : sub) {
            owner[z] = q;
            hops[z] += shift;
            out.patches[q].elements.push_back(z);
          }
          std::erase_if(P.elements, [&](int z) { return in_sub[z] != 0; });
          return nb;
        }
      }
    }
    return -1;
  };

  for (int e : order) {
    const auto nbs = sorted_neighbors(mesh, e);
    int best = -1;
    if (dist[e] == 1) {
      for (int nb : nbs) {
        if (classes[nb] != ElementClass::Interior) continue;
        const int p = owner[nb];
        if (p < 0 || (out.patches[p].root == nb && static_cast<int>(out.patches[p].elements.size()) < options.max_size)) {
          best = nb;
          break;
        }
      }
    }
    if (best < 0) {
      std::size_t best_size = 0;
      for (int nb : nbs) {
        const int p = owner[nb];
        if (p < 0 || classes[nb] == ElementClass::Exterior || dist[nb] >= dist[e]) continue;
        const std::size_t size = out.patches[p].elements.size();
        if (static_cast<int>(size) >= options.max_size || hops[nb] + 1 > options.max_hops) continue;
        if (best < 0 || size < best_size) {
          best = nb;
          best_size = size;
        }
      }
    }
    if (best < 0) {
      std::size_t best_size = 0;
      for (int nb : nbs) {
        const int p = owner[nb];
        if (p < 0 || classes[nb] == ElementClass::Exterior) continue;
        const std::size_t size = out.patches[p].elements.size();
        if (static_cast<int>(size) >= options.max_size || hops[nb] + 1 > options.max_hops) continue;
        if (best < 0 || size < best_size) {
          best = nb;
          best_size = size;
        }
      }
    }
    if (best < 0) best = relocate_for(nbs);
    if (best < 0) throw Error("isolated cut region at element " + std::to_string(e));
    if (owner[best] < 0) {
      owner[best] = static_cast<int>(out.patches.size());
      out.patches.push_back(Patch{{best}, best, {}});
    }
    owner[e] = owner[best];
    hops[e] = hops[best] + 1;
    parent[e] = best;
    out.patches[owner[e]].elements.push_back(e);
  }

  for (int e = 0; e < ne; ++e) {
    if (classes[e] == ElementClass::Interior && owner[e] < 0) {
      owner[e] = static_cast<int>(out.patches.size());
      out.patches.push_back(Patch{{e}, e, {}});
    }
  }

  for (std::size_t p = 0; p < out.patches.size(); ++p) {
    auto& P = out.patches[p];
    for (int e : P.elements) {
      for (int f : mesh.element_facets[e]) {
        const Facet& F = mesh.facets[f];
        if (F.interior() && owner[F.left] == static_cast<int>(p) && owner[F.right] == static_cast<int>(p)) P.facets.push_back(f);
      }
    }
    std::sort(P.facets.begin(), P.facets.end());
    P.facets.erase(std::unique(P.facets.begin(), P.facets.end()), P.facets.end());
    out.gp_facets.insert(out.gp_facets.end(), P.facets.begin(), P.facets.end());
  }
  std::sort(out.gp_facets.begin(), out.gp_facets.end());
  return out;
}

}  // namespace umix
