#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "topos_forge/colimits.hpp"
#include "topos_forge/error.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/natural_search.hpp"
#include "topos_forge/presheaf.hpp"

namespace topos {

inline bool is_mono(const PresheafMap& f) {
  for (ObjectId c = 0; c < f.components.size(); ++c) {
    std::vector<bool> hit(f.dst->size(c), false);
    for (Elem y : f.components[c]) {
      if (hit[y]) return false;
      hit[y] = true;
    }
  }
  return true;
}

inline bool is_epi(const PresheafMap& f) {
  for (ObjectId c = 0; c < f.components.size(); ++c) {
    std::vector<bool> hit(f.dst->size(c), false);
    std::size_t count = 0;
    for (Elem y : f.components[c]) {
      if (!hit[y]) ++count;
      hit[y] = true;
    }
    if (count != f.dst->size(c)) return false;
  }
  return true;
}

inline bool is_iso(const PresheafMap& f) { return is_mono(f) && is_epi(f); }

/// Image flags of f inside its codomain.
inline Parts image_parts(const PresheafMap& f) {
  Parts parts(f.components.size());
  for (ObjectId c = 0; c < f.components.size(); ++c) {
    parts[c].assign(f.dst->size(c), false);
    for (Elem y : f.components[c]) parts[c][y] = true;
  }
  return parts;
}

struct ImageFactorization {
  PresheafMap epi;   ///< dom(f) ↠ Im(f)
  PresheafMap mono;  ///< Im(f) ↣ cod(f)
};

/// f = mono ∘ epi with Im(f) computed componentwise.
inline ImageFactorization image_factorize(const PresheafMap& f) {
  Cone im = restrict_to(f.dst, image_parts(f));
  const PresheafMap& m = im.legs[0];
  PresheafMap e{f.src, im.apex, std::vector<Function>(f.components.size())};
  for (ObjectId c = 0; c < f.components.size(); ++c) {
    std::vector<Elem> position(f.dst->size(c), 0);
    for (Elem k = 0; k < m.components[c].size(); ++k) position[m.components[c][k]] = k;
    for (Elem x : f.components[c]) e.components[c].push_back(position[x]);
  }
  return ImageFactorization{std::move(e), m};
}

/// Some h : A → X with f ∘ h = g, for an epimorphism f : X → B.
///
/// Section values are chosen least-id-first and naturality is repaired by
/// backtracking; the result is the least solution in that order. Returns
/// nullopt when no natural choice of sections exists.
inline std::optional<PresheafMap> factor_through_epi(const PresheafMap& g, const PresheafMap& f) {
  if (!same_presheaf(g.dst, f.dst)) throw ShapeError("factor_through_epi: maps have different codomains");
  if (!is_epi(f)) throw PreconditionError("factor_through_epi: the map to factor through is not an epimorphism");
  return find_natural_map(g.src, f.src, [&](ObjectId c, Elem a, Elem x) { return f(c, x) == g(c, a); });
}

/// A stage i of a directed diagram and u_i : U → D(i) with μ_i ∘ u_i = u.
struct StageFactorization {
  std::size_t stage = 0;
  PresheafMap map;
};

/// Factors u : U → colim D through some stage of D.
///
/// If u is literally a coprojection μ_i, the result is (i, id). Otherwise
/// stages are tried latest first (most incoming arrows, then stage order)
/// and the first stage admitting a factorization wins.
inline StageFactorization factor_through_colimit_stage(const PresheafMap& u, const DirectedDiagram& D,
                                                      const DirectedColimit& colim) {
  if (!same_presheaf(u.dst, colim.apex())) {
    throw ShapeError("factor_through_colimit_stage: map does not land in the colimit");
  }
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (same_presheaf(u.src, D.nodes[i]) && u == colim.leg(i)) return {i, identity_map(D.nodes[i])};
  }
  std::vector<std::size_t> order(D.size());
  std::vector<std::size_t> incoming(D.size(), 0);
  for (std::size_t i = 0; i < D.size(); ++i) {
    order[i] = i;
    for (std::size_t k = 0; k < D.size(); ++k) {
      if (k != i && D.has_arrow(k, i)) ++incoming[i];
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return incoming[a] > incoming[b]; });
  for (std::size_t i : order) {
    const PresheafMap& mu = colim.leg(i);
    auto h = find_natural_map(u.src, D.nodes[i], [&](ObjectId c, Elem x, Elem y) { return mu(c, y) == u(c, x); });
    if (h) return {i, std::move(*h)};
  }
  throw PreconditionError("factor_through_colimit_stage: no stage factors the map; is the cocone a colimit?");
}

/// A stage k reachable from both factorizations' stages on which they agree:
/// D(i → k) ∘ u_i = D(j → k) ∘ u_j.
inline std::optional<std::size_t> essential_uniqueness_stage(const DirectedDiagram& D, const StageFactorization& a,
                                                             const StageFactorization& b) {
  for (std::size_t k = 0; k < D.size(); ++k) {
    if (!D.has_arrow(a.stage, k) || !D.has_arrow(b.stage, k)) continue;
    if (compose(D.edge(a.stage, k), a.map) == compose(D.edge(b.stage, k), b.map)) return k;
  }
  return std::nullopt;
}

}  // namespace topos
