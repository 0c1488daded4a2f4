#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/presheaf.hpp"

namespace topos {

inline PresheafRef initial(const CategoryRef& base) {
  return share(Presheaf{base, std::vector<Carrier>(base->object_count()),
                        std::vector<Function>(base->morphism_count())});
}

/// The unique map 0 → X.
inline PresheafMap from_initial(const PresheafRef& X) {
  return PresheafMap{initial(X->base), X, std::vector<Function>(X->carrier.size())};
}

/// Disjoint union with coprojections. Element ids are "k:id".
inline Cone coproduct(const CategoryRef& base, const std::vector<PresheafRef>& summands) {
  const FinCategory& C = *base;
  Presheaf S{base, std::vector<Carrier>(C.object_count()), std::vector<Function>(C.morphism_count())};
  std::vector<std::vector<std::size_t>> offset(summands.size(), std::vector<std::size_t>(C.object_count(), 0));
  for (std::size_t k = 0; k < summands.size(); ++k) {
    if (!same_category(summands[k]->base, base)) throw ShapeError("coproduct: summands live over different bases");
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      offset[k][c] = S.carrier[c].size();
      for (const auto& id : summands[k]->carrier[c]) S.carrier[c].push_back(std::to_string(k) + ":" + id);
    }
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    for (std::size_t k = 0; k < summands.size(); ++k) {
      for (Elem x : summands[k]->action[f]) S.action[f].push_back(offset[k][C.dom(f)] + x);
    }
  }
  PresheafRef apex = share(std::move(S));
  Cone cone{apex, {}};
  for (std::size_t k = 0; k < summands.size(); ++k) {
    PresheafMap in{summands[k], apex, std::vector<Function>(C.object_count())};
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      in.components[c].resize(summands[k]->size(c));
      std::iota(in.components[c].begin(), in.components[c].end(), offset[k][c]);
    }
    cone.legs.push_back(std::move(in));
  }
  return cone;
}

/// A diagram over an explicitly supplied finite preorder of stages. An
/// arrow i → k means k is a later stage; the diagram maps it to D(i) → D(k).
struct DirectedDiagram {
  std::vector<std::string> stages;
  std::vector<PresheafRef> nodes;
  /// arrows[i][k] holds D(i → k) iff i → k.
  std::vector<std::vector<std::optional<PresheafMap>>> arrows;

  std::size_t size() const noexcept { return stages.size(); }
  bool has_arrow(std::size_t i, std::size_t k) const { return arrows[i][k].has_value(); }
  const PresheafMap& edge(std::size_t i, std::size_t k) const { return *arrows[i][k]; }

  /// The first stage (in stage order) reachable from both i and j.
  std::optional<std::size_t> common_target(std::size_t i, std::size_t j) const {
    for (std::size_t k = 0; k < size(); ++k) {
      if (has_arrow(i, k) && has_arrow(j, k)) return k;
    }
    return std::nullopt;
  }
};

/// Checks that the index structure is a nonempty directed preorder and that
/// the assignment of maps is a functor on it.
inline Report validate_diagram(const DirectedDiagram& D) {
  Report report;
  const std::size_t n = D.size();
  if (n == 0) {
    report.add("diagram has no stages");
    return report;
  }
  if (D.nodes.size() != n || D.arrows.size() != n) {
    report.add("diagram tables do not match its stage list");
    return report;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (D.arrows[i].size() != n) {
      report.add("arrow row of stage " + D.stages[i] + " has the wrong length");
      return report;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!D.has_arrow(i, i)) {
      report.add("stage " + D.stages[i] + " has no identity arrow");
    } else if (!(D.edge(i, i) == identity_map(D.nodes[i]))) {
      report.add("identity arrow at stage " + D.stages[i] + " is not the identity map");
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!D.has_arrow(i, k)) continue;
      const auto& e = D.edge(i, k);
      if (!same_presheaf(e.src, D.nodes[i]) || !same_presheaf(e.dst, D.nodes[k])) {
        report.add("arrow " + D.stages[i] + " -> " + D.stages[k] + " has the wrong endpoints");
        continue;
      }
      report.merge(validate_map(e), "arrow " + D.stages[i] + " -> " + D.stages[k] + ": ");
    }
  }
  if (!report.ok()) return report;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!D.has_arrow(i, j)) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (!D.has_arrow(j, k)) continue;
        if (!D.has_arrow(i, k)) {
          report.add("index order is not transitive at " + D.stages[i] + " -> " + D.stages[j] + " -> " + D.stages[k]);
        } else if (!(compose(D.edge(j, k), D.edge(i, j)) == D.edge(i, k))) {
          report.add("arrows do not compose at " + D.stages[i] + " -> " + D.stages[j] + " -> " + D.stages[k]);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!D.common_target(i, j)) {
        report.add("stages " + D.stages[i] + " and " + D.stages[j] + " have no common later stage");
      }
    }
  }
  return report;
}

/// Colimit of a directed diagram with its cocone and, for every element of
/// the colimit, the canonical representative of its germ class.
struct DirectedColimit {
  Cone cocone;
  /// representative[c][z] = (stage, element) least by (stage id, element id).
  std::vector<std::vector<std::pair<std::size_t, Elem>>> representative;

  const PresheafRef& apex() const { return cocone.apex; }
  const PresheafMap& leg(std::size_t i) const { return cocone.legs.at(i); }
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace detail

/// Componentwise directed colimit: the disjoint union of the stage carriers
/// modulo the germ relation. Germ classes are named after their least
/// (stage id, element id) representative, "[stage|element]".
inline DirectedColimit directed_colimit(const DirectedDiagram& D) {
  Report r = validate_diagram(D);
  if (!r.ok()) throw ShapeError("directed colimit: " + r.violations.front());
  const CategoryRef& base = D.nodes.front()->base;
  const FinCategory& C = *base;
  const std::size_t n = D.size();

  Presheaf L{base, std::vector<Carrier>(C.object_count()), std::vector<Function>(C.morphism_count())};
  DirectedColimit out;
  out.representative.resize(C.object_count());
  // class_of[c][i][x] = index of the germ class of x ∈ D(i)(c)
  std::vector<std::vector<std::vector<Elem>>> class_of(C.object_count(), std::vector<std::vector<Elem>>(n));

  for (ObjectId c = 0; c < C.object_count(); ++c) {
    std::vector<std::size_t> offset(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + D.nodes[i]->size(c);
    detail::UnionFind uf(offset[n]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        if (i == k || !D.has_arrow(i, k)) continue;
        const auto& e = D.edge(i, k);
        for (Elem x = 0; x < D.nodes[i]->size(c); ++x) uf.unite(offset[i] + x, offset[k] + e(c, x));
      }
    }
    // least representative per root
    auto less = [&](std::pair<std::size_t, Elem> a, std::pair<std::size_t, Elem> b) {
      const auto& sa = D.stages[a.first];
      const auto& sb = D.stages[b.first];
      if (sa != sb) return sa < sb;
      return D.nodes[a.first]->id(c, a.second) < D.nodes[b.first]->id(c, b.second);
    };
    std::vector<std::optional<std::pair<std::size_t, Elem>>> best(offset[n]);
    for (std::size_t i = 0; i < n; ++i) {
      for (Elem x = 0; x < D.nodes[i]->size(c); ++x) {
        auto& b = best[uf.find(offset[i] + x)];
        if (!b || less({i, x}, *b)) b = std::make_pair(i, x);
      }
    }
    std::vector<std::pair<std::size_t, Elem>> reps;
    for (std::size_t root = 0; root < offset[n]; ++root) {
      if (uf.find(root) == root) reps.push_back(*best[root]);
    }
    std::sort(reps.begin(), reps.end(), less);
    std::vector<Elem> class_index(offset[n], 0);
    for (Elem z = 0; z < reps.size(); ++z) {
      auto [i, x] = reps[z];
      class_index[uf.find(offset[i] + x)] = z;
      L.carrier[c].push_back("[" + escape_id(D.stages[i]) + "|" + escape_id(D.nodes[i]->id(c, x)) + "]");
    }
    out.representative[c] = std::move(reps);
    for (std::size_t i = 0; i < n; ++i) {
      class_of[c][i].resize(D.nodes[i]->size(c));
      for (Elem x = 0; x < D.nodes[i]->size(c); ++x) class_of[c][i][x] = class_index[uf.find(offset[i] + x)];
    }
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    ObjectId a = C.dom(f), b = C.cod(f);
    for (auto [i, x] : out.representative[b]) {
      L.action[f].push_back(class_of[a][i][D.nodes[i]->restrict(f, x)]);
    }
  }
  PresheafRef apex = share(std::move(L));
  out.cocone.apex = apex;
  for (std::size_t i = 0; i < n; ++i) {
    PresheafMap mu{D.nodes[i], apex, std::vector<Function>(C.object_count())};
    for (ObjectId c = 0; c < C.object_count(); ++c) mu.components[c] = class_of[c][i];
    out.cocone.legs.push_back(std::move(mu));
  }
  return out;
}

}  // namespace topos
