#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topos_forge/colimits.hpp"
#include "topos_forge/error.hpp"
#include "topos_forge/factorization.hpp"
#include "topos_forge/filter.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/semantics.hpp"
#include "topos_forge/structure.hpp"
#include "topos_forge/subobject.hpp"

namespace topos {

/// Indices of the members of J, in increasing order.
inline std::vector<std::size_t> members_of(IndexSet J) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < 32; ++i) {
    if (J >> i & 1U) out.push_back(i);
  }
  return out;
}

/// ∏_J M for every J in a list of index sets, with the projections between them.
struct SubfamilyProducts {
  std::vector<IndexSet> sets;
  std::vector<StructureProduct> products;

  /// p_{J',J} : ∏_{J'} M → ∏_J M for J ⊆ J'.
  StructureMorphism projection(std::size_t from, std::size_t to) const {
    IndexSet Jp = sets[from], J = sets[to];
    if (!subset_of(J, Jp)) throw ShapeError("projection: target index set is not a subset of the source");
    const Structure& P = *products[from].product;
    std::vector<std::size_t> big = members_of(Jp), small = members_of(J);
    StructureMorphism p{products[from].product, products[to].product, {}};
    for (const auto& s : P.sig->sorts) {
      const ProductCone& src = products[from].sort_cones.at(s);
      const ProductCone& dst = products[to].sort_cones.at(s);
      std::vector<PresheafMap> legs;
      for (std::size_t i : small) {
        std::size_t pos = static_cast<std::size_t>(std::find(big.begin(), big.end(), i) - big.begin());
        legs.push_back(src.leg(pos));
      }
      p.components.emplace(s, dst.pairing(src.apex(), legs));
    }
    return p;
  }
};

inline StructureRef subfamily_product(const std::vector<StructureRef>& family, IndexSet J, StructureProduct* out = nullptr) {
  std::vector<StructureRef> sub;
  for (std::size_t i : members_of(J)) {
    if (i >= family.size()) throw ShapeError("index set refers to a missing family member");
    sub.push_back(family[i]);
  }
  StructureProduct P = structure_product(sub);
  StructureRef result = P.product;
  if (out) *out = std::move(P);
  return result;
}

/// ∏_F M with the A_F diagram it is the colimit of.
struct FilteredProductResult {
  FilterFin filter;
  std::vector<StructureRef> family;
  SubfamilyProducts stages;  ///< one stage per member of F, in member order
  std::map<std::string, DirectedDiagram> diagrams;
  std::map<std::string, DirectedColimit> colimits;
  StructureRef product;
  std::vector<StructureMorphism> cocone;  ///< μ_J, aligned with stages

  std::size_t stage_of(IndexSet J) const {
    for (std::size_t k = 0; k < stages.sets.size(); ++k) {
      if (stages.sets[k] == J) return k;
    }
    throw PreconditionError("index set " + filter.set_text(J) + " is not a member of the filter");
  }
  std::size_t whole_stage() const { return stage_of(filter.whole()); }
};

namespace detail {

/// The A_F diagram of one sort: stage J → stage K whenever K ⊆ J.
inline DirectedDiagram sort_diagram(const FilterFin& F, const SubfamilyProducts& P, const std::string& sort) {
  DirectedDiagram D;
  const std::size_t n = P.sets.size();
  for (std::size_t k = 0; k < n; ++k) {
    D.stages.push_back(F.set_text(P.sets[k]));
    D.nodes.push_back(P.products[k].product->sort(sort));
  }
  D.arrows.assign(n, std::vector<std::optional<PresheafMap>>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (subset_of(P.sets[b], P.sets[a])) D.arrows[a][b] = P.projection(a, b).components.at(sort);
    }
  }
  return D;
}

/// A stage later than all given stages.
inline std::size_t common_stage(const DirectedDiagram& D, const std::vector<std::size_t>& stages, std::size_t fallback) {
  std::size_t k = stages.empty() ? fallback : stages.front();
  for (std::size_t s : stages) {
    auto t = D.common_target(k, s);
    if (!t) throw ShapeError("diagram is not directed");
    k = *t;
  }
  return k;
}

}  // namespace detail

/// The filtered product: sortwise directed colimit of the A_F diagram.
/// Functions act on representatives pushed to a common stage; relations
/// are the union of the images of the stage relations.
inline FilteredProductResult filtered_product(const FilterFin& F, const std::vector<StructureRef>& family) {
  Report fr = validate_filter(F);
  if (!fr.ok()) throw PreconditionError("filtered_product: " + fr.violations.front());
  if (!F.proper()) throw PreconditionError("filtered_product: the filter contains the empty set");
  if (family.size() != F.index_count()) throw ShapeError("filtered_product: family size does not match the index set");
  FilteredProductResult R;
  R.filter = F;
  R.family = family;
  for (IndexSet J : F.members) {
    StructureProduct P;
    subfamily_product(family, J, &P);
    R.stages.sets.push_back(J);
    R.stages.products.push_back(std::move(P));
  }
  const Structure& M0 = *family.front();
  const Signature& sig = *M0.sig;
  const FinCategory& C = *M0.base;
  const std::size_t n = R.stages.sets.size();
  const std::size_t last = R.stage_of(F.generator());

  Structure L{M0.sig, M0.base, {}, {}, {}};
  for (const auto& s : sig.sorts) {
    DirectedDiagram D = detail::sort_diagram(F, R.stages, s);
    DirectedColimit colim = directed_colimit(D);
    L.sorts.emplace(s, colim.apex());
    R.diagrams.emplace(s, std::move(D));
    R.colimits.emplace(s, std::move(colim));
  }
  for (const auto& [f, prof] : sig.functions) {
    ProductCone dom = L.product_of(prof.args);
    const DirectedColimit& res = R.colimits.at(prof.result);
    PresheafMap h{dom.apex(), L.sorts.at(prof.result), std::vector<Function>(C.object_count())};
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      for (Elem w = 0; w < dom.apex()->size(c); ++w) {
        std::vector<std::size_t> at;
        for (std::size_t k = 0; k < prof.args.size(); ++k) {
          at.push_back(R.colimits.at(prof.args[k]).representative[c][dom.coordinate(c, w, k)].first);
        }
        std::size_t K = detail::common_stage(R.diagrams.at(prof.result), at, last);
        std::vector<Elem> pushed;
        for (std::size_t k = 0; k < prof.args.size(); ++k) {
          const auto& D = R.diagrams.at(prof.args[k]);
          auto [i, x] = R.colimits.at(prof.args[k]).representative[c][dom.coordinate(c, w, k)];
          pushed.push_back(D.edge(i, K)(c, x));
        }
        const Structure& PK = *R.stages.products[K].product;
        Elem arg = PK.product_of(prof.args).encode(c, pushed);
        h.components[c].push_back(res.leg(K)(c, PK.functions.at(f)(c, arg)));
      }
    }
    L.functions.emplace(f, std::move(h));
  }
  for (const auto& [r, args] : sig.relations) {
    ProductCone amb = L.product_of(args);
    Subfunctor S = bottom(amb.apex());
    for (std::size_t k = 0; k < n; ++k) {
      const Structure& PK = *R.stages.products[k].product;
      const Subfunctor& rk = PK.relations.at(r);
      ProductCone src = PK.product_of(args);
      for (ObjectId c = 0; c < C.object_count(); ++c) {
        for (Elem t = 0; t < src.apex()->size(c); ++t) {
          if (!rk.contains(c, t)) continue;
          std::vector<Elem> img;
          for (std::size_t a = 0; a < args.size(); ++a) img.push_back(R.colimits.at(args[a]).leg(k)(c, src.coordinate(c, t, a)));
          S.parts[c][amb.encode(c, img)] = true;
        }
      }
    }
    L.relations.emplace(r, std::move(S));
  }
  R.product = share(std::move(L));
  for (std::size_t k = 0; k < n; ++k) {
    StructureMorphism mu{R.stages.products[k].product, R.product, {}};
    for (const auto& s : sig.sorts) mu.components.emplace(s, R.colimits.at(s).leg(k));
    R.cocone.push_back(std::move(mu));
  }
  return R;
}

/// h_x⃗ : A_x⃗ → B_x⃗ for a structure morphism h.
inline PresheafMap context_map(const StructureMorphism& h, const Context& ctx, const ProductCone& A, const ProductCone& B) {
  std::vector<PresheafMap> maps;
  for (const auto& v : ctx) maps.push_back(h.components.at(v.sort));
  return A.product_map(B, maps);
}

inline PresheafMap context_map(const StructureMorphism& h, const Context& ctx) {
  return context_map(h, ctx, context_object(*h.src, ctx), context_object(*h.dst, ctx));
}

/// Whether h is an isomorphism of structures: bijective on every sort and
/// reflecting every relation.
inline Report structure_iso_check(const StructureMorphism& h) {
  Report report = morphism_validate(h);
  if (!report.ok()) return report;
  for (const auto& [s, m] : h.components) {
    if (!is_iso(m)) report.add("component for sort " + s + " is not bijective");
  }
  for (const auto& [r, args] : h.src->sig->relations) {
    Context ctx;
    for (std::size_t k = 0; k < args.size(); ++k) ctx.push_back({"x" + std::to_string(k), args[k]});
    PresheafMap hx = context_map(h, ctx);
    if (!(base_change(hx, h.dst->relations.at(r)) == h.src->relations.at(r))) {
      report.add("relation " + r + " is not reflected");
    }
  }
  return report;
}

/// The comparison ∏_F M → M_j for F principal at {j}: a colimit element is
/// pushed to the last stage {j} and read off there.
inline StructureMorphism comparison_to_factor(const FilteredProductResult& R, std::size_t j) {
  IndexSet single = IndexSet{1} << j;
  if (j >= R.family.size() || R.filter.generator() != single) {
    throw PreconditionError("comparison_to_factor: the filter is not principal at index " + std::to_string(j));
  }
  std::size_t K = R.stage_of(single);
  const FinCategory& C = *R.product->base;
  StructureMorphism h{R.product, R.family[j], {}};
  for (const auto& s : R.product->sig->sorts) {
    const DirectedColimit& colim = R.colimits.at(s);
    const DirectedDiagram& D = R.diagrams.at(s);
    const PresheafMap& to_factor = R.stages.products[K].sort_cones.at(s).leg(0);
    PresheafMap m{colim.apex(), R.family[j]->sort(s), std::vector<Function>(C.object_count())};
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      for (auto [i, x] : colim.representative[c]) m.components[c].push_back(to_factor(c, D.edge(i, K)(c, x)));
    }
    h.components.emplace(s, std::move(m));
  }
  return h;
}

/// The filtered product of the stage interpretations of φ: the union over
/// J ∈ F of the images of [[x⃗.φ]] in ∏_J M under (μ_J)_x⃗.
inline Subfunctor filtered_interpretation(const FilteredProductResult& R, const Context& ctx, const Formula& f) {
  ProductCone target = context_object(*R.product, ctx);
  Subfunctor out = bottom(target.apex());
  for (std::size_t k = 0; k < R.cocone.size(); ++k) {
    const StructureRef& P = R.stages.products[k].product;
    ProductCone src = context_object(*P, ctx);
    Subfunctor S = interp_formula(P, ctx, f);
    PresheafMap mu = context_map(R.cocone[k], ctx, src, target);
    out = join(out, exists_along(mu, Subfunctor{mu.src, S.parts}));
  }
  return out;
}

}  // namespace topos
