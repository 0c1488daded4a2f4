#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/presheaf.hpp"
#include "topos_forge/signature.hpp"
#include "topos_forge/subobject.hpp"

namespace topos {

/// A Σ-structure in the presheaf topos over `base`.
///
/// Function symbols are interpreted on the canonical product of their
/// argument sorts (the terminal presheaf for constants); relation symbols
/// are subobjects of that product.
struct Structure {
  SignatureRef sig;
  CategoryRef base;
  std::map<std::string, PresheafRef> sorts;
  std::map<std::string, PresheafMap> functions;
  std::map<std::string, Subfunctor> relations;

  const PresheafRef& sort(const std::string& s) const {
    auto it = sorts.find(s);
    if (it == sorts.end()) throw SortError("undeclared sort " + s, s);
    return it->second;
  }

  /// The canonical product of the listed sorts.
  ProductCone product_of(const std::vector<std::string>& names) const {
    std::vector<PresheafRef> factors;
    factors.reserve(names.size());
    for (const auto& s : names) factors.push_back(sort(s));
    return ProductCone(base, std::move(factors));
  }
};

using StructureRef = std::shared_ptr<const Structure>;

inline StructureRef share(Structure M) { return std::make_shared<const Structure>(std::move(M)); }

inline Report structure_validate(const Structure& M) {
  Report report;
  if (!M.sig || !M.base) {
    report.add("structure lacks a signature or base");
    return report;
  }
  const Signature& sig = *M.sig;
  report.merge(validate_signature(sig), "signature: ");
  if (!report.ok()) return report;
  for (const auto& s : sig.sorts) {
    auto it = M.sorts.find(s);
    if (it == M.sorts.end()) {
      report.add("sort " + s + " is not interpreted");
      continue;
    }
    if (!same_category(it->second->base, M.base)) {
      report.add("sort " + s + " lives over a different base");
      continue;
    }
    report.merge(validate_presheaf(*it->second), "sort " + s + ": ");
  }
  for (const auto& [s, X] : M.sorts) {
    if (!sig.has_sort(s)) report.add("interpretation given for unknown sort " + s);
  }
  if (!report.ok()) return report;
  for (const auto& [f, prof] : sig.functions) {
    auto it = M.functions.find(f);
    if (it == M.functions.end()) {
      report.add("function " + f + " is not interpreted");
      continue;
    }
    const PresheafMap& h = it->second;
    ProductCone dom = M.product_of(prof.args);
    if (!same_presheaf(h.src, dom.apex())) {
      report.add("function " + f + " is not defined on the product of its argument sorts");
      continue;
    }
    if (!same_presheaf(h.dst, M.sort(prof.result))) {
      report.add("function " + f + " does not land in sort " + prof.result);
      continue;
    }
    report.merge(validate_map(h), "function " + f + ": ");
  }
  for (const auto& [r, args] : sig.relations) {
    auto it = M.relations.find(r);
    if (it == M.relations.end()) {
      report.add("relation " + r + " is not interpreted");
      continue;
    }
    ProductCone amb = M.product_of(args);
    if (!same_presheaf(it->second.ambient, amb.apex())) {
      report.add("relation " + r + " is not a subobject of the product of its argument sorts");
      continue;
    }
    report.merge(validate_subfunctor(it->second), "relation " + r + ": ");
  }
  for (const auto& [f, h] : M.functions) {
    if (!sig.has_function(f)) report.add("interpretation given for unknown function " + f);
  }
  for (const auto& [r, S] : M.relations) {
    if (!sig.has_relation(r)) report.add("interpretation given for unknown relation " + r);
  }
  return report;
}

struct Variable {
  std::string name;
  std::string sort;

  bool operator==(const Variable&) const = default;
};

using Context = std::vector<Variable>;

inline std::string context_text(const Context& ctx) {
  std::string out = "(";
  for (std::size_t k = 0; k < ctx.size(); ++k) {
    if (k) out += ", ";
    out += ctx[k].name + ":" + ctx[k].sort;
  }
  return out + ")";
}

inline Report validate_context(const Signature& sig, const Context& ctx) {
  Report report;
  for (std::size_t k = 0; k < ctx.size(); ++k) {
    if (!sig.has_sort(ctx[k].sort)) report.add("variable " + ctx[k].name + " has undeclared sort " + ctx[k].sort);
    for (std::size_t j = 0; j < k; ++j) {
      if (ctx[j].name == ctx[k].name) report.add("variable " + ctx[k].name + " occurs twice in the context");
    }
  }
  return report;
}

/// M_x⃗ with one projection per variable; the terminal presheaf for [].
inline ProductCone context_object(const Structure& M, const Context& ctx) {
  std::vector<std::string> names;
  names.reserve(ctx.size());
  for (const auto& v : ctx) {
    if (!M.sig->has_sort(v.sort)) throw SortError("variable " + v.name + " has undeclared sort " + v.sort, v.sort);
    names.push_back(v.sort);
  }
  return M.product_of(names);
}

/// A Σ-structure morphism given sortwise.
struct StructureMorphism {
  StructureRef src;
  StructureRef dst;
  std::map<std::string, PresheafMap> components;
};

inline Report morphism_validate(const StructureMorphism& h) {
  Report report;
  const Structure& A = *h.src;
  const Structure& B = *h.dst;
  if (!same_signature(A.sig, B.sig) || !same_category(A.base, B.base)) {
    report.add("source and target differ in signature or base");
    return report;
  }
  const Signature& sig = *A.sig;
  for (const auto& s : sig.sorts) {
    auto it = h.components.find(s);
    if (it == h.components.end()) {
      report.add("no component for sort " + s);
      continue;
    }
    if (!same_presheaf(it->second.src, A.sort(s)) || !same_presheaf(it->second.dst, B.sort(s))) {
      report.add("component for sort " + s + " has the wrong type");
      continue;
    }
    report.merge(validate_map(it->second), "sort " + s + ": ");
  }
  if (!report.ok()) return report;
  const FinCategory& C = *A.base;
  auto args_map = [&](const std::vector<std::string>& args, const ProductCone& pa, const ProductCone& pb) {
    std::vector<PresheafMap> ms;
    for (const auto& s : args) ms.push_back(h.components.at(s));
    return pa.product_map(pb, ms);
  };
  for (const auto& [f, prof] : sig.functions) {
    ProductCone pa = A.product_of(prof.args), pb = B.product_of(prof.args);
    PresheafMap hx = args_map(prof.args, pa, pb);
    const PresheafMap& fa = A.functions.at(f);
    const PresheafMap& fb = B.functions.at(f);
    const PresheafMap& hr = h.components.at(prof.result);
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      for (Elem x = 0; x < pa.apex()->size(c); ++x) {
        if (hr(c, fa(c, x)) != fb(c, hx(c, x))) {
          report.add("square for function " + f + " does not commute at stage " + C.object_name(c) + " on '" +
                     pa.apex()->id(c, x) + "'");
        }
      }
    }
  }
  for (const auto& [r, args] : sig.relations) {
    ProductCone pa = A.product_of(args), pb = B.product_of(args);
    PresheafMap hx = args_map(args, pa, pb);
    const Subfunctor& ra = A.relations.at(r);
    const Subfunctor& rb = B.relations.at(r);
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      for (Elem x = 0; x < pa.apex()->size(c); ++x) {
        if (ra.contains(c, x) && !rb.contains(c, hx(c, x))) {
          report.add("relation " + r + " is not preserved at stage " + C.object_name(c) + " on '" +
                     pa.apex()->id(c, x) + "'");
        }
      }
    }
  }
  return report;
}

inline StructureMorphism identity_morphism(const StructureRef& M) {
  StructureMorphism h{M, M, {}};
  for (const auto& [s, X] : M->sorts) h.components.emplace(s, identity_map(X));
  return h;
}

struct StructureProduct {
  StructureRef product;
  std::vector<StructureMorphism> projections;
  /// Per sort, the product cone of the family's carriers.
  std::map<std::string, ProductCone> sort_cones;
};

/// Product of a nonempty family of structures over one base and signature.
inline StructureProduct structure_product(const std::vector<StructureRef>& family) {
  if (family.empty()) throw PreconditionError("structure_product: the family is empty");
  const Structure& M0 = *family.front();
  for (const auto& M : family) {
    if (!same_signature(M->sig, M0.sig)) throw ShapeError("structure_product: members have different signatures");
    if (!same_category(M->base, M0.base)) throw ShapeError("structure_product: members live over different bases");
  }
  const Signature& sig = *M0.sig;
  StructureProduct out;
  Structure P{M0.sig, M0.base, {}, {}, {}};
  for (const auto& s : sig.sorts) {
    std::vector<PresheafRef> factors;
    for (const auto& M : family) factors.push_back(M->sort(s));
    ProductCone cone(M0.base, std::move(factors));
    P.sorts.emplace(s, cone.apex());
    out.sort_cones.emplace(s, std::move(cone));
  }
  // (∏M)_args → (M_i)_args
  auto to_member = [&](const std::vector<std::string>& args, const ProductCone& pa, std::size_t i) {
    ProductCone target = family[i]->product_of(args);
    std::vector<PresheafMap> legs;
    for (std::size_t k = 0; k < args.size(); ++k) legs.push_back(compose(out.sort_cones.at(args[k]).leg(i), pa.leg(k)));
    return target.pairing(pa.apex(), legs);
  };
  for (const auto& [f, prof] : sig.functions) {
    ProductCone pa = P.product_of(prof.args);
    std::vector<PresheafMap> parts;
    for (std::size_t i = 0; i < family.size(); ++i) {
      parts.push_back(compose(family[i]->functions.at(f), to_member(prof.args, pa, i)));
    }
    P.functions.emplace(f, out.sort_cones.at(prof.result).pairing(pa.apex(), parts));
  }
  for (const auto& [r, args] : sig.relations) {
    ProductCone pa = P.product_of(args);
    Subfunctor R = top(pa.apex());
    for (std::size_t i = 0; i < family.size(); ++i) {
      R = meet(R, base_change(to_member(args, pa, i), family[i]->relations.at(r)));
    }
    P.relations.emplace(r, std::move(R));
  }
  out.product = share(std::move(P));
  for (std::size_t i = 0; i < family.size(); ++i) {
    StructureMorphism pi{out.product, family[i], {}};
    for (const auto& s : sig.sorts) pi.components.emplace(s, out.sort_cones.at(s).leg(i));
    out.projections.push_back(std::move(pi));
  }
  return out;
}

}  // namespace topos
