#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "topos_forge/colimits.hpp"
#include "topos_forge/error.hpp"
#include "topos_forge/factorization.hpp"
#include "topos_forge/formula.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/natural_search.hpp"
#include "topos_forge/semantics.hpp"
#include "topos_forge/subobject.hpp"

namespace topos {

/// Outcome of checking one rule instance at a generalized element.
struct RuleReport {
  std::string rule;
  bool forced = false;       ///< M ⊨_α x⃗.φ
  bool rule_side = false;    ///< the right-hand side of the rule
  bool monotone = true;      ///< forcing survives every tested f : V → U
  bool local = true;         ///< forcing descends along every tested epi
  std::size_t probes = 0;    ///< number of test maps V → U used
  bool truncated = false;    ///< Sub(U) or a hom-set exceeded its cap; representables still cover
  std::vector<std::string> notes;

  bool both_directions() const { return forced == rule_side; }
  bool ok() const { return both_directions() && monotone && local; }
};

struct RuleCheckOptions {
  std::size_t max_subobjects = 256;
  std::size_t max_homs = 256;
};

namespace detail {

/// Test maps into U: inclusions of all subobjects of U (when within the cap)
/// and the Yoneda maps of all elements.
inline std::vector<PresheafMap> probes_into(const PresheafRef& U, const RuleCheckOptions& opt, bool& truncated) {
  std::vector<PresheafMap> out;
  try {
    for (const auto& S : sub_enumerate(U, opt.max_subobjects).elements) out.push_back(as_presheaf(S).legs[0]);
  } catch (const ResourceError&) {
    truncated = true;
    out.clear();
    out.push_back(identity_map(U));
  }
  const FinCategory& C = U->category();
  for (ObjectId d = 0; d < C.object_count(); ++d) {
    for (Elem u = 0; u < U->size(d); ++u) out.push_back(yoneda_map(U, d, u));
  }
  return out;
}

/// ∐_{d, u ∈ U(d)} y(d) → U, an epimorphism.
inline PresheafMap representable_cover(const PresheafRef& U) {
  const FinCategory& C = U->category();
  std::vector<PresheafRef> pieces;
  std::vector<PresheafMap> maps;
  for (ObjectId d = 0; d < C.object_count(); ++d) {
    for (Elem u = 0; u < U->size(d); ++u) {
      maps.push_back(yoneda_map(U, d, u));
      pieces.push_back(maps.back().src);
    }
  }
  Cone sum = coproduct(U->base, pieces);
  PresheafMap out{sum.apex, U, std::vector<Function>(C.object_count())};
  for (ObjectId c = 0; c < C.object_count(); ++c) out.components[c].resize(sum.apex->size(c));
  for (std::size_t k = 0; k < maps.size(); ++k) {
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      for (Elem v = 0; v < maps[k].src->size(c); ++v) out.components[c][sum.legs[k](c, v)] = maps[k](c, v);
    }
  }
  return out;
}

}  // namespace detail

/// Checks the rule of the top connective of φ at α : U → M_x⃗ using
/// canonical witnesses, together with monotonicity and local character.
inline RuleReport kj_rule_check(Interpreter& I, const Context& ctx, const PresheafMap& alpha, const Formula& f,
                                const RuleCheckOptions& opt = {}) {
  using K = Formula::Kind;
  const ProductCone& X = I.context_object(ctx);
  if (!same_presheaf(alpha.dst, X.apex())) throw ContextError("generalized element does not land in M" + context_text(ctx));
  const PresheafRef& U = alpha.src;
  const FinCategory& C = U->category();
  RuleReport rep;
  Subfunctor phi = I.formula(ctx, f);
  rep.forced = forced(alpha, phi);

  std::vector<PresheafMap> probes = detail::probes_into(U, opt, rep.truncated);
  rep.probes = probes.size();
  auto forced_at = [&](const Subfunctor& S, const PresheafMap& p) { return forced(compose(alpha, p), S); };
  auto empty = [](const PresheafRef& V) { return V->total_size() == 0; };

  switch (f.kind) {
    case K::Top:
      rep.rule = "top";
      rep.rule_side = true;
      break;
    case K::Bottom:
      rep.rule = "bottom";
      rep.rule_side = empty(U);
      break;
    case K::Eq:
    case K::Rel: {
      rep.rule = f.kind == K::Eq ? "equality" : "relation";
      // α factors through the equalizer / pullback: checked elementwise.
      rep.rule_side = true;
      for (ObjectId c = 0; c < C.object_count() && rep.rule_side; ++c) {
        for (Elem u = 0; u < U->size(c) && rep.rule_side; ++u) {
          rep.rule_side = phi.contains(c, alpha(c, u));
        }
      }
      break;
    }
    case K::And: {
      rep.rule = "and";
      rep.rule_side = forced(alpha, I.formula(ctx, f.lhs())) && forced(alpha, I.formula(ctx, f.rhs()));
      break;
    }
    case K::Or: {
      rep.rule = "or";
      Subfunctor V = base_change(alpha, I.formula(ctx, f.lhs()));
      Subfunctor W = base_change(alpha, I.formula(ctx, f.rhs()));
      bool cover = join(V, W) == top(U);
      // The canonical witnesses force their disjuncts by construction.
      bool vf = forced_at(I.formula(ctx, f.lhs()), as_presheaf(V).legs[0]);
      bool wf = forced_at(I.formula(ctx, f.rhs()), as_presheaf(W).legs[0]);
      if (!vf || !wf) rep.notes.push_back("canonical disjunct witness does not force its disjunct");
      rep.rule_side = cover && vf && wf;
      break;
    }
    case K::Implies:
    case K::Not: {
      rep.rule = f.kind == K::Implies ? "implies" : "not";
      Subfunctor psi = I.formula(ctx, f.children[0]);
      Subfunctor chi = f.kind == K::Implies ? I.formula(ctx, f.rhs()) : bottom(X.apex());
      rep.rule_side = true;
      for (const auto& p : probes) {
        if (!forced_at(psi, p)) continue;
        bool ok = f.kind == K::Implies ? forced_at(chi, p) : empty(p.src);
        if (!ok) {
          rep.rule_side = false;
          break;
        }
      }
      break;
    }
    case K::Exists: {
      rep.rule = "exists";
      Context inner = extend_context(ctx, f.symbol, f.sort);
      const ProductCone& Y = I.context_object(inner);
      Subfunctor body = I.formula(inner, f.body());
      const PresheafRef& Ms = I.structure().sort(f.sort);
      ProductCone UM(U->base, {U, Ms});
      // V = {(u, b) | (α(u), b) ∈ [[x⃗y.ψ]]}
      Subfunctor Vs = bottom(UM.apex());
      for (ObjectId c = 0; c < C.object_count(); ++c) {
        for (Elem w = 0; w < UM.apex()->size(c); ++w) {
          std::vector<Elem> coords = X.decode(c, alpha(c, UM.coordinate(c, w, 0)));
          coords.push_back(UM.coordinate(c, w, 1));
          Vs.parts[c][w] = body.contains(c, Y.encode(c, coords));
        }
      }
      Cone V = as_presheaf(Vs);
      PresheafMap p = compose(UM.leg(0), V.legs[0]);
      PresheafMap beta = compose(UM.leg(1), V.legs[0]);
      std::vector<PresheafMap> legs;
      for (std::size_t k = 0; k < X.arity(); ++k) legs.push_back(compose(X.leg(k), compose(alpha, p)));
      legs.push_back(beta);
      bool witness = forced(Y.pairing(V.apex, legs), body);
      if (!witness) rep.notes.push_back("canonical existential witness does not force the body");
      rep.rule_side = is_epi(p) && witness;
      break;
    }
    case K::Forall: {
      rep.rule = "forall";
      Context inner = extend_context(ctx, f.symbol, f.sort);
      const ProductCone& Y = I.context_object(inner);
      Subfunctor body = I.formula(inner, f.body());
      const PresheafRef& Ms = I.structure().sort(f.sort);
      rep.rule_side = true;
      for (const auto& p : probes) {
        std::vector<PresheafMap> betas;
        try {
          betas = hom_enumerate(p.src, Ms, opt.max_homs);
        } catch (const ResourceError&) {
          rep.truncated = true;
          continue;  // representable probes are never truncated
        }
        PresheafMap ap = compose(alpha, p);
        for (const auto& beta : betas) {
          std::vector<PresheafMap> legs;
          for (std::size_t k = 0; k < X.arity(); ++k) legs.push_back(compose(X.leg(k), ap));
          legs.push_back(beta);
          if (!forced(Y.pairing(p.src, legs), body)) {
            rep.rule_side = false;
            break;
          }
        }
        if (!rep.rule_side) break;
      }
      break;
    }
  }

  // Monotonicity along every probe, local character along the cover.
  if (rep.forced) {
    for (const auto& p : probes) {
      if (!forced_at(phi, p)) {
        rep.monotone = false;
        rep.notes.push_back("forcing lost along a map into U");
        break;
      }
    }
  }
  PresheafMap cover = detail::representable_cover(U);
  if (!is_epi(cover)) throw Error("representable cover is not epic");
  if (forced_at(phi, cover) && !rep.forced) {
    rep.local = false;
    rep.notes.push_back("forcing holds on an epi cover but not at α");
  }
  return rep;
}

inline RuleReport kj_rule_check(const StructureRef& M, const Context& ctx, const PresheafMap& alpha, const Formula& f,
                                const RuleCheckOptions& opt = {}) {
  Interpreter I(M);
  return kj_rule_check(I, ctx, alpha, f, opt);
}

}  // namespace topos
