#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/formula.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/presheaf.hpp"
#include "topos_forge/structure.hpp"
#include "topos_forge/subobject.hpp"

namespace topos {

// ---- digests --------------------------------------------------------------

namespace detail {

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  void num(std::size_t n) { bytes(std::to_string(n)); }
};

inline void digest_presheaf(Fnv& d, const Presheaf& X) {
  for (const auto& car : X.carrier) {
    d.num(car.size());
    for (const auto& id : car) d.bytes(id);
  }
  for (const auto& act : X.action) {
    for (Elem x : act) d.num(x);
  }
}

}  // namespace detail

/// Hash of a canonical dump of the structure and its base.
inline std::uint64_t structure_digest(const Structure& M) {
  detail::Fnv d;
  const FinCategory& C = *M.base;
  for (const auto& o : C.objects()) d.bytes(o);
  for (const auto& m : C.morphisms()) {
    d.bytes(m.name);
    d.num(m.dom);
    d.num(m.cod);
  }
  for (const auto& [key, h] : C.composition_table()) {
    d.num(key.first);
    d.num(key.second);
    d.num(h);
  }
  for (const auto& s : M.sig->sorts) d.bytes("sort " + s);
  for (const auto& [s, X] : M.sorts) {
    d.bytes(s);
    detail::digest_presheaf(d, *X);
  }
  for (const auto& [f, h] : M.functions) {
    d.bytes("fun " + f);
    const auto& prof = M.sig->functions.at(f);
    for (const auto& a : prof.args) d.bytes(a);
    d.bytes(prof.result);
    for (const auto& comp : h.components) {
      for (Elem x : comp) d.num(x);
    }
  }
  for (const auto& [r, S] : M.relations) {
    d.bytes("rel " + r);
    for (const auto& a : M.sig->relations.at(r)) d.bytes(a);
    for (const auto& p : S.parts) {
      for (bool b : p) d.num(b);
    }
  }
  return d.h;
}

/// Interpretations shared between evaluations, keyed by (digest, context,
/// formula). Entries are deterministic, so concurrent writers of one key
/// store equal values.
class InterpCache {
 public:
  std::optional<Parts> get(const std::string& key) const {
    std::shared_lock lock(mu_);
    auto it = table_.find(key);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }
  void put(const std::string& key, const Parts& value) {
    std::unique_lock lock(mu_);
    table_[key] = value;
  }
  std::size_t size() const {
    std::shared_lock lock(mu_);
    return table_.size();
  }

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Parts> table_;
};

// ---- subobject interpretation ---------------------------------------------

/// Renames an existing variable called `name` so that a new binder of that
/// name can be appended without breaking distinctness.
inline Context extend_context(const Context& ctx, const std::string& name, const std::string& sort) {
  Context out = ctx;
  for (auto& v : out) {
    if (v.name != name) continue;
    for (std::size_t k = 1;; ++k) {
      std::string fresh = name + "#" + std::to_string(k);
      bool taken = false;
      for (const auto& w : out) taken = taken || w.name == fresh;
      if (!taken) {
        v.name = fresh;
        break;
      }
    }
  }
  out.push_back({name, sort});
  return out;
}

/// Evaluates terms and formulas of one structure as maps and subobjects.
/// Not thread-safe; share an InterpCache between instances instead.
class Interpreter {
 public:
  explicit Interpreter(StructureRef M, std::shared_ptr<InterpCache> cache = nullptr)
      : M_(std::move(M)), cache_(std::move(cache)) {
    if (cache_) digest_ = std::to_string(structure_digest(*M_)) + "|";
  }

  const Structure& structure() const { return *M_; }
  const StructureRef& structure_ref() const { return M_; }

  /// M_x⃗, shared across calls so that equal contexts give the same object.
  const ProductCone& context_object(const Context& ctx) {
    std::string key = context_text(ctx);
    auto it = contexts_.find(key);
    if (it != contexts_.end()) return it->second;
    return contexts_.emplace(key, topos::context_object(*M_, ctx)).first->second;
  }

  /// [[x⃗.t]] : M_x⃗ → M_s.
  PresheafMap term(const Context& ctx, const Term& t) {
    Report r = validate_context(*M_->sig, ctx);
    if (!r.ok()) throw ContextError(r.violations.front());
    term_sort(*M_->sig, ctx, t);
    return term_unchecked(ctx, t);
  }

  /// [[x⃗.φ]] as a subobject of M_x⃗.
  Subfunctor formula(const Context& ctx, const Formula& f) {
    Report r = validate_context(*M_->sig, ctx);
    if (!r.ok()) throw ContextError(r.violations.front());
    typecheck(*M_->sig, ctx, f);
    return formula_unchecked(ctx, f);
  }

 private:
  const ProductCone& arg_product(const std::vector<std::string>& sorts) {
    std::string key;
    for (const auto& s : sorts) key += s + ",";
    auto it = products_.find(key);
    if (it != products_.end()) return it->second;
    return products_.emplace(key, M_->product_of(sorts)).first->second;
  }

  PresheafMap tuple(const Context& ctx, const std::vector<Term>& ts, const std::vector<std::string>& sorts) {
    const ProductCone& X = context_object(ctx);
    std::vector<PresheafMap> parts;
    parts.reserve(ts.size());
    for (const auto& t : ts) parts.push_back(term_unchecked(ctx, t));
    return arg_product(sorts).pairing(X.apex(), parts);
  }

  PresheafMap term_unchecked(const Context& ctx, const Term& t) {
    const ProductCone& X = context_object(ctx);
    if (t.kind == Term::Kind::Var) {
      for (std::size_t k = ctx.size(); k-- > 0;) {
        if (ctx[k].name == t.name) return X.leg(k);
      }
      throw ContextError("variable " + t.name + " is not in the context");
    }
    const auto& prof = M_->sig->functions.at(t.name);
    return compose(M_->functions.at(t.name), tuple(ctx, t.args, prof.args));
  }

  Subfunctor formula_unchecked(const Context& ctx, const Formula& f) {
    const ProductCone& X = context_object(ctx);
    std::string key = context_text(ctx) + "|" + to_string(f);
    if (auto it = memo_.find(key); it != memo_.end()) return Subfunctor{X.apex(), it->second};
    if (cache_) {
      if (auto hit = cache_->get(digest_ + key)) {
        memo_.emplace(key, *hit);
        return Subfunctor{X.apex(), std::move(*hit)};
      }
    }
    Subfunctor S = compute(ctx, f);
    memo_.emplace(key, S.parts);
    if (cache_) cache_->put(digest_ + key, S.parts);
    return S;
  }

  Subfunctor compute(const Context& ctx, const Formula& f) {
    using K = Formula::Kind;
    const ProductCone& X = context_object(ctx);
    switch (f.kind) {
      case K::Top: return top(X.apex());
      case K::Bottom: return bottom(X.apex());
      case K::Eq: {
        Cone e = equalizer(term_unchecked(ctx, f.terms[0]), term_unchecked(ctx, f.terms[1]));
        return image_subobject(e.legs[0]);
      }
      case K::Rel: {
        const auto& args = M_->sig->relations.at(f.symbol);
        return base_change(tuple(ctx, f.terms, args), M_->relations.at(f.symbol));
      }
      case K::And: return meet(formula_unchecked(ctx, f.lhs()), formula_unchecked(ctx, f.rhs()));
      case K::Or: return join(formula_unchecked(ctx, f.lhs()), formula_unchecked(ctx, f.rhs()));
      case K::Implies: return impl(formula_unchecked(ctx, f.lhs()), formula_unchecked(ctx, f.rhs()));
      case K::Not: return neg(formula_unchecked(ctx, f.body()));
      case K::Exists:
      case K::Forall: {
        Context inner = extend_context(ctx, f.symbol, f.sort);
        Subfunctor body = formula_unchecked(inner, f.body());
        const ProductCone& Y = context_object(inner);
        std::vector<PresheafMap> legs(Y.legs().begin(), Y.legs().end() - 1);
        PresheafMap pi = X.pairing(Y.apex(), legs);
        return f.kind == K::Exists ? exists_along(pi, body) : forall_along(pi, body);
      }
    }
    throw Error("unreachable formula kind");
  }

  StructureRef M_;
  std::shared_ptr<InterpCache> cache_;
  std::string digest_;
  std::map<std::string, ProductCone> contexts_;
  std::map<std::string, ProductCone> products_;
  std::unordered_map<std::string, Parts> memo_;
};

inline PresheafMap interp_term(const StructureRef& M, const Context& ctx, const Term& t) {
  return Interpreter(M).term(ctx, t);
}

inline Subfunctor interp_formula(const StructureRef& M, const Context& ctx, const Formula& f) {
  return Interpreter(M).formula(ctx, f);
}

// ---- forcing --------------------------------------------------------------

struct ForcingJudgment {
  bool verdict = false;
  /// When forced: the corestriction U → {x⃗ | φ}.
  std::optional<PresheafMap> factoring;
  /// When not forced: a stage and an element of U whose image lies outside.
  struct Counterexample {
    ObjectId stage;
    Elem element;
    Elem image;
  };
  std::optional<Counterexample> counterexample;
};

/// M ⊨_α x⃗.φ given the interpretation S = [[x⃗.φ]].
inline ForcingJudgment forces_with(const PresheafMap& alpha, const Subfunctor& S) {
  if (!same_presheaf(alpha.dst, S.ambient)) throw ContextError("generalized element does not land in the context object");
  const FinCategory& C = alpha.category();
  ForcingJudgment j;
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    for (Elem u = 0; u < alpha.src->size(c); ++u) {
      if (!S.parts[c][alpha(c, u)]) {
        j.counterexample = ForcingJudgment::Counterexample{c, u, alpha(c, u)};
        return j;
      }
    }
  }
  j.verdict = true;
  Cone sub = as_presheaf(S);
  PresheafMap h{alpha.src, sub.apex, std::vector<Function>(C.object_count())};
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    std::vector<Elem> position(S.ambient->size(c), 0);
    for (Elem k = 0; k < sub.legs[0].components[c].size(); ++k) position[sub.legs[0].components[c][k]] = k;
    for (Elem u = 0; u < alpha.src->size(c); ++u) h.components[c].push_back(position[alpha(c, u)]);
  }
  j.factoring = std::move(h);
  return j;
}

/// Verdict only, without building witnesses.
inline bool forced(const PresheafMap& alpha, const Subfunctor& S) {
  for (ObjectId c = 0; c < alpha.components.size(); ++c) {
    for (Elem y : alpha.components[c]) {
      if (!S.parts[c][y]) return false;
    }
  }
  return true;
}

inline ForcingJudgment forces(Interpreter& I, const Context& ctx, const PresheafMap& alpha, const Formula& f) {
  Subfunctor S = I.formula(ctx, f);
  if (!same_presheaf(alpha.dst, S.ambient)) throw ContextError("generalized element does not land in M" + context_text(ctx));
  return forces_with(alpha, S);
}

inline ForcingJudgment forces(const StructureRef& M, const Context& ctx, const PresheafMap& alpha, const Formula& f) {
  Interpreter I(M);
  return forces(I, ctx, alpha, f);
}

/// M ⊨ x⃗.φ: forcing at the identity of M_x⃗.
inline bool models(Interpreter& I, const Context& ctx, const Formula& f) {
  return I.formula(ctx, f) == top(I.context_object(ctx).apex());
}

inline bool models(const StructureRef& M, const Context& ctx, const Formula& f) {
  Interpreter I(M);
  return models(I, ctx, f);
}

// ---- stage-wise forcing ---------------------------------------------------

/// Direct recursive forcing at (stage, element), written against the
/// presheaf data only; shares no code with Interpreter.
class StageForcing {
 public:
  explicit StageForcing(StructureRef M) : M_(std::move(M)) {
    for (const auto& [f, prof] : M_->sig->functions) arg_.emplace(f, M_->product_of(prof.args));
    for (const auto& [r, args] : M_->sig->relations) arg_.emplace("@" + r, M_->product_of(args));
  }

  /// Does element a ∈ M_x⃗(c) force φ at stage c?
  bool operator()(const Context& ctx, ObjectId c, Elem a, const Formula& f) {
    typecheck(*M_->sig, ctx, f);
    ProductCone X = context_object(*M_, ctx);
    if (c >= M_->base->object_count() || a >= X.apex()->size(c)) {
      throw PreconditionError("stage element is not in the carrier of M" + context_text(ctx));
    }
    Env env;
    for (std::size_t k = 0; k < ctx.size(); ++k) env.push_back({ctx[k].name, ctx[k].sort, X.coordinate(c, a, k)});
    return eval(env, c, f);
  }

 private:
  struct Binding {
    std::string name;
    std::string sort;
    Elem value;
  };
  using Env = std::vector<Binding>;

  Env restrict(const Env& env, MorphismId g) const {
    Env out = env;
    for (auto& b : out) b.value = M_->sorts.at(b.sort)->restrict(g, b.value);
    return out;
  }

  Elem value(const Env& env, ObjectId c, const Term& t) const {
    if (t.kind == Term::Kind::Var) {
      for (std::size_t k = env.size(); k-- > 0;) {
        if (env[k].name == t.name) return env[k].value;
      }
      throw ContextError("variable " + t.name + " is not in the context");
    }
    std::vector<Elem> args;
    for (const auto& a : t.args) args.push_back(value(env, c, a));
    return M_->functions.at(t.name)(c, arg_.at(t.name).encode(c, args));
  }

  bool eval(const Env& env, ObjectId c, const Formula& f) const {
    using K = Formula::Kind;
    const FinCategory& C = *M_->base;
    switch (f.kind) {
      case K::Top: return true;
      case K::Bottom: return false;
      case K::Eq: return value(env, c, f.terms[0]) == value(env, c, f.terms[1]);
      case K::Rel: {
        std::vector<Elem> args;
        for (const auto& t : f.terms) args.push_back(value(env, c, t));
        return M_->relations.at(f.symbol).contains(c, arg_.at("@" + f.symbol).encode(c, args));
      }
      case K::And: return eval(env, c, f.lhs()) && eval(env, c, f.rhs());
      case K::Or: return eval(env, c, f.lhs()) || eval(env, c, f.rhs());
      case K::Implies:
        for (MorphismId g : C.into(c)) {
          Env e = restrict(env, g);
          if (eval(e, C.dom(g), f.lhs()) && !eval(e, C.dom(g), f.rhs())) return false;
        }
        return true;
      case K::Not:
        for (MorphismId g : C.into(c)) {
          if (eval(restrict(env, g), C.dom(g), f.body())) return false;
        }
        return true;
      case K::Exists: {
        const Presheaf& S = *M_->sorts.at(f.sort);
        Env e = env;
        e.push_back({f.symbol, f.sort, 0});
        for (Elem b = 0; b < S.size(c); ++b) {
          e.back().value = b;
          if (eval(e, c, f.body())) return true;
        }
        return false;
      }
      case K::Forall: {
        const Presheaf& S = *M_->sorts.at(f.sort);
        for (MorphismId g : C.into(c)) {
          ObjectId d = C.dom(g);
          Env e = restrict(env, g);
          e.push_back({f.symbol, f.sort, 0});
          for (Elem b = 0; b < S.size(d); ++b) {
            e.back().value = b;
            if (!eval(e, d, f.body())) return false;
          }
        }
        return true;
      }
    }
    return false;
  }

  StructureRef M_;
  std::map<std::string, ProductCone> arg_;
};

inline bool stage_forcing(const StructureRef& M, const Context& ctx, ObjectId c, Elem a, const Formula& f) {
  return StageForcing(M)(ctx, c, a, f);
}

}  // namespace topos
