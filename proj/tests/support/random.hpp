#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "topos_forge/topos_forge.hpp"

namespace support {

using namespace topos;
using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// A quotient of a coproduct of representables by a random congruence,
/// merged down until every stage has at most `max_per_stage` elements.
inline PresheafRef random_presheaf(const CategoryRef& base, Rng& rng, std::size_t max_per_stage = 4,
                                   std::size_t max_generators = 3) {
  const FinCategory& C = *base;
  std::vector<PresheafRef> gens;
  std::size_t k = 1 + pick(rng, max_generators);
  for (std::size_t i = 0; i < k; ++i) gens.push_back(representable(base, pick(rng, C.object_count())));
  const PresheafRef S = coproduct(base, gens).apex;

  std::vector<std::vector<Elem>> parent(C.object_count());
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    parent[c].resize(S->size(c));
    std::iota(parent[c].begin(), parent[c].end(), 0);
  }
  std::function<Elem(ObjectId, Elem)> find = [&](ObjectId c, Elem x) {
    while (parent[c][x] != x) x = parent[c][x] = parent[c][parent[c][x]];
    return x;
  };
  std::function<void(ObjectId, Elem, Elem)> merge = [&](ObjectId c, Elem x, Elem y) {
    Elem a = find(c, x), b = find(c, y);
    if (a == b) return;
    parent[c][std::max(a, b)] = std::min(a, b);
    for (MorphismId f : C.into(c)) merge(C.dom(f), S->restrict(f, x), S->restrict(f, y));
  };
  auto classes = [&](ObjectId c) {
    std::size_t n = 0;
    for (Elem x = 0; x < S->size(c); ++x) n += find(c, x) == x ? 1 : 0;
    return n;
  };
  auto random_merge = [&](ObjectId c) {
    if (S->size(c) < 2) return;
    merge(c, pick(rng, S->size(c)), pick(rng, S->size(c)));
  };
  std::size_t extra = pick(rng, 4);
  for (std::size_t i = 0; i < extra; ++i) random_merge(pick(rng, C.object_count()));
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    while (classes(c) > max_per_stage) random_merge(c);
  }

  Presheaf X{base, std::vector<Carrier>(C.object_count()), std::vector<Function>(C.morphism_count())};
  std::vector<std::vector<Elem>> index(C.object_count());
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    index[c].assign(S->size(c), 0);
    for (Elem x = 0; x < S->size(c); ++x) {
      if (find(c, x) != x) continue;
      index[c][x] = X.carrier[c].size();
      X.carrier[c].push_back(C.object_name(c) + std::to_string(X.carrier[c].size()));
    }
    for (Elem x = 0; x < S->size(c); ++x) index[c][x] = index[c][find(c, x)];
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    ObjectId a = C.dom(f), b = C.cod(f);
    X.action[f].resize(X.size(b));
    for (Elem x = 0; x < S->size(b); ++x) {
      if (find(b, x) == x) X.action[f][index[b][x]] = index[a][S->restrict(f, x)];
    }
  }
  return share(std::move(X));
}

/// The subpresheaf generated by a random set of elements.
inline Subfunctor random_subfunctor(const PresheafRef& X, Rng& rng, double density = 0.3) {
  const FinCategory& C = X->category();
  Subfunctor S = bottom(X);
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    for (Elem x = 0; x < X->size(c); ++x) {
      if (!coin(rng, density)) continue;
      for (MorphismId f : C.into(c)) S.parts[C.dom(f)][X->restrict(f, x)] = true;
    }
  }
  return S;
}

/// A natural map chosen among the first few the search finds, if any exists.
inline std::optional<PresheafMap> random_map(const PresheafRef& X, const PresheafRef& Y, Rng& rng,
                                             std::size_t window = 64) {
  std::vector<PresheafMap> found;
  search_natural_maps(
      X, Y, [](ObjectId, Elem, Elem) { return true; },
      [&](PresheafMap h) {
        found.push_back(std::move(h));
        return found.size() < window;
      });
  if (found.empty()) return std::nullopt;
  return found[pick(rng, found.size())];
}

/// A random structure; sorts that must receive a function get a point added
/// when no natural map exists.
inline StructureRef random_structure(const SignatureRef& sig, const CategoryRef& base, Rng& rng,
                                     std::size_t max_per_stage = 3) {
  for (int attempt = 0;; ++attempt) {
    Structure M{sig, base, {}, {}, {}};
    for (const auto& s : sig->sorts) {
      PresheafRef X = random_presheaf(base, rng, max_per_stage, 2);
      if (attempt > 8) X = coproduct(base, {X, terminal(base)}).apex;
      M.sorts.emplace(s, X);
    }
    bool ok = true;
    for (const auto& [f, prof] : sig->functions) {
      ProductCone dom = M.product_of(prof.args);
      auto h = random_map(dom.apex(), M.sort(prof.result), rng);
      if (!h) {
        ok = false;
        break;
      }
      M.functions.emplace(f, std::move(*h));
    }
    if (!ok) continue;
    for (const auto& [r, args] : sig->relations) M.relations.emplace(r, random_subfunctor(M.product_of(args).apex(), rng));
    return share(std::move(M));
  }
}

/// Random well-sorted formulas over a signature.
class FormulaGen {
 public:
  FormulaGen(SignatureRef sig, Rng& rng) : sig_(std::move(sig)), rng_(rng) {}

  double shadow = 0.15;
  bool allow_constants_top = true;

  Formula formula(const Context& ctx, std::size_t depth) {
    scope_ = ctx;
    fresh_ = 0;
    return gen(depth);
  }

  Context context(std::size_t max_vars) {
    Context ctx;
    std::size_t n = pick(rng_, max_vars + 1);
    for (std::size_t i = 0; i < n; ++i) ctx.push_back({"x" + std::to_string(i), sig_->sorts[pick(rng_, sig_->sorts.size())]});
    return ctx;
  }

 private:
  std::optional<Term> term(const std::string& sort, std::size_t depth) {
    std::vector<std::string> vars;
    for (std::size_t k = 0; k < scope_.size(); ++k) {
      bool shadowed = false;
      for (std::size_t j = k + 1; j < scope_.size(); ++j) shadowed = shadowed || scope_[j].name == scope_[k].name;
      if (!shadowed && scope_[k].sort == sort) vars.push_back(scope_[k].name);
    }
    std::vector<std::string> funs;
    for (const auto& [f, prof] : sig_->functions) {
      if (prof.result == sort && (depth > 0 || prof.args.empty())) funs.push_back(f);
    }
    if (!vars.empty() && (funs.empty() || coin(rng_, 0.7))) return Term::var(vars[pick(rng_, vars.size())]);
    if (funs.empty()) return std::nullopt;
    const std::string& f = funs[pick(rng_, funs.size())];
    std::vector<Term> args;
    for (const auto& a : sig_->functions.at(f).args) {
      auto t = term(a, depth - 1);
      if (!t) return std::nullopt;
      args.push_back(std::move(*t));
    }
    return Term::app(f, std::move(args));
  }

  Formula atom() {
    for (int tries = 0; tries < 8; ++tries) {
      std::size_t roll = pick(rng_, 10);
      if (roll == 0 && allow_constants_top) return coin(rng_) ? Formula::top() : Formula::bottom();
      if (roll < 4) {
        const std::string& s = sig_->sorts[pick(rng_, sig_->sorts.size())];
        auto a = term(s, 1), b = term(s, 1);
        if (a && b) return Formula::eq(*a, *b);
        continue;
      }
      if (sig_->relations.empty()) continue;
      auto it = sig_->relations.begin();
      std::advance(it, pick(rng_, sig_->relations.size()));
      std::vector<Term> ts;
      bool ok = true;
      for (const auto& s : it->second) {
        auto t = term(s, 1);
        if (!t) {
          ok = false;
          break;
        }
        ts.push_back(std::move(*t));
      }
      if (ok) return Formula::rel(it->first, std::move(ts));
    }
    return Formula::top();
  }

  Formula gen(std::size_t depth) {
    if (depth <= 1 || coin(rng_, 0.2)) return atom();
    switch (pick(rng_, 6)) {
      case 0: return Formula::conj(gen(depth - 1), gen(depth - 1));
      case 1: return Formula::disj(gen(depth - 1), gen(depth - 1));
      case 2: return Formula::implies(gen(depth - 1), gen(depth - 1));
      case 3: return Formula::negation(gen(depth - 1));
      default: {
        const std::string& s = sig_->sorts[pick(rng_, sig_->sorts.size())];
        std::string v = !scope_.empty() && coin(rng_, shadow) ? scope_[pick(rng_, scope_.size())].name
                                                             : "v" + std::to_string(fresh_++);
        bool ex = coin(rng_);
        scope_.push_back({v, s});
        Formula body = gen(depth - 1);
        scope_.pop_back();
        return ex ? Formula::exists(v, s, std::move(body)) : Formula::forall(v, s, std::move(body));
      }
    }
  }

  SignatureRef sig_;
  Rng& rng_;
  Context scope_;
  std::size_t fresh_ = 0;
};

}  // namespace support
