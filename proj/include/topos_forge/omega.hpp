#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/factorization.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/presheaf.hpp"
#include "topos_forge/subobject.hpp"

namespace topos {

/// A sieve on c as membership flags over all morphism ids (only morphisms
/// with codomain c may be set).
using Sieve = std::vector<bool>;

/// The subobject classifier of the presheaf topos on a finite base.
struct Omega {
  PresheafRef object;
  /// true : 1 → Ω, picking the maximal sieve at every stage.
  PresheafMap truth;
  /// sieves[c][k] is the k-th element of Ω(c).
  std::vector<std::vector<Sieve>> sieves;
  std::vector<std::map<Sieve, Elem>> index;

  Elem find(ObjectId c, const Sieve& s) const {
    auto it = index.at(c).find(s);
    if (it == index[c].end()) throw PreconditionError("not a sieve at stage " + object->category().object_name(c));
    return it->second;
  }
  Elem maximal(ObjectId c) const { return truth(c, 0); }
};

inline std::string sieve_id(const FinCategory& C, const Sieve& s) {
  std::string out = "{";
  bool first = true;
  for (MorphismId m = 0; m < s.size(); ++m) {
    if (!s[m]) continue;
    if (!first) out += ",";
    out += escape_id(C.morphism(m).name);
    first = false;
  }
  return out + "}";
}

/// Ω with sieves listed by increasing size, then by morphism-id flags.
inline Omega omega(const CategoryRef& base) {
  const FinCategory& C = *base;
  const std::size_t nm = C.morphism_count();
  Omega W;
  W.sieves.resize(C.object_count());
  W.index.resize(C.object_count());
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    const auto& in = C.into(c);
    if (in.size() > 20) throw ResourceError("too many morphisms into " + C.object_name(c) + " to enumerate sieves", 20);
    std::vector<Sieve> found;
    for (std::size_t mask = 0; mask < (std::size_t{1} << in.size()); ++mask) {
      Sieve s(nm, false);
      for (std::size_t k = 0; k < in.size(); ++k) s[in[k]] = (mask >> k) & 1U;
      bool closed = true;
      for (std::size_t k = 0; k < in.size() && closed; ++k) {
        if (!s[in[k]]) continue;
        for (MorphismId h : C.into(C.dom(in[k]))) {
          if (!s[C.compose(in[k], h)]) {
            closed = false;
            break;
          }
        }
      }
      if (closed) found.push_back(std::move(s));
    }
    std::stable_sort(found.begin(), found.end(), [](const Sieve& a, const Sieve& b) {
      auto na = std::count(a.begin(), a.end(), true), nb = std::count(b.begin(), b.end(), true);
      if (na != nb) return na < nb;
      return a > b;
    });
    W.sieves[c] = std::move(found);
    for (Elem k = 0; k < W.sieves[c].size(); ++k) W.index[c][W.sieves[c][k]] = k;
  }
  Presheaf P{base, std::vector<Carrier>(C.object_count()), std::vector<Function>(nm)};
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    for (const auto& s : W.sieves[c]) P.carrier[c].push_back(sieve_id(C, s));
  }
  for (MorphismId f = 0; f < nm; ++f) {
    ObjectId a = C.dom(f), b = C.cod(f);
    for (const auto& R : W.sieves[b]) {
      Sieve pulled(nm, false);
      for (MorphismId g : C.into(a)) pulled[g] = R[C.compose(f, g)];
      P.action[f].push_back(W.index[a].at(pulled));
    }
  }
  W.object = share(std::move(P));
  PresheafRef one = terminal(base);
  W.truth = PresheafMap{one, W.object, std::vector<Function>(C.object_count())};
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    Sieve all(nm, false);
    for (MorphismId g : C.into(c)) all[g] = true;
    W.truth.components[c] = {W.index[c].at(all)};
  }
  return W;
}

/// χ_S : X → Ω with χ_S(x) = {f | x·f ∈ S}.
inline PresheafMap characteristic(const Omega& W, const Subfunctor& S) {
  const Presheaf& X = *S.ambient;
  const FinCategory& C = X.category();
  PresheafMap chi{S.ambient, W.object, std::vector<Function>(C.object_count())};
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    for (Elem x = 0; x < X.size(c); ++x) {
      Sieve s(C.morphism_count(), false);
      for (MorphismId f : C.into(c)) s[f] = S.parts[C.dom(f)][X.restrict(f, x)];
      chi.components[c].push_back(W.find(c, s));
    }
  }
  return chi;
}

/// χ_m for a monomorphism m : U ↣ X.
inline PresheafMap characteristic(const Omega& W, const PresheafMap& m) {
  if (!is_mono(m)) throw PreconditionError("characteristic: the map is not a monomorphism");
  return characteristic(W, image_subobject(m));
}

/// The subobject classified by χ : X → Ω, i.e. the pullback of true.
inline Subfunctor subobject_of(const Omega& W, const PresheafMap& chi) {
  if (!same_presheaf(chi.dst, W.object)) throw ShapeError("subobject_of: map does not land in Ω");
  Subfunctor S = bottom(chi.src);
  for (ObjectId c = 0; c < S.parts.size(); ++c) {
    for (Elem x = 0; x < S.parts[c].size(); ++x) S.parts[c][x] = chi(c, x) == W.maximal(c);
  }
  return S;
}

}  // namespace topos
