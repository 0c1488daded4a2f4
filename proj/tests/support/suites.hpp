#pragma once

// Exhaustive law checks shared by the unit tests and the acceptance runner.
// Each returns a Report whose violations name the failing instance.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "support/random.hpp"

namespace support {

namespace detail {

/// Sub(X) with its order and operations tabulated by index.
struct Lattice {
  SubEnumeration sub;
  std::map<Parts, std::size_t> index;
  std::vector<std::vector<bool>> leq;

  explicit Lattice(const PresheafRef& X, std::size_t cap = kDefaultSubobjectCap) : sub(sub_enumerate(X, cap)) {
    const std::size_t n = sub.size();
    for (std::size_t i = 0; i < n; ++i) index.emplace(sub.elements[i].parts, i);
    leq.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) leq[i][j] = sub.leq(i, j);
    }
  }

  std::size_t size() const { return sub.size(); }

  /// Index of S, or size() when S is not a listed subobject.
  std::size_t find(const Subfunctor& S) const {
    auto it = index.find(S.parts);
    return it == index.end() ? size() : it->second;
  }
};

}  // namespace detail

/// Lattice axioms, distributivity, Heyting residuation and negation on Sub(X).
inline Report heyting_laws(const PresheafRef& X, std::size_t* checked = nullptr) {
  Report rep;
  detail::Lattice L(X);
  const std::size_t n = L.size();
  std::vector<std::vector<std::size_t>> mt(n, std::vector<std::size_t>(n)), jn = mt, im = mt;
  std::size_t topi = L.find(top(X)), boti = L.find(bottom(X));
  if (topi == n || boti == n) rep.add("top or bottom is missing from the enumeration");
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const Subfunctor &A = L.sub.elements[a], &B = L.sub.elements[b];
      Subfunctor m = meet(A, B), j = join(A, B), i = impl(A, B);
      for (const Subfunctor* s : {&m, &j, &i}) {
        if (!validate_subfunctor(*s).ok()) rep.add("operation result is not closed under restriction");
      }
      mt[a][b] = L.find(m);
      jn[a][b] = L.find(j);
      im[a][b] = L.find(i);
      if (mt[a][b] == n || jn[a][b] == n || im[a][b] == n) rep.add("operation left the enumerated poset");
    }
  }
  if (!rep.ok()) return rep;
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    if (!L.leq[boti][a] || !L.leq[a][topi]) rep.add("bounds fail at " + std::to_string(a));
    if (mt[a][a] != a || jn[a][a] != a) rep.add("idempotence fails at " + std::to_string(a));
    if (L.find(neg(L.sub.elements[a])) != im[a][boti]) rep.add("negation is not implication into bottom");
    if (mt[a][im[a][boti]] != boti) rep.add("a and not a is not bottom at " + std::to_string(a));
    for (std::size_t b = 0; b < n; ++b) {
      if (mt[a][b] != mt[b][a] || jn[a][b] != jn[b][a]) rep.add("commutativity fails");
      if (jn[a][mt[a][b]] != a || mt[a][jn[a][b]] != a) rep.add("absorption fails");
      if (L.leq[a][b] != (mt[a][b] == a)) rep.add("order disagrees with meet");
      for (std::size_t c = 0; c < n; ++c) {
        ++count;
        if (mt[a][mt[b][c]] != mt[mt[a][b]][c] || jn[a][jn[b][c]] != jn[jn[a][b]][c]) rep.add("associativity fails");
        if (mt[a][jn[b][c]] != jn[mt[a][b]][mt[a][c]]) rep.add("distributivity fails");
        // c ∧ a ≤ b  ⇔  c ≤ (a ⇒ b)
        if (L.leq[mt[c][a]][b] != L.leq[c][im[a][b]]) {
          rep.add("residuation fails at (" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")");
        }
        if ((L.leq[c][a] && L.leq[c][b]) != L.leq[c][mt[a][b]]) rep.add("meet is not the greatest lower bound");
        if ((L.leq[a][c] && L.leq[b][c]) != L.leq[jn[a][b]][c]) rep.add("join is not the least upper bound");
      }
    }
  }
  if (checked) *checked += count;
  return rep;
}

/// ∃_f ⊣ f* ⊣ ∀_f on all pairs of subobjects, plus functoriality of f*.
inline Report galois_laws(const PresheafMap& f, std::size_t* checked = nullptr) {
  Report rep;
  detail::Lattice LX(f.src), LY(f.dst);
  std::vector<std::size_t> ex(LX.size()), fa(LX.size()), pb(LY.size());
  for (std::size_t a = 0; a < LX.size(); ++a) {
    ex[a] = LY.find(exists_along(f, LX.sub.elements[a]));
    fa[a] = LY.find(forall_along(f, LX.sub.elements[a]));
    if (ex[a] == LY.size() || fa[a] == LY.size()) rep.add("a quantifier image is not a subobject of the codomain");
  }
  for (std::size_t b = 0; b < LY.size(); ++b) {
    pb[b] = LX.find(base_change(f, LY.sub.elements[b]));
    if (pb[b] == LX.size()) rep.add("base change is not a subobject of the domain");
  }
  if (!rep.ok()) return rep;
  for (std::size_t a = 0; a < LX.size(); ++a) {
    for (std::size_t b = 0; b < LY.size(); ++b) {
      if (checked) ++*checked;
      if (LY.leq[ex[a]][b] != LX.leq[a][pb[b]]) rep.add("exists is not left adjoint to base change");
      if (LX.leq[pb[b]][a] != LY.leq[b][fa[a]]) rep.add("forall is not right adjoint to base change");
    }
  }
  for (std::size_t b1 = 0; b1 < LY.size(); ++b1) {
    for (std::size_t b2 = 0; b2 < LY.size(); ++b2) {
      std::size_t m = LY.find(meet(LY.sub.elements[b1], LY.sub.elements[b2]));
      if (pb[m] != LX.find(meet(LX.sub.elements[pb[b1]], LX.sub.elements[pb[b2]]))) {
        rep.add("base change does not preserve meets");
      }
    }
  }
  return rep;
}

/// Sub(X) ≅ Hom(X, Ω) and the pullback square of every characteristic map.
inline Report classifier_laws(const PresheafRef& X, const Omega& W, std::size_t* monos = nullptr) {
  Report rep;
  SubEnumeration sub = sub_enumerate(X);
  std::map<std::vector<Function>, std::size_t> seen;
  for (std::size_t k = 0; k < sub.size(); ++k) {
    const Subfunctor& S = sub.elements[k];
    PresheafMap chi = characteristic(W, S);
    if (!validate_map(chi).ok()) rep.add("characteristic map is not natural");
    if (!(subobject_of(W, chi) == S)) rep.add("classified subobject differs from the original");
    Cone inc = as_presheaf(S);
    if (!(characteristic(W, inc.legs[0]).components == chi.components)) {
      rep.add("the map and subfunctor forms of the characteristic map differ");
    }
    // Pullback of true along χ is S, with the pullback leg a mono.
    Cone P = pullback(chi, W.truth);
    if (!is_mono(P.legs[0])) rep.add("pullback leg is not mono");
    if (!(image_subobject(P.legs[0]) == S)) rep.add("pullback of true along chi is not the subobject");
    seen[chi.components] = k;
    if (monos) ++*monos;
  }
  if (seen.size() != sub.size()) rep.add("two subobjects share a characteristic map");
  std::vector<PresheafMap> homs = hom_enumerate(X, W.object, 1 << 16);
  if (homs.size() != sub.size()) {
    rep.add("|Hom(X, Omega)| = " + std::to_string(homs.size()) + " but |Sub(X)| = " + std::to_string(sub.size()));
  }
  for (const auto& h : homs) {
    if (!seen.count(h.components)) rep.add("a map into Omega classifies no enumerated subobject");
    if (!(characteristic(W, subobject_of(W, h)).components == h.components)) rep.add("chi of the classified subobject differs");
  }
  return rep;
}

/// Stage forcing against membership in the interpretation, at every stage and element.
inline std::size_t evaluator_disagreements(const StructureRef& M, const Context& ctx, const Formula& f,
                                           std::size_t* checked = nullptr) {
  Interpreter I(M);
  StageForcing sf(M);
  Subfunctor S = I.formula(ctx, f);
  const ProductCone& X = I.context_object(ctx);
  std::size_t bad = 0;
  for (ObjectId c = 0; c < M->base->object_count(); ++c) {
    for (Elem a = 0; a < X.apex()->size(c); ++a) {
      if (checked) ++*checked;
      if (sf(ctx, c, a, f) != S.contains(c, a)) ++bad;
    }
  }
  return bad;
}

}  // namespace support
