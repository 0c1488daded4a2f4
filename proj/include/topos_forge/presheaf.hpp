#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "topos_forge/category.hpp"
#include "topos_forge/error.hpp"

namespace topos {

/// Index of an element inside one carrier. Element identity is the string
/// id stored in the carrier; indices are positions in that list.
using Elem = std::size_t;
using Carrier = std::vector<std::string>;
using Function = std::vector<Elem>;

/// A contravariant functor from the base category to finite sets.
struct Presheaf {
  CategoryRef base;
  /// carrier[c]: element ids at stage c, unique per carrier.
  std::vector<Carrier> carrier;
  /// action[f] for f : a → b maps carrier[b] to carrier[a].
  std::vector<Function> action;

  const FinCategory& category() const { return *base; }
  std::size_t size(ObjectId c) const { return carrier.at(c).size(); }
  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& c : carrier) n += c.size();
    return n;
  }
  bool empty_at(ObjectId c) const { return carrier.at(c).empty(); }

  /// x · f for x at cod(f).
  Elem restrict(MorphismId f, Elem x) const { return action[f][x]; }

  const std::string& id(ObjectId c, Elem x) const { return carrier.at(c).at(x); }

  std::optional<Elem> find(ObjectId c, const std::string& id) const {
    const auto& car = carrier.at(c);
    for (Elem x = 0; x < car.size(); ++x) {
      if (car[x] == id) return x;
    }
    return std::nullopt;
  }

  bool operator==(const Presheaf& o) const {
    return same_category(base, o.base) && carrier == o.carrier && action == o.action;
  }
};

using PresheafRef = std::shared_ptr<const Presheaf>;

inline PresheafRef share(Presheaf p) { return std::make_shared<const Presheaf>(std::move(p)); }

inline bool same_presheaf(const PresheafRef& a, const PresheafRef& b) {
  return a == b || (a && b && *a == *b);
}

/// A natural transformation between presheaves over the same base.
struct PresheafMap {
  PresheafRef src;
  PresheafRef dst;
  /// components[c] maps src.carrier[c] to dst.carrier[c].
  std::vector<Function> components;

  Elem operator()(ObjectId c, Elem x) const { return components[c][x]; }
  const FinCategory& category() const { return src->category(); }

  bool operator==(const PresheafMap& o) const {
    return same_presheaf(src, o.src) && same_presheaf(dst, o.dst) && components == o.components;
  }
};

/// Functoriality check: carriers have unique ids, actions are total and
/// well-typed, identities act trivially and composites act contravariantly.
inline Report validate_presheaf(const Presheaf& X) {
  Report report;
  if (!X.base) {
    report.add("presheaf has no base category");
    return report;
  }
  const FinCategory& C = *X.base;
  if (X.carrier.size() != C.object_count()) {
    report.add("carrier does not cover every object");
    return report;
  }
  if (X.action.size() != C.morphism_count()) {
    report.add("action does not cover every morphism");
    return report;
  }
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    std::unordered_map<std::string, int> seen;
    for (const auto& id : X.carrier[c]) {
      if (seen[id]++ == 1) report.add("duplicate element id '" + id + "' at stage " + C.object_name(c));
    }
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    const auto& m = C.morphism(f);
    if (X.action[f].size() != X.size(m.cod)) {
      report.add("action of " + m.name + " is not defined on all of stage " + C.object_name(m.cod));
      continue;
    }
    for (Elem x = 0; x < X.action[f].size(); ++x) {
      if (X.action[f][x] >= X.size(m.dom)) {
        report.add("action of " + m.name + " sends '" + X.id(m.cod, x) + "' outside stage " +
                   C.object_name(m.dom));
      }
    }
  }
  if (!report.ok()) return report;
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    const auto& act = X.action[C.identity(c)];
    for (Elem x = 0; x < act.size(); ++x) {
      if (act[x] != x) {
        report.add("identity at stage " + C.object_name(c) + " moves '" + X.id(c, x) + "'");
      }
    }
  }
  for (const auto& [key, h] : C.composition_table()) {
    auto [g, f] = key;
    // (g ∘ f)^* = f^* ∘ g^*
    ObjectId top = C.cod(g);
    for (Elem x = 0; x < X.size(top); ++x) {
      if (X.restrict(h, x) != X.restrict(f, X.restrict(g, x))) {
        report.add("action of " + C.morphism(h).name + " disagrees with " + C.morphism(g).name + " then " +
                   C.morphism(f).name + " on '" + X.id(top, x) + "'");
      }
    }
  }
  return report;
}

/// Well-typedness and naturality of a PresheafMap, elementwise at every stage.
inline Report validate_map(const PresheafMap& h) {
  Report report;
  if (!h.src || !h.dst) {
    report.add("map is missing its source or target");
    return report;
  }
  if (!same_category(h.src->base, h.dst->base)) {
    report.add("source and target live over different bases");
    return report;
  }
  const FinCategory& C = h.category();
  if (h.components.size() != C.object_count()) {
    report.add("components do not cover every object");
    return report;
  }
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    if (h.components[c].size() != h.src->size(c)) {
      report.add("component at " + C.object_name(c) + " is not total");
      continue;
    }
    for (Elem x : h.components[c]) {
      if (x >= h.dst->size(c)) report.add("component at " + C.object_name(c) + " leaves the target carrier");
    }
  }
  if (!report.ok()) return report;
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    ObjectId a = C.dom(f), b = C.cod(f);
    for (Elem x = 0; x < h.src->size(b); ++x) {
      if (h.dst->restrict(f, h(b, x)) != h(a, h.src->restrict(f, x))) {
        report.add("naturality fails for " + C.morphism(f).name + " at stage " + C.object_name(b) + " on '" +
                   h.src->id(b, x) + "'");
      }
    }
  }
  return report;
}

inline PresheafMap identity_map(const PresheafRef& X) {
  PresheafMap id{X, X, {}};
  id.components.resize(X->carrier.size());
  for (ObjectId c = 0; c < X->carrier.size(); ++c) {
    id.components[c].resize(X->size(c));
    for (Elem x = 0; x < X->size(c); ++x) id.components[c][x] = x;
  }
  return id;
}

/// g ∘ f.
inline PresheafMap compose(const PresheafMap& g, const PresheafMap& f) {
  if (!same_presheaf(f.dst, g.src)) throw ShapeError("compose: target of the first map is not the source of the second");
  PresheafMap h{f.src, g.dst, {}};
  h.components.resize(f.components.size());
  for (ObjectId c = 0; c < f.components.size(); ++c) {
    h.components[c].reserve(f.components[c].size());
    for (Elem x : f.components[c]) h.components[c].push_back(g.components[c][x]);
  }
  return h;
}

/// Escapes the characters used as tuple delimiters so that tuple ids stay
/// injective.
inline std::string escape_id(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char ch : id) {
    if (ch == ',' || ch == '(' || ch == ')' || ch == '\\' || ch == '{' || ch == '}' || ch == '|') out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}

inline std::string tuple_id(std::span<const std::string* const> parts) {
  std::string out = "(";
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += ",";
    out += escape_id(*parts[k]);
  }
  out += ")";
  return out;
}

/// The representable presheaf y(d) = Hom(-, d). Element ids are morphism names.
inline PresheafRef representable(const CategoryRef& base, ObjectId d) {
  const FinCategory& C = *base;
  Presheaf y{base, std::vector<Carrier>(C.object_count()), std::vector<Function>(C.morphism_count())};
  // index of each morphism inside its hom-set
  std::vector<Elem> position(C.morphism_count(), 0);
  for (MorphismId h = 0; h < C.morphism_count(); ++h) {
    if (C.cod(h) != d) continue;
    position[h] = y.carrier[C.dom(h)].size();
    y.carrier[C.dom(h)].push_back(C.morphism(h).name);
  }
  std::vector<std::vector<MorphismId>> hom(C.object_count());
  for (MorphismId h = 0; h < C.morphism_count(); ++h) {
    if (C.cod(h) == d) hom[C.dom(h)].push_back(h);
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    for (MorphismId h : hom[C.cod(f)]) y.action[f].push_back(position[C.compose(h, f)]);
  }
  return share(std::move(y));
}

/// The Yoneda map y(d) → X classifying x ∈ X(d): h ↦ x · h.
inline PresheafMap yoneda_map(const PresheafRef& X, ObjectId d, Elem x) {
  const FinCategory& C = X->category();
  PresheafRef y = representable(X->base, d);
  PresheafMap m{y, X, std::vector<Function>(C.object_count())};
  for (MorphismId h = 0; h < C.morphism_count(); ++h) {
    if (C.cod(h) == d) m.components[C.dom(h)].push_back(X->restrict(h, x));
  }
  return m;
}

}  // namespace topos
