#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"

namespace topos {

using ObjectId = std::size_t;
using MorphismId = std::size_t;

struct Morphism {
  std::string name;
  ObjectId dom = 0;
  ObjectId cod = 0;

  bool operator==(const Morphism&) const = default;
};

/// A finite category with a fully materialized composition table.
///
/// The table may be incomplete or wrong; `validate_category` reports the
/// violated axioms. All other operations assume a valid category.
class FinCategory {
 public:
  FinCategory() = default;

  FinCategory(std::vector<std::string> objects, std::vector<Morphism> morphisms,
              std::vector<MorphismId> identity,
              std::map<std::pair<MorphismId, MorphismId>, MorphismId> composition)
      : objects_(std::move(objects)),
        morphisms_(std::move(morphisms)),
        identity_(std::move(identity)),
        composition_(std::move(composition)) {
    incoming_.resize(objects_.size());
    for (MorphismId m = 0; m < morphisms_.size(); ++m) {
      if (morphisms_[m].cod < objects_.size()) incoming_[morphisms_[m].cod].push_back(m);
    }
  }

  std::size_t object_count() const noexcept { return objects_.size(); }
  std::size_t morphism_count() const noexcept { return morphisms_.size(); }

  const std::string& object_name(ObjectId c) const { return objects_.at(c); }
  const std::vector<std::string>& objects() const noexcept { return objects_; }
  const Morphism& morphism(MorphismId m) const { return morphisms_.at(m); }
  const std::vector<Morphism>& morphisms() const noexcept { return morphisms_; }
  ObjectId dom(MorphismId m) const { return morphisms_.at(m).dom; }
  ObjectId cod(MorphismId m) const { return morphisms_.at(m).cod; }
  MorphismId identity(ObjectId c) const { return identity_.at(c); }
  const std::vector<MorphismId>& identities() const noexcept { return identity_; }

  /// Morphisms whose codomain is `c`, in id order.
  const std::vector<MorphismId>& into(ObjectId c) const { return incoming_.at(c); }

  /// g ∘ f, if the table has an entry.
  std::optional<MorphismId> try_compose(MorphismId g, MorphismId f) const {
    auto it = composition_.find({g, f});
    if (it == composition_.end()) return std::nullopt;
    return it->second;
  }

  /// g ∘ f; throws if the pair is not composable or the entry is missing.
  MorphismId compose(MorphismId g, MorphismId f) const {
    auto r = try_compose(g, f);
    if (!r) {
      throw ShapeError("no composite " + morphisms_.at(g).name + " . " + morphisms_.at(f).name);
    }
    return *r;
  }

  const std::map<std::pair<MorphismId, MorphismId>, MorphismId>& composition_table() const noexcept {
    return composition_;
  }

  std::optional<ObjectId> find_object(const std::string& name) const {
    auto it = std::find(objects_.begin(), objects_.end(), name);
    if (it == objects_.end()) return std::nullopt;
    return static_cast<ObjectId>(it - objects_.begin());
  }

  std::optional<MorphismId> find_morphism(const std::string& name) const {
    for (MorphismId m = 0; m < morphisms_.size(); ++m) {
      if (morphisms_[m].name == name) return m;
    }
    return std::nullopt;
  }

  bool is_identity(MorphismId m) const {
    return identity_.at(morphisms_.at(m).dom) == m && morphisms_[m].dom == morphisms_[m].cod;
  }

  bool operator==(const FinCategory& o) const {
    return objects_ == o.objects_ && morphisms_ == o.morphisms_ && identity_ == o.identity_ &&
           composition_ == o.composition_;
  }

 private:
  std::vector<std::string> objects_;
  std::vector<Morphism> morphisms_;
  std::vector<MorphismId> identity_;
  std::map<std::pair<MorphismId, MorphismId>, MorphismId> composition_;
  std::vector<std::vector<MorphismId>> incoming_;
};

using CategoryRef = std::shared_ptr<const FinCategory>;

inline bool same_category(const CategoryRef& a, const CategoryRef& b) {
  return a == b || (a && b && *a == *b);
}

/// Incremental construction of a FinCategory by names. Identities are
/// added per object and every composite with an identity is filled in
/// unless an explicit entry overrides it.
class CategoryBuilder {
 public:
  ObjectId object(const std::string& name, const std::string& identity_name = {}) {
    ObjectId c = objects_.size();
    objects_.push_back(name);
    identity_.push_back(morphisms_.size());
    morphisms_.push_back({identity_name.empty() ? "id_" + name : identity_name, c, c});
    return c;
  }

  MorphismId morphism(const std::string& name, const std::string& dom, const std::string& cod) {
    MorphismId m = morphisms_.size();
    morphisms_.push_back({name, lookup_object(dom), lookup_object(cod)});
    return m;
  }

  /// Declares g ∘ f = h.
  CategoryBuilder& compose(const std::string& g, const std::string& f, const std::string& h) {
    explicit_[{lookup_morphism(g), lookup_morphism(f)}] = lookup_morphism(h);
    return *this;
  }

  CategoryRef build() const {
    std::map<std::pair<MorphismId, MorphismId>, MorphismId> table;
    for (MorphismId m = 0; m < morphisms_.size(); ++m) {
      table[{identity_[morphisms_[m].cod], m}] = m;
      table[{m, identity_[morphisms_[m].dom]}] = m;
    }
    for (const auto& [k, v] : explicit_) table[k] = v;
    return std::make_shared<const FinCategory>(objects_, morphisms_, identity_, std::move(table));
  }

  ObjectId lookup_object(const std::string& name) const {
    auto it = std::find(objects_.begin(), objects_.end(), name);
    if (it == objects_.end()) throw ShapeError("unknown object '" + name + "'");
    return static_cast<ObjectId>(it - objects_.begin());
  }

  MorphismId lookup_morphism(const std::string& name) const {
    for (MorphismId m = 0; m < morphisms_.size(); ++m) {
      if (morphisms_[m].name == name) return m;
    }
    throw ShapeError("unknown morphism '" + name + "'");
  }

 private:
  std::vector<std::string> objects_;
  std::vector<Morphism> morphisms_;
  std::vector<MorphismId> identity_;
  std::map<std::pair<MorphismId, MorphismId>, MorphismId> explicit_;
};

/// Checks the category axioms exhaustively: composites are defined exactly
/// on composable pairs and land in the right hom-set, identity laws hold,
/// and composition is associative.
inline Report validate_category(const FinCategory& C) {
  Report report;
  const auto n_obj = C.object_count();
  const auto n_mor = C.morphism_count();
  const auto& mor = C.morphisms();
  auto name = [&](MorphismId m) { return mor[m].name; };

  for (MorphismId m = 0; m < n_mor; ++m) {
    if (mor[m].dom >= n_obj || mor[m].cod >= n_obj) {
      report.add("morphism " + name(m) + " has an undeclared endpoint");
    }
  }
  if (!report.ok()) return report;
  if (C.identities().size() != n_obj) {
    report.add("identity table does not cover every object");
    return report;
  }
  for (ObjectId c = 0; c < n_obj; ++c) {
    MorphismId i = C.identity(c);
    if (i >= n_mor || mor[i].dom != c || mor[i].cod != c) {
      report.add("identity of " + C.object_name(c) + " is not an endomorphism of it");
    }
  }
  if (!report.ok()) return report;

  for (const auto& [key, h] : C.composition_table()) {
    auto [g, f] = key;
    if (g >= n_mor || f >= n_mor || h >= n_mor) {
      report.add("composition table references an unknown morphism");
      continue;
    }
    if (mor[f].cod != mor[g].dom) {
      report.add("composite " + name(g) + " . " + name(f) + " defined on a non-composable pair");
    } else if (mor[h].dom != mor[f].dom || mor[h].cod != mor[g].cod) {
      report.add("composite " + name(g) + " . " + name(f) + " = " + name(h) + " has the wrong type");
    }
  }
  for (MorphismId f = 0; f < n_mor; ++f) {
    for (MorphismId g = 0; g < n_mor; ++g) {
      if (mor[f].cod == mor[g].dom && !C.try_compose(g, f)) {
        report.add("composite " + name(g) + " . " + name(f) + " is missing");
      }
    }
  }
  if (!report.ok()) return report;

  for (MorphismId f = 0; f < n_mor; ++f) {
    if (C.compose(C.identity(mor[f].cod), f) != f) {
      report.add("identity law fails: id_cod . " + name(f) + " != " + name(f));
    }
    if (C.compose(f, C.identity(mor[f].dom)) != f) {
      report.add("identity law fails: " + name(f) + " . id_dom != " + name(f));
    }
  }
  for (MorphismId f = 0; f < n_mor; ++f) {
    for (MorphismId g = 0; g < n_mor; ++g) {
      if (mor[g].dom != mor[f].cod) continue;
      for (MorphismId h = 0; h < n_mor; ++h) {
        if (mor[h].dom != mor[g].cod) continue;
        if (C.compose(h, C.compose(g, f)) != C.compose(C.compose(h, g), f)) {
          report.add("associativity fails on " + name(h) + " . " + name(g) + " . " + name(f));
        }
      }
    }
  }
  return report;
}

// Standard small bases.

/// One object, one identity: presheaves are finite sets.
inline CategoryRef terminal_category() {
  CategoryBuilder b;
  b.object("*");
  return b.build();
}

/// a → b.
inline CategoryRef arrow_category() {
  CategoryBuilder b;
  b.object("a");
  b.object("b");
  b.morphism("f", "a", "b");
  return b.build();
}

/// V ⇉ E with s, t : V → E; presheaves are directed multigraphs.
inline CategoryRef graph_category() {
  CategoryBuilder b;
  b.object("V");
  b.object("E");
  b.morphism("s", "V", "E");
  b.morphism("t", "V", "E");
  return b.build();
}

/// a → b → c with the composite.
inline CategoryRef chain_category() {
  CategoryBuilder b;
  b.object("a");
  b.object("b");
  b.object("c");
  b.morphism("f", "a", "b");
  b.morphism("g", "b", "c");
  b.morphism("gf", "a", "c");
  b.compose("g", "f", "gf");
  return b.build();
}

/// Reflexive graphs: s, t : V → E, r : E → V with r∘s = r∘t = id_V.
/// Non-free; the endomorphisms s∘r and t∘r of E are idempotent.
inline CategoryRef reflexive_graph_category() {
  CategoryBuilder b;
  b.object("V");
  b.object("E");
  b.morphism("s", "V", "E");
  b.morphism("t", "V", "E");
  b.morphism("r", "E", "V");
  b.morphism("sr", "E", "E");
  b.morphism("tr", "E", "E");
  b.compose("r", "s", "id_V").compose("r", "t", "id_V");
  b.compose("s", "r", "sr").compose("t", "r", "tr");
  b.compose("sr", "s", "s").compose("sr", "t", "s").compose("tr", "s", "t").compose("tr", "t", "t");
  b.compose("r", "sr", "r").compose("r", "tr", "r");
  b.compose("sr", "sr", "sr").compose("sr", "tr", "sr").compose("tr", "sr", "tr").compose("tr", "tr", "tr");
  return b.build();
}

}  // namespace topos
