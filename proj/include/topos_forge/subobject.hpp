#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/presheaf.hpp"

namespace topos {

/// A subpresheaf of `ambient`, given by membership flags per stage.
struct Subfunctor {
  PresheafRef ambient;
  Parts parts;

  bool contains(ObjectId c, Elem x) const { return parts[c][x]; }
  const FinCategory& category() const { return ambient->category(); }

  /// Componentwise inclusion.
  bool leq(const Subfunctor& o) const {
    for (ObjectId c = 0; c < parts.size(); ++c) {
      for (Elem x = 0; x < parts[c].size(); ++x) {
        if (parts[c][x] && !o.parts[c][x]) return false;
      }
    }
    return true;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& p : parts) {
      for (bool b : p) n += b;
    }
    return n;
  }

  bool operator==(const Subfunctor& o) const { return same_presheaf(ambient, o.ambient) && parts == o.parts; }
};

inline Report validate_subfunctor(const Subfunctor& S) {
  Report report;
  const Presheaf& X = *S.ambient;
  const FinCategory& C = X.category();
  if (S.parts.size() != C.object_count()) {
    report.add("subfunctor does not cover every object");
    return report;
  }
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    if (S.parts[c].size() != X.size(c)) {
      report.add("subfunctor flags at stage " + C.object_name(c) + " do not match the carrier");
      return report;
    }
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    ObjectId a = C.dom(f), b = C.cod(f);
    for (Elem x = 0; x < X.size(b); ++x) {
      if (S.parts[b][x] && !S.parts[a][X.restrict(f, x)]) {
        report.add("not closed under " + C.morphism(f).name + ": '" + X.id(b, x) + "' at stage " +
                   C.object_name(b) + " restricts outside at stage " + C.object_name(a));
      }
    }
  }
  return report;
}

inline Subfunctor top(const PresheafRef& X) {
  Subfunctor S{X, Parts(X->carrier.size())};
  for (ObjectId c = 0; c < X->carrier.size(); ++c) S.parts[c].assign(X->size(c), true);
  return S;
}

inline Subfunctor bottom(const PresheafRef& X) {
  Subfunctor S{X, Parts(X->carrier.size())};
  for (ObjectId c = 0; c < X->carrier.size(); ++c) S.parts[c].assign(X->size(c), false);
  return S;
}

namespace detail {

inline void same_ambient(const Subfunctor& A, const Subfunctor& B, const char* op) {
  if (!same_presheaf(A.ambient, B.ambient)) throw ShapeError(std::string(op) + ": subobjects of different objects");
}

}  // namespace detail

inline Subfunctor meet(const Subfunctor& A, const Subfunctor& B) {
  detail::same_ambient(A, B, "meet");
  Subfunctor S = A;
  for (ObjectId c = 0; c < S.parts.size(); ++c) {
    for (Elem x = 0; x < S.parts[c].size(); ++x) S.parts[c][x] = A.parts[c][x] && B.parts[c][x];
  }
  return S;
}

inline Subfunctor join(const Subfunctor& A, const Subfunctor& B) {
  detail::same_ambient(A, B, "join");
  Subfunctor S = A;
  for (ObjectId c = 0; c < S.parts.size(); ++c) {
    for (Elem x = 0; x < S.parts[c].size(); ++x) S.parts[c][x] = A.parts[c][x] || B.parts[c][x];
  }
  return S;
}

/// Heyting implication: x ∈ (A ⇒ B)(c) iff every restriction of x lying in
/// A also lies in B.
inline Subfunctor impl(const Subfunctor& A, const Subfunctor& B) {
  detail::same_ambient(A, B, "impl");
  const Presheaf& X = *A.ambient;
  const FinCategory& C = X.category();
  Subfunctor S = A;
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    for (Elem x = 0; x < X.size(c); ++x) {
      bool ok = true;
      for (MorphismId f : C.into(c)) {
        Elem y = X.restrict(f, x);
        ObjectId d = C.dom(f);
        if (A.parts[d][y] && !B.parts[d][y]) {
          ok = false;
          break;
        }
      }
      S.parts[c][x] = ok;
    }
  }
  return S;
}

inline Subfunctor neg(const Subfunctor& A) { return impl(A, bottom(A.ambient)); }

/// f*B: componentwise preimage of B ⊆ Y along f : X → Y.
inline Subfunctor base_change(const PresheafMap& f, const Subfunctor& B) {
  if (!same_presheaf(B.ambient, f.dst)) throw ShapeError("base_change: subobject does not live on the codomain");
  Subfunctor S{f.src, Parts(f.components.size())};
  for (ObjectId c = 0; c < f.components.size(); ++c) {
    S.parts[c].resize(f.src->size(c));
    for (Elem x = 0; x < f.src->size(c); ++x) S.parts[c][x] = B.parts[c][f(c, x)];
  }
  return S;
}

/// ∃_f A: componentwise image of A ⊆ X along f : X → Y.
inline Subfunctor exists_along(const PresheafMap& f, const Subfunctor& A) {
  if (!same_presheaf(A.ambient, f.src)) throw ShapeError("exists_along: subobject does not live on the domain");
  Subfunctor S = bottom(f.dst);
  for (ObjectId c = 0; c < f.components.size(); ++c) {
    for (Elem x = 0; x < f.src->size(c); ++x) {
      if (A.parts[c][x]) S.parts[c][f(c, x)] = true;
    }
  }
  return S;
}

/// ∀_f A: y ∈ Y(c) iff for every g : d → c, the whole fiber of f_d over
/// y·g lies in A.
inline Subfunctor forall_along(const PresheafMap& f, const Subfunctor& A) {
  if (!same_presheaf(A.ambient, f.src)) throw ShapeError("forall_along: subobject does not live on the domain");
  const FinCategory& C = f.category();
  const Presheaf& Y = *f.dst;
  // full[d][y]: every x in the fiber over y ∈ Y(d) lies in A(d)
  Parts full(C.object_count());
  for (ObjectId d = 0; d < C.object_count(); ++d) {
    full[d].assign(Y.size(d), true);
    for (Elem x = 0; x < f.src->size(d); ++x) {
      if (!A.parts[d][x]) full[d][f(d, x)] = false;
    }
  }
  Subfunctor S = bottom(f.dst);
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    for (Elem y = 0; y < Y.size(c); ++y) {
      bool ok = true;
      for (MorphismId g : C.into(c)) {
        if (!full[C.dom(g)][Y.restrict(g, y)]) {
          ok = false;
          break;
        }
      }
      S.parts[c][y] = ok;
    }
  }
  return S;
}

/// Im(α) as a subobject of the codomain.
inline Subfunctor image_subobject(const PresheafMap& alpha) { return exists_along(alpha, top(alpha.src)); }

/// The subobject as a presheaf in its own right, with its inclusion.
inline Cone as_presheaf(const Subfunctor& S) { return restrict_to(S.ambient, S.parts); }

/// All subobjects of X with the inclusion order available through leq.
struct SubEnumeration {
  std::vector<Subfunctor> elements;

  std::size_t size() const noexcept { return elements.size(); }
  bool leq(std::size_t i, std::size_t j) const { return elements[i].leq(elements[j]); }
};

namespace detail {

/// Enumerates down-closed element sets by deciding elements in order and
/// propagating: including x forces its restrictions in, excluding x forces
/// everything restricting to x out.
class SubSearch {
 public:
  SubSearch(const PresheafRef& X, std::size_t cap) : X_(X), C_(X->category()), cap_(cap) {
    for (ObjectId c = 0; c < C_.object_count(); ++c) {
      for (Elem x = 0; x < X_->size(c); ++x) order_.emplace_back(c, x);
    }
    above_.resize(C_.object_count());
    for (ObjectId c = 0; c < C_.object_count(); ++c) above_[c].resize(X_->size(c));
    for (MorphismId f = 0; f < C_.morphism_count(); ++f) {
      if (C_.is_identity(f)) continue;
      ObjectId a = C_.dom(f), b = C_.cod(f);
      for (Elem x = 0; x < X_->size(b); ++x) above_[a][X_->restrict(f, x)].emplace_back(b, x);
    }
    state_.resize(C_.object_count());
    for (ObjectId c = 0; c < C_.object_count(); ++c) state_[c].assign(X_->size(c), kFree);
  }

  std::vector<Subfunctor> run() {
    step(0);
    return std::move(out_);
  }

 private:
  static constexpr char kFree = 0, kIn = 1, kOut = 2;

  void step(std::size_t k) {
    while (k < order_.size() && state_[order_[k].first][order_[k].second] != kFree) ++k;
    if (k == order_.size()) {
      if (out_.size() == cap_) throw ResourceError("subobject enumeration exceeded its cap", cap_);
      Subfunctor S{X_, Parts(C_.object_count())};
      for (ObjectId c = 0; c < C_.object_count(); ++c) {
        S.parts[c].resize(X_->size(c));
        for (Elem x = 0; x < X_->size(c); ++x) S.parts[c][x] = state_[c][x] == kIn;
      }
      out_.push_back(std::move(S));
      return;
    }
    auto [c, x] = order_[k];
    for (char choice : {kOut, kIn}) {
      std::size_t mark = trail_.size();
      if (choice == kIn) {
        include(c, x);
      } else {
        exclude(c, x);
      }
      step(k + 1);
      while (trail_.size() > mark) {
        auto [d, z] = trail_.back();
        state_[d][z] = kFree;
        trail_.pop_back();
      }
    }
  }

  // Restrictions of a free element are free or already in (never out), so
  // the propagation cannot conflict.
  void include(ObjectId c, Elem x) {
    for (MorphismId f : C_.into(c)) {
      ObjectId d = C_.dom(f);
      Elem y = X_->restrict(f, x);
      if (state_[d][y] == kFree) {
        state_[d][y] = kIn;
        trail_.emplace_back(d, y);
      }
    }
  }

  void exclude(ObjectId c, Elem x) {
    state_[c][x] = kOut;
    trail_.emplace_back(c, x);
    for (auto [b, z] : above_[c][x]) {
      if (state_[b][z] == kFree) {
        state_[b][z] = kOut;
        trail_.emplace_back(b, z);
      }
    }
  }

  PresheafRef X_;
  const FinCategory& C_;
  std::size_t cap_;
  std::vector<std::pair<ObjectId, Elem>> order_;
  std::vector<std::vector<std::vector<std::pair<ObjectId, Elem>>>> above_;
  std::vector<std::vector<char>> state_;
  std::vector<std::pair<ObjectId, Elem>> trail_;
  std::vector<Subfunctor> out_;
};

}  // namespace detail

inline constexpr std::size_t kDefaultSubobjectCap = 4096;

/// Every subobject of X, without duplicates. Throws ResourceError past cap.
inline SubEnumeration sub_enumerate(const PresheafRef& X, std::size_t cap = kDefaultSubobjectCap) {
  return SubEnumeration{detail::SubSearch(X, cap).run()};
}

}  // namespace topos
