#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/presheaf.hpp"

namespace topos {

/// A limiting (or colimiting) object together with its legs.
struct Cone {
  PresheafRef apex;
  std::vector<PresheafMap> legs;
};

/// Componentwise membership flags: parts[c][x] for x ∈ X(c).
using Parts = std::vector<std::vector<bool>>;

/// The canonical finite product of presheaves. Tuples at each stage are
/// enumerated lexicographically, first factor most significant, and carry
/// the id "(x1,...,xn)".
class ProductCone {
 public:
  ProductCone() = default;

  ProductCone(const CategoryRef& base, std::vector<PresheafRef> factors) : factors_(std::move(factors)) {
    const FinCategory& C = *base;
    for (const auto& F : factors_) {
      if (!same_category(F->base, base)) throw ShapeError("product: factors live over different bases");
    }
    const std::size_t n = factors_.size();
    stride_.assign(C.object_count(), std::vector<std::size_t>(n, 1));
    Presheaf P{base, std::vector<Carrier>(C.object_count()), std::vector<Function>(C.morphism_count())};
    std::vector<std::size_t> total(C.object_count(), 1);
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      for (std::size_t k = n; k-- > 0;) {
        stride_[c][k] = total[c];
        total[c] *= factors_[k]->size(c);
      }
      auto& car = P.carrier[c];
      car.reserve(total[c]);
      std::vector<const std::string*> parts(n);
      for (Elem x = 0; x < total[c]; ++x) {
        if (n == 0) {
          car.emplace_back("*");
          break;
        }
        for (std::size_t k = 0; k < n; ++k) parts[k] = &factors_[k]->id(c, coordinate(c, x, k));
        car.push_back(tuple_id(parts));
      }
    }
    std::vector<Elem> coords(n);
    for (MorphismId f = 0; f < C.morphism_count(); ++f) {
      ObjectId a = C.dom(f), b = C.cod(f);
      auto& act = P.action[f];
      act.resize(total[b]);
      for (Elem x = 0; x < total[b]; ++x) {
        for (std::size_t k = 0; k < n; ++k) coords[k] = factors_[k]->restrict(f, coordinate(b, x, k));
        act[x] = encode(a, coords);
      }
    }
    apex_ = share(std::move(P));
    legs_.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      PresheafMap leg{apex_, factors_[k], std::vector<Function>(C.object_count())};
      for (ObjectId c = 0; c < C.object_count(); ++c) {
        leg.components[c].resize(total[c]);
        for (Elem x = 0; x < total[c]; ++x) leg.components[c][x] = coordinate(c, x, k);
      }
      legs_.push_back(std::move(leg));
    }
  }

  const PresheafRef& apex() const noexcept { return apex_; }
  const std::vector<PresheafRef>& factors() const noexcept { return factors_; }
  const std::vector<PresheafMap>& legs() const noexcept { return legs_; }
  const PresheafMap& leg(std::size_t k) const { return legs_.at(k); }
  std::size_t arity() const noexcept { return factors_.size(); }

  Elem coordinate(ObjectId c, Elem x, std::size_t k) const {
    return (x / stride_[c][k]) % factors_[k]->size(c);
  }

  std::vector<Elem> decode(ObjectId c, Elem x) const {
    std::vector<Elem> out(factors_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = coordinate(c, x, k);
    return out;
  }

  Elem encode(ObjectId c, std::span<const Elem> coords) const {
    Elem x = 0;
    for (std::size_t k = 0; k < coords.size(); ++k) x += coords[k] * stride_[c][k];
    return x;
  }

  /// The mediating map ⟨m_1, ..., m_n⟩ : Z → ∏ F_k.
  PresheafMap pairing(const PresheafRef& Z, std::span<const PresheafMap> maps) const {
    if (maps.size() != factors_.size()) throw ShapeError("pairing: one map per factor expected");
    for (std::size_t k = 0; k < maps.size(); ++k) {
      if (!same_presheaf(maps[k].src, Z) || !same_presheaf(maps[k].dst, factors_[k])) {
        throw ShapeError("pairing: map " + std::to_string(k) + " has the wrong type");
      }
    }
    const FinCategory& C = Z->category();
    PresheafMap h{Z, apex_, std::vector<Function>(C.object_count())};
    std::vector<Elem> coords(maps.size());
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      h.components[c].resize(Z->size(c));
      for (Elem z = 0; z < Z->size(c); ++z) {
        for (std::size_t k = 0; k < maps.size(); ++k) coords[k] = maps[k](c, z);
        h.components[c][z] = encode(c, coords);
      }
    }
    return h;
  }

  /// ∏ m_k : ∏ A_k → ∏ B_k where this is the product of the A_k.
  PresheafMap product_map(const ProductCone& target, std::span<const PresheafMap> maps) const {
    if (maps.size() != factors_.size() || target.arity() != factors_.size()) {
      throw ShapeError("product_map: arity mismatch");
    }
    std::vector<PresheafMap> composed;
    composed.reserve(maps.size());
    for (std::size_t k = 0; k < maps.size(); ++k) composed.push_back(compose(maps[k], legs_[k]));
    return target.pairing(apex_, composed);
  }

 private:
  PresheafRef apex_;
  std::vector<PresheafRef> factors_;
  std::vector<PresheafMap> legs_;
  std::vector<std::vector<std::size_t>> stride_;
};

inline PresheafRef terminal(const CategoryRef& base) { return ProductCone(base, {}).apex(); }

/// The unique map X → 1.
inline PresheafMap to_terminal(const PresheafRef& X) {
  PresheafRef one = terminal(X->base);
  PresheafMap h{X, one, std::vector<Function>(X->carrier.size())};
  for (ObjectId c = 0; c < X->carrier.size(); ++c) h.components[c].assign(X->size(c), 0);
  return h;
}

inline ProductCone product(const CategoryRef& base, std::vector<PresheafRef> factors) {
  return ProductCone(base, std::move(factors));
}

/// The subpresheaf of X on the flagged elements, with its inclusion.
/// Requires the flags to be closed under the action.
inline Cone restrict_to(const PresheafRef& X, const Parts& parts) {
  const FinCategory& C = X->category();
  Presheaf S{X->base, std::vector<Carrier>(C.object_count()), std::vector<Function>(C.morphism_count())};
  std::vector<std::vector<Elem>> position(C.object_count());
  std::vector<Function> incl(C.object_count());
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    position[c].assign(X->size(c), 0);
    for (Elem x = 0; x < X->size(c); ++x) {
      if (!parts[c][x]) continue;
      position[c][x] = S.carrier[c].size();
      S.carrier[c].push_back(X->id(c, x));
      incl[c].push_back(x);
    }
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    ObjectId a = C.dom(f), b = C.cod(f);
    for (Elem x : incl[b]) {
      Elem r = X->restrict(f, x);
      if (!parts[a][r]) throw ShapeError("restrict_to: flagged elements are not closed under the action");
      S.action[f].push_back(position[a][r]);
    }
  }
  PresheafRef apex = share(std::move(S));
  return Cone{apex, {PresheafMap{apex, X, std::move(incl)}}};
}

/// Equalizer of a parallel pair f, g : X → Y, with its inclusion leg.
inline Cone equalizer(const PresheafMap& f, const PresheafMap& g) {
  if (!same_presheaf(f.src, g.src) || !same_presheaf(f.dst, g.dst)) {
    throw ShapeError("equalizer: maps are not a parallel pair");
  }
  const FinCategory& C = f.category();
  Parts parts(C.object_count());
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    parts[c].resize(f.src->size(c));
    for (Elem x = 0; x < f.src->size(c); ++x) parts[c][x] = f(c, x) == g(c, x);
  }
  return restrict_to(f.src, parts);
}

/// Pullback of a cospan f : A → Z ← B : g. Elements are pairs "(a,b)";
/// legs are the two projections, in that order.
inline Cone pullback(const PresheafMap& f, const PresheafMap& g) {
  if (!same_presheaf(f.dst, g.dst)) throw ShapeError("pullback: maps do not form a cospan");
  const FinCategory& C = f.category();
  ProductCone AB(f.src->base, {f.src, g.src});
  Parts parts(C.object_count());
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    parts[c].resize(AB.apex()->size(c));
    for (Elem p = 0; p < parts[c].size(); ++p) {
      parts[c][p] = f(c, AB.coordinate(c, p, 0)) == g(c, AB.coordinate(c, p, 1));
    }
  }
  Cone sub = restrict_to(AB.apex(), parts);
  const PresheafMap& incl = sub.legs[0];
  return Cone{sub.apex, {compose(AB.leg(0), incl), compose(AB.leg(1), incl)}};
}

}  // namespace topos
