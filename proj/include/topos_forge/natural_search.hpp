#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/presheaf.hpp"

namespace topos {

namespace detail {

/// Backtracking enumeration of natural transformations src → dst whose value
/// at each (stage, element) satisfies a predicate.
///
/// Stages with more incoming morphisms are decided first; every decision is
/// propagated along all restrictions of the decided element, so a complete
/// assignment is natural by construction. Candidate values are tried in
/// lexicographic order of their ids, which makes the first solution the
/// least one under that order.
template <class Allowed>
class NaturalMapSearch {
 public:
  static constexpr Elem kUnset = std::numeric_limits<Elem>::max();

  NaturalMapSearch(PresheafRef src, PresheafRef dst, Allowed allowed)
      : src_(std::move(src)), dst_(std::move(dst)), allowed_(std::move(allowed)), C_(src_->category()) {
    if (!same_category(src_->base, dst_->base)) throw ShapeError("natural map search across different bases");
    std::vector<ObjectId> stages(C_.object_count());
    for (ObjectId c = 0; c < stages.size(); ++c) stages[c] = c;
    std::stable_sort(stages.begin(), stages.end(),
                     [&](ObjectId a, ObjectId b) { return C_.into(a).size() > C_.into(b).size(); });
    for (ObjectId c : stages) {
      for (Elem x = 0; x < src_->size(c); ++x) order_.emplace_back(c, x);
    }
    ranked_.resize(C_.object_count());
    for (ObjectId c = 0; c < C_.object_count(); ++c) {
      auto& r = ranked_[c];
      r.resize(dst_->size(c));
      for (Elem y = 0; y < r.size(); ++y) r[y] = y;
      std::sort(r.begin(), r.end(), [&](Elem a, Elem b) { return dst_->id(c, a) < dst_->id(c, b); });
    }
    value_.resize(C_.object_count());
    for (ObjectId c = 0; c < C_.object_count(); ++c) value_[c].assign(src_->size(c), kUnset);
  }

  /// Calls visit(map) for each solution until it returns false.
  template <class Visit>
  void run(Visit&& visit) {
    stopped_ = false;
    step(0, visit);
  }

 private:
  template <class Visit>
  void step(std::size_t k, Visit& visit) {
    while (k < order_.size() && value_[order_[k].first][order_[k].second] != kUnset) ++k;
    if (k == order_.size()) {
      PresheafMap h{src_, dst_, value_};
      if (!visit(std::move(h))) stopped_ = true;
      return;
    }
    auto [c, x] = order_[k];
    for (Elem y : ranked_[c]) {
      if (!allowed_(c, x, y)) continue;
      std::size_t mark = trail_.size();
      if (assign(c, x, y)) step(k + 1, visit);
      while (trail_.size() > mark) {
        auto [d, z] = trail_.back();
        value_[d][z] = kUnset;
        trail_.pop_back();
      }
      if (stopped_) return;
    }
  }

  bool assign(ObjectId c, Elem x, Elem y) {
    for (MorphismId f : C_.into(c)) {
      ObjectId d = C_.dom(f);
      Elem xs = src_->restrict(f, x);
      Elem ys = dst_->restrict(f, y);
      Elem& slot = value_[d][xs];
      if (slot != kUnset) {
        if (slot != ys) return false;
        continue;
      }
      if (!allowed_(d, xs, ys)) return false;
      slot = ys;
      trail_.emplace_back(d, xs);
    }
    return true;
  }

  PresheafRef src_;
  PresheafRef dst_;
  Allowed allowed_;
  const FinCategory& C_;
  std::vector<std::pair<ObjectId, Elem>> order_;
  std::vector<std::vector<Elem>> ranked_;
  std::vector<Function> value_;
  std::vector<std::pair<ObjectId, Elem>> trail_;
  bool stopped_ = false;
};

}  // namespace detail

/// Visits natural maps src → dst with allowed(c, x, y) at every element,
/// least-id-first, until visit returns false.
template <class Allowed, class Visit>
void search_natural_maps(const PresheafRef& src, const PresheafRef& dst, Allowed allowed, Visit&& visit) {
  detail::NaturalMapSearch<Allowed> search(src, dst, std::move(allowed));
  search.run(visit);
}

/// The least natural map src → dst satisfying the predicate, if any.
template <class Allowed>
std::optional<PresheafMap> find_natural_map(const PresheafRef& src, const PresheafRef& dst, Allowed allowed) {
  std::optional<PresheafMap> found;
  search_natural_maps(src, dst, std::move(allowed), [&](PresheafMap h) {
    found = std::move(h);
    return false;
  });
  return found;
}

/// Every natural map src → dst.
inline std::vector<PresheafMap> hom_enumerate(const PresheafRef& src, const PresheafRef& dst,
                                              std::size_t cap = 4096) {
  std::vector<PresheafMap> out;
  search_natural_maps(
      src, dst, [](ObjectId, Elem, Elem) { return true; },
      [&](PresheafMap h) {
        if (out.size() == cap) throw ResourceError("hom-set enumeration exceeded its cap", cap);
        out.push_back(std::move(h));
        return true;
      });
  return out;
}

}  // namespace topos
