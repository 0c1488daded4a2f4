#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "topos_forge/error.hpp"

namespace topos {

/// A subset of a finite index set, bit i standing for the i-th index.
using IndexSet = std::uint32_t;

inline constexpr std::size_t kMaxIndices = 16;

inline bool subset_of(IndexSet a, IndexSet b) { return (a & ~b) == 0; }

/// A filter on a finite index set, stored as its sorted member list.
struct FilterFin {
  std::vector<std::string> indices;
  std::vector<IndexSet> members;

  std::size_t index_count() const noexcept { return indices.size(); }
  IndexSet whole() const { return indices.size() == 32 ? ~IndexSet{0} : (IndexSet{1} << indices.size()) - 1; }
  bool contains(IndexSet J) const { return std::binary_search(members.begin(), members.end(), J); }
  bool proper() const { return !contains(0); }

  /// Meet of all members; on a finite set the filter is principal at it.
  IndexSet generator() const {
    IndexSet g = whole();
    for (IndexSet J : members) g &= J;
    return g;
  }

  std::string set_text(IndexSet J) const {
    std::string out = "{";
    bool first = true;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (!(J >> i & 1U)) continue;
      if (!first) out += ",";
      out += indices[i];
      first = false;
    }
    return out + "}";
  }

  bool operator==(const FilterFin&) const = default;
};

inline Report validate_filter(const FilterFin& F) {
  Report report;
  if (F.indices.empty()) report.add("index set is empty");
  if (F.indices.size() > kMaxIndices) report.add("index set is larger than " + std::to_string(kMaxIndices));
  if (!report.ok()) return report;
  std::vector<std::string> sorted = F.indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) report.add("duplicate index label");
  if (!std::is_sorted(F.members.begin(), F.members.end()) ||
      std::adjacent_find(F.members.begin(), F.members.end()) != F.members.end()) {
    report.add("member list is not sorted and duplicate-free");
  }
  for (IndexSet J : F.members) {
    if (!subset_of(J, F.whole())) report.add("member " + std::to_string(J) + " is not a subset of the index set");
  }
  if (!report.ok()) return report;
  if (!F.contains(F.whole())) report.add("the whole index set is not a member");
  for (IndexSet A : F.members) {
    for (IndexSet B : F.members) {
      if (!F.contains(A & B)) report.add("not closed under intersection: " + F.set_text(A) + " and " + F.set_text(B));
    }
    for (IndexSet B = 0; B <= F.whole(); ++B) {
      if (subset_of(A, B) && !F.contains(B)) report.add("not upward closed: " + F.set_text(A) + " below " + F.set_text(B));
    }
  }
  return report;
}

/// All supersets of J.
inline FilterFin principal_filter(std::vector<std::string> indices, IndexSet J) {
  FilterFin F{std::move(indices), {}};
  if (F.indices.empty() || F.indices.size() > kMaxIndices) throw PreconditionError("principal_filter: bad index set size");
  if (J == 0) throw PreconditionError("principal_filter: the generator is empty, which gives the improper filter");
  if (!subset_of(J, F.whole())) throw PreconditionError("principal_filter: generator is not a subset of the index set");
  for (IndexSet B = 0; B <= F.whole(); ++B) {
    if (subset_of(J, B)) F.members.push_back(B);
  }
  return F;
}

/// Definitional test: proper, and of every A ⊆ I either A or I \ A is a member.
inline bool is_ultrafilter(const FilterFin& F) {
  if (!F.proper()) return false;
  for (IndexSet A = 0; A <= F.whole(); ++A) {
    if (!F.contains(A) && !F.contains(F.whole() & ~A)) return false;
  }
  return true;
}

/// The principal ultrafilter at the least index of the generator.
inline FilterFin extend_to_ultrafilter(const FilterFin& F) {
  Report r = validate_filter(F);
  if (!r.ok()) throw PreconditionError("extend_to_ultrafilter: " + r.violations.front());
  if (!F.proper()) throw PreconditionError("extend_to_ultrafilter: the filter is improper");
  IndexSet g = F.generator();
  return principal_filter(F.indices, g & (~g + 1));
}

/// F|_J = {J ∩ K | K ∈ F} as a filter on J.
inline FilterFin restrict_filter(const FilterFin& F, IndexSet J) {
  if (!F.contains(J)) throw PreconditionError("restrict_filter: " + F.set_text(J) + " is not a member of the filter");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < F.indices.size(); ++i) {
    if (J >> i & 1U) kept.push_back(i);
  }
  FilterFin R;
  for (std::size_t i : kept) R.indices.push_back(F.indices[i]);
  for (IndexSet K : F.members) {
    IndexSet m = 0;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (K >> kept[k] & 1U) m |= IndexSet{1} << k;
    }
    R.members.push_back(m);
  }
  std::sort(R.members.begin(), R.members.end());
  R.members.erase(std::unique(R.members.begin(), R.members.end()), R.members.end());
  return R;
}

inline std::size_t popcount(IndexSet J) { return static_cast<std::size_t>(std::popcount(J)); }

}  // namespace topos
