#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "topos_forge/error.hpp"

namespace topos {

struct FunctionProfile {
  std::vector<std::string> args;  ///< empty for a constant
  std::string result;

  bool operator==(const FunctionProfile&) const = default;
};

/// Many-sorted first-order signature (S, F, R).
struct Signature {
  std::vector<std::string> sorts;
  std::map<std::string, FunctionProfile> functions;
  std::map<std::string, std::vector<std::string>> relations;

  bool has_sort(const std::string& s) const { return std::find(sorts.begin(), sorts.end(), s) != sorts.end(); }
  bool has_function(const std::string& f) const { return functions.count(f) != 0; }
  bool has_relation(const std::string& r) const { return relations.count(r) != 0; }

  bool operator==(const Signature&) const = default;
};

using SignatureRef = std::shared_ptr<const Signature>;

inline bool same_signature(const SignatureRef& a, const SignatureRef& b) { return a == b || (a && b && *a == *b); }

inline Report validate_signature(const Signature& sig) {
  Report report;
  std::vector<std::string> sorted = sig.sorts;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) report.add("duplicate sort name");
  for (const auto& [f, p] : sig.functions) {
    for (const auto& s : p.args) {
      if (!sig.has_sort(s)) report.add("function " + f + " uses undeclared sort " + s);
    }
    if (!sig.has_sort(p.result)) report.add("function " + f + " has undeclared result sort " + p.result);
    if (sig.has_relation(f)) report.add("symbol " + f + " is both a function and a relation");
  }
  for (const auto& [r, args] : sig.relations) {
    for (const auto& s : args) {
      if (!sig.has_sort(s)) report.add("relation " + r + " uses undeclared sort " + s);
    }
  }
  return report;
}

}  // namespace topos
