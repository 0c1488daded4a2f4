#pragma once

// Classical model checking over plain finite sets. Written from the textbook
// satisfaction clauses; it only reads formulas and its own SetModel.

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "support/random.hpp"

namespace support {

struct SetModel {
  std::map<std::string, std::size_t> size;
  std::map<std::string, std::map<std::vector<std::size_t>, std::size_t>> fun;
  std::map<std::string, std::set<std::vector<std::size_t>>> rel;
};

using Assignment = std::vector<std::pair<std::string, std::size_t>>;

class Tarski {
 public:
  Tarski(const Signature& sig, const SetModel& m) : sig_(sig), m_(m) {}

  bool holds(const Formula& f, Assignment env) const { return sat(f, env); }

 private:
  std::size_t val(const Term& t, const Assignment& env) const {
    if (t.kind == Term::Kind::Var) {
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        if (it->first == t.name) return it->second;
      }
      throw std::logic_error("unbound variable " + t.name);
    }
    std::vector<std::size_t> args;
    for (const auto& a : t.args) args.push_back(val(a, env));
    return m_.fun.at(t.name).at(args);
  }

  bool sat(const Formula& f, Assignment& env) const {
    using K = Formula::Kind;
    switch (f.kind) {
      case K::Top: return true;
      case K::Bottom: return false;
      case K::Eq: return val(f.terms[0], env) == val(f.terms[1], env);
      case K::Rel: {
        std::vector<std::size_t> args;
        for (const auto& t : f.terms) args.push_back(val(t, env));
        return m_.rel.at(f.symbol).count(args) > 0;
      }
      case K::And: return sat(f.children[0], env) && sat(f.children[1], env);
      case K::Or: return sat(f.children[0], env) || sat(f.children[1], env);
      case K::Implies: return !sat(f.children[0], env) || sat(f.children[1], env);
      case K::Not: return !sat(f.children[0], env);
      case K::Exists:
      case K::Forall: {
        bool exists = f.kind == K::Exists;
        for (std::size_t v = 0; v < m_.size.at(f.sort); ++v) {
          env.emplace_back(f.symbol, v);
          bool b = sat(f.children[0], env);
          env.pop_back();
          if (b == exists) return exists;
        }
        return !exists;
      }
    }
    return false;
  }

  const Signature& sig_;
  const SetModel& m_;
};

inline void all_tuples(const std::vector<std::size_t>& sizes, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> t(sizes.size(), 0);
  for (std::size_t s : sizes) {
    if (s == 0) return;
  }
  while (true) {
    visit(t);
    std::size_t k = sizes.size();
    while (k > 0) {
      --k;
      if (++t[k] < sizes[k]) break;
      t[k] = 0;
      if (k == 0) return;
    }
    if (sizes.empty()) return;
  }
}

inline SetModel random_set_model(const Signature& sig, Rng& rng, std::size_t max_size = 3) {
  SetModel m;
  std::set<std::string> results;
  for (const auto& [f, p] : sig.functions) results.insert(p.result);
  for (const auto& s : sig.sorts) m.size[s] = results.count(s) ? 1 + pick(rng, max_size) : pick(rng, max_size + 1);
  for (const auto& [f, p] : sig.functions) {
    std::vector<std::size_t> sizes;
    for (const auto& a : p.args) sizes.push_back(m.size[a]);
    auto& table = m.fun[f];
    all_tuples(sizes, [&](const std::vector<std::size_t>& t) { table[t] = pick(rng, m.size[p.result]); });
  }
  for (const auto& [r, args] : sig.relations) {
    std::vector<std::size_t> sizes;
    for (const auto& a : args) sizes.push_back(m.size[a]);
    auto& set = m.rel[r];
    all_tuples(sizes, [&](const std::vector<std::size_t>& t) {
      if (coin(rng, 0.4)) set.insert(t);
    });
  }
  return m;
}

/// The same data as a structure over the one-object base.
inline StructureRef to_structure(const SignatureRef& sig, const SetModel& m) {
  CategoryRef base = terminal_category();
  Structure M{sig, base, {}, {}, {}};
  for (const auto& s : sig->sorts) {
    Presheaf X{base, {{}}, {{}}};
    for (std::size_t i = 0; i < m.size.at(s); ++i) X.carrier[0].push_back(s + std::to_string(i));
    X.action[0].resize(X.carrier[0].size());
    std::iota(X.action[0].begin(), X.action[0].end(), 0);
    M.sorts.emplace(s, share(std::move(X)));
  }
  for (const auto& [f, p] : sig->functions) {
    ProductCone dom = M.product_of(p.args);
    PresheafMap h{dom.apex(), M.sort(p.result), {Function(dom.apex()->size(0), 0)}};
    for (const auto& [t, v] : m.fun.at(f)) {
      std::vector<Elem> coords(t.begin(), t.end());
      h.components[0][dom.encode(0, coords)] = v;
    }
    M.functions.emplace(f, std::move(h));
  }
  for (const auto& [r, args] : sig->relations) {
    ProductCone amb = M.product_of(args);
    Subfunctor S = bottom(amb.apex());
    for (const auto& t : m.rel.at(r)) {
      std::vector<Elem> coords(t.begin(), t.end());
      S.parts[0][amb.encode(0, coords)] = true;
    }
    M.relations.emplace(r, std::move(S));
  }
  return share(std::move(M));
}

}  // namespace support
