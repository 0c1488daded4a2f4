#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/signature.hpp"
#include "topos_forge/structure.hpp"

namespace topos {

struct Term {
  enum class Kind { Var, App };
  Kind kind = Kind::Var;
  std::string name;
  std::vector<Term> args;

  static Term var(std::string n) { return Term{Kind::Var, std::move(n), {}}; }
  static Term app(std::string f, std::vector<Term> a = {}) { return Term{Kind::App, std::move(f), std::move(a)}; }
};

inline bool operator==(const Term& a, const Term& b) {
  return a.kind == b.kind && a.name == b.name && a.args == b.args;
}

struct Formula {
  enum class Kind { Top, Bottom, Eq, Rel, And, Or, Implies, Not, Exists, Forall };
  Kind kind = Kind::Top;
  /// Relation name for Rel, bound variable for quantifiers.
  std::string symbol;
  /// Sort of the bound variable for quantifiers.
  std::string sort;
  std::vector<Term> terms;
  std::vector<Formula> children;

  static Formula top() { return Formula{Kind::Top, {}, {}, {}, {}}; }
  static Formula bottom() { return Formula{Kind::Bottom, {}, {}, {}, {}}; }
  static Formula eq(Term a, Term b) { return Formula{Kind::Eq, {}, {}, {std::move(a), std::move(b)}, {}}; }
  static Formula rel(std::string r, std::vector<Term> ts) { return Formula{Kind::Rel, std::move(r), {}, std::move(ts), {}}; }
  static Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static Formula implies(Formula a, Formula b) { return binary(Kind::Implies, std::move(a), std::move(b)); }
  static Formula negation(Formula a) { return Formula{Kind::Not, {}, {}, {}, {std::move(a)}}; }
  static Formula exists(std::string v, std::string s, Formula body) {
    return Formula{Kind::Exists, std::move(v), std::move(s), {}, {std::move(body)}};
  }
  static Formula forall(std::string v, std::string s, Formula body) {
    return Formula{Kind::Forall, std::move(v), std::move(s), {}, {std::move(body)}};
  }

  bool is_quantifier() const { return kind == Kind::Exists || kind == Kind::Forall; }
  bool is_binary() const { return kind == Kind::And || kind == Kind::Or || kind == Kind::Implies; }
  const Formula& lhs() const { return children.at(0); }
  const Formula& rhs() const { return children.at(1); }
  const Formula& body() const { return children.at(0); }

 private:
  static Formula binary(Kind k, Formula a, Formula b) { return Formula{k, {}, {}, {}, {std::move(a), std::move(b)}}; }
};

inline bool operator==(const Formula& a, const Formula& b) {
  return a.kind == b.kind && a.symbol == b.symbol && a.sort == b.sort && a.terms == b.terms && a.children == b.children;
}

// ---- printing -------------------------------------------------------------

inline std::string to_string(const Term& t) {
  if (t.kind == Term::Kind::Var) return t.name;
  std::string out = t.name + "(";
  for (std::size_t k = 0; k < t.args.size(); ++k) {
    if (k) out += ",";
    out += to_string(t.args[k]);
  }
  return out + ")";
}

namespace detail {

inline int precedence(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Implies: return 1;
    case Formula::Kind::Or: return 2;
    case Formula::Kind::And: return 3;
    case Formula::Kind::Not: return 4;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: return 0;
    default: return 5;
  }
}

}  // namespace detail

/// Canonical ASCII rendering; parses back to the same tree.
inline std::string to_string(const Formula& f) {
  using K = Formula::Kind;
  auto operand = [](const Formula& g, bool parens) { return parens ? "(" + to_string(g) + ")" : to_string(g); };
  switch (f.kind) {
    case K::Top: return "true";
    case K::Bottom: return "false";
    case K::Eq: return to_string(f.terms[0]) + " = " + to_string(f.terms[1]);
    case K::Rel: {
      std::string out = f.symbol + "(";
      for (std::size_t k = 0; k < f.terms.size(); ++k) {
        if (k) out += ",";
        out += to_string(f.terms[k]);
      }
      return out + ")";
    }
    case K::Not: {
      const Formula& g = f.body();
      return "~" + operand(g, detail::precedence(g) < 4);
    }
    case K::Exists:
    case K::Forall:
      return std::string(f.kind == K::Exists ? "exists " : "forall ") + f.symbol + ":" + f.sort + ". " +
             to_string(f.body());
    case K::And:
    case K::Or:
    case K::Implies: {
      int p = detail::precedence(f);
      const char* op = f.kind == K::And ? " /\\ " : f.kind == K::Or ? " \\/ " : " -> ";
      int pl = detail::precedence(f.lhs()), pr = detail::precedence(f.rhs());
      bool right_assoc = f.kind == K::Implies;
      bool lp = pl == 0 || (right_assoc ? pl <= p : pl < p);
      bool rp = pr == 0 || (right_assoc ? pr < p : pr <= p);
      return operand(f.lhs(), lp) + op + operand(f.rhs(), rp);
    }
  }
  return {};
}

// ---- structural queries ---------------------------------------------------

inline void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::Var) {
    out.insert(t.name);
    return;
  }
  for (const auto& a : t.args) collect_vars(a, out);
}

inline std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  collect_vars(t, out);
  return out;
}

inline std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  for (const auto& t : f.terms) collect_vars(t, out);
  for (const auto& g : f.children) {
    auto inner = free_vars(g);
    out.insert(inner.begin(), inner.end());
  }
  if (f.is_quantifier()) out.erase(f.symbol);
  return out;
}

struct Suitability {
  bool suitable = false;
  std::set<std::string> free;
};

/// free(φ) ⊆ vars(x⃗).
inline Suitability suitable_context(const Formula& f, const Context& ctx) {
  Suitability s{true, free_vars(f)};
  for (const auto& v : s.free) {
    bool found = false;
    for (const auto& c : ctx) found = found || c.name == v;
    if (!found) s.suitable = false;
  }
  return s;
}

inline std::size_t depth(const Formula& f) {
  std::size_t d = 0;
  for (const auto& g : f.children) d = std::max(d, depth(g));
  return d + 1;
}

enum class FormulaClass { Cartesian, Regular, Coherent, Full };

inline const char* class_name(FormulaClass c) {
  switch (c) {
    case FormulaClass::Cartesian: return "cartesian";
    case FormulaClass::Regular: return "regular";
    case FormulaClass::Coherent: return "coherent";
    case FormulaClass::Full: return "full";
  }
  return "full";
}

/// Least fragment containing φ.
inline FormulaClass classify(const Formula& f) {
  using K = Formula::Kind;
  auto up = [](FormulaClass a, FormulaClass b) { return a < b ? b : a; };
  switch (f.kind) {
    case K::Top:
    case K::Eq:
    case K::Rel: return FormulaClass::Cartesian;
    case K::Bottom: return FormulaClass::Coherent;
    case K::And: return up(classify(f.lhs()), classify(f.rhs()));
    case K::Exists: return up(FormulaClass::Regular, classify(f.body()));
    case K::Or: return up(FormulaClass::Coherent, up(classify(f.lhs()), classify(f.rhs())));
    default: return FormulaClass::Full;
  }
}

/// Rewrites every ¬ψ as ψ ⇒ ⊥.
inline Formula expand_negation(const Formula& f) {
  Formula g = f;
  for (auto& c : g.children) c = expand_negation(c);
  if (g.kind == Formula::Kind::Not) return Formula::implies(std::move(g.children[0]), Formula::bottom());
  return g;
}

// ---- sort checking --------------------------------------------------------

/// Turns unbound identifiers naming constant symbols into applications.
inline Term resolve_constants(const Signature& sig, const Term& t, const std::set<std::string>& bound) {
  if (t.kind == Term::Kind::Var) {
    auto it = sig.functions.find(t.name);
    if (!bound.count(t.name) && it != sig.functions.end() && it->second.args.empty()) return Term::app(t.name);
    return t;
  }
  Term out = t;
  for (auto& a : out.args) a = resolve_constants(sig, a, bound);
  return out;
}

inline Formula resolve_constants(const Signature& sig, const Formula& f, std::set<std::string> bound = {}) {
  Formula out = f;
  for (auto& t : out.terms) t = resolve_constants(sig, t, bound);
  if (f.is_quantifier()) bound.insert(f.symbol);
  for (auto& g : out.children) g = resolve_constants(sig, g, bound);
  return out;
}

namespace detail {

inline const std::string* lookup_var(const std::vector<Variable>& scope, const std::string& name) {
  for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
    if (it->name == name) return &it->sort;
  }
  return nullptr;
}

}  // namespace detail

/// Sort of a term; throws SortError or ContextError.
inline std::string term_sort(const Signature& sig, const std::vector<Variable>& scope, const Term& t) {
  if (t.kind == Term::Kind::Var) {
    const std::string* s = detail::lookup_var(scope, t.name);
    if (!s) throw ContextError("variable " + t.name + " is not in the context");
    return *s;
  }
  auto it = sig.functions.find(t.name);
  if (it == sig.functions.end()) throw SortError("unknown function symbol " + t.name, t.name);
  const auto& prof = it->second;
  if (prof.args.size() != t.args.size()) {
    throw SortError("function " + t.name + " expects " + std::to_string(prof.args.size()) + " arguments, got " +
                        std::to_string(t.args.size()),
                    t.name);
  }
  for (std::size_t k = 0; k < t.args.size(); ++k) {
    std::string s = term_sort(sig, scope, t.args[k]);
    if (s != prof.args[k]) {
      throw SortError("argument " + std::to_string(k + 1) + " of " + t.name + " has sort " + s + ", expected " +
                          prof.args[k],
                      t.name);
    }
  }
  return prof.result;
}

/// Checks φ against the signature in context x⃗. Unsuitable contexts raise
/// ContextError; ill-sorted formulas raise SortError.
inline void typecheck(const Signature& sig, const Context& ctx, const Formula& f) {
  using K = Formula::Kind;
  std::vector<Variable> scope = ctx;
  auto rec = [&](auto&& self, const Formula& g) -> void {
    switch (g.kind) {
      case K::Top:
      case K::Bottom: return;
      case K::Eq: {
        std::string a = term_sort(sig, scope, g.terms[0]);
        std::string b = term_sort(sig, scope, g.terms[1]);
        if (a != b) throw SortError("equation between sorts " + a + " and " + b, "=");
        return;
      }
      case K::Rel: {
        auto it = sig.relations.find(g.symbol);
        if (it == sig.relations.end()) throw SortError("unknown relation symbol " + g.symbol, g.symbol);
        if (it->second.size() != g.terms.size()) {
          throw SortError("relation " + g.symbol + " expects " + std::to_string(it->second.size()) +
                              " arguments, got " + std::to_string(g.terms.size()),
                          g.symbol);
        }
        for (std::size_t k = 0; k < g.terms.size(); ++k) {
          std::string s = term_sort(sig, scope, g.terms[k]);
          if (s != it->second[k]) {
            throw SortError("argument " + std::to_string(k + 1) + " of " + g.symbol + " has sort " + s +
                                ", expected " + it->second[k],
                            g.symbol);
          }
        }
        return;
      }
      case K::Exists:
      case K::Forall:
        if (!sig.has_sort(g.sort)) throw SortError("undeclared sort " + g.sort, g.sort);
        scope.push_back({g.symbol, g.sort});
        self(self, g.body());
        scope.pop_back();
        return;
      default:
        for (const auto& c : g.children) self(self, c);
    }
  };
  rec(rec, f);
}

/// Symbol and arity check without a context.
inline void check_symbols(const Signature& sig, const Formula& f) {
  auto term = [&](auto&& self, const Term& t) -> void {
    if (t.kind == Term::Kind::App) {
      auto it = sig.functions.find(t.name);
      if (it == sig.functions.end()) throw SortError("unknown function symbol " + t.name, t.name);
      if (it->second.args.size() != t.args.size()) {
        throw SortError("function " + t.name + " expects " + std::to_string(it->second.args.size()) +
                            " arguments, got " + std::to_string(t.args.size()),
                        t.name);
      }
    }
    for (const auto& a : t.args) self(self, a);
  };
  if (f.kind == Formula::Kind::Rel) {
    auto it = sig.relations.find(f.symbol);
    if (it == sig.relations.end()) throw SortError("unknown relation symbol " + f.symbol, f.symbol);
    if (it->second.size() != f.terms.size()) {
      throw SortError("relation " + f.symbol + " expects " + std::to_string(it->second.size()) + " arguments, got " +
                          std::to_string(f.terms.size()),
                      f.symbol);
    }
  }
  if (f.is_quantifier() && !sig.has_sort(f.sort)) throw SortError("undeclared sort " + f.sort, f.sort);
  for (const auto& t : f.terms) term(term, t);
  for (const auto& g : f.children) check_symbols(sig, g);
}

}  // namespace topos
