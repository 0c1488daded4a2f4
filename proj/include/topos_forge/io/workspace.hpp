#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "topos_forge/topos_forge.hpp"

namespace topos::io {

using json = nlohmann::json;

/// A formula as declared in a workspace.
struct NamedFormula {
  Context context;
  std::string text;
  Formula formula;
  /// Set when the declared context does not cover the free variables.
  std::optional<std::string> unsuitable;
};

/// Everything a set of definition files declares, resolved and validated.
struct Workspace {
  CategoryRef base;
  std::map<std::string, PresheafRef> presheaves;
  std::map<std::string, PresheafMap> maps;
  SignatureRef sig;
  std::map<std::string, StructureRef> structures;
  std::map<std::string, NamedFormula> formulas;
  std::map<std::string, FilterFin> filters;
  std::map<std::string, std::vector<std::string>> families;
};

// ---- builtin bases ----------------------------------------------------------

inline CategoryRef builtin_category(const std::string& name) {
  if (name == "terminal") return terminal_category();
  if (name == "arrow") return arrow_category();
  if (name == "graph") return graph_category();
  if (name == "chain") return chain_category();
  if (name == "reflexive_graph") return reflexive_graph_category();
  return nullptr;
}

// ---- to JSON ---------------------------------------------------------------

inline json category_to_json(const FinCategory& C) {
  json j;
  j["objects"] = C.objects();
  j["morphisms"] = json::array();
  for (const auto& m : C.morphisms()) {
    if (C.is_identity(C.find_morphism(m.name).value())) continue;
    j["morphisms"].push_back({{"name", m.name}, {"dom", C.object_name(m.dom)}, {"cod", C.object_name(m.cod)}});
  }
  json ids = json::object();
  for (ObjectId c = 0; c < C.object_count(); ++c) ids[C.object_name(c)] = C.morphism(C.identity(c)).name;
  j["identities"] = ids;
  j["compose"] = json::array();
  for (const auto& [key, h] : C.composition_table()) {
    if (C.is_identity(key.first) || C.is_identity(key.second)) continue;
    j["compose"].push_back({C.morphism(key.first).name, C.morphism(key.second).name, C.morphism(h).name});
  }
  return j;
}

inline json presheaf_to_json(const Presheaf& X) {
  const FinCategory& C = X.category();
  json j;
  for (ObjectId c = 0; c < C.object_count(); ++c) j["carrier"][C.object_name(c)] = X.carrier[c];
  j["action"] = json::object();
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    if (C.is_identity(f)) continue;
    json a = json::object();
    for (Elem x = 0; x < X.size(C.cod(f)); ++x) a[X.id(C.cod(f), x)] = X.id(C.dom(f), X.restrict(f, x));
    j["action"][C.morphism(f).name] = a;
  }
  return j;
}

inline json subfunctor_to_json(const Subfunctor& S) {
  const Presheaf& X = *S.ambient;
  const FinCategory& C = X.category();
  json j = json::object();
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    std::vector<std::string> ids;
    for (Elem x = 0; x < X.size(c); ++x) {
      if (S.contains(c, x)) ids.push_back(X.id(c, x));
    }
    std::sort(ids.begin(), ids.end());
    j[C.object_name(c)] = ids;
  }
  return j;
}

inline json signature_to_json(const Signature& sig) {
  json j;
  j["sorts"] = sig.sorts;
  j["functions"] = json::object();
  for (const auto& [f, p] : sig.functions) j["functions"][f] = {{"args", p.args}, {"result", p.result}};
  j["relations"] = json::object();
  for (const auto& [r, a] : sig.relations) j["relations"][r] = a;
  return j;
}

inline json structure_to_json(const Structure& M) {
  const FinCategory& C = *M.base;
  json j;
  for (const auto& [s, X] : M.sorts) j["sorts"][s] = presheaf_to_json(*X);
  j["functions"] = json::object();
  for (const auto& [f, h] : M.functions) {
    const auto& prof = M.sig->functions.at(f);
    ProductCone dom = M.product_of(prof.args);
    json per = json::object();
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      json rows = json::array();
      for (Elem w = 0; w < dom.apex()->size(c); ++w) {
        json args = json::array();
        for (std::size_t k = 0; k < prof.args.size(); ++k) args.push_back(dom.factors()[k]->id(c, dom.coordinate(c, w, k)));
        rows.push_back({args, h.dst->id(c, h(c, w))});
      }
      per[C.object_name(c)] = rows;
    }
    j["functions"][f] = per;
  }
  j["relations"] = json::object();
  for (const auto& [r, S] : M.relations) {
    const auto& args = M.sig->relations.at(r);
    ProductCone amb = M.product_of(args);
    json per = json::object();
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      json rows = json::array();
      for (Elem w = 0; w < amb.apex()->size(c); ++w) {
        if (!S.contains(c, w)) continue;
        json tuple = json::array();
        for (std::size_t k = 0; k < args.size(); ++k) tuple.push_back(amb.factors()[k]->id(c, amb.coordinate(c, w, k)));
        rows.push_back(tuple);
      }
      per[C.object_name(c)] = rows;
    }
    j["relations"][r] = per;
  }
  return j;
}

// ---- from JSON -------------------------------------------------------------

namespace detail {

/// Collects located diagnostics while walking a document.
struct Diagnostics {
  Report report;
  std::string where;

  void add(const std::string& msg) { report.add(where.empty() ? msg : where + ": " + msg); }
};

/// j[key] when present, else an empty object; safe to iterate with items().
inline const json& object_at(const json& j, const std::string& key) {
  static const json empty = json::object();
  auto it = j.find(key);
  return it == j.end() ? empty : *it;
}

inline std::optional<std::vector<std::string>> string_list(Diagnostics& d, const json& j, const std::string& what) {
  if (!j.is_array()) {
    d.add(what + " must be a list of strings");
    return std::nullopt;
  }
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) {
      d.add(what + " must be a list of strings");
      return std::nullopt;
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline CategoryRef category_from_json(const json& j, Report& report) {
  detail::Diagnostics d{{}, "category"};
  if (j.is_string()) {
    CategoryRef C = builtin_category(j.get<std::string>());
    if (!C) d.add("unknown builtin base '" + j.get<std::string>() + "'");
    report.merge(d.report);
    return C;
  }
  if (!j.is_object()) {
    d.add("must be a builtin name or an object");
    report.merge(d.report);
    return nullptr;
  }
  CategoryBuilder b;
  std::map<std::string, std::string> idnames;
  if (j.contains("identities")) {
    if (!j["identities"].is_object()) {
      d.add("identities must map objects to morphism names");
    } else {
      for (const auto& [o, m] : j["identities"].items()) {
        if (m.is_string()) idnames[o] = m.get<std::string>();
      }
    }
  }
  auto objects = detail::string_list(d, j.value("objects", json::array()), "objects");
  if (!objects || objects->empty()) {
    d.add("no objects declared");
    report.merge(d.report);
    return nullptr;
  }
  std::map<std::string, bool> seen;
  try {
    for (const auto& o : *objects) {
      if (seen[o]) d.add("duplicate object '" + o + "'");
      seen[o] = true;
      b.object(o, idnames.count(o) ? idnames[o] : std::string{});
    }
    for (const auto& m : j.value("morphisms", json::array())) {
      if (!m.is_object() || !m.contains("name") || !m.contains("dom") || !m.contains("cod")) {
        d.add("each morphism needs name, dom and cod");
        continue;
      }
      std::string dom = m["dom"].get<std::string>(), cod = m["cod"].get<std::string>();
      if (!seen.count(dom) || !seen.count(cod)) {
        d.add("morphism '" + m["name"].get<std::string>() + "' refers to an undeclared object");
        continue;
      }
      b.morphism(m["name"].get<std::string>(), dom, cod);
    }
    for (const auto& t : j.value("compose", json::array())) {
      if (!t.is_array() || t.size() != 3) {
        d.add("compose entries are [g, f, g∘f] triples");
        continue;
      }
      b.compose(t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>());
    }
  } catch (const std::exception& e) {
    d.add(e.what());
  }
  if (!d.report.ok()) {
    report.merge(d.report);
    return nullptr;
  }
  CategoryRef C = b.build();
  report.merge(validate_category(*C), "category: ");
  return C;
}

/// Missing actions of composites are derived from their factors.
inline PresheafRef presheaf_from_json(const CategoryRef& base, const std::string& name, const json& j, Report& report) {
  detail::Diagnostics d{{}, "presheaf " + name};
  const FinCategory& C = *base;
  if (!j.is_object() || !j.contains("carrier") || !j["carrier"].is_object()) {
    d.add("needs a carrier object");
    report.merge(d.report);
    return nullptr;
  }
  Presheaf X{base, std::vector<Carrier>(C.object_count()), std::vector<Function>(C.morphism_count())};
  for (const auto& [o, ids] : j["carrier"].items()) {
    auto c = C.find_object(o);
    if (!c) {
      d.add("carrier given for unknown object '" + o + "'");
      continue;
    }
    if (auto l = detail::string_list(d, ids, "carrier at " + o)) X.carrier[*c] = *l;
  }
  std::vector<bool> known(C.morphism_count(), false);
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    X.action[C.identity(c)].resize(X.size(c));
    for (Elem x = 0; x < X.size(c); ++x) X.action[C.identity(c)][x] = x;
    known[C.identity(c)] = true;
  }
  json actions = j.value("action", json::object());
  for (const auto& [m, table] : actions.items()) {
    auto f = C.find_morphism(m);
    if (!f) {
      d.add("action given for unknown morphism '" + m + "'");
      continue;
    }
    if (!table.is_object()) {
      d.add("action of " + m + " must map element ids to element ids");
      continue;
    }
    ObjectId a = C.dom(*f), b = C.cod(*f);
    Function act(X.size(b), 0);
    std::vector<bool> done(X.size(b), false);
    for (const auto& [from, to] : table.items()) {
      auto x = X.find(b, from);
      auto y = to.is_string() ? X.find(a, to.get<std::string>()) : std::nullopt;
      if (!x || !y) {
        d.add("action of " + m + " mentions an element outside its stages: '" + from + "'");
        continue;
      }
      act[*x] = *y;
      done[*x] = true;
    }
    for (Elem x = 0; x < X.size(b); ++x) {
      if (!done[x]) d.add("action of " + m + " is not defined on '" + X.id(b, x) + "' at stage " + C.object_name(b));
    }
    X.action[*f] = std::move(act);
    known[*f] = true;
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    if (!known[f] && X.size(C.cod(f)) == 0) known[f] = true;  // the empty function
  }
  for (bool progress = true; progress;) {
    progress = false;
    for (const auto& [key, h] : C.composition_table()) {
      auto [g, f] = key;
      if (known[h] || !known[g] || !known[f]) continue;
      ObjectId top = C.cod(g);
      X.action[h].resize(X.size(top));
      for (Elem x = 0; x < X.size(top); ++x) X.action[h][x] = X.restrict(f, X.restrict(g, x));
      known[h] = true;
      progress = true;
    }
  }
  for (MorphismId f = 0; f < C.morphism_count(); ++f) {
    if (!known[f]) d.add("action of " + C.morphism(f).name + " is missing");
  }
  if (!d.report.ok()) {
    report.merge(d.report);
    return nullptr;
  }
  Report v = validate_presheaf(X);
  report.merge(v, "presheaf " + name + ": ");
  return v.ok() ? share(std::move(X)) : nullptr;
}

inline std::optional<PresheafMap> map_from_json(const Workspace& ws, const std::string& name, const json& j,
                                                Report& report) {
  detail::Diagnostics d{{}, "map " + name};
  const FinCategory& C = *ws.base;
  if (!j.is_object() || !j.contains("src") || !j.contains("dst")) {
    d.add("needs src and dst");
    report.merge(d.report);
    return std::nullopt;
  }
  auto src = ws.presheaves.find(j["src"].get<std::string>());
  auto dst = ws.presheaves.find(j["dst"].get<std::string>());
  if (src == ws.presheaves.end() || dst == ws.presheaves.end()) {
    d.add("src or dst is not a declared presheaf");
    report.merge(d.report);
    return std::nullopt;
  }
  PresheafMap h{src->second, dst->second, std::vector<Function>(C.object_count())};
  json comps = j.value("components", json::object());
  for (ObjectId c = 0; c < C.object_count(); ++c) {
    const std::string& o = C.object_name(c);
    h.components[c].assign(src->second->size(c), 0);
    json table = comps.value(o, json::object());
    for (Elem x = 0; x < src->second->size(c); ++x) {
      const std::string& id = src->second->id(c, x);
      if (!table.contains(id) || !table[id].is_string()) {
        d.add("component at " + o + " is not defined on '" + id + "'");
        continue;
      }
      auto y = dst->second->find(c, table[id].get<std::string>());
      if (!y) {
        d.add("component at " + o + " sends '" + id + "' outside the target");
        continue;
      }
      h.components[c][x] = *y;
    }
  }
  if (!d.report.ok()) {
    report.merge(d.report);
    return std::nullopt;
  }
  Report v = validate_map(h);
  report.merge(v, "map " + name + ": ");
  if (!v.ok()) return std::nullopt;
  return h;
}

inline SignatureRef signature_from_json(const json& j, Report& report) {
  detail::Diagnostics d{{}, "signature"};
  Signature sig;
  if (!j.is_object()) {
    d.add("must be an object");
    report.merge(d.report);
    return nullptr;
  }
  if (auto s = detail::string_list(d, j.value("sorts", json::array()), "sorts")) sig.sorts = *s;
  for (const auto& [f, p] : detail::object_at(j, "functions").items()) {
    if (!p.is_object() || !p.contains("result") || !p["result"].is_string()) {
      d.add("function " + f + " needs args and result");
      continue;
    }
    FunctionProfile prof;
    if (auto a = detail::string_list(d, p.value("args", json::array()), "arguments of " + f)) prof.args = *a;
    prof.result = p["result"].get<std::string>();
    sig.functions[f] = prof;
  }
  for (const auto& [r, a] : detail::object_at(j, "relations").items()) {
    if (auto l = detail::string_list(d, a, "arguments of " + r)) sig.relations[r] = *l;
  }
  d.report.merge(validate_signature(sig));
  report.merge(d.report);
  if (!d.report.ok()) return nullptr;
  return std::make_shared<const Signature>(std::move(sig));
}

inline StructureRef structure_from_json(const Workspace& ws, const std::string& name, const json& j, Report& report) {
  detail::Diagnostics d{{}, "structure " + name};
  const FinCategory& C = *ws.base;
  const Signature& sig = *ws.sig;
  if (!j.is_object()) {
    d.add("must be an object");
    report.merge(d.report);
    return nullptr;
  }
  Structure M{ws.sig, ws.base, {}, {}, {}};
  json sorts = j.value("sorts", json::object());
  for (const auto& s : sig.sorts) {
    if (!sorts.contains(s)) {
      d.add("sort " + s + " is not interpreted");
      continue;
    }
    const json& v = sorts[s];
    if (v.is_string()) {
      auto it = ws.presheaves.find(v.get<std::string>());
      if (it == ws.presheaves.end()) {
        d.add("sort " + s + " refers to undeclared presheaf '" + v.get<std::string>() + "'");
        continue;
      }
      M.sorts[s] = it->second;
    } else {
      Report inner;
      PresheafRef X = presheaf_from_json(ws.base, name + "." + s, v, inner);
      d.report.merge(inner);
      if (X) M.sorts[s] = X;
    }
  }
  for (const auto& [s, v] : sorts.items()) {
    if (!sig.has_sort(s)) d.add("interpretation given for unknown sort " + s);
  }
  if (!d.report.ok()) {
    report.merge(d.report);
    return nullptr;
  }
  auto tuple_index = [&](const ProductCone& P, ObjectId c, const json& ids, std::optional<Elem>& out) {
    out.reset();
    if (!ids.is_array() || ids.size() != P.arity()) return;
    std::vector<Elem> coords;
    for (std::size_t k = 0; k < P.arity(); ++k) {
      if (!ids[k].is_string()) return;
      auto x = P.factors()[k]->find(c, ids[k].get<std::string>());
      if (!x) return;
      coords.push_back(*x);
    }
    out = P.encode(c, coords);
  };
  json funcs = j.value("functions", json::object());
  for (const auto& [f, prof] : sig.functions) {
    if (!funcs.contains(f)) {
      d.add("function " + f + " is not interpreted");
      continue;
    }
    ProductCone dom = M.product_of(prof.args);
    const PresheafRef& res = M.sorts.at(prof.result);
    PresheafMap h{dom.apex(), res, std::vector<Function>(C.object_count())};
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      const std::string& o = C.object_name(c);
      h.components[c].assign(dom.apex()->size(c), 0);
      std::vector<bool> done(dom.apex()->size(c), false);
      for (const auto& row : funcs[f].value(o, json::array())) {
        std::optional<Elem> w;
        if (row.is_array() && row.size() == 2) tuple_index(dom, c, row[0], w);
        auto y = (w && row[1].is_string()) ? res->find(c, row[1].get<std::string>()) : std::nullopt;
        if (!w || !y) {
          d.add("function " + f + " at " + o + " has a malformed entry " + row.dump());
          continue;
        }
        h.components[c][*w] = *y;
        done[*w] = true;
      }
      for (Elem w = 0; w < done.size(); ++w) {
        if (!done[w]) d.add("function " + f + " at " + o + " is not defined on " + dom.apex()->id(c, w));
      }
    }
    M.functions.emplace(f, std::move(h));
  }
  json rels = j.value("relations", json::object());
  for (const auto& [r, args] : sig.relations) {
    ProductCone amb = M.product_of(args);
    Subfunctor S = bottom(amb.apex());
    json per = rels.value(r, json::object());
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      const std::string& o = C.object_name(c);
      for (const auto& row : per.value(o, json::array())) {
        std::optional<Elem> w;
        tuple_index(amb, c, row, w);
        if (!w) {
          d.add("relation " + r + " at " + o + " has a malformed tuple " + row.dump());
          continue;
        }
        S.parts[c][*w] = true;
      }
    }
    M.relations.emplace(r, std::move(S));
  }
  for (const auto& [f, v] : funcs.items()) {
    if (!sig.has_function(f)) d.add("interpretation given for unknown function " + f);
  }
  for (const auto& [r, v] : rels.items()) {
    if (!sig.has_relation(r)) d.add("interpretation given for unknown relation " + r);
  }
  if (!d.report.ok()) {
    report.merge(d.report);
    return nullptr;
  }
  Report v = structure_validate(M);
  report.merge(v, "structure " + name + ": ");
  return v.ok() ? share(std::move(M)) : nullptr;
}

/// "y:node, z:node" or [["y","node"], ...].
inline Context context_from_json(const json& j) {
  Context ctx;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_array() || v.size() != 2) throw ParseError("context entries are [name, sort] pairs", 1, 1);
      ctx.push_back({v[0].get<std::string>(), v[1].get<std::string>()});
    }
    return ctx;
  }
  if (!j.is_string()) throw ParseError("context must be a string or a list of pairs", 1, 1);
  std::string text = j.get<std::string>();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    item = trim(item);
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError("context entry '" + item + "' lacks ':sort'", 1, 1);
    ctx.push_back({trim(item.substr(0, colon)), trim(item.substr(colon + 1))});
  }
  return ctx;
}

namespace detail {

/// Where a formula's text starts: file label plus line and column.
struct SourceSpot {
  std::string file;
  std::size_t line = 0;
  std::size_t column = 0;

  /// A parse position inside the text, moved into file coordinates.
  std::string locate(std::size_t l, std::size_t c) const {
    if (line == 0) return std::to_string(l) + ":" + std::to_string(c);
    std::size_t col = l == 1 ? column + c - 1 : c;
    return (file.empty() ? "" : file + ":") + std::to_string(line + l - 1) + ":" + std::to_string(col);
  }
};

inline SourceSpot source_spot(const json& body) {
  SourceSpot s;
  if (body.contains("file") && body["file"].is_string()) s.file = body["file"].get<std::string>();
  const json& at = body.contains("at") ? body["at"] : json();
  if (at.is_array() && at.size() == 2 && at[0].is_number_unsigned() && at[1].is_number_unsigned()) {
    s.line = at[0].get<std::size_t>();
    s.column = at[1].get<std::size_t>();
  }
  return s;
}

}  // namespace detail

inline std::optional<NamedFormula> formula_from(const Signature& sig, const Context& ctx, const std::string& text,
                                                Report& report, const std::string& where,
                                                const detail::SourceSpot& spot = {}) {
  NamedFormula nf{ctx, text, Formula::top(), std::nullopt};
  Report cr = validate_context(sig, ctx);
  for (const auto& v : ctx) {
    if (sig.has_function(v.name)) cr.add("variable " + v.name + " clashes with a function symbol");
  }
  if (!cr.ok()) {
    report.merge(cr, where + ": ");
    return std::nullopt;
  }
  try {
    nf.formula = parse_formula(text, sig);
    typecheck(sig, ctx, nf.formula);
  } catch (const ParseError& e) {
    std::string msg = e.what();
    msg.erase(0, msg.find(": ") + 2);
    report.add(where + ": " + spot.locate(e.line(), e.column()) + ": " + msg);
    return std::nullopt;
  } catch (const SortError& e) {
    report.add(where + (spot.line ? " (" + spot.locate(1, 1) + ")" : "") + ": " + e.what());
    return std::nullopt;
  } catch (const ContextError& e) {
    nf.unsuitable = e.what();
  }
  return nf;
}

inline std::optional<FilterFin> filter_from_json(const std::string& name, const json& j, Report& report) {
  detail::Diagnostics d{{}, "filter " + name};
  if (!j.is_object() || !j.contains("indices")) {
    d.add("needs indices");
    report.merge(d.report);
    return std::nullopt;
  }
  auto indices = detail::string_list(d, j["indices"], "indices");
  if (!indices) {
    report.merge(d.report);
    return std::nullopt;
  }
  auto set_of = [&](const json& l) -> std::optional<IndexSet> {
    auto names = detail::string_list(d, l, "index set");
    if (!names) return std::nullopt;
    IndexSet J = 0;
    for (const auto& n : *names) {
      auto it = std::find(indices->begin(), indices->end(), n);
      if (it == indices->end()) {
        d.add("unknown index '" + n + "'");
        return std::nullopt;
      }
      J |= IndexSet{1} << (it - indices->begin());
    }
    return J;
  };
  std::optional<FilterFin> F;
  try {
    if (j.contains("principal")) {
      if (auto J = set_of(j["principal"])) F = principal_filter(*indices, *J);
    } else if (j.contains("members")) {
      FilterFin G{*indices, {}};
      for (const auto& m : j["members"]) {
        if (auto J = set_of(m)) G.members.push_back(*J);
      }
      std::sort(G.members.begin(), G.members.end());
      G.members.erase(std::unique(G.members.begin(), G.members.end()), G.members.end());
      Report v = validate_filter(G);
      d.report.merge(v);
      if (v.ok()) F = G;
    } else {
      d.add("needs principal or members");
    }
  } catch (const Error& e) {
    d.add(e.what());
  }
  report.merge(d.report);
  return d.report.ok() ? F : std::nullopt;
}

/// Merges definition documents section by section.
inline json merge_documents(const std::vector<std::pair<std::string, json>>& docs, Report& report) {
  json out = json::object();
  for (const auto& [file, doc] : docs) {
    if (!doc.is_object()) {
      report.add(file + ": top level must be an object");
      continue;
    }
    for (const auto& [section, body] : doc.items()) {
      if (section == "category" || section == "signature") {
        if (out.contains(section) && out[section] != body) report.add(file + ": " + section + " declared twice");
        out[section] = body;
        continue;
      }
      if (!body.is_object()) {
        report.add(file + ": section " + section + " must be an object");
        continue;
      }
      for (const auto& [key, value] : body.items()) {
        if (out[section].contains(key)) report.add(file + ": " + section + " '" + key + "' declared twice");
        out[section][key] = value;
      }
    }
  }
  return out;
}

inline const std::vector<std::string> kKnownSections = {"category",   "presheaves", "maps",    "signature",
                                                        "structures", "formulas",   "filters", "families"};

/// Resolves a merged document; every failure becomes a diagnostic.
namespace detail {
inline void resolve_sections(const json& doc, Workspace& ws, Report& report);
}

inline Workspace workspace_from_json(const json& doc, Report& report) {
  Workspace ws;
  try {
    detail::resolve_sections(doc, ws, report);
  } catch (const json::exception& e) {
    report.add(std::string("malformed document: ") + e.what());
  }
  return ws;
}

inline void detail::resolve_sections(const json& doc, Workspace& ws, Report& report) {
  for (const auto& [section, body] : doc.items()) {
    if (std::find(kKnownSections.begin(), kKnownSections.end(), section) == kKnownSections.end()) {
      report.add("unknown section '" + section + "'");
    }
  }
  if (!doc.contains("category")) {
    report.add("no category declared");
    return;
  }
  ws.base = category_from_json(doc["category"], report);
  if (!ws.base || !report.ok()) return;
  for (const auto& [name, body] : detail::object_at(doc, "presheaves").items()) {
    if (auto X = presheaf_from_json(ws.base, name, body, report)) ws.presheaves[name] = X;
  }
  for (const auto& [name, body] : detail::object_at(doc, "maps").items()) {
    if (auto h = map_from_json(ws, name, body, report)) ws.maps.emplace(name, std::move(*h));
  }
  ws.sig = signature_from_json(doc.value("signature", json::object()), report);
  if (!ws.sig) return;
  for (const auto& [name, body] : detail::object_at(doc, "structures").items()) {
    if (auto M = structure_from_json(ws, name, body, report)) ws.structures[name] = M;
  }
  for (const auto& [name, body] : detail::object_at(doc, "formulas").items()) {
    try {
      if (!body.is_object() || !body.contains("text")) {
        report.add("formula " + name + ": needs text");
        continue;
      }
      Context ctx = context_from_json(body.value("context", json::array()));
      detail::SourceSpot spot = detail::source_spot(body);
      if (auto nf = formula_from(*ws.sig, ctx, body["text"].get<std::string>(), report, "formula " + name, spot)) {
        ws.formulas.emplace(name, std::move(*nf));
      }
    } catch (const Error& e) {
      report.add("formula " + name + ": " + e.what());
    }
  }
  for (const auto& [name, body] : detail::object_at(doc, "filters").items()) {
    if (auto F = filter_from_json(name, body, report)) ws.filters.emplace(name, std::move(*F));
  }
  for (const auto& [name, body] : detail::object_at(doc, "families").items()) {
    detail::Diagnostics d{{}, "family " + name};
    auto members = detail::string_list(d, body, "members");
    if (members) {
      if (members->empty()) d.add("is empty");
      for (const auto& m : *members) {
        if (!ws.structures.count(m)) d.add("refers to undeclared structure '" + m + "'");
      }
    }
    report.merge(d.report);
    if (d.report.ok()) ws.families[name] = *members;
  }
}

}  // namespace topos::io
