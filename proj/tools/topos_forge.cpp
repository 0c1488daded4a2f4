// topos-forge: batch checks of first-order structures in finite presheaf topoi.
//
// Exit codes: 0 success, 1 parse or validation failure, 2 unsuitable context,
// 3 failed hypothesis, 4 disagreement or failed verdict, 5 budget exceeded.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topos_forge/io/load.hpp"
#include "topos_forge/topos_forge.hpp"

namespace {

using nlohmann::json;
using namespace topos;

enum Exit : int { kOk = 0, kInvalid = 1, kUnsuitable = 2, kHypothesis = 3, kDisagree = 4, kBudget = 5 };

struct Common {
  std::vector<std::string> files;
  bool json = false;
  bool timing = false;
  std::size_t max_subobjects = kDefaultSubobjectCap;
  std::size_t max_depth = 4;
};

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw Failure{code, message}; }

io::Workspace load(const Common& c) {
  io::Loaded L = io::load_workspace(c.files);
  if (!L.diagnostics.ok()) {
    std::string all;
    for (const auto& v : L.diagnostics.violations) all += (all.empty() ? "" : "\n") + v;
    fail(kInvalid, all);
  }
  return std::move(L.workspace);
}

template <class Map>
const typename Map::mapped_type& pick(const Map& m, const std::string& name, const std::string& what) {
  if (name.empty()) {
    if (m.size() == 1) return m.begin()->second;
    fail(kInvalid, "the workspace declares " + std::to_string(m.size()) + " " + what + "s; name one");
  }
  auto it = m.find(name);
  if (it == m.end()) fail(kInvalid, "no " + what + " named '" + name + "'");
  return it->second;
}

template <class Map>
std::string pick_name(const Map& m, const std::string& name, const std::string& what) {
  if (!name.empty() || m.size() != 1) {
    pick(m, name, what);
    return name;
  }
  return m.begin()->first;
}

/// A formula from the workspace by name, or inline text with a context.
struct Selected {
  std::string name;
  Context context;
  Formula formula;
};

Selected select_formula(const io::Workspace& ws, const std::string& name, const std::string& text,
                        const std::string& context, const Common& c) {
  Selected out{name, {}, Formula::top()};
  if (!text.empty()) {
    Report r;
    auto nf = io::formula_from(*ws.sig, io::context_from_json(json(context)), text, r, "formula");
    if (!nf) fail(kInvalid, r.violations.front());
    if (nf->unsuitable) fail(kUnsuitable, "unsuitable context: " + *nf->unsuitable);
    out.name = text;
    out.context = nf->context;
    out.formula = nf->formula;
  } else {
    const io::NamedFormula& nf = pick(ws.formulas, name, "formula");
    if (nf.unsuitable) fail(kUnsuitable, "unsuitable context: " + *nf.unsuitable);
    out.name = pick_name(ws.formulas, name, "formula");
    out.context = nf.context;
    out.formula = nf.formula;
  }
  if (depth(out.formula) > c.max_depth) {
    fail(kBudget, "formula depth " + std::to_string(depth(out.formula)) + " exceeds --max-depth " +
                      std::to_string(c.max_depth));
  }
  return out;
}

json context_json(const Context& ctx) {
  json j = json::array();
  for (const auto& v : ctx) j.push_back({v.name, v.sort});
  return j;
}

void emit(const json& j) { std::cout << j.dump() << "\n"; }

// ---- commands ----------------------------------------------------------------

int cmd_check(const Common& c) {
  io::Loaded L = io::load_workspace(c.files);
  const io::Workspace& ws = L.workspace;
  if (c.json) {
    json j = {{"ok", L.diagnostics.ok()}, {"diagnostics", L.diagnostics.violations}};
    if (L.diagnostics.ok()) {
      j["counts"] = {{"presheaves", ws.presheaves.size()}, {"maps", ws.maps.size()},
                     {"structures", ws.structures.size()}, {"formulas", ws.formulas.size()},
                     {"filters", ws.filters.size()},       {"families", ws.families.size()}};
      json unsuitable = json::object();
      for (const auto& [n, f] : ws.formulas) {
        if (f.unsuitable) unsuitable[n] = *f.unsuitable;
      }
      j["unsuitable_formulas"] = unsuitable;
    }
    emit(j);
  } else if (L.diagnostics.ok()) {
    std::cout << "ok: " << ws.presheaves.size() << " presheaves, " << ws.maps.size() << " maps, "
              << ws.structures.size() << " structures, " << ws.formulas.size() << " formulas, " << ws.filters.size()
              << " filters, " << ws.families.size() << " families\n";
    for (const auto& [n, f] : ws.formulas) {
      if (f.unsuitable) std::cerr << "note: formula " << n << " has an unsuitable context: " << *f.unsuitable << "\n";
    }
  }
  for (const auto& v : L.diagnostics.violations) std::cerr << v << "\n";
  return L.diagnostics.ok() ? kOk : kInvalid;
}

int cmd_eval(const Common& c, const std::string& structure, const std::string& formula, const std::string& text,
             const std::string& context) {
  io::Workspace ws = load(c);
  const StructureRef& M = pick(ws.structures, structure, "structure");
  Selected sel = select_formula(ws, formula, text, context, c);
  Interpreter I(M);
  Subfunctor S = I.formula(sel.context, sel.formula);
  bool holds = models(I, sel.context, sel.formula);
  if (c.json) {
    emit({{"structure", pick_name(ws.structures, structure, "structure")},
          {"formula", to_string(sel.formula)},
          {"context", context_json(sel.context)},
          {"class", class_name(classify(sel.formula))},
          {"interpretation", io::subfunctor_to_json(S)},
          {"models", holds}});
  } else {
    std::cout << context_text(sel.context) << " | " << to_string(sel.formula) << "\n";
    json listing = io::subfunctor_to_json(S);
    for (const auto& [stage, ids] : listing.items()) {
      std::cout << "  " << stage << ": {";
      bool first = true;
      for (const auto& id : ids) {
        std::cout << (first ? "" : ", ") << id.get<std::string>();
        first = false;
      }
      std::cout << "}\n";
    }
    std::cout << "models: " << (holds ? "true" : "false") << "\n";
  }
  return kOk;
}

int cmd_force(const Common& c, const std::string& structure, const std::string& formula, const std::string& text,
              const std::string& context, const std::string& element, bool all_alphas, bool rules) {
  io::Workspace ws = load(c);
  const StructureRef& M = pick(ws.structures, structure, "structure");
  Selected sel = select_formula(ws, formula, text, context, c);
  Interpreter I(M);
  const ProductCone& X = I.context_object(sel.context);
  const FinCategory& C = *M->base;
  std::vector<std::pair<std::string, PresheafMap>> alphas;
  if (!element.empty()) {
    auto colon = element.find(':');
    if (colon == std::string::npos) fail(kInvalid, "--element takes STAGE:ID");
    auto stage = C.find_object(element.substr(0, colon));
    if (!stage) fail(kInvalid, "unknown stage in --element");
    std::string id = element.substr(colon + 1);
    auto x = X.apex()->find(*stage, id);
    if (!x) x = X.apex()->find(*stage, "(" + id + ")");
    if (!x) fail(kInvalid, "no element '" + element.substr(colon + 1) + "' at that stage");
    alphas.emplace_back("y(" + element + ")", yoneda_map(X.apex(), *stage, *x));
  } else if (all_alphas) {
    std::size_t k = 0;
    for (const auto& S : sub_enumerate(X.apex(), c.max_subobjects).elements) {
      alphas.emplace_back("sub#" + std::to_string(k++), as_presheaf(S).legs[0]);
    }
  } else {
    alphas.emplace_back("id", identity_map(X.apex()));
  }
  Subfunctor phi = I.formula(sel.context, sel.formula);
  bool all_ok = true;
  for (const auto& [label, alpha] : alphas) {
    ForcingJudgment fj = forces_with(alpha, phi);
    json j = {{"formula", to_string(sel.formula)}, {"context", context_json(sel.context)}, {"alpha", label},
              {"forced", fj.verdict}};
    if (fj.counterexample) {
      j["counterexample"] = {{"stage", C.object_name(fj.counterexample->stage)},
                             {"element", alpha.src->id(fj.counterexample->stage, fj.counterexample->element)},
                             {"image", X.apex()->id(fj.counterexample->stage, fj.counterexample->image)}};
    }
    if (rules) {
      RuleCheckOptions ro;
      ro.max_subobjects = std::min<std::size_t>(c.max_subobjects, ro.max_subobjects);
      RuleReport rr = kj_rule_check(I, sel.context, alpha, sel.formula, ro);
      j["rule"] = {{"rule", rr.rule},         {"rule_side", rr.rule_side}, {"monotone", rr.monotone},
                   {"local", rr.local},       {"probes", rr.probes},       {"truncated", rr.truncated},
                   {"notes", rr.notes},       {"ok", rr.ok()}};
      all_ok = all_ok && rr.ok();
    }
    if (c.json) {
      emit(j);
    } else {
      std::cout << label << ": " << (fj.verdict ? "forced" : "not forced");
      if (fj.counterexample) std::cout << " (at " << j["counterexample"]["stage"].get<std::string>() << ", "
                                       << j["counterexample"]["image"].get<std::string>() << " is outside)";
      if (rules) std::cout << "; rule " << j["rule"]["rule"].get<std::string>() << (j["rule"]["ok"].get<bool>() ? " confirmed" : " FAILED");
      std::cout << "\n";
    }
  }
  return all_ok ? kOk : kDisagree;
}

std::size_t thread_cap() {
  const char* env = std::getenv("TOPOS_FORGE_THREADS");
  if (!env) return 1;
  try {
    long n = std::stol(env);
    return n < 1 ? 1 : static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    fail(kInvalid, "TOPOS_FORGE_THREADS must be a positive integer");
  }
}

int cmd_los(const Common& c, const std::string& family, const std::string& filter, std::vector<std::string> formulas,
            bool all_alphas, bool advisory, bool trace) {
  io::Workspace ws = load(c);
  const auto& members = pick(ws.families, family, "family");
  const FilterFin& F = pick(ws.filters, filter, "filter");
  std::vector<StructureRef> fam;
  for (const auto& m : members) fam.push_back(ws.structures.at(m));
  if (fam.size() != F.index_count()) {
    fail(kInvalid, "the family has " + std::to_string(fam.size()) + " members but the filter is over " +
                       std::to_string(F.index_count()) + " indices");
  }
  if (formulas.empty()) {
    for (const auto& [n, f] : ws.formulas) {
      if (f.unsuitable) {
        std::cerr << "note: skipping formula " << n << ": " << *f.unsuitable << "\n";
        continue;
      }
      formulas.push_back(n);
    }
  }
  std::vector<SweepItem> items;
  for (const auto& n : formulas) {
    Selected sel = select_formula(ws, n, "", "", c);
    items.push_back({sel.context, sel.formula});
  }
  SweepOptions so;
  so.los.advisory = advisory;
  so.los.max_subobjects = c.max_subobjects;
  so.los.trace = trace;
  so.all_alphas = all_alphas;
  so.threads = thread_cap();
  std::vector<LosReport> reports = los_sweep(F, fam, items, so);
  std::size_t agree = 0;
  std::vector<std::string> hypotheses;
  for (const auto& r : reports) {
    agree += r.agree ? 1 : 0;
    hypotheses = r.failed_hypotheses;
    json j = {{"formula", r.formula},
              {"context", context_json(r.context)},
              {"alpha", r.alpha},
              {"filter", r.filter},
              {"lhs", r.lhs},
              {"rhs", r.rhs_text},
              {"rhs_in_filter", r.rhs_in_filter},
              {"agree", r.agree},
              {"advisory", r.advisory},
              {"failed_hypotheses", r.failed_hypotheses},
              {"image_factorized", r.image_factorized},
              {"subobjects_of_domain", r.subobjects_of_domain},
              {"fp_stage", r.fp_stage},
              {"fp_agreement_stage", r.fp_agreement_stage}};
    if (trace) j["trace"] = r.trace;
    if (c.json) {
      emit(j);
    } else {
      std::cout << (r.agree ? "agree    " : "DISAGREE ") << context_text(r.context) << " " << r.formula
                << "  alpha " << r.alpha << "  lhs=" << (r.lhs ? "true" : "false") << " rhs=" << r.rhs_text
                << (r.advisory ? "  [advisory]" : "") << "\n";
    }
  }
  std::size_t total = reports.size();
  if (c.json) {
    emit({{"summary", true},
          {"checked", total},
          {"agree", agree},
          {"disagree", total - agree},
          {"advisory", !hypotheses.empty()},
          {"failed_hypotheses", hypotheses}});
  } else {
    std::cout << agree << "/" << total << " agree" << (hypotheses.empty() ? "" : " (advisory run)") << "\n";
  }
  return agree == total ? kOk : kDisagree;
}

int cmd_omega(const Common& c, const std::string& base) {
  CategoryRef C;
  if (!base.empty()) {
    C = io::builtin_category(base);
    if (!C) fail(kInvalid, "unknown builtin base '" + base + "'");
  } else {
    C = load(c).base;
  }
  Omega W = omega(C);
  json sizes = json::array();
  json stages = json::object();
  for (ObjectId o = 0; o < C->object_count(); ++o) {
    sizes.push_back(W.sieves[o].size());
    json list = json::array();
    for (const auto& s : W.sieves[o]) list.push_back(sieve_id(*C, s));
    stages[C->object_name(o)] = list;
  }
  if (c.json) {
    emit({{"sizes", sizes}, {"sieves", stages}});
  } else {
    std::cout << "sizes " << sizes.dump() << "\n";
    for (ObjectId o = 0; o < C->object_count(); ++o) {
      std::cout << "  " << C->object_name(o) << ": " << stages[C->object_name(o)].dump() << "\n";
    }
  }
  return kOk;
}

int cmd_product(const Common& c, const std::string& family, const std::string& filter) {
  io::Workspace ws = load(c);
  const auto& members = pick(ws.families, family, "family");
  std::vector<StructureRef> fam;
  for (const auto& m : members) fam.push_back(ws.structures.at(m));
  StructureRef P;
  if (filter.empty()) {
    P = structure_product(fam).product;
  } else {
    const FilterFin& F = pick(ws.filters, filter, "filter");
    if (fam.size() != F.index_count()) fail(kInvalid, "family size does not match the filter's index set");
    P = filtered_product(F, fam).product;
  }
  json j = io::structure_to_json(*P);
  std::cout << (c.json ? j.dump() : j.dump(2)) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks first-order structures in finite presheaf topoi"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool files_required = true) {
    auto* opt = sub->add_option("files", common.files, "definition files (.json or DSL) or directories");
    if (files_required) opt->required();
    sub->add_flag("--json", common.json, "machine-readable output on stdout");
    sub->add_flag("--timing", common.timing, "report elapsed time on stderr");
    sub->add_option("--max-subobjects", common.max_subobjects, "cap on subobject enumeration")->capture_default_str();
    sub->add_option("--max-depth", common.max_depth, "largest accepted formula depth")->capture_default_str();
  };
  std::string structure, formula, text, context, element, family, filter, base;
  std::vector<std::string> formulas;
  bool all_alphas = false, advisory = false, rules = false, no_trace = false;

  auto* check = app.add_subcommand("check", "validate a workspace");
  add_common(check);
  auto* eval = app.add_subcommand("eval", "print {x | phi} per stage and the models verdict");
  add_common(eval);
  auto* force = app.add_subcommand("force", "forcing at generalized elements");
  add_common(force);
  for (auto* sub : {eval, force}) {
    sub->add_option("--structure", structure, "structure name");
    sub->add_option("--formula", formula, "named formula");
    sub->add_option("--text", text, "inline formula text");
    sub->add_option("--context", context, "context for --text, e.g. 'y:node, z:node'");
  }
  force->add_option("--element", element, "Yoneda element STAGE:ID of the context object");
  force->add_flag("--all-alphas", all_alphas, "every subobject inclusion");
  force->add_flag("--rules", rules, "check the forcing rule of the top connective");
  auto* los = app.add_subcommand("los", "compare the filtered product with its factors");
  add_common(los);
  los->add_option("--family", family, "family name");
  los->add_option("--filter", filter, "filter name");
  los->add_option("--formula", formulas, "named formula (repeatable; default all)");
  los->add_flag("--all-alphas", all_alphas, "every subobject inclusion into the context object");
  los->add_flag("--advisory", advisory, "run even when hypotheses fail");
  los->add_flag("--no-trace", no_trace, "omit the connective trace");
  auto* om = app.add_subcommand("omega", "sieves of the subobject classifier");
  add_common(om, false);
  om->add_option("--base", base, "builtin base instead of a workspace");
  auto* prod = app.add_subcommand("product", "print the product or filtered product of a family");
  add_common(prod);
  prod->add_option("--family", family, "family name");
  prod->add_option("--filter", filter, "filter name");

  CLI11_PARSE(app, argc, argv);
  auto start = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    if (om->parsed() && base.empty() && common.files.empty()) fail(kInvalid, "omega needs files or --base");
    if (check->parsed()) code = cmd_check(common);
    if (eval->parsed()) code = cmd_eval(common, structure, formula, text, context);
    if (force->parsed()) code = cmd_force(common, structure, formula, text, context, element, all_alphas, rules);
    if (los->parsed()) code = cmd_los(common, family, filter, formulas, all_alphas, advisory, !no_trace);
    if (om->parsed()) code = cmd_omega(common, base);
    if (prod->parsed()) code = cmd_product(common, family, filter);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    code = f.code;
  } catch (const HypothesisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kHypothesis;
  } catch (const ContextError& e) {
    std::cerr << "error: unsuitable context: " << e.what() << "\n";
    code = kUnsuitable;
  } catch (const ResourceError& e) {
    std::cerr << "error: budget exceeded: " << e.what() << "\n";
    code = kBudget;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kInvalid;
  } catch (const SortError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kInvalid;
  }
  if (common.timing) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "elapsed: " << ms << " ms\n";
  }
  return code;
}
