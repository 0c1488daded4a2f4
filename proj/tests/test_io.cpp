#include <catch_amalgamated.hpp>

#include "topos_forge/io/load.hpp"

using namespace topos;
using topos::io::json;

namespace {

const char* kModel = R"(category terminal

presheaf N
  * = a b

signature
  sort node
  relation adj : node, node

structure A
  sort node = N
  relation adj @* : (a, b)

formula has_succ (y:node) : exists z:node.
    adj(y, z)
formula dangling : adj(y, z)

family pair = A A
filter at_first over i j : principal i
)";

bool mentions(const Report& r, const std::string& needle) {
  for (const auto& v : r.violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("a DSL workspace loads and evaluates") {
  io::Loaded L = io::load_texts({{"model.tf", kModel}});
  INFO((L.diagnostics.ok() ? "" : L.diagnostics.violations.front()));
  REQUIRE(L.diagnostics.ok());
  const io::Workspace& ws = L.workspace;
  REQUIRE(ws.structures.count("A"));
  const io::NamedFormula& f = ws.formulas.at("has_succ");
  CHECK_FALSE(f.unsuitable);
  Subfunctor S = interp_formula(ws.structures.at("A"), f.context, f.formula);
  CHECK(S.count() == 1);
  CHECK(ws.formulas.at("dangling").unsuitable);
  CHECK(ws.families.at("pair").size() == 2);
  CHECK(is_ultrafilter(ws.filters.at("at_first")));
}

TEST_CASE("JSON and DSL forms of a workspace agree") {
  json doc = io::compile_dsl(kModel);
  Report r;
  io::Workspace a = io::workspace_from_json(doc, r);
  REQUIRE(r.ok());
  // Round trip the structure through its JSON serialization.
  json st = io::structure_to_json(*a.structures.at("A"));
  json again = {{"category", "terminal"},
                {"signature", io::signature_to_json(*a.sig)},
                {"structures", {{"A", st}}}};
  Report r2;
  io::Workspace b = io::workspace_from_json(again, r2);
  INFO((r2.ok() ? "" : r2.violations.front()));
  REQUIRE(r2.ok());
  CHECK(io::structure_to_json(*b.structures.at("A")) == st);
}

TEST_CASE("presheaf JSON round trip over the graph base") {
  const char* text = R"({
    "category": "graph",
    "presheaves": {"G": {"carrier": {"V": ["v1", "v2"], "E": ["e"]}, "action": {"s": {"e": "v1"}, "t": {"e": "v2"}}}}
  })";
  io::Loaded L = io::load_texts({{"g.json", text}});
  REQUIRE(L.diagnostics.ok());
  const PresheafRef& G = L.workspace.presheaves.at("G");
  CHECK(validate_presheaf(*G).ok());
  json back = io::presheaf_to_json(*G);
  Report r;
  PresheafRef G2 = io::presheaf_from_json(L.workspace.base, "G", back, r);
  REQUIRE(G2);
  CHECK(*G2 == *G);
}

TEST_CASE("broken naturality is located at morphism and stage") {
  const char* text = R"(category graph

presheaf G
  V = v1 v2
  E = e
  s : e -> v1
  t : e -> v2

map swap : G -> G
  V : v1 -> v2, v2 -> v1
  E : e -> e
)";
  io::Loaded L = io::load_texts({{"bad.tf", text}});
  REQUIRE_FALSE(L.diagnostics.ok());
  CHECK(mentions(L.diagnostics, "map swap: naturality fails for s at stage E"));
}

TEST_CASE("references to undeclared names are diagnosed") {
  const char* text = R"(category terminal

presheaf N
  * = a

signature
  sort node

structure M
  sort node = Nodes

family fam = M Ghost
)";
  io::Loaded L = io::load_texts({{"m.tf", text}});
  CHECK(mentions(L.diagnostics, "undeclared presheaf 'Nodes'"));
}

TEST_CASE("formula errors are located in the file") {
  const char* text = R"(category terminal

presheaf N
  * = a

signature
  sort node
  relation adj : node, node

formula broken (y:node) : adj(y,
formula arity (y:node) : adj(y)
)";
  io::Loaded L = io::load_texts({{"f.tf", text}});
  CHECK(mentions(L.diagnostics, "formula broken: f.tf:10:"));
  CHECK(mentions(L.diagnostics, "formula arity (f.tf:11:26): relation adj expects 2 arguments"));
}

TEST_CASE("DSL syntax errors carry the file label and position") {
  io::Loaded L = io::load_texts({{"x.tf", "category terminal\n\npresheaf\n  * = a\n"}});
  REQUIRE_FALSE(L.diagnostics.ok());
  CHECK(L.diagnostics.violations.front().rfind("x.tf:3:", 0) == 0);
  io::Loaded J = io::load_texts({{"y.json", "{\"category\": \"terminal\",\n  oops}"}});
  REQUIRE_FALSE(J.diagnostics.ok());
  CHECK(J.diagnostics.violations.front().rfind("y.json:2:", 0) == 0);
}

TEST_CASE("duplicate definitions across files are rejected") {
  io::Loaded L = io::load_texts({{"a.tf", "category terminal\npresheaf N\n  * = a\n"},
                                 {"b.tf", "presheaf N\n  * = b\n"}});
  CHECK(mentions(L.diagnostics, "N"));
  CHECK_FALSE(L.diagnostics.ok());
}

TEST_CASE("unknown sections and builtin bases") {
  Report r;
  io::workspace_from_json(json{{"category", "terminal"}, {"extras", json::object()}}, r);
  CHECK(mentions(r, "unknown section 'extras'"));
  for (const char* name : {"terminal", "arrow", "graph", "chain", "reflexive_graph"}) {
    CategoryRef C = io::builtin_category(name);
    REQUIRE(C);
    CHECK(validate_category(*C).ok());
  }
}

TEST_CASE("custom categories from JSON") {
  json cat = {{"objects", {"a", "b"}},
              {"morphisms", {{{"name", "f"}, {"dom", "a"}, {"cod", "b"}}, {{"name", "g"}, {"dom", "a"}, {"cod", "b"}}}}};
  Report r;
  CategoryRef C = io::category_from_json(cat, r);
  REQUIRE(C);
  CHECK(C->morphism_count() == 4);
  json back = io::category_to_json(*C);
  Report r2;
  CategoryRef D = io::category_from_json(back, r2);
  REQUIRE(D);
  CHECK(*C == *D);
}

TEST_CASE("contexts in both spellings") {
  Context a = io::context_from_json("y:node, z:node");
  Context b = io::context_from_json(json::array({json::array({"y", "node"}), json::array({"z", "node"})}));
  CHECK(a == b);
  CHECK(a.size() == 2);
  CHECK(io::context_from_json("").empty());
}

TEST_CASE("subfunctors serialize as sorted id lists") {
  io::Loaded L = io::load_texts({{"model.tf", kModel}});
  REQUIRE(L.diagnostics.ok());
  const StructureRef& M = L.workspace.structures.at("A");
  json j = io::subfunctor_to_json(M->relations.at("adj"));
  CHECK(j.dump() == R"x({"*":["(a,b)"]})x");
}
