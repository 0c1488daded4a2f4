#include <catch_amalgamated.hpp>

#include "support/corpus.hpp"
#include "support/random.hpp"

using namespace topos;

TEST_CASE("coproducts and the initial object") {
  CategoryRef G = graph_category();
  PresheafRef A = support::single_edge_graph();
  Cone S = coproduct(G, {A, A});
  CHECK(S.apex->size(0) == 4);
  CHECK(S.apex->size(1) == 2);
  CHECK(validate_presheaf(*S.apex).ok());
  for (const auto& leg : S.legs) CHECK(is_mono(leg));
  PresheafRef zero = initial(G);
  CHECK(zero->total_size() == 0);
  CHECK(hom_enumerate(zero, A).size() == 1);
  CHECK(validate_map(from_initial(A)).ok());
}

namespace {

/// Chain X0 → X1 → X2 of quotient maps collapsing the two vertices of the edge.
DirectedDiagram collapsing_chain() {
  CategoryRef C = graph_category();
  PresheafRef G = support::single_edge_graph();
  PresheafRef loop = share(Presheaf{C, {{"p"}, {"l"}}, {{0}, {0}, {0}, {0}}});
  PresheafMap q{G, loop, {{0, 0}, {0}}};
  REQUIRE(validate_map(q).ok());
  DirectedDiagram D;
  D.stages = {"0", "1", "2"};
  D.nodes = {G, loop, loop};
  D.arrows.assign(3, std::vector<std::optional<PresheafMap>>(3));
  D.arrows[0][0] = identity_map(G);
  D.arrows[1][1] = identity_map(loop);
  D.arrows[2][2] = identity_map(loop);
  D.arrows[0][1] = q;
  D.arrows[0][2] = q;
  D.arrows[1][2] = identity_map(loop);
  return D;
}

}  // namespace

TEST_CASE("directed colimit of a collapsing chain") {
  DirectedDiagram D = collapsing_chain();
  REQUIRE(validate_diagram(D).ok());
  DirectedColimit L = directed_colimit(D);
  CHECK(L.apex()->size(0) == 1);
  CHECK(L.apex()->size(1) == 1);
  // Canonical representative: least (stage, element id).
  CHECK(L.representative[0][0] == std::pair<std::size_t, Elem>{0, 0});
  for (std::size_t i = 0; i < D.size(); ++i) CHECK(validate_map(L.leg(i)).ok());
  for (std::size_t i = 0; i < D.size(); ++i) {
    for (std::size_t k = 0; k < D.size(); ++k) {
      if (D.has_arrow(i, k)) CHECK(compose(L.leg(k), D.edge(i, k)) == L.leg(i));
    }
  }
}

TEST_CASE("non-directed diagrams are rejected") {
  DirectedDiagram D = collapsing_chain();
  D.arrows[0][2].reset();
  D.arrows[1][2].reset();
  D.arrows[0][1].reset();
  CHECK_FALSE(validate_diagram(D).ok());
}

TEST_CASE("colimit ids are stable across runs") {
  DirectedDiagram D = collapsing_chain();
  DirectedColimit a = directed_colimit(D), b = directed_colimit(D);
  CHECK(*a.apex() == *b.apex());
}

TEST_CASE("factorization through a colimit stage and essential uniqueness") {
  DirectedDiagram D = collapsing_chain();
  DirectedColimit L = directed_colimit(D);
  // The leg of stage 0 factors as itself.
  StageFactorization s0 = factor_through_colimit_stage(L.leg(0), D, L);
  CHECK(s0.stage == 0);
  CHECK(compose(L.leg(s0.stage), s0.map) == L.leg(0));
  // A global element of the colimit factors through a later stage.
  PresheafRef one = terminal(D.nodes[0]->base);
  PresheafMap pt{one, L.apex(), {{0}, {0}}};
  StageFactorization s = factor_through_colimit_stage(pt, D, L);
  CHECK(compose(L.leg(s.stage), s.map) == pt);
  auto k = essential_uniqueness_stage(D, s, StageFactorization{2, PresheafMap{one, D.nodes[2], {{0}, {0}}}});
  CHECK(k.has_value());
}
