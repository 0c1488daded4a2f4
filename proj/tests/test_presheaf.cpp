#include <catch_amalgamated.hpp>

#include "support/corpus.hpp"
#include "support/random.hpp"

using namespace topos;

TEST_CASE("single-edge graph is a valid presheaf") {
  PresheafRef G = support::single_edge_graph();
  CHECK(validate_presheaf(*G).ok());
  CHECK(G->total_size() == 3);
  CHECK(G->find(0, "v2") == Elem{1});
  CHECK_FALSE(G->find(0, "e"));
}

TEST_CASE("an action leaving its carrier is reported with the morphism") {
  CategoryRef C = arrow_category();
  MorphismId f = *C->find_morphism("f");
  Presheaf X{C, {{"x"}, {"y"}}, std::vector<Function>(C->morphism_count())};
  X.action[C->identity(0)] = {0};
  X.action[C->identity(1)] = {0};
  X.action[f] = {3};
  Report r = validate_presheaf(X);
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations.front().find("action of f") != std::string::npos);
}

TEST_CASE("functoriality failures name the composite") {
  CategoryRef C = chain_category();
  const FinCategory& K = *C;
  Presheaf X{C, {{"a0", "a1"}, {"b0"}, {"c0"}}, std::vector<Function>(K.morphism_count())};
  for (ObjectId o = 0; o < 3; ++o) {
    X.action[K.identity(o)].resize(X.size(o));
    for (Elem x = 0; x < X.size(o); ++x) X.action[K.identity(o)][x] = x;
  }
  X.action[*K.find_morphism("f")] = {0};
  X.action[*K.find_morphism("g")] = {0};
  X.action[*K.find_morphism("gf")] = {1};
  Report r = validate_presheaf(X);
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations.front().find("action of gf disagrees with g then f") != std::string::npos);
}

TEST_CASE("duplicate ids are rejected") {
  CategoryRef T = terminal_category();
  Presheaf X{T, {{"a", "a"}}, {{0, 1}}};
  CHECK_FALSE(validate_presheaf(X).ok());
}

TEST_CASE("natural maps: validation names morphism and stage") {
  PresheafRef G = support::single_edge_graph();
  PresheafMap h{G, G, {{1, 0}, {0}}};  // swaps vertices, keeps the edge
  Report r = validate_map(h);
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations.front().find("naturality fails for") != std::string::npos);
  CHECK(r.violations.front().find("at stage E") != std::string::npos);
  CHECK(validate_map(identity_map(G)).ok());
}

TEST_CASE("representables and the Yoneda correspondence") {
  for (const auto& b : support::bases()) {
    const FinCategory& C = *b.base;
    for (ObjectId d = 0; d < C.object_count(); ++d) {
      PresheafRef y = representable(b.base, d);
      REQUIRE(validate_presheaf(*y).ok());
      // y(d)(c) is the hom-set C(c, d).
      for (ObjectId c = 0; c < C.object_count(); ++c) {
        std::size_t hom = 0;
        for (const auto& m : C.morphisms()) hom += (m.dom == c && m.cod == d) ? 1 : 0;
        CHECK(y->size(c) == hom);
      }
    }
  }
  // Yoneda: Hom(y(d), X) ≅ X(d).
  support::Rng rng(7);
  for (const auto& b : support::bases()) {
    for (int k = 0; k < 4; ++k) {
      PresheafRef X = support::random_presheaf(b.base, rng);
      for (ObjectId d = 0; d < b.base->object_count(); ++d) {
        auto homs = hom_enumerate(representable(b.base, d), X);
        CHECK(homs.size() == X->size(d));
        for (Elem x = 0; x < X->size(d); ++x) {
          PresheafMap m = yoneda_map(X, d, x);
          CHECK(validate_map(m).ok());
          CHECK(m(d, 0) == x);
        }
      }
    }
  }
}

TEST_CASE("composition of natural maps is associative and unital") {
  support::Rng rng(11);
  CategoryRef G = graph_category();
  for (int k = 0; k < 20; ++k) {
    PresheafRef X = support::random_presheaf(G, rng), Y = support::random_presheaf(G, rng),
                Z = support::random_presheaf(G, rng);
    auto f = support::random_map(X, Y, rng);
    auto g = support::random_map(Y, Z, rng);
    if (!f || !g) continue;
    PresheafMap gf = compose(*g, *f);
    CHECK(validate_map(gf).ok());
    CHECK(compose(identity_map(Z), gf) == gf);
    CHECK(compose(gf, identity_map(X)) == gf);
  }
  PresheafRef A = support::single_edge_graph();
  PresheafMap bad{A, A, {{0, 1}, {0}}};
  CHECK_THROWS_AS(compose(bad, PresheafMap{representable(G, 0), terminal(G), {{0}, {}}}), ShapeError);
}

TEST_CASE("random presheaves respect the size bound and are valid") {
  support::Rng rng(3);
  for (const auto& b : support::bases()) {
    for (int k = 0; k < 30; ++k) {
      PresheafRef X = support::random_presheaf(b.base, rng, 3);
      CHECK(validate_presheaf(*X).ok());
      for (ObjectId c = 0; c < b.base->object_count(); ++c) CHECK(X->size(c) <= 3);
    }
  }
}

TEST_CASE("hom enumeration respects its cap") {
  CategoryRef T = terminal_category();
  PresheafRef X = share(Presheaf{T, {{"a", "b", "c", "d"}}, {{0, 1, 2, 3}}});
  CHECK(hom_enumerate(X, X).size() == 256);
  CHECK_THROWS_AS(hom_enumerate(X, X, 100), ResourceError);
}
