#include <catch_amalgamated.hpp>

#include "support/corpus.hpp"
#include "support/random.hpp"
#include "support/suites.hpp"

using namespace topos;

namespace {

std::vector<std::size_t> sizes(const Omega& W) {
  std::vector<std::size_t> out;
  for (ObjectId c = 0; c < W.object->base->object_count(); ++c) out.push_back(W.object->size(c));
  return out;
}

/// Sieves on c counted by brute force over sets of morphisms into c.
std::size_t count_sieves(const FinCategory& C, ObjectId c) {
  std::vector<MorphismId> into;
  for (MorphismId m = 0; m < C.morphism_count(); ++m) {
    if (C.cod(m) == c) into.push_back(m);
  }
  std::size_t n = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << into.size()); ++mask) {
    bool closed = true;
    for (std::size_t i = 0; i < into.size() && closed; ++i) {
      if (!(mask >> i & 1U)) continue;
      for (MorphismId g = 0; g < C.morphism_count() && closed; ++g) {
        auto h = C.try_compose(into[i], g);
        if (!h) continue;
        auto pos = std::find(into.begin(), into.end(), *h) - into.begin();
        closed = (mask >> pos & 1U) != 0;
      }
    }
    n += closed ? 1 : 0;
  }
  return n;
}

}  // namespace

TEST_CASE("sizes of the subobject classifier") {
  CHECK(sizes(omega(terminal_category())) == std::vector<std::size_t>{2});
  CHECK(sizes(omega(arrow_category())) == std::vector<std::size_t>{2, 3});
  CHECK(sizes(omega(graph_category())) == std::vector<std::size_t>{2, 5});
}

TEST_CASE("sieve counts agree with brute force on every base") {
  for (const auto& b : support::bases()) {
    Omega W = omega(b.base);
    REQUIRE(validate_presheaf(*W.object).ok());
    REQUIRE(validate_map(W.truth).ok());
    for (ObjectId c = 0; c < b.base->object_count(); ++c) {
      INFO(b.name << " at " << b.base->object_name(c));
      CHECK(W.object->size(c) == count_sieves(*b.base, c));
    }
  }
}

TEST_CASE("classifier laws on generated presheaves") {
  support::Rng rng(37);
  std::size_t monos = 0;
  for (const auto& b : support::bases()) {
    Omega W = omega(b.base);
    for (int k = 0; k < 5; ++k) {
      PresheafRef X = support::random_presheaf(b.base, rng, 3, 2);
      INFO(b.name);
      CHECK(support::classifier_laws(X, W, &monos).ok());
    }
  }
  CHECK(monos > 0);
}

TEST_CASE("characteristic of a non-mono is rejected") {
  PresheafRef G = support::single_edge_graph();
  Omega W = omega(G->base);
  CHECK_THROWS_AS(characteristic(W, to_terminal(G)), PreconditionError);
}

TEST_CASE("characteristic of a vertex in the single-edge graph") {
  PresheafRef G = support::single_edge_graph();
  Omega W = omega(G->base);
  Subfunctor A = bottom(G);
  A.parts[0][0] = true;  // {v1}
  PresheafMap chi = characteristic(W, A);
  // e has source in A and target outside: its sieve contains s but not t or id.
  const Sieve& s = W.sieves[1][chi(1, 0)];
  const FinCategory& C = *G->base;
  CHECK(s[*C.find_morphism("s")]);
  CHECK_FALSE(s[*C.find_morphism("t")]);
  CHECK_FALSE(s[C.identity(1)]);
  CHECK(subobject_of(W, chi) == A);
}
