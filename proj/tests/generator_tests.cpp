#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "iscreen/errors.hpp"
#include "iscreen/generators.hpp"
#include "iscreen/model.hpp"

using namespace iscreen;

static GeneratorOptions base(int p, Topology t) {
  GeneratorOptions o;
  o.p = p;
  o.topology = t;
  return o;
}

TEST_CASE("ring generator hits the requested width and alpha floor") {
  GeneratorOptions o = base(8, Topology::ring);
  o.alpha = 0.4;
  o.gamma = 0.9;
  o.seed = 7;
  IsingModel m = generate_model(o);
  CHECK(m.coupling_entries().size() == 8);
  CHECK(l1_width(m) == doctest::Approx(0.9).epsilon(1e-12));
  for (const auto& e : m.coupling_entries()) CHECK(std::abs(e.value) >= 0.4 - 1e-9);
  // every node has degree 2 on a ring
  for (int u = 0; u < 8; ++u) CHECK(m.neighbors(u).size() == 2);
}

TEST_CASE("infeasible when alpha times max degree exceeds gamma") {
  GeneratorOptions o = base(8, Topology::ring);
  o.alpha = 1.0;
  o.gamma = 0.5;
  CHECK_THROWS_AS(generate_model(o), InfeasibleError);
}

TEST_CASE("same seed reproduces the model exactly") {
  GeneratorOptions o = base(10, Topology::er);
  o.alpha = 0.2;
  o.beta = 0.5;
  o.gamma = 0.0;  // skip rescaling so the draw itself is what we compare
  o.field_range = 0.3;
  o.er_prob = 0.4;
  o.seed = 42;
  IsingModel a = generate_model(o);
  IsingModel b = generate_model(o);
  REQUIRE(a.coupling_entries().size() == b.coupling_entries().size());
  for (std::size_t i = 0; i < a.coupling_entries().size(); ++i) {
    CHECK(a.coupling_entries()[i].u == b.coupling_entries()[i].u);
    CHECK(a.coupling_entries()[i].v == b.coupling_entries()[i].v);
    CHECK(a.coupling_entries()[i].value == b.coupling_entries()[i].value);
  }
  for (int u = 0; u < 10; ++u) CHECK(a.fields()[u] == b.fields()[u]);
}

TEST_CASE("grid generator builds the lattice") {
  GeneratorOptions o = base(9, Topology::grid);
  o.alpha = 0.1;
  o.gamma = 1.0;
  o.seed = 3;
  IsingModel m = generate_model(o);
  CHECK(m.coupling_entries().size() == 12);  // 2*3*(3-1) edges on a 3x3 grid
  GeneratorOptions bad = base(8, Topology::grid);
  CHECK_THROWS_AS(generate_model(bad), InfeasibleError);
}

TEST_CASE("regular generator respects the degree") {
  GeneratorOptions o = base(8, Topology::regular);
  o.degree = 3;
  o.alpha = 0.1;
  o.gamma = 1.0;
  o.seed = 9;
  IsingModel m = generate_model(o);
  for (int u = 0; u < 8; ++u) CHECK(m.neighbors(u).size() == 3);
  GeneratorOptions odd = base(5, Topology::regular);
  odd.degree = 3;  // p * degree odd -> unrealizable
  CHECK_THROWS_AS(generate_model(odd), InfeasibleError);
}

TEST_CASE("coupling magnitudes live in [alpha, beta] without rescale") {
  GeneratorOptions o = base(6, Topology::ring);
  o.alpha = 0.25;
  o.beta = 0.45;
  o.gamma = -1.0;  // keep raw draws
  o.field_range = 0.05;
  o.seed = 12;
  IsingModel m = generate_model(o);
  for (const auto& e : m.coupling_entries()) {
    CHECK(std::abs(e.value) >= 0.25);
    CHECK(std::abs(e.value) <= 0.45);
  }
  for (double f : m.fields()) CHECK(std::abs(f) <= 0.05);
}

TEST_CASE("topology names round trip and reject junk") {
  CHECK(topology_from_name("er") == Topology::er);
  CHECK(topology_name(Topology::grid) == "grid");
  CHECK_THROWS_AS(topology_from_name("smallworld"), InfeasibleError);
}
