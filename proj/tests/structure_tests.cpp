#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "iscreen/model.hpp"
#include "iscreen/rng.hpp"
#include "iscreen/screening.hpp"
#include "iscreen/structure.hpp"
#include "iscreen/verify.hpp"

using namespace iscreen;

static CouplingEstimate estimate_with(int p, std::vector<CouplingEntry> entries) {
  CouplingEstimate est;
  est.p = p;
  est.couplings = std::move(entries);
  est.fields.assign(p, 0.0);
  return est;
}

TEST_CASE("threshold keeps exactly the couplings at or above alpha/2") {
  CouplingEstimate est = estimate_with(4, {{0, 1, 0.35}, {0, 2, 0.10}});
  EdgeSet es = threshold_edges(est, 0.4);
  CHECK(es.edges.size() == 1);
  CHECK(es.contains(0, 1));
  CHECK_FALSE(es.contains(0, 2));
}

TEST_CASE("threshold edge cases") {
  SUBCASE("all-zero estimate") {
    CouplingEstimate est = estimate_with(3, {});
    CHECK(threshold_edges(est, 0.2).edges.empty());
  }
  SUBCASE("boundary value is kept") {
    CouplingEstimate est = estimate_with(3, {{1, 2, 0.2}});
    EdgeSet es = threshold_edges(est, 0.4);
    CHECK(es.contains(1, 2));
  }
  SUBCASE("negative couplings count by magnitude") {
    CouplingEstimate est = estimate_with(3, {{0, 2, -0.9}});
    CHECK(threshold_edges(est, 0.4).contains(0, 2));
  }
  SUBCASE("alpha must be positive") {
    CouplingEstimate est = estimate_with(3, {});
    CHECK_THROWS_AS(threshold_edges(est, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(threshold_edges(est, -1.0), std::invalid_argument);
  }
}

TEST_CASE("compare_edges counts both error kinds") {
  EdgeSet a = make_edge_set(4, {{0, 1}, {2, 3}});
  EdgeSet b = make_edge_set(4, {{0, 1}, {2, 3}});
  EdgeComparison same = compare_edges(a, b);
  CHECK(same.false_positives == 0);
  CHECK(same.false_negatives == 0);
  CHECK(same.exact);

  EdgeSet missing = make_edge_set(4, {{0, 1}});
  EdgeComparison miss = compare_edges(missing, b);
  CHECK(miss.false_positives == 0);
  CHECK(miss.false_negatives == 1);
  CHECK_FALSE(miss.exact);

  EdgeSet left = make_edge_set(4, {{0, 1}});
  EdgeSet right = make_edge_set(4, {{2, 3}});
  EdgeComparison disj = compare_edges(left, right);
  CHECK(disj.false_positives == 1);
  CHECK(disj.false_negatives == 1);
}

TEST_CASE("recovery holds with adversarial estimates at the error budget") {
  SplitMix64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 4 + static_cast<int>(rng.next_below(4));
    const double alpha = 0.4;
    // truth: random subset of edges with |value| >= alpha
    std::vector<CouplingEntry> truth;
    for (int u = 0; u < p; ++u)
      for (int v = u + 1; v < p; ++v)
        if (rng.next_double() < 0.4)
          truth.push_back({u, v, rng.next_sign() * rng.next_uniform(alpha, 2 * alpha)});
    IsingModel m(p, truth, std::vector<double>(p, 0.0));
    EdgeSet want = edges_of(m);

    // adversarial estimate: true edges shrunk by exactly alpha/2 (kept via >=),
    // non-edges lifted to just under alpha/2
    std::vector<CouplingEntry> noisy;
    for (int u = 0; u < p; ++u)
      for (int v = u + 1; v < p; ++v) {
        const double tv = m.coupling(u, v);
        if (tv != 0.0)
          noisy.push_back({u, v, tv - (tv > 0 ? 1.0 : -1.0) * alpha / 2});
        else
          noisy.push_back({u, v, rng.next_sign() * (alpha / 2 - 1e-9)});
      }
    EdgeSet got = threshold_edges(estimate_with(p, noisy), alpha);
    EdgeComparison cmp = compare_edges(got, want);
    CHECK(cmp.exact);
  }
}

TEST_CASE("make_edge_set validates and normalizes") {
  EdgeSet es = make_edge_set(5, {{3, 1}, {0, 4}});
  REQUIRE(es.edges.size() == 2);
  CHECK(es.edges[0] == std::pair<int, int>(0, 4));
  CHECK(es.edges[1] == std::pair<int, int>(1, 3));
  CHECK(es.contains(1, 3));
  CHECK(es.contains(3, 1));

  CHECK_THROWS_AS(make_edge_set(5, {{2, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(make_edge_set(5, {{0, 5}}), std::invalid_argument);
  CHECK_THROWS_AS(make_edge_set(5, {{0, 1}, {1, 0}}), std::invalid_argument);
}

TEST_CASE("edge set neighborhoods and degree") {
  EdgeSet es = make_edge_set(5, {{0, 1}, {1, 2}, {1, 4}});
  CHECK(es.max_degree() == 3);
  CHECK(es.neighborhood(1) == std::vector<int>{0, 2, 4});
  CHECK(es.neighborhood(3).empty());
}

TEST_CASE("edges_of reads nonzero couplings from a model") {
  IsingModel m(4, {{0, 2, 0.5}, {1, 3, -0.2}}, std::vector<double>(4, 0.0));
  EdgeSet es = edges_of(m);
  CHECK(es.edges.size() == 2);
  CHECK(es.contains(0, 2));
  CHECK(es.contains(1, 3));
}
