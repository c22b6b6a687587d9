#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"
#include "iscreen/optimizer.hpp"
#include "iscreen/rng.hpp"
#include "iscreen/screening.hpp"
#include "iscreen/verify.hpp"

using namespace iscreen;

TEST_CASE("zero model stays at the zero estimate") {
  MomentTable t = exact_table(testutil::zero_model(4), 4);
  Schedule s = schedule_practical(4, 1.0, 0.5, 1, 6, 500, 0.2);
  CouplingEstimate est = learn_couplings(t, s);
  for (const auto& lp : est.node_params) {
    CHECK(std::abs(lp.field) <= 1e-6);
    for (double c : lp.couplings) CHECK(std::abs(c) <= 1e-6);
  }
  for (const auto& e : est.couplings) CHECK(std::abs(e.value) <= 1e-6);
}

TEST_CASE("oracle-table recovery at practical scale") {
  SplitMix64 rng(505);
  IsingModel m = random_dense_model(6, 1.0, rng);
  MomentTable t = exact_table(m, 6);
  Schedule s = schedule_practical(6, 1.0, 0.5, 1, 12, 5000, 0.35);
  CouplingEstimate est = learn_couplings(t, s);
  double worst = 0.0;
  for (int u = 0; u < 6; ++u)
    for (int v = u + 1; v < 6; ++v)
      worst = std::max(worst, std::abs(est.coupling(u, v) - m.coupling(u, v)));
  CHECK(worst <= 5e-3);

  SUBCASE("per-node feasibility") {
    for (const auto& lp : est.node_params) CHECK(lp.l1_norm() <= 1.0 + 1e-12);
  }
  SUBCASE("pre-symmetrization directed gap is twice the per-node error") {
    double per_node = 0.0;
    for (int u = 0; u < 6; ++u) {
      const LocalParams truth = true_local_params(m, u);
      for (int v = 0; v < 6; ++v)
        if (v != u)
          per_node = std::max(per_node, std::abs(est.node_params[u].coupling_to(v) -
                                                 truth.coupling_to(v)));
    }
    for (int u = 0; u < 6; ++u)
      for (int v = u + 1; v < 6; ++v) {
        const double duv = est.node_params[u].coupling_to(v);
        const double dvu = est.node_params[v].coupling_to(u);
        CHECK(std::abs(duv - dvu) <= 2.0 * per_node + 1e-12);
      }
  }
  SUBCASE("loss never ends above the zero start") {
    for (int u = 0; u < 6; ++u) {
      const double at_truth = exact_is_loss(m, true_local_params(m, u));
      const double at_est = exact_is_loss(m, est.node_params[u]);
      const double at_zero = exact_is_loss(m, LocalParams::zero(6, u));
      CHECK(at_est - at_truth <= at_zero - at_truth + 1e-12);
    }
  }
  SUBCASE("curvature converts loss gap to parameter error") {
    const double gamma = 1.0;
    for (int u = 0; u < 6; ++u) {
      const LocalParams truth = true_local_params(m, u);
      const double gap = exact_is_loss(m, est.node_params[u]) - exact_is_loss(m, truth);
      double err = 0.0;
      for (int v = 0; v < 6; ++v)
        if (v != u)
          err = std::max(err,
                         std::abs(est.node_params[u].coupling_to(v) - truth.coupling_to(v)));
      CHECK(err <= std::exp(1.5 * gamma) *
                       std::sqrt(2.0 * (1.0 + gamma) * std::max(gap, 0.0)) +
                   1e-9);
    }
  }
}

TEST_CASE("single strong edge is pinned down") {
  IsingModel m = testutil::single_edge_model(6, 1, 4, 0.8);
  MomentTable t = exact_table(m, 6);
  Schedule s = schedule_practical(6, 1.0, 0.5, 1, 12, 5000, 0.35);
  CouplingEstimate est = learn_couplings(t, s);
  CHECK(std::abs(est.coupling(1, 4) - 0.8) <= 5e-3);
}

TEST_CASE("learn_node equals the assembled per-node estimates") {
  SplitMix64 rng(707);
  IsingModel m = random_dense_model(5, 0.8, rng);
  MomentTable t = exact_table(m, 5);
  Schedule s = schedule_practical(5, 0.8, 0.4, 1, 8, 400, 0.3);
  CouplingEstimate est = learn_couplings(t, s, 4);
  for (int u = 0; u < 5; ++u) {
    const LocalParams solo = learn_node(u, t, s);
    CHECK(solo.field == est.node_params[u].field);
    for (int v = 0; v < 5; ++v)
      if (v != u) CHECK(solo.coupling_to(v) == est.node_params[u].coupling_to(v));
  }
  // symmetrized map equals the average of the two directed estimates
  for (int u = 0; u < 5; ++u)
    for (int v = u + 1; v < 5; ++v)
      CHECK(est.coupling(u, v) ==
            doctest::Approx(0.5 * (est.node_params[u].coupling_to(v) +
                                   est.node_params[v].coupling_to(u)))
                .epsilon(1e-15));
}

TEST_CASE("thread count does not change the result") {
  SplitMix64 rng(808);
  IsingModel m = random_dense_model(5, 1.0, rng);
  MomentTable t = exact_table(m, 5);
  Schedule s = schedule_practical(5, 1.0, 0.5, 1, 6, 300, 0.3);
  CouplingEstimate a = learn_couplings(t, s, 1);
  CouplingEstimate b = learn_couplings(t, s, 4);
  for (int u = 0; u < 5; ++u)
    for (int v = u + 1; v < 5; ++v) CHECK(a.coupling(u, v) == b.coupling(u, v));
  for (int u = 0; u < 5; ++u) CHECK(a.fields[u] == b.fields[u]);
}

TEST_CASE("missing moments are reported eagerly") {
  MomentTable t = exact_table(testutil::zero_model(6), 3);
  Schedule s = schedule_practical(6, 1.0, 0.5, 1, 8, 100, 0.3);
  CHECK_THROWS_AS(learn_node(0, t, s), MissingMomentError);
  CHECK_THROWS_AS(learn_couplings(t, s), MissingMomentError);
  CHECK_THROWS_AS(learn_node(-1, t, s), std::invalid_argument);
  CHECK_THROWS_AS(learn_node(6, t, s), std::invalid_argument);
}

TEST_CASE("diagnostics carry gradient norms and traces") {
  SplitMix64 rng(909);
  IsingModel m = random_dense_model(4, 1.0, rng);
  MomentTable t = exact_table(m, 4);
  Schedule s = schedule_practical(4, 1.0, 0.5, 1, 6, 200, 0.3);
  CouplingEstimate est = learn_couplings(t, s);
  REQUIRE(est.diagnostics.size() == 4);
  for (const auto& d : est.diagnostics) {
    CHECK(d.iterations == 200);
    CHECK(d.initial_grad_inf > 0.0);
    CHECK(d.final_grad_inf < d.initial_grad_inf + 1.0);
    CHECK(d.loss_trace.size() >= 1);
  }
}
