#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"
#include "iscreen/polyexpand.hpp"
#include "iscreen/rng.hpp"
#include "iscreen/verify.hpp"

using namespace iscreen;

TEST_CASE("mul_linear_reduce squares away repeated spins") {
  SUBCASE("one times a single linear term") {
    MultilinearPoly q(3);
    q.add_term(0, 1.0);
    q.mul_linear_reduce({{1ULL << 1, 0.7}});
    CHECK(q.coeff(0) == 0.0);
    CHECK(q.coeff(1ULL << 1) == doctest::Approx(0.7).epsilon(1e-15));
  }
  SUBCASE("sigma_a times sigma_a collapses to a constant") {
    MultilinearPoly q(3);
    q.add_term(1ULL << 1, 0.7);
    q.mul_linear_reduce({{1ULL << 1, 0.7}});
    CHECK(q.coeff(0) == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(q.coeff(1ULL << 1) == 0.0);
  }
  SUBCASE("squared three-term form") {
    const double h = 0.4, a = -0.3, b = 0.2;
    MultilinearPoly q(2);
    q.add_term(0, 1.0);
    const std::vector<std::pair<std::uint64_t, double>> form = {
        {0, h}, {1ULL << 0, a}, {1ULL << 1, b}};
    q.mul_linear_reduce(form);
    q.mul_linear_reduce(form);
    CHECK(q.coeff(0) == doctest::Approx(h * h + a * a + b * b).epsilon(1e-14));
    CHECK(q.coeff(0b01) == doctest::Approx(2 * h * a).epsilon(1e-14));
    CHECK(q.coeff(0b10) == doctest::Approx(2 * h * b).epsilon(1e-14));
    CHECK(q.coeff(0b11) == doctest::Approx(2 * a * b).epsilon(1e-14));
  }
}

static LocalParams random_lp(SplitMix64& rng, int p, int node, double scale) {
  LocalParams lp = LocalParams::zero(p, node);
  lp.field = rng.next_uniform(-scale, scale);
  for (int v = 0; v < p; ++v)
    if (v != node) lp.set_coupling(v, rng.next_uniform(-scale, scale));
  return lp;
}

TEST_CASE("taylor_screen_poly degenerate degrees") {
  LocalParams lp = LocalParams::zero(3, 1);
  lp.field = 0.5;
  SUBCASE("degree zero is the constant one") {
    MultilinearPoly q = taylor_screen_poly(lp, 0);
    CHECK(q.coeff(0) == 1.0);
    CHECK(q.term_count() == 1);
  }
  SUBCASE("degree one with a pure field") {
    MultilinearPoly q = taylor_screen_poly(lp, 1);
    CHECK(q.coeff(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(q.coeff(1ULL << 1) == doctest::Approx(-0.5).epsilon(1e-15));
  }
}

TEST_CASE("taylor_screen_poly equals the truncated exponential pointwise") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_below(3));
    const int node = static_cast<int>(rng.next_below(p));
    const int d = static_cast<int>(rng.next_below(7));
    LocalParams lp = random_lp(rng, p, node, 0.5);
    MultilinearPoly q = taylor_screen_poly(lp, d);
    for (std::uint64_t idx = 0; idx < (1ULL << p); ++idx) {
      SpinConfig s = config_from_index(idx, p);
      const double e = local_energy(lp, s);
      double want = 0.0, term = 1.0;
      for (int k = 0; k <= d; ++k) {
        want += term;
        term *= -e / (k + 1);
      }
      double got = 0.0;
      for (const auto& [mask, c] : q.terms()) {
        int sign = 1;
        for (int i = 0; i < p; ++i)
          if ((mask >> i) & 1) sign *= s[i];
        got += c * sign;
      }
      CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
  }
}

TEST_CASE("dense and sparse representations agree") {
  SplitMix64 rng(13);
  LocalParams lp = random_lp(rng, 6, 2, 0.3);
  MultilinearPoly dense = taylor_screen_poly(lp, 8, false);
  MultilinearPoly sparse = taylor_screen_poly(lp, 8, true);
  CHECK(dense.dense());
  CHECK_FALSE(sparse.dense());
  auto dt = dense.terms();
  auto st = sparse.terms();
  REQUIRE(dt.size() == st.size());
  for (std::size_t i = 0; i < dt.size(); ++i) {
    CHECK(dt[i].first == st[i].first);
    CHECK(dt[i].second == doctest::Approx(st[i].second).epsilon(1e-12));
  }
}

TEST_CASE("multinomial equivalence against ordered-tuple brute force") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int p = 7;  // node + support of six
    const int node = 0;
    LocalParams lp = random_lp(rng, p, node, 0.4);
    const auto form = local_energy_form(lp);
    for (int k = 0; k <= 4; ++k) {
      // brute force (sum of form terms)^k by enumerating ordered tuples
      std::map<std::uint64_t, double> want;
      std::vector<std::size_t> idx(k, 0);
      while (true) {
        double c = 1.0;
        std::uint64_t mask = 0;
        for (int j = 0; j < k; ++j) {
          c *= form[idx[j]].second;
          mask ^= form[idx[j]].first;
        }
        want[mask] += c;
        int pos = k - 1;
        while (pos >= 0 && ++idx[pos] == form.size()) idx[pos--] = 0;
        if (pos < 0) break;
      }
      // P_k carries the extra (-1)^k / k! factor
      auto polys = taylor_term_polys(lp, k);
      const MultilinearPoly& pk = polys[k];
      double fact = 1.0;
      for (int j = 2; j <= k; ++j) fact *= j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      for (const auto& [mask, c] : want)
        CHECK(pk.coeff(mask) * sign * fact == doctest::Approx(c).epsilon(1e-10));
    }
  }
}

TEST_CASE("factorial-weighted l1 mass stays within the width power") {
  SplitMix64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    LocalParams lp = random_lp(rng, 6, 1, 0.3);
    const double width = lp.l1_norm();
    auto polys = taylor_term_polys(lp, 6);
    double fact = 1.0;
    for (int k = 0; k <= 6; ++k) {
      if (k > 0) fact *= k;
      CHECK(polys[k].l1_norm() * fact <= std::pow(width, k) + 1e-12);
    }
  }
}

TEST_CASE("approx_gradient at degree zero returns raw first moments") {
  SplitMix64 rng(23);
  IsingModel m = random_dense_model(4, 1.0, rng);
  MomentTable t = exact_table(m, 2);
  LocalParams lp = random_lp(rng, 4, 1, 0.2);
  auto g = approx_gradient(lp, 0, t);
  CHECK(g[1] == doctest::Approx(-exact_moment(m, 1ULL << 1)).epsilon(1e-14));
  for (int v : {0, 2, 3})
    CHECK(g[v] ==
          doctest::Approx(-exact_moment(m, (1ULL << 1) | (1ULL << v))).epsilon(1e-14));
}

TEST_CASE("high-degree surrogate matches the exact gradient") {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 3 + static_cast<int>(rng.next_below(4));
    IsingModel m = random_dense_model(p, 1.0, rng);
    MomentTable t = exact_table(m, p);
    const int node = static_cast<int>(rng.next_below(p));
    LocalParams lp = random_lp(rng, p, node, 0.9 / p);
    auto g = approx_gradient(lp, 30, t);
    auto ge = exact_is_gradient(m, lp);
    CHECK(testutil::max_abs_diff(g, ge) <= 1e-10);
  }
}

TEST_CASE("surrogate gradient deviation obeys the tail bound") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 4 + static_cast<int>(rng.next_below(3));
    IsingModel m = random_dense_model(p, 1.0, rng);
    MomentTable t = exact_table(m, p);
    const int node = static_cast<int>(rng.next_below(p));
    LocalParams lp = random_lp(rng, p, node, 0.9 / p);
    const double width = lp.l1_norm();
    for (int d : {4, 6, 8}) {
      auto g = approx_gradient(lp, d, t);
      auto ge = exact_is_gradient(m, lp);
      const double bound =
          std::pow(std::exp(1.0) * width / (d + 1), d + 1);
      CHECK(testutil::max_abs_diff(g, ge) <= bound + 1e-15);
    }
  }
}

TEST_CASE("surrogate_loss tracks the truncated expectation") {
  SplitMix64 rng(37);
  IsingModel m = random_dense_model(5, 1.0, rng);
  MomentTable t = exact_table(m, 5);
  LocalParams lp = random_lp(rng, 5, 0, 0.15);
  const double loss30 = surrogate_loss(lp, 30, t);
  CHECK(loss30 == doctest::Approx(exact_is_loss(m, lp)).epsilon(1e-10));
}

TEST_CASE("query degree never exceeds the advertised requirement") {
  SplitMix64 rng(41);
  IsingModel m = random_dense_model(6, 1.0, rng);
  MomentTable t = exact_table(m, 6);
  LocalParams lp = random_lp(rng, 6, 2, 0.15);
  for (int d : {0, 1, 2, 3, 4, 5}) {
    t.reset_query_log();
    approx_gradient(lp, d, t);
    CHECK(t.max_queried_degree() <= required_table_degree_couplings(d, 6));
  }
}

TEST_CASE("required table degrees cap at p") {
  CHECK(required_table_degree_couplings(6, 8) == 8);
  CHECK(required_table_degree_couplings(5, 8) == 6);
  CHECK(required_table_degree_couplings(12, 6) == 6);
  CHECK(required_table_degree_fields(2, 8) == 3);
  CHECK(required_table_degree_fields(2, 2) == 2);
  CHECK(required_table_degree_fields(20, 8) == 8);
}

TEST_CASE("coefficients below the drop tolerance vanish") {
  LocalParams lp = LocalParams::zero(3, 0);
  lp.field = 1e-9;
  lp.set_coupling(1, 1e-9);
  MultilinearPoly q = taylor_screen_poly(lp, 3);
  for (const auto& [mask, c] : q.terms()) CHECK(std::abs(c) >= kDropTol);
}
