#include "iscreen/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "iscreen/generators.hpp"
#include "iscreen/optimizer.hpp"
#include "iscreen/polyexpand.hpp"
#include "iscreen/rng.hpp"

namespace iscreen {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double taylor_exp_neg(double x, int d) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= d; ++k) {
    term *= -x / k;
    sum += term;
  }
  return sum;
}

// Fully connected model with iid couplings/fields rescaled to the requested
// width; used by checks that need generic dense instances.
IsingModel random_dense_model_impl(int p, double gamma, SplitMix64& rng) {
  std::vector<CouplingEntry> entries;
  for (int u = 0; u < p; ++u)
    for (int v = u + 1; v < p; ++v)
      entries.push_back({u, v, rng.next_uniform(-1.0, 1.0)});
  std::vector<double> fields(p);
  for (double& f : fields) f = rng.next_uniform(-0.5, 0.5);
  IsingModel draft(p, entries, fields);
  const double w = l1_width(draft);
  const double scale = w > 0.0 ? gamma / w : 0.0;
  for (auto& e : entries) e.value *= scale;
  for (double& f : fields) f *= scale;
  return IsingModel(p, std::move(entries), std::move(fields));
}

std::vector<double> random_feasible(int dim, double gamma, SplitMix64& rng) {
  std::vector<double> x(dim);
  for (double& v : x) v = rng.next_uniform(-gamma, gamma);
  return project_l1(x, gamma);
}

}  // namespace

CheckReport check_poly_bound(double gamma, int d, int grid_size) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("check_poly_bound: gamma must be >= 0");
  if (d < 0) throw std::invalid_argument("check_poly_bound: degree must be >= 0");
  if (!(d + 1 > gamma))
    throw std::invalid_argument("check_poly_bound: requires d + 1 > gamma");
  if (grid_size < 2) throw std::invalid_argument("check_poly_bound: grid too small");
  const auto t0 = Clock::now();

  double observed = 0.0;
  if (gamma > 0.0) {
    for (int i = 0; i < grid_size; ++i) {
      const double x = -gamma + 2.0 * gamma * i / (grid_size - 1);
      observed = std::max(observed, std::abs(std::exp(-x) - taylor_exp_neg(x, d)));
    }
  }
  CheckReport r;
  r.name = "poly_bound";
  r.params = {{"gamma", gamma}, {"d", static_cast<double>(d)},
              {"grid", static_cast<double>(grid_size)}};
  r.observed = observed;
  r.bound = std::pow(std::exp(1.0) * gamma / (d + 1), d + 1);
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

CheckReport check_g_inequality(int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("check_g_inequality: empty sample");
  const auto t0 = Clock::now();
  SplitMix64 rng(seed);

  auto margin = [](double x) {
    const double g = std::expm1(-x) + x;
    return x * x / (2.0 + std::abs(x)) - g;  // positive = violation
  };
  double observed = 0.0;
  for (double x : {0.0, 1.0, -1.0, 2.0, -2.0, 20.0, -20.0, 1e-8, -1e-8})
    observed = std::max(observed, margin(x));
  for (int i = 0; i < sample_count; ++i)
    observed = std::max(observed, margin(rng.next_uniform(-20.0, 20.0)));

  CheckReport r;
  r.name = "g_inequality";
  r.params = {{"samples", static_cast<double>(sample_count)}};
  r.observed = observed;
  r.bound = 1e-15;
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

CheckReport check_poisson_tail(double b, int a_span) {
  if (!(b >= 0.0)) throw std::invalid_argument("check_poisson_tail: b must be >= 0");
  if (a_span < 1) throw std::invalid_argument("check_poisson_tail: empty a range");
  const auto t0 = Clock::now();

  auto exact_tail = [b](int a) {
    if (b == 0.0) return 0.0;
    // First term via logs, then the ratio recurrence; terms shrink once
    // k > b, and summation stops when they no longer matter.
    double term = std::exp(a * std::log(b) - b - std::lgamma(a + 1.0));
    double sum = term;
    for (int k = a + 1; k < a + 100000; ++k) {
      term *= b / k;
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  };
  auto chernoff = [b](int a) {
    if (b == 0.0) return 0.0;
    return std::exp(-b + a * (1.0 + std::log(b) - std::log(a)));
  };

  const int a_lo = static_cast<int>(std::floor(b)) + 1;
  const int a_hi = static_cast<int>(std::floor(b + a_span + 1e-9));
  if (a_lo > a_hi) throw std::invalid_argument("check_poisson_tail: no integers a > b in range");

  double observed = -1.0;
  for (int a = a_lo; a <= a_hi; ++a)
    observed = std::max(observed, exact_tail(a) - chernoff(a));

  CheckReport r;
  r.name = "poisson_tail";
  r.params = {{"b", b}, {"a_lo", static_cast<double>(a_lo)}, {"a_hi", static_cast<double>(a_hi)}};
  r.observed = observed;
  r.bound = 0.0;
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

CheckReport check_curvature(const IsingModel& m, double gamma, int trials,
                            std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_curvature: trials must be >= 1");
  if (l1_width(m) > gamma + 1e-12)
    throw std::invalid_argument("check_curvature: model wider than gamma");
  const auto t0 = Clock::now();
  SplitMix64 rng(seed);
  const int p = m.p();
  const double constant = std::exp(-3.0 * gamma) / (2.0 + 2.0 * gamma);

  double observed = -1.0;
  for (int t = 0; t < trials; ++t) {
    const int u = static_cast<int>(rng.next_below(p));
    const LocalParams truth = true_local_params(m, u);
    std::vector<double> x;
    if (t % 2 == 0) {
      x = random_feasible(p, gamma, rng);
      x[u] = truth.field;  // perturb couplings only; the bound covers coupling error
    } else {
      x = truth.to_vector();
      if (p > 1) {
        int v = static_cast<int>(rng.next_below(p));
        while (v == u) v = static_cast<int>(rng.next_below(p));
        x[v] += rng.next_uniform(-gamma, gamma);
        x = project_l1(x, gamma);
      }
    }
    const LocalParams cand = LocalParams::from_vector(u, x);
    const double lhs = exact_is_loss(m, cand) - exact_is_loss(m, truth);
    double worst = 0.0;
    for (int v = 0; v < p; ++v) {
      if (v == u) continue;
      const double dv = cand.coupling_to(v) - truth.coupling_to(v);
      worst = std::max(worst, dv * dv);
    }
    observed = std::max(observed, constant * worst - lhs);
  }

  CheckReport r;
  r.name = "curvature";
  r.params = {{"p", static_cast<double>(p)}, {"gamma", gamma},
              {"trials", static_cast<double>(trials)}};
  r.observed = observed;
  r.bound = 1e-12;
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

CheckReport check_curvature_fields(const IsingModel& m, double gamma, int trials,
                                   std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_curvature_fields: trials must be >= 1");
  if (l1_width(m) > gamma + 1e-12)
    throw std::invalid_argument("check_curvature_fields: model wider than gamma");
  const auto t0 = Clock::now();
  SplitMix64 rng(seed);
  const int p = m.p();
  const double constant = std::exp(-gamma) / (2.0 + 2.0 * gamma);

  double observed = -1.0;
  for (int t = 0; t < trials; ++t) {
    const int u = static_cast<int>(rng.next_below(p));
    const LocalParams truth = true_local_params(m, u);
    LocalParams cand = truth;
    cand.field = rng.next_uniform(-gamma, gamma);
    const double lhs = exact_is_loss(m, cand) - exact_is_loss(m, truth);
    const double diff = cand.field - truth.field;
    observed = std::max(observed, constant * diff * diff - lhs);
  }
  // Conditional-variance floor along [0, gamma].
  for (int i = 0; i <= 200; ++i) {
    const double x = gamma * i / 200.0;
    const double sech2 = 1.0 - std::tanh(x) * std::tanh(x);
    observed = std::max(observed, std::exp(-2.0 * x) - sech2);
  }

  CheckReport r;
  r.name = "curvature_fields";
  r.params = {{"p", static_cast<double>(p)}, {"gamma", gamma},
              {"trials", static_cast<double>(trials)}};
  r.observed = observed;
  r.bound = 1e-12;
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

CheckReport check_gradient_deviation(const IsingModel& m, const MomentTable& table, int d,
                                     int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_gradient_deviation: trials must be >= 1");
  if (table.p() != m.p())
    throw std::invalid_argument("check_gradient_deviation: table and model disagree on p");
  const auto t0 = Clock::now();
  SplitMix64 rng(seed);
  const int p = m.p();
  const double gamma = l1_width(m);
  if (!(d + 1 > gamma))
    throw std::invalid_argument("check_gradient_deviation: requires d + 1 > gamma");

  double stat_gap = 0.0;
  if (!table.is_oracle()) {
    for (const auto& [mask, value] : table.entries())
      stat_gap = std::max(stat_gap, std::abs(value - exact_moment(m, mask)));
  }

  double observed = -1.0;
  for (int t = 0; t < trials; ++t) {
    const int u = static_cast<int>(rng.next_below(p));
    std::vector<double> x = random_feasible(p, gamma, rng);
    const LocalParams lp = LocalParams::from_vector(u, x);
    const std::vector<double> approx = approx_gradient(lp, d, table);
    const std::vector<double> exact = exact_is_gradient(m, lp);
    double dev = 0.0;
    for (int i = 0; i < p; ++i) dev = std::max(dev, std::abs(approx[i] - exact[i]));

    const double width = lp.l1_norm();
    const double eps_poly =
        width > 0.0 ? std::pow(std::exp(1.0) * width / (d + 1), d + 1) : 0.0;
    double eps_stat = 0.0;
    if (stat_gap > 0.0)
      eps_stat = taylor_screen_poly(lp, d).l1_norm() * stat_gap;
    observed = std::max(observed, dev - (eps_poly + eps_stat));
  }

  CheckReport r;
  r.name = "gradient_deviation";
  r.params = {{"p", static_cast<double>(p)}, {"d", static_cast<double>(d)},
              {"trials", static_cast<double>(trials)},
              {"oracle", table.is_oracle() ? 1.0 : 0.0}};
  r.observed = observed;
  r.bound = 1e-12;
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

CheckReport check_screening_identity(const IsingModel& m) {
  const auto t0 = Clock::now();
  double observed = 0.0;
  for (int u = 0; u < m.p(); ++u) {
    const std::vector<double> g = exact_is_gradient(m, true_local_params(m, u));
    for (double v : g) observed = std::max(observed, std::abs(v));
  }
  CheckReport r;
  r.name = "screening_identity";
  r.params = {{"p", static_cast<double>(m.p())}};
  r.observed = observed;
  r.bound = 1e-12;
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

CheckReport check_robust_gd(int dimension, double gamma, double eps, int seeds,
                            std::uint64_t seed) {
  if (dimension < 1) throw std::invalid_argument("check_robust_gd: dimension must be >= 1");
  if (!(gamma > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("check_robust_gd: gamma and eps must be positive");
  if (seeds < 1) throw std::invalid_argument("check_robust_gd: seeds must be >= 1");
  const auto t0 = Clock::now();

  const double noise = eps / (4.0 * gamma);
  const double L = 2.0 * gamma + std::sqrt(static_cast<double>(dimension)) * noise;
  const std::int64_t T = gd_iterations(gamma, L, eps);
  const double eta = gd_step_size(gamma, L, T);

  double observed = -1.0;
  for (int s = 0; s < seeds; ++s) {
    SplitMix64 rng = SplitMix64(seed).split(s);
    std::vector<double> target(dimension);
    for (double& v : target) v = rng.next_uniform(-1.0, 1.0);
    double norm = 0.0;
    for (double v : target) norm += std::abs(v);
    const double radius = gamma * rng.next_double();
    if (norm > 0.0)
      for (double& v : target) v *= radius / norm;

    auto noisy_grad = [&](const std::vector<double>& x) {
      std::vector<double> g(dimension);
      for (int i = 0; i < dimension; ++i) {
        const double gi = x[i] - target[i];
        // Worst-case perturbation at the full budget: oppose the true
        // gradient so the descent direction flips near the optimum.
        g[i] = gi + (gi >= 0.0 ? -noise : noise);
      }
      return g;
    };
    const std::vector<double> avg = projected_gd(noisy_grad, dimension, gamma, T, eta);
    double gap = 0.0;
    for (int i = 0; i < dimension; ++i)
      gap += 0.5 * (avg[i] - target[i]) * (avg[i] - target[i]);
    observed = std::max(observed, gap);
  }

  CheckReport r;
  r.name = "robust_gd";
  r.params = {{"dim", static_cast<double>(dimension)}, {"gamma", gamma},
              {"eps", eps}, {"seeds", static_cast<double>(seeds)},
              {"T", static_cast<double>(T)}};
  r.observed = observed;
  r.bound = eps;
  r.pass = r.observed <= r.bound;
  r.runtime_s = seconds_since(t0);
  return r;
}

std::vector<CheckReport> run_verify_suite(const std::string& suite, std::uint64_t seed) {
  const auto want = [&](const char* name) { return suite == "all" || suite == name; };
  std::vector<CheckReport> out;

  if (want("poly_bound"))
    for (double gamma : {0.5, 1.0, 2.0})
      out.push_back(check_poly_bound(gamma, degree_for_error(gamma, 0.5 * gamma), 10000));
  if (want("g_inequality")) out.push_back(check_g_inequality(100000, seed));
  if (want("poisson_tail"))
    for (double b : {0.5, 1.0, 2.0, 4.0}) out.push_back(check_poisson_tail(b, 20));

  SplitMix64 rng(seed);
  if (want("curvature")) {
    SplitMix64 mr = rng.split(1);
    const IsingModel m = random_dense_model_impl(6, 1.0, mr);
    out.push_back(check_curvature(m, 1.0, 100, seed + 1));
  }
  if (want("curvature_fields")) {
    SplitMix64 mr = rng.split(2);
    const IsingModel m = random_dense_model_impl(6, 1.0, mr);
    out.push_back(check_curvature_fields(m, 1.0, 100, seed + 2));
  }
  if (want("gradient_deviation")) {
    SplitMix64 mr = rng.split(3);
    const IsingModel m = random_dense_model_impl(6, 1.0, mr);
    out.push_back(check_gradient_deviation(m, exact_table(m, 6), 12, 25, seed + 3));
  }
  if (want("screening_identity")) {
    CheckReport worst;
    for (int i = 0; i < 20; ++i) {
      SplitMix64 mr = rng.split(100 + i);
      const int p = 2 + static_cast<int>(mr.next_below(7));
      const double gamma = 0.5 + 1.5 * mr.next_double();
      const IsingModel m = random_dense_model_impl(p, gamma, mr);
      CheckReport r = check_screening_identity(m);
      if (i == 0 || r.observed > worst.observed) worst = r;
    }
    worst.params = {{"models", 20.0}};
    out.push_back(worst);
  }
  if (want("robust_gd")) out.push_back(check_robust_gd(10, 1.0, 0.5, 50, seed + 4));

  if (out.empty()) throw std::invalid_argument("run_verify_suite: unknown suite " + suite);
  return out;
}

std::string format_reports(const std::vector<CheckReport>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %-28s %14s %14s %6s %9s\n", "check", "params",
                "observed", "bound", "pass", "time[s]");
  out += line;
  out += std::string(98, '-') + "\n";
  for (const auto& r : reports) {
    std::string params;
    for (const auto& [k, v] : r.params) {
      if (!params.empty()) params += " ";
      char buf[64];
      if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof(buf), "%s=%lld", k.c_str(), static_cast<long long>(v));
      else
        std::snprintf(buf, sizeof(buf), "%s=%.3g", k.c_str(), v);
      params += buf;
    }
    if (params.size() > 28) params = params.substr(0, 25) + "...";
    std::snprintf(line, sizeof(line), "%-22s %-28s %14.6e %14.6e %6s %9.3f\n", r.name.c_str(),
                  params.c_str(), r.observed, r.bound, r.pass ? "ok" : "FAIL", r.runtime_s);
    out += line;
  }
  return out;
}

IsingModel random_dense_model(int p, double gamma, SplitMix64& rng) {
  return random_dense_model_impl(p, gamma, rng);
}

}  // namespace iscreen
