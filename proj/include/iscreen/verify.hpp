#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"
#include "iscreen/rng.hpp"

namespace iscreen {

// Fully connected model with iid couplings and fields rescaled to l1-width
// exactly `gamma`; generic test instance used across the suite.
IsingModel random_dense_model(int p, double gamma, SplitMix64& rng);

// One numerical corroboration: pass holds exactly when observed <= bound
// (any slack is folded into the bound).
struct CheckReport {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  double observed = 0.0;
  double bound = 0.0;
  bool pass = false;
  double runtime_s = 0.0;
};

// Worst truncation error of the degree-d alternating Taylor polynomial of
// exp(-x) on a uniform grid over [-gamma, gamma], against the tail bound
// (e gamma / (d+1))^{d+1}.  Requires d + 1 > gamma.
CheckReport check_poly_bound(double gamma, int d, int grid_size);

// g(x) = exp(-x) - 1 + x stays above x^2 / (2 + |x|) on random points in
// [-20, 20] plus boundary cases; the bound carries a 1e-15 slack.
CheckReport check_g_inequality(int sample_count, std::uint64_t seed = 2024);

// Exact Poisson upper tail Pr[X >= a] against e^{-b} (e b / a)^a for every
// integer a in (b, b + a_span].
CheckReport check_poisson_tail(double b, int a_span = 20);

// Loss-gap curvature: for random feasible parameter vectors, the exact loss
// gap at each node dominates (e^{-3 gamma}/(2+2 gamma)) times the squared
// worst coupling error.  1e-12 slack.
CheckReport check_curvature(const IsingModel& m, double gamma, int trials,
                            std::uint64_t seed = 7);

// Single-variable variant: field-only perturbations against
// (e^{-gamma}/(2+2 gamma)) times the squared field error, plus the
// conditional-variance floor 1 - tanh^2(gamma) >= e^{-2 gamma}.
CheckReport check_curvature_fields(const IsingModel& m, double gamma, int trials,
                                   std::uint64_t seed = 11);

// Sup over random feasible parameters of the gap between the surrogate
// gradient (contracted with `table`) and the enumeration gradient, against
// the truncation budget (e gamma'/(d+1))^{d+1} with gamma' the parameter
// l1 norm, plus an empirical statistical term when the table is not exact.
CheckReport check_gradient_deviation(const IsingModel& m, const MomentTable& table, int d,
                                     int trials, std::uint64_t seed = 13);

// Gradient of the exact screening loss vanishes at the true parameters.
CheckReport check_screening_identity(const IsingModel& m);

// Robust GD guarantee: random quadratics with minimizer inside the ball
// and adversarial per-call noise of sup-norm eps/(4 gamma); the averaged
// iterate's loss gap stays within eps for every seed.
CheckReport check_robust_gd(int dimension, double gamma, double eps, int seeds,
                            std::uint64_t seed = 17);

// All checks at desk-scale defaults; `suite` filters by check name
// ("all" runs everything).  Deterministic given the seed.
std::vector<CheckReport> run_verify_suite(const std::string& suite = "all",
                                          std::uint64_t seed = 2024);

// Human-readable table of reports.
std::string format_reports(const std::vector<CheckReport>& reports);

}  // namespace iscreen
