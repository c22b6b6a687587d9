#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iscreen {

// Euclidean projection onto the l1 ball of radius `gamma` (sort-based
// soft-thresholding).  Inputs already inside the ball pass through
// unchanged.
std::vector<double> project_l1(const std::vector<double>& v, double gamma);

// Principal branch of the Lambert W function for x >= 0: the w >= 0 with
// w * exp(w) = x.  Bracketed Newton/Halley iteration with a bisection
// fallback; relative tolerance 1e-12.
double lambert_w(double x);

// ceil() saturating at the largest int64 instead of overflowing.
std::int64_t ceil_to_int64(double x);

struct GdOptions {
  std::vector<double> x1;       // starting point; empty means the origin
  double early_stop_tol = 0.0;  // stop when the gradient stays below this (0 = off)
  int patience = 10;            // consecutive small-gradient iterations required
  std::int64_t trace_every = 0; // record the loss proxy every this many steps (0 = off)
  std::function<double(const std::vector<double>&)> loss_proxy;
};

struct GdDiagnostics {
  double initial_grad_inf = 0.0;
  double final_grad_inf = 0.0;
  std::int64_t iterations = 0;
  bool early_stopped = false;
  std::vector<std::pair<std::int64_t, double>> loss_trace;  // (step, proxy value)
};

// Projected gradient descent over the l1 ball of radius gamma: T steps of
// x <- project(x - eta * grad(x)), returning the average of the iterates
// x_1, ..., x_T (each taken before its update).
std::vector<double> projected_gd(
    const std::function<std::vector<double>(const std::vector<double>&)>& grad,
    int dim, double gamma, std::int64_t T, double eta, const GdOptions& opts = {},
    GdDiagnostics* diag = nullptr);

// Step count ceil(16 gamma^2 L^2 / eps^2) that guarantees an eps-accurate
// averaged iterate for gradients bounded by L in Euclidean norm.
std::int64_t gd_iterations(double gamma, double L, double eps);

// Matching step size 2 gamma / (L sqrt(T)).
double gd_step_size(double gamma, double L, std::int64_t T);

// Smallest Taylor degree whose truncation error over an l1 ball of radius
// gamma is within the error budget implied by eps: with
// C = 3 gamma + log(16 gamma (1 + gamma) / eps^2), the degree is
// ceil(C / W(C / (gamma e))) - 1.  Requires 0 < eps <= 4 gamma.
int degree_for_error(double gamma, double eps);

enum class ScheduleMode { theory, practical };

std::string schedule_mode_name(ScheduleMode m);
ScheduleMode schedule_mode_from_name(const std::string& name);

struct Schedule {
  ScheduleMode mode = ScheduleMode::practical;
  double gamma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  int d = 0;           // surrogate degree
  std::int64_t T = 0;  // gradient steps
  double eta = 0.0;    // step size
  double n = 0.0;      // samples required (theory) or available (practical)
};

// Guarantee-grade schedule for coupling recovery at accuracy eps with
// failure probability delta.
Schedule schedule_theory(int p, double gamma, double eps, double delta);

// Default operating point: the theory degree with a fixed iteration budget
// and the matching step size; any field can be overridden.
Schedule schedule_practical(int p, double gamma, double eps, std::int64_t n_data,
                            std::optional<int> d_override = std::nullopt,
                            std::optional<std::int64_t> T_override = std::nullopt,
                            std::optional<double> eta_override = std::nullopt);

}  // namespace iscreen
