#include "iscreen/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "iscreen/errors.hpp"

namespace iscreen {

std::vector<double> project_l1(const std::vector<double>& v, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("project_l1: radius must be >= 0");
  double total = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("project_l1: input must be finite");
    total += std::abs(x);
  }
  if (total <= gamma) return v;
  // Radius zero collapses everything to the origin; the threshold search
  // below assumes gamma > 0 (u[0] - (u[0] - gamma) must be positive).
  if (gamma == 0.0) return std::vector<double>(v.size(), 0.0);

  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());

  double cumulative = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - gamma) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }

  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - tau;
    out[i] = mag > 0.0 ? (v[i] < 0.0 ? -mag : mag) : 0.0;
  }
  return out;
}

double lambert_w(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("lambert_w: argument must be >= 0");
  if (x == 0.0) return 0.0;

  double lo = 0.0;  // w e^w - x <= 0 here
  double hi = std::max(1.0, std::log1p(x));
  while (hi * std::exp(hi) < x) hi *= 2.0;

  double w = x > std::exp(1.0) ? std::log(x) - std::log(std::log(x)) : x / (1.0 + x);
  w = std::clamp(w, lo, hi);

  const double ftol = 1e-13 * std::max(1.0, x);
  for (int it = 0; it < 200; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= ftol) break;
    if (f < 0.0)
      lo = w;
    else
      hi = w;
    // Halley update; fall back to bisection when it exits the bracket.
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    double next = denom != 0.0 ? w - f / denom : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) <= 1e-15 * std::max(1.0, std::abs(next))) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

std::int64_t ceil_to_int64(double x) {
  if (std::isnan(x)) throw std::invalid_argument("ceil_to_int64: NaN");
  const double c = std::ceil(x);
  if (c >= 9.2233720368547758e18) return std::numeric_limits<std::int64_t>::max();
  if (c <= -9.2233720368547758e18) return std::numeric_limits<std::int64_t>::min();
  return static_cast<std::int64_t>(c);
}

std::vector<double> projected_gd(
    const std::function<std::vector<double>(const std::vector<double>&)>& grad,
    int dim, double gamma, std::int64_t T, double eta, const GdOptions& opts,
    GdDiagnostics* diag) {
  if (dim < 1) throw std::invalid_argument("projected_gd: dimension must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("projected_gd: radius must be >= 0");
  if (T < 1) throw std::invalid_argument("projected_gd: T must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("projected_gd: step size must be positive and finite");
  if (!opts.x1.empty() && opts.x1.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("projected_gd: starting point has the wrong dimension");

  std::vector<double> x =
      opts.x1.empty() ? std::vector<double>(dim, 0.0) : project_l1(opts.x1, gamma);
  std::vector<double> avg(dim, 0.0);

  GdDiagnostics local;
  GdDiagnostics& dg = diag ? *diag : local;
  dg = GdDiagnostics{};

  int consecutive_small = 0;
  std::int64_t done = 0;
  for (std::int64_t t = 1; t <= T; ++t) {
    std::vector<double> g = grad(x);
    if (g.size() != static_cast<std::size_t>(dim))
      throw std::invalid_argument("projected_gd: gradient oracle returned the wrong dimension");
    double ginf = 0.0;
    for (double v : g) ginf = std::max(ginf, std::abs(v));
    if (t == 1) dg.initial_grad_inf = ginf;
    dg.final_grad_inf = ginf;

    for (int i = 0; i < dim; ++i) avg[i] += x[i];
    if (opts.trace_every > 0 && opts.loss_proxy && (t - 1) % opts.trace_every == 0)
      dg.loss_trace.emplace_back(t, opts.loss_proxy(x));

    for (int i = 0; i < dim; ++i) x[i] -= eta * g[i];
    x = project_l1(x, gamma);
    done = t;

    if (opts.early_stop_tol > 0.0) {
      consecutive_small = ginf < opts.early_stop_tol ? consecutive_small + 1 : 0;
      if (consecutive_small >= opts.patience) {
        dg.early_stopped = true;
        break;
      }
    }
  }
  dg.iterations = done;
  for (int i = 0; i < dim; ++i) avg[i] /= static_cast<double>(done);
  return avg;
}

std::int64_t gd_iterations(double gamma, double L, double eps) {
  if (!(gamma > 0.0) || !(L > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("gd_iterations: gamma, L, eps must be positive");
  return ceil_to_int64(16.0 * gamma * gamma * L * L / (eps * eps));
}

double gd_step_size(double gamma, double L, std::int64_t T) {
  if (!(gamma > 0.0) || !(L > 0.0) || T < 1)
    throw std::invalid_argument("gd_step_size: gamma, L must be positive and T >= 1");
  return 2.0 * gamma / (L * std::sqrt(static_cast<double>(T)));
}

int degree_for_error(double gamma, double eps) {
  if (!(gamma > 0.0)) throw std::invalid_argument("degree_for_error: gamma must be positive");
  if (!(eps > 0.0) || eps > 4.0 * gamma)
    throw std::invalid_argument("degree_for_error: eps must satisfy 0 < eps <= 4 gamma");
  const double C = 3.0 * gamma + std::log(16.0 * gamma * (1.0 + gamma) / (eps * eps));
  const double w = lambert_w(C / (gamma * std::exp(1.0)));
  const double d = std::ceil(C / w) - 1.0;
  return static_cast<int>(std::max(0.0, d));
}

std::string schedule_mode_name(ScheduleMode m) {
  return m == ScheduleMode::theory ? "theory" : "practical";
}

ScheduleMode schedule_mode_from_name(const std::string& name) {
  if (name == "theory") return ScheduleMode::theory;
  if (name == "practical") return ScheduleMode::practical;
  throw SchemaError("unknown schedule mode: " + name);
}

namespace {

void check_schedule_inputs(int p, double gamma, double eps) {
  if (p < 1) throw std::invalid_argument("schedule: p must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("schedule: gamma must be positive");
  if (!(eps > 0.0) || eps > 4.0 * gamma)
    throw std::invalid_argument("schedule: eps must satisfy 0 < eps <= 4 gamma");
}

}  // namespace

Schedule schedule_theory(int p, double gamma, double eps, double delta) {
  check_schedule_inputs(p, gamma, eps);
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("schedule: delta must lie in (0, 1)");

  Schedule s;
  s.mode = ScheduleMode::theory;
  s.gamma = gamma;
  s.epsilon = eps;
  s.delta = delta;
  s.d = degree_for_error(gamma, eps);

  const double e8g = std::exp(8.0 * gamma);
  const double gp1 = (1.0 + gamma) * (1.0 + gamma);
  const double eps4 = eps * eps * eps * eps;
  s.T = ceil_to_int64(576.0 * p * gamma * gamma * e8g * gp1 / eps4);
  s.eta = 2.0 * gamma * std::exp(-gamma) /
          (3.0 * std::sqrt(static_cast<double>(p) * static_cast<double>(s.T)));

  const double dp2 = static_cast<double>(s.d) + 2.0;
  s.n = std::ceil(128.0 * e8g * gamma * gamma * gp1 *
                  (dp2 * std::log(std::exp(1.0) * p) + std::log(2.0 * p * dp2 / delta)) /
                  eps4);
  return s;
}

Schedule schedule_practical(int p, double gamma, double eps, std::int64_t n_data,
                            std::optional<int> d_override,
                            std::optional<std::int64_t> T_override,
                            std::optional<double> eta_override) {
  check_schedule_inputs(p, gamma, eps);
  if (n_data < 1) throw std::invalid_argument("schedule: dataset size must be >= 1");

  Schedule s;
  s.mode = ScheduleMode::practical;
  s.gamma = gamma;
  s.epsilon = eps;
  s.delta = 0.0;
  s.d = d_override ? *d_override : degree_for_error(gamma, eps);
  if (s.d < 0) throw std::invalid_argument("schedule: degree must be >= 0");
  s.T = T_override ? *T_override : 5000;
  if (s.T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  s.eta = eta_override ? *eta_override
                       : 2.0 * gamma * std::exp(-gamma) /
                             (3.0 * std::sqrt(static_cast<double>(p) * static_cast<double>(s.T)));
  if (!(s.eta > 0.0)) throw std::invalid_argument("schedule: step size must be positive");
  s.n = static_cast<double>(n_data);
  return s;
}

}  // namespace iscreen
