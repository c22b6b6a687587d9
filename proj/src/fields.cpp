#include "iscreen/fields.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "iscreen/errors.hpp"
#include "iscreen/polyexpand.hpp"

namespace iscreen {

FieldsSchedule schedule_fields(double gamma, int D, double eps_c, double eps_h,
                               double delta, int p) {
  if (!(gamma > 0.0)) throw std::invalid_argument("schedule_fields: gamma must be positive");
  if (D < 0) throw std::invalid_argument("schedule_fields: D must be >= 0");
  if (!(eps_c >= 0.0)) throw std::invalid_argument("schedule_fields: eps_c must be >= 0");
  if (!(eps_h > 0.0)) throw std::invalid_argument("schedule_fields: eps_h must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("schedule_fields: delta must lie in (0, 1)");
  if (p < 1) throw std::invalid_argument("schedule_fields: p must be >= 1");

  const double log_arg = 8.0 * gamma * (1.0 + gamma) / (eps_h * eps_h);
  if (!(log_arg > 1.0))
    throw std::invalid_argument(
        "schedule_fields: eps_h too large for the degree formula (log term nonpositive)");

  FieldsSchedule fs;
  fs.D = D;
  fs.eps_c = eps_c;
  fs.eps_internal = eps_h * eps_h * std::exp(-gamma) / (2.0 * (1.0 + gamma));
  fs.L = (1.0 + D * eps_c) * std::exp(2.0 * gamma) + fs.eps_internal / (4.0 * gamma);

  Schedule& s = fs.sched;
  s.mode = ScheduleMode::theory;
  s.gamma = gamma;
  s.epsilon = eps_h;
  s.delta = delta;
  const double cprime = gamma + std::log(log_arg);
  const double w = lambert_w(cprime / (2.0 * gamma * std::exp(1.0)));
  s.d = static_cast<int>(std::max(0.0, std::ceil(cprime / w) - 1.0));
  s.T = gd_iterations(gamma, fs.L, fs.eps_internal);
  s.eta = gd_step_size(gamma, fs.L, s.T);
  const double dp1 = static_cast<double>(s.d) + 1.0;
  s.n = std::ceil(32.0 * gamma * gamma * (1.0 + gamma) * (1.0 + gamma) *
                  std::exp(6.0 * gamma) *
                  (dp1 * std::log(std::exp(1.0) * p) + std::log(2.0 * dp1 / delta)) /
                  (eps_h * eps_h * eps_h * eps_h));
  return fs;
}

FieldsSchedule schedule_fields_practical(int p, double gamma, std::int64_t n_data,
                                         std::optional<int> d_override,
                                         std::optional<std::int64_t> T_override,
                                         std::optional<double> eta_override, double eps_c,
                                         double eps_h, int D) {
  if (p < 1) throw std::invalid_argument("schedule_fields: p must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("schedule_fields: gamma must be positive");
  if (n_data < 1) throw std::invalid_argument("schedule_fields: dataset size must be >= 1");

  FieldsSchedule fs;
  fs.D = D;
  fs.eps_c = eps_c;
  fs.eps_internal =
      eps_h > 0.0 ? eps_h * eps_h * std::exp(-gamma) / (2.0 * (1.0 + gamma)) : 0.0;
  fs.L = std::exp(2.0 * gamma);

  Schedule& s = fs.sched;
  s.mode = ScheduleMode::practical;
  s.gamma = gamma;
  s.epsilon = eps_h;
  s.delta = 0.0;
  s.d = d_override ? *d_override : 20;
  if (s.d < 0) throw std::invalid_argument("schedule_fields: degree must be >= 0");
  s.T = T_override ? *T_override : 5000;
  if (s.T < 1) throw std::invalid_argument("schedule_fields: T must be >= 1");
  s.eta = eta_override ? *eta_override : gd_step_size(gamma, fs.L, s.T);
  if (!(s.eta > 0.0)) throw std::invalid_argument("schedule_fields: step size must be positive");
  s.n = static_cast<double>(n_data);
  return fs;
}

double field_gradient(int u, double theta, const LocalParams& couplings_fixed, int d,
                      const MomentTable& table) {
  if (couplings_fixed.node != u)
    throw std::invalid_argument("field_gradient: parameter block belongs to another node");
  const int needed = required_table_degree_fields(d, table.p());
  if (table.max_degree() < needed)
    throw MissingMomentError("field_gradient: surrogate of degree " + std::to_string(d) +
                             " needs moments up to degree " + std::to_string(needed) +
                             " but the table holds degree <= " +
                             std::to_string(table.max_degree()));
  LocalParams lp = couplings_fixed;
  lp.field = theta;
  return approx_field_derivative(lp, d, table);
}

LocalParams restricted_local_params(int u, double theta, const CouplingEstimate& couplings,
                                    const EdgeSet& edges) {
  if (couplings.p != edges.p)
    throw std::invalid_argument("restricted_local_params: estimate and edge set disagree on p");
  LocalParams lp = LocalParams::zero(couplings.p, u);
  lp.field = theta;
  for (int v : edges.neighborhood(u)) lp.set_coupling(v, couplings.coupling(u, v));
  return lp;
}

double learn_field(int u, const CouplingEstimate& couplings, const EdgeSet& edges,
                   const MomentTable& table, const FieldsSchedule& sched,
                   NodeDiagnostics* diag) {
  if (u < 0 || u >= table.p()) throw std::invalid_argument("learn_field: node out of range");
  const LocalParams base = restricted_local_params(u, 0.0, couplings, edges);
  const Schedule& s = sched.sched;

  GdOptions opts;
  opts.trace_every = std::max<std::int64_t>(1, (s.T + 99) / 100);
  opts.loss_proxy = [&](const std::vector<double>& x) {
    LocalParams lp = base;
    lp.field = x[0];
    return surrogate_loss(lp, s.d, table);
  };
  GdDiagnostics gd;
  const std::vector<double> avg = projected_gd(
      [&](const std::vector<double>& x) {
        return std::vector<double>{field_gradient(u, x[0], base, s.d, table)};
      },
      1, s.gamma, s.T, s.eta, opts, &gd);

  if (diag) {
    diag->node = u;
    diag->initial_grad_inf = gd.initial_grad_inf;
    diag->final_grad_inf = gd.final_grad_inf;
    diag->iterations = gd.iterations;
    diag->loss_trace = std::move(gd.loss_trace);
  }
  return avg[0];
}

FieldEstimate learn_fields(const CouplingEstimate& couplings, const EdgeSet& edges,
                           const MomentTable& table, const FieldsSchedule& sched,
                           int threads) {
  const int p = table.p();
  if (couplings.p != p)
    throw std::invalid_argument("learn_fields: estimate and table disagree on p");
  FieldEstimate out;
  out.p = p;
  out.schedule = sched;
  out.fields.assign(p, 0.0);
  out.neighborhood_sizes.assign(p, 0);
  out.bound_eps_h_term.assign(p, 0.0);
  out.bound_coupling_term.assign(p, 0.0);
  out.diagnostics.resize(p);

  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc == 0 ? 1 : static_cast<int>(std::min<unsigned>(hc, 8));
  }
  threads = std::min(threads, p);

  auto run_node = [&](int u) {
    out.fields[u] = learn_field(u, couplings, edges, table, sched, &out.diagnostics[u]);
  };
  if (threads <= 1 || p == 1) {
    for (int u = 0; u < p; ++u) run_node(u);
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(p);
    for (int u = 0; u < p; ++u)
      futs.push_back(std::async(std::launch::async, run_node, u));
    for (auto& f : futs) f.get();
  }

  const double gamma = sched.sched.gamma;
  for (int u = 0; u < p; ++u) {
    const int du = static_cast<int>(edges.neighborhood(u).size());
    out.neighborhood_sizes[u] = du;
    out.bound_eps_h_term[u] = sched.sched.epsilon > 0.0 ? sched.sched.epsilon : 0.0;
    out.bound_coupling_term[u] =
        sched.eps_c > 0.0
            ? std::sqrt(8.0 * gamma * (1.0 + gamma) * std::exp(3.0 * gamma) * du * sched.eps_c)
            : 0.0;
  }
  return out;
}

}  // namespace iscreen
