#include "iscreen/screening.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>
#include <thread>

#include "iscreen/errors.hpp"
#include "iscreen/polyexpand.hpp"

namespace iscreen {

double CouplingEstimate::coupling(int u, int v) const {
  if (u > v) std::swap(u, v);
  for (const auto& e : couplings)
    if (e.u == u && e.v == v) return e.value;
  return 0.0;
}

LocalParams learn_node(int node, const MomentTable& table, const Schedule& sched,
                       NodeDiagnostics* diag) {
  const int p = table.p();
  if (node < 0 || node >= p) throw std::invalid_argument("learn_node: node out of range");
  const int needed = required_table_degree_couplings(sched.d, p);
  if (table.max_degree() < needed)
    throw MissingMomentError("learn_node: surrogate of degree " + std::to_string(sched.d) +
                             " needs moments up to degree " + std::to_string(needed) +
                             " but the table holds degree <= " +
                             std::to_string(table.max_degree()));

  GdOptions opts;
  opts.trace_every = std::max<std::int64_t>(1, (sched.T + 99) / 100);
  opts.loss_proxy = [&](const std::vector<double>& x) {
    return surrogate_loss(LocalParams::from_vector(node, x), sched.d, table);
  };
  GdDiagnostics gd;
  const std::vector<double> avg = projected_gd(
      [&](const std::vector<double>& x) {
        return approx_gradient(LocalParams::from_vector(node, x), sched.d, table);
      },
      p, sched.gamma, sched.T, sched.eta, opts, &gd);

  if (diag) {
    diag->node = node;
    diag->initial_grad_inf = gd.initial_grad_inf;
    diag->final_grad_inf = gd.final_grad_inf;
    diag->iterations = gd.iterations;
    diag->loss_trace = std::move(gd.loss_trace);
  }
  return LocalParams::from_vector(node, avg);
}

CouplingEstimate learn_couplings(const MomentTable& table, const Schedule& sched,
                                 int threads) {
  const int p = table.p();
  CouplingEstimate est;
  est.p = p;
  est.schedule = sched;
  est.node_params.resize(p, LocalParams::zero(p, 0));
  est.diagnostics.resize(p);
  est.fields.assign(p, 0.0);

  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc == 0 ? 1 : static_cast<int>(std::min<unsigned>(hc, 8));
  }
  threads = std::min(threads, p);

  auto run_node = [&](int u) {
    est.node_params[u] = learn_node(u, table, sched, &est.diagnostics[u]);
  };

  if (threads <= 1 || p == 1) {
    for (int u = 0; u < p; ++u) run_node(u);
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(p);
    for (int u = 0; u < p; ++u)
      futs.push_back(std::async(std::launch::async, run_node, u));
    for (auto& f : futs) f.get();  // rethrows the first failure
  }

  for (int u = 0; u < p; ++u) est.fields[u] = est.node_params[u].field;
  est.couplings.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (int u = 0; u < p; ++u)
    for (int v = u + 1; v < p; ++v)
      est.couplings.push_back(
          {u, v,
           0.5 * (est.node_params[u].coupling_to(v) + est.node_params[v].coupling_to(u))});
  return est;
}

}  // namespace iscreen
