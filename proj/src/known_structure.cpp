#include "iscreen/known_structure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "iscreen/errors.hpp"

namespace iscreen {

namespace {

void check_neighborhood(const LocalParams& lp, const std::vector<int>& nbhd) {
  const int D = static_cast<int>(nbhd.size());
  if (D > kWalshCap)
    throw std::invalid_argument("walsh: neighborhood larger than the supported cap");
  int prev = -1;
  for (int v : nbhd) {
    if (v < 0 || v >= lp.p) throw std::invalid_argument("walsh: neighbor out of range");
    if (v == lp.node) throw std::invalid_argument("walsh: node cannot neighbor itself");
    if (v <= prev) throw std::invalid_argument("walsh: neighborhood must be ascending");
    prev = v;
  }
  for (int v = 0; v < lp.p; ++v) {
    if (v == lp.node) continue;
    if (std::find(nbhd.begin(), nbhd.end(), v) == nbhd.end() && lp.coupling_to(v) != 0.0)
      throw std::invalid_argument("walsh: parameters carry weight outside the neighborhood");
  }
}

// f(tau) over the local cube; bit 0 of the point index is the node spin,
// bit 1+j is neighborhood[j], set bit = -1.
std::vector<double> kernel_values(const LocalParams& lp, const std::vector<int>& nbhd) {
  const int dim = static_cast<int>(nbhd.size()) + 1;
  std::vector<double> f(std::size_t{1} << dim);
  for (std::uint64_t tau = 0; tau < f.size(); ++tau) {
    const int su = (tau & 1) ? -1 : +1;
    double h = lp.field;
    for (std::size_t j = 0; j < nbhd.size(); ++j) {
      const int sj = ((tau >> (j + 1)) & 1) ? -1 : +1;
      h += lp.coupling_to(nbhd[j]) * sj;
    }
    f[tau] = std::exp(-su * h);
  }
  return f;
}

std::vector<double> expand(std::vector<double> values) {
  fwht_inplace(values);
  const double scale = 1.0 / static_cast<double>(values.size());
  for (double& c : values) c *= scale;
  return values;
}

}  // namespace

std::uint64_t WalshTable::global_mask(std::uint64_t local_mask) const {
  std::uint64_t g = 0;
  if (local_mask & 1) g |= std::uint64_t{1} << node;
  for (std::size_t j = 0; j < neighborhood.size(); ++j)
    if ((local_mask >> (j + 1)) & 1) g |= std::uint64_t{1} << neighborhood[j];
  return g;
}

double WalshTable::evaluate(std::uint64_t tau_idx) const {
  double v = 0.0;
  for (std::uint64_t k = 0; k < coeffs.size(); ++k)
    v += coeffs[k] * (std::popcount(tau_idx & k) % 2 == 0 ? 1.0 : -1.0);
  return v;
}

WalshTable walsh_coefficients(const LocalParams& lp, const std::vector<int>& neighborhood) {
  check_neighborhood(lp, neighborhood);
  WalshTable wt;
  wt.node = lp.node;
  wt.neighborhood = neighborhood;
  wt.coeffs = expand(kernel_values(lp, neighborhood));
  return wt;
}

double loss_from_moments(const WalshTable& wt, const MomentTable& table) {
  const int needed = wt.dim();
  if (table.max_degree() < needed)
    throw MissingMomentError("loss_from_moments: needs moments up to degree " +
                             std::to_string(needed) + " but the table holds degree <= " +
                             std::to_string(table.max_degree()));
  double loss = 0.0;
  for (std::uint64_t k = 0; k < wt.coeffs.size(); ++k)
    loss += wt.coeffs[k] * table.query(wt.global_mask(k));
  return loss;
}

std::vector<double> gradient_from_moments(const LocalParams& lp,
                                          const std::vector<int>& neighborhood,
                                          const MomentTable& table) {
  check_neighborhood(lp, neighborhood);
  const int D = static_cast<int>(neighborhood.size());
  const int needed = D + 1;
  if (table.max_degree() < needed)
    throw MissingMomentError("gradient_from_moments: needs moments up to degree " +
                             std::to_string(needed) + " but the table holds degree <= " +
                             std::to_string(table.max_degree()));

  const std::vector<double> f = kernel_values(lp, neighborhood);
  WalshTable wt;
  wt.node = lp.node;
  wt.neighborhood = neighborhood;

  // One moment fetch per local subset, shared by all parameter slots.
  std::vector<double> mom(f.size());
  for (std::uint64_t k = 0; k < f.size(); ++k) mom[k] = table.query(wt.global_mask(k));

  std::vector<double> grad(D + 1, 0.0);
  std::vector<double> g(f.size());
  for (int slot = 0; slot <= D; ++slot) {
    for (std::uint64_t tau = 0; tau < f.size(); ++tau) {
      const int su = (tau & 1) ? -1 : +1;
      int sv = 1;
      if (slot > 0) sv = ((tau >> slot) & 1) ? -1 : +1;
      g[tau] = -su * sv * f[tau];
    }
    const std::vector<double> ghat = expand(g);
    double acc = 0.0;
    for (std::uint64_t k = 0; k < ghat.size(); ++k) acc += ghat[k] * mom[k];
    grad[slot] = acc;
  }
  return grad;
}

KnownStructureEstimate learn_known_structure(const MomentTable& table, const EdgeSet& edges,
                                             double gamma, std::int64_t T, double eta,
                                             int threads) {
  const int p = table.p();
  if (edges.p != p)
    throw std::invalid_argument("learn_known_structure: edge set and table disagree on p");
  const int maxD = edges.max_degree();
  if (table.max_degree() < maxD + 1)
    throw MissingMomentError("learn_known_structure: needs moments up to degree " +
                             std::to_string(maxD + 1) + " but the table holds degree <= " +
                             std::to_string(table.max_degree()));

  KnownStructureEstimate est;
  est.p = p;
  est.node_params.resize(p, LocalParams::zero(p, 0));
  est.fields.assign(p, 0.0);
  est.diagnostics.resize(p);
  est.schedule.mode = ScheduleMode::practical;
  est.schedule.gamma = gamma;
  est.schedule.d = 0;
  est.schedule.T = T;
  est.schedule.eta = eta;
  est.schedule.n = table.is_oracle() ? 0.0 : static_cast<double>(table.n());

  auto run_node = [&](int u) {
    const std::vector<int> nbhd = edges.neighborhood(u);
    const int dim = static_cast<int>(nbhd.size()) + 1;
    auto to_lp = [&](const std::vector<double>& x) {
      LocalParams lp = LocalParams::zero(p, u);
      lp.field = x[0];
      for (std::size_t j = 0; j < nbhd.size(); ++j) lp.set_coupling(nbhd[j], x[1 + j]);
      return lp;
    };
    GdOptions opts;
    opts.trace_every = std::max<std::int64_t>(1, (T + 99) / 100);
    opts.loss_proxy = [&](const std::vector<double>& x) {
      return loss_from_moments(walsh_coefficients(to_lp(x), nbhd), table);
    };
    GdDiagnostics gd;
    const std::vector<double> avg = projected_gd(
        [&](const std::vector<double>& x) {
          return gradient_from_moments(to_lp(x), nbhd, table);
        },
        dim, gamma, T, eta, opts, &gd);
    est.node_params[u] = to_lp(avg);
    est.fields[u] = avg[0];
    est.diagnostics[u].node = u;
    est.diagnostics[u].initial_grad_inf = gd.initial_grad_inf;
    est.diagnostics[u].final_grad_inf = gd.final_grad_inf;
    est.diagnostics[u].iterations = gd.iterations;
    est.diagnostics[u].loss_trace = std::move(gd.loss_trace);
  };

  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc == 0 ? 1 : static_cast<int>(std::min<unsigned>(hc, 8));
  }
  threads = std::min(threads, p);
  if (threads <= 1 || p == 1) {
    for (int u = 0; u < p; ++u) run_node(u);
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(p);
    for (int u = 0; u < p; ++u)
      futs.push_back(std::async(std::launch::async, run_node, u));
    for (auto& f : futs) f.get();
  }

  est.couplings.reserve(edges.edges.size());
  for (const auto& [u, v] : edges.edges)
    est.couplings.push_back(
        {u, v, 0.5 * (est.node_params[u].coupling_to(v) + est.node_params[v].coupling_to(u))});
  return est;
}

KnownSchedule schedule_known_theory(int D, double gamma, double eps, double delta) {
  if (D < 0) throw std::invalid_argument("schedule_known_theory: D must be >= 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("schedule_known_theory: gamma must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("schedule_known_theory: eps must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("schedule_known_theory: delta must lie in (0, 1)");

  KnownSchedule ks;
  ks.D = D;
  ks.L = 2.0 * std::sqrt(static_cast<double>(D) + 1.0) * std::exp(gamma);

  const double gp1 = (1.0 + gamma) * (1.0 + gamma);
  const double eps4 = eps * eps * eps * eps;
  Schedule& s = ks.sched;
  s.mode = ScheduleMode::theory;
  s.gamma = gamma;
  s.epsilon = eps;
  s.delta = delta;
  s.d = 0;
  s.T = ceil_to_int64(256.0 * (D + 1.0) * gamma * gamma * gp1 * std::exp(8.0 * gamma) / eps4);
  s.eta = gd_step_size(gamma, ks.L, s.T);
  s.n = std::ceil(std::exp2(2.0 * D + 7.0) * gamma * gamma * gp1 * std::exp(8.0 * gamma) *
                  ((D + 2.0) * std::log(2.0) + std::log(1.0 / delta)) / eps4);
  return ks;
}

}  // namespace iscreen
