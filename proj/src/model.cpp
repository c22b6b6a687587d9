#include "iscreen/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "iscreen/errors.hpp"

namespace iscreen {

SpinConfig config_from_index(std::uint64_t idx, int p) {
  SpinConfig s(p);
  for (int i = 0; i < p; ++i) s[i] = (idx >> i) & 1 ? -1 : +1;
  return s;
}

IsingModel::IsingModel(int p, std::vector<CouplingEntry> couplings, std::vector<double> fields)
    : p_(p), entries_(std::move(couplings)), fields_(std::move(fields)) {
  if (p_ <= 0) throw std::invalid_argument("IsingModel: p must be positive");
  if (static_cast<int>(fields_.size()) != p_)
    throw std::invalid_argument("IsingModel: fields length must equal p");
  for (double f : fields_)
    if (!std::isfinite(f)) throw std::invalid_argument("IsingModel: non-finite field");
  for (auto& e : entries_) {
    if (e.u >= e.v) throw std::invalid_argument("IsingModel: couplings must have u < v");
    if (e.u < 0 || e.v >= p_) throw std::invalid_argument("IsingModel: coupling index out of range");
    if (!std::isfinite(e.value)) throw std::invalid_argument("IsingModel: non-finite coupling");
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const CouplingEntry& a, const CouplingEntry& b) {
              return std::pair(a.u, a.v) < std::pair(b.u, b.v);
            });
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i - 1].u == entries_[i].u && entries_[i - 1].v == entries_[i].v)
      throw std::invalid_argument("IsingModel: duplicate coupling entry");
  adj_.assign(p_, {});
  for (const auto& e : entries_) {
    adj_[e.u].emplace_back(e.v, e.value);
    adj_[e.v].emplace_back(e.u, e.value);
  }
}

double IsingModel::coupling(int u, int v) const {
  if (u == v || u < 0 || v < 0 || u >= p_ || v >= p_)
    throw std::invalid_argument("IsingModel::coupling: bad pair (" + std::to_string(u) + "," +
                                std::to_string(v) + ")");
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair(u, v),
                             [](const CouplingEntry& e, const std::pair<int, int>& k) {
                               return std::pair(e.u, e.v) < k;
                             });
  if (it != entries_.end() && it->u == u && it->v == v) return it->value;
  return 0.0;
}

LocalParams LocalParams::zero(int p, int node) {
  LocalParams lp;
  lp.p = p;
  lp.node = node;
  lp.couplings.assign(p - 1, 0.0);
  return lp;
}

LocalParams LocalParams::from_vector(int node, const std::vector<double>& x) {
  LocalParams lp = zero(static_cast<int>(x.size()), node);
  lp.field = x[node];
  for (int v = 0; v < lp.p; ++v)
    if (v != node) lp.set_coupling(v, x[v]);
  return lp;
}

std::vector<double> LocalParams::to_vector() const {
  std::vector<double> x(p, 0.0);
  x[node] = field;
  for (int v = 0; v < p; ++v)
    if (v != node) x[v] = coupling_to(v);
  return x;
}

double LocalParams::coupling_to(int v) const {
  return couplings[v < node ? v : v - 1];
}

void LocalParams::set_coupling(int v, double value) {
  couplings[v < node ? v : v - 1] = value;
}

double LocalParams::l1_norm() const {
  double s = std::abs(field);
  for (double c : couplings) s += std::abs(c);
  return s;
}

LocalParams true_local_params(const IsingModel& m, int node) {
  LocalParams lp = LocalParams::zero(m.p(), node);
  lp.field = m.fields()[node];
  for (const auto& [v, value] : m.neighbors(node)) lp.set_coupling(v, value);
  return lp;
}

static void check_dim(const IsingModel& m, const SpinConfig& s) {
  if (static_cast<int>(s.size()) != m.p())
    throw std::invalid_argument("spin configuration length does not match p");
}

double energy(const IsingModel& m, const SpinConfig& s) {
  check_dim(m, s);
  double e = 0.0;
  for (const auto& c : m.coupling_entries()) e += 2.0 * c.value * s[c.u] * s[c.v];
  for (int u = 0; u < m.p(); ++u) e += m.fields()[u] * s[u];
  return e;
}

double log_weight(const IsingModel& m, const SpinConfig& s) {
  check_dim(m, s);
  double e = 0.0;
  for (const auto& c : m.coupling_entries()) e += c.value * s[c.u] * s[c.v];
  for (int u = 0; u < m.p(); ++u) e += m.fields()[u] * s[u];
  return e;
}

double local_energy(const LocalParams& lp, const SpinConfig& s) {
  if (static_cast<int>(s.size()) != lp.p)
    throw std::invalid_argument("spin configuration length does not match p");
  double h = lp.field;
  for (int v = 0; v < lp.p; ++v)
    if (v != lp.node) h += lp.coupling_to(v) * s[v];
  return s[lp.node] * h;
}

double l1_width(const IsingModel& m) {
  double w = 0.0;
  for (int u = 0; u < m.p(); ++u) {
    double nu = std::abs(m.fields()[u]);
    for (const auto& [v, value] : m.neighbors(u)) nu += std::abs(value);
    w = std::max(w, nu);
  }
  return w;
}

static void check_cap(int p) {
  if (p > kEnumerationCap)
    throw InfeasibleError("enumeration over 2^p states requires p <= " +
                          std::to_string(kEnumerationCap) + ", got p = " + std::to_string(p));
}

// Log-weight of configuration idx without materializing the spin vector.
static double log_weight_idx(const IsingModel& m, std::uint64_t idx) {
  double e = 0.0;
  for (const auto& c : m.coupling_entries()) {
    int sgn = ((idx >> c.u) ^ (idx >> c.v)) & 1 ? -1 : +1;
    e += c.value * sgn;
  }
  for (int u = 0; u < m.p(); ++u) e += (idx >> u) & 1 ? -m.fields()[u] : m.fields()[u];
  return e;
}

std::vector<double> exact_distribution(const IsingModel& m) {
  check_cap(m.p());
  const std::uint64_t n = 1ULL << m.p();
  std::vector<double> probs(n);
  double lmax = -1e300;
  for (std::uint64_t idx = 0; idx < n; ++idx) {
    probs[idx] = log_weight_idx(m, idx);
    lmax = std::max(lmax, probs[idx]);
  }
  double z = 0.0;
  for (auto& v : probs) {
    v = std::exp(v - lmax);
    z += v;
  }
  for (auto& v : probs) v /= z;
  return probs;
}

double exact_moment(const IsingModel& m, std::uint64_t key_mask) {
  check_cap(m.p());
  if (key_mask >> m.p())
    throw std::invalid_argument("exact_moment: key index out of range");
  const auto probs = exact_distribution(m);
  double acc = 0.0;
  for (std::uint64_t idx = 0; idx < probs.size(); ++idx)
    acc += std::popcount(idx & key_mask) & 1 ? -probs[idx] : probs[idx];
  return acc;
}

double exact_is_loss(const IsingModel& m, const LocalParams& lp) {
  check_cap(m.p());
  const auto probs = exact_distribution(m);
  const int p = m.p(), u = lp.node;
  double acc = 0.0;
  for (std::uint64_t idx = 0; idx < probs.size(); ++idx) {
    double h = lp.field;
    for (int v = 0; v < p; ++v)
      if (v != u) h += lp.coupling_to(v) * ((idx >> v) & 1 ? -1.0 : 1.0);
    const double su = (idx >> u) & 1 ? -1.0 : 1.0;
    acc += probs[idx] * std::exp(-su * h);
  }
  return acc;
}

std::vector<double> exact_is_gradient(const IsingModel& m, const LocalParams& lp) {
  check_cap(m.p());
  const auto probs = exact_distribution(m);
  const int p = m.p(), u = lp.node;
  std::vector<double> g(p, 0.0);
  for (std::uint64_t idx = 0; idx < probs.size(); ++idx) {
    double h = lp.field;
    for (int v = 0; v < p; ++v)
      if (v != u) h += lp.coupling_to(v) * ((idx >> v) & 1 ? -1.0 : 1.0);
    const double su = (idx >> u) & 1 ? -1.0 : 1.0;
    const double w = probs[idx] * su * std::exp(-su * h);
    g[u] -= w;
    for (int v = 0; v < p; ++v)
      if (v != u) g[v] -= w * ((idx >> v) & 1 ? -1.0 : 1.0);
  }
  return g;
}

}  // namespace iscreen
