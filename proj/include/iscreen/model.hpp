#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace iscreen {

// Hard cap on brute-force enumeration (2^p table memory).
inline constexpr int kEnumerationCap = 24;

// Spin configuration; entries are exactly -1 or +1.
using SpinConfig = std::vector<std::int8_t>;

// Enumeration encoding used throughout: bit i of idx set <=> sigma_i = -1,
// so index 0 is the all-(+1) configuration and
// prod_{i in K} sigma_i = (-1)^popcount(idx & K).
SpinConfig config_from_index(std::uint64_t idx, int p);

struct CouplingEntry {
  int u = 0, v = 0;  // u < v
  double value = 0.0;
};

// Ising model over p spins: canonical (u<v) coupling entries plus per-spin
// fields. Immutable after construction; safe to share across threads.
class IsingModel {
 public:
  IsingModel(int p, std::vector<CouplingEntry> couplings, std::vector<double> fields);

  int p() const { return p_; }
  const std::vector<double>& fields() const { return fields_; }
  // Sorted canonical entries, u < v.
  const std::vector<CouplingEntry>& coupling_entries() const { return entries_; }
  // Symmetric lookup; 0 when the pair is absent.
  double coupling(int u, int v) const;
  const std::vector<std::pair<int, double>>& neighbors(int u) const { return adj_[u]; }

 private:
  int p_;
  std::vector<CouplingEntry> entries_;
  std::vector<double> fields_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

// Per-node parameter vector theta_u = (field, couplings to every v != u),
// the optimization variable of the per-node screening problem.
struct LocalParams {
  int p = 0;
  int node = 0;
  double field = 0.0;
  std::vector<double> couplings;  // length p-1; position v<node -> v, v>node -> v-1

  static LocalParams zero(int p, int node);
  // Dense layout: x[node] = field, x[v] = coupling to v.
  static LocalParams from_vector(int node, const std::vector<double>& x);
  std::vector<double> to_vector() const;

  double coupling_to(int v) const;
  void set_coupling(int v, double value);
  double l1_norm() const;
};

// The model's own local parameters at `node`: (fields[node], coupling(node, .)).
LocalParams true_local_params(const IsingModel& m, int node);

// Symmetric double-sum energy read-out: every stored pair value appears twice
// (once per ordered pair) plus the field term.
double energy(const IsingModel& m, const SpinConfig& s);

// Exponent of the Gibbs weight, mu(sigma) proportional to exp(log_weight):
// each pair counted once, so the conditional field of spin u is
// fields[u] + sum_v coupling(u,v) sigma_v and the screening loss at node u is
// minimized exactly at true_local_params(m, u).
double log_weight(const IsingModel& m, const SpinConfig& s);

// E_u(sigma, theta_u) = sigma_u (field + sum_{v != u} coupling_v sigma_v).
double local_energy(const LocalParams& lp, const SpinConfig& s);

// max_u ( sum_{v != u} |coupling(u,v)| + |fields[u]| ).
double l1_width(const IsingModel& m);

// Probability table over all 2^p configurations (index encoding above).
std::vector<double> exact_distribution(const IsingModel& m);

// E[prod_{i in key} sigma_i]; key_mask bit i = spin i. Empty key -> 1.
double exact_moment(const IsingModel& m, std::uint64_t key_mask);

// Ideal screening loss E[exp(-E_u(sigma, lp))] and its gradient in the dense
// layout (slot lp.node = field component, slot v = coupling-v component):
//   field: -E[sigma_u e^{-E_u}],  coupling v: -E[sigma_u sigma_v e^{-E_u}].
double exact_is_loss(const IsingModel& m, const LocalParams& lp);
std::vector<double> exact_is_gradient(const IsingModel& m, const LocalParams& lp);

}  // namespace iscreen
