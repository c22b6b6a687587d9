#pragma once

#include <cstdint>
#include <vector>

#include "iscreen/moments.hpp"
#include "iscreen/optimizer.hpp"
#include "iscreen/screening.hpp"
#include "iscreen/structure.hpp"

namespace iscreen {

// Largest supported neighborhood (the coefficient array has 2^{D+1} slots).
inline constexpr int kWalshCap = 20;

// Fourier (Walsh) expansion of the node's loss kernel over the cube spanned
// by {node} and its neighborhood.  Local bit convention: bit 0 is the node,
// bit 1+j is neighborhood[j]; a set bit in a point index means that spin is
// -1 (same encoding as the global enumeration).
struct WalshTable {
  int node = 0;
  std::vector<int> neighborhood;  // ascending, excludes node
  std::vector<double> coeffs;     // length 2^{|neighborhood|+1}, indexed by local subset

  int dim() const { return static_cast<int>(neighborhood.size()) + 1; }
  // Global monomial mask of a local subset.
  std::uint64_t global_mask(std::uint64_t local_mask) const;
  // Value of the expanded function at a local +/-1 point.
  double evaluate(std::uint64_t tau_idx) const;
};

// Coefficients of f(tau) = exp(-tau_node (field + sum_j c_j tau_j)):
// fhat_K = 2^{-(D+1)} sum_tau f(tau) prod_{i in K} tau_i.  The parameter
// block must carry zeros outside the neighborhood.
WalshTable walsh_coefficients(const LocalParams& lp, const std::vector<int>& neighborhood);

// loss = sum_K fhat_K * table moment of the corresponding global monomial;
// equals the empirical average of f over the dataset behind the table.
// Needs moments up to degree |neighborhood|+1.
double loss_from_moments(const WalshTable& wt, const MomentTable& table);

// Same contraction applied to each partial derivative of f.  Layout: slot 0
// is the field derivative, slot 1+j the derivative for neighborhood[j].
std::vector<double> gradient_from_moments(const LocalParams& lp,
                                          const std::vector<int>& neighborhood,
                                          const MomentTable& table);

struct KnownStructureEstimate {
  int p = 0;
  std::vector<LocalParams> node_params;  // support restricted to each neighborhood
  std::vector<CouplingEntry> couplings;  // symmetrized over the given edges
  std::vector<double> fields;
  Schedule schedule;
  std::vector<NodeDiagnostics> diagnostics;
};

// Per-node projected GD on the (|N_u|+1)-dimensional l1 ball of radius
// gamma using gradient_from_moments, zero start, averaged iterate.  The
// table must hold moments up to max_u |N_u| + 1.
KnownStructureEstimate learn_known_structure(const MomentTable& table, const EdgeSet& edges,
                                             double gamma, std::int64_t T, double eta,
                                             int threads = 0);

struct KnownSchedule {
  Schedule sched;
  int D = 0;
  double L = 0.0;  // 2 sqrt(D+1) e^gamma
};

// Guarantee-grade schedule: T = ceil(2^8 (D+1) gamma^2 (1+gamma)^2 e^{8 gamma}
// / eps^4), L = 2 sqrt(D+1) e^gamma, eta = 2 gamma / (L sqrt(T)),
// n = ceil(2^{2D+7} gamma^2 (1+gamma)^2 e^{8 gamma} ((D+2) log 2 +
// log(1/delta)) / eps^4).  No Taylor truncation is involved (d = 0).
KnownSchedule schedule_known_theory(int D, double gamma, double eps, double delta);

}  // namespace iscreen
