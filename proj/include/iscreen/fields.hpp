#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iscreen/moments.hpp"
#include "iscreen/optimizer.hpp"
#include "iscreen/screening.hpp"
#include "iscreen/structure.hpp"

namespace iscreen {

// Schedule for the single-variable field stage.  The inner Schedule carries
// (d, T, eta, n, gamma) with epsilon = the field-accuracy target eps_h; the
// extras record how the step size was derived.
struct FieldsSchedule {
  Schedule sched;
  int D = 0;                  // neighborhood-size parameter used in L and bounds
  double eps_c = 0.0;         // assumed accuracy of the supplied couplings
  double eps_internal = 0.0;  // loss-gap target backing (T, eta)
  double L = 0.0;             // gradient bound backing the step size
};

// Guarantee-grade schedule: with eps = eps_h^2 e^{-gamma} / (2(1+gamma)) and
// L = (1 + D eps_c) e^{2 gamma} + eps/(4 gamma), uses T = ceil(16 g^2 L^2 /
// eps^2), eta = 2 gamma/(L sqrt(T)), the 2 gamma-width Lambert-W degree with
// C' = gamma + log(8 gamma (1+gamma) / eps_h^2), and n = ceil(32 g^2
// (1+g)^2 e^{6g} ((d+1) log(e p) + log(2 (d+1)/delta)) / eps_h^4).
// Requires 8 gamma (1+gamma) / eps_h^2 > 1.
FieldsSchedule schedule_fields(double gamma, int D, double eps_c, double eps_h,
                               double delta, int p);

// Default operating point: d = 20, T = 5000, eta = 2 gamma/(L sqrt(T)) with
// L = e^{2 gamma}; eps_c / eps_h are carried through for bound reporting
// only (0 = unspecified).
FieldsSchedule schedule_fields_practical(
    int p, double gamma, std::int64_t n_data, std::optional<int> d_override = std::nullopt,
    std::optional<std::int64_t> T_override = std::nullopt,
    std::optional<double> eta_override = std::nullopt, double eps_c = 0.0,
    double eps_h = 0.0, int D = 0);

// Surrogate derivative of the node loss with respect to the field at value
// `theta`, holding couplings_fixed (which must have node u and carry zeros
// off the neighborhood).  At d = 0 this is -E_n[sigma_u].  Needs moments up
// to degree d+1-(d mod 2).
double field_gradient(int u, double theta, const LocalParams& couplings_fixed, int d,
                      const MomentTable& table);

// One-dimensional projected GD (projection = clamp to [-gamma, gamma]) from
// zero, T steps, averaged iterate.  The neighborhood comes from `edges`, the
// coupling values from the symmetrized estimate, zero elsewhere.
double learn_field(int u, const CouplingEstimate& couplings, const EdgeSet& edges,
                   const MomentTable& table, const FieldsSchedule& sched,
                   NodeDiagnostics* diag = nullptr);

struct FieldEstimate {
  int p = 0;
  std::vector<double> fields;
  FieldsSchedule schedule;
  std::vector<int> neighborhood_sizes;  // |N_u| per node
  // Per-node error budget: eps_h plus sqrt(8 gamma (1+gamma) e^{3 gamma}
  // |N_u| eps_c); zero when the accuracy inputs were unspecified.
  std::vector<double> bound_eps_h_term;
  std::vector<double> bound_coupling_term;
  std::vector<NodeDiagnostics> diagnostics;
};

// Runs learn_field on every node.
FieldEstimate learn_fields(const CouplingEstimate& couplings, const EdgeSet& edges,
                           const MomentTable& table, const FieldsSchedule& sched,
                           int threads = 0);

// Local parameters used by the field stage at node u: couplings from the
// symmetrized estimate on the edge set, zero elsewhere, field as given.
LocalParams restricted_local_params(int u, double theta, const CouplingEstimate& couplings,
                                    const EdgeSet& edges);

}  // namespace iscreen
