#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"
#include "iscreen/optimizer.hpp"

namespace iscreen {

// Per-node optimization summary kept alongside an estimate.
struct NodeDiagnostics {
  int node = 0;
  double initial_grad_inf = 0.0;
  double final_grad_inf = 0.0;
  std::int64_t iterations = 0;
  std::vector<std::pair<std::int64_t, double>> loss_trace;  // (step, surrogate loss)
};

// Result of running the coupling learner on every node: the raw per-node
// parameter vectors, their symmetrized pairwise couplings, and the stage-1
// field estimates (slot u of node u's own run).
struct CouplingEstimate {
  int p = 0;
  std::vector<LocalParams> node_params;       // one per node
  std::vector<CouplingEntry> couplings;       // symmetrized, u < v, all pairs
  std::vector<double> fields;                 // field slot of each node's run
  Schedule schedule;
  std::vector<NodeDiagnostics> diagnostics;

  // Symmetrized coupling lookup; zero for absent pairs.
  double coupling(int u, int v) const;
};

// Minimizes the node-wise surrogate loss by projected gradient descent over
// the l1 ball of radius sched.gamma, starting from zero and returning the
// averaged iterate.  The table must hold moments up to
// required_table_degree_couplings(sched.d, p).
LocalParams learn_node(int node, const MomentTable& table, const Schedule& sched,
                       NodeDiagnostics* diag = nullptr);

// Runs learn_node on every node (in parallel when threads != 1) and
// symmetrizes the pairwise couplings by averaging the two directed
// estimates.  Results are merged by node index, so the outcome does not
// depend on scheduling.
CouplingEstimate learn_couplings(const MomentTable& table, const Schedule& sched,
                                 int threads = 0);

}  // namespace iscreen
