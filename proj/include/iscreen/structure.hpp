#pragma once

#include <utility>
#include <vector>

#include "iscreen/model.hpp"
#include "iscreen/screening.hpp"

namespace iscreen {

// Undirected edge set over p nodes; pairs are canonical (u < v) and sorted
// lexicographically.
struct EdgeSet {
  int p = 0;
  std::vector<std::pair<int, int>> edges;

  bool contains(int u, int v) const;
  // Neighbors of u, ascending.
  std::vector<int> neighborhood(int u) const;
  // Largest neighborhood size (0 for an empty graph).
  int max_degree() const;
};

EdgeSet make_edge_set(int p, std::vector<std::pair<int, int>> edges);

// Edges carried by the model's nonzero couplings.
EdgeSet edges_of(const IsingModel& m);

// Keeps pairs whose symmetrized coupling magnitude is >= alpha/2 (boundary
// ties kept).
EdgeSet threshold_edges(const CouplingEstimate& est, double alpha);

struct EdgeComparison {
  int false_positives = 0;  // predicted but not true
  int false_negatives = 0;  // true but missed
  bool exact = false;
};

EdgeComparison compare_edges(const EdgeSet& predicted, const EdgeSet& truth);

}  // namespace iscreen
