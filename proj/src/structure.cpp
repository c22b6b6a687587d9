#include "iscreen/structure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iscreen {

bool EdgeSet::contains(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

std::vector<int> EdgeSet::neighborhood(int u) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == u) out.push_back(b);
    if (b == u) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int EdgeSet::max_degree() const {
  std::vector<int> deg(p, 0);
  for (const auto& [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  int d = 0;
  for (int x : deg) d = std::max(d, x);
  return d;
}

EdgeSet make_edge_set(int p, std::vector<std::pair<int, int>> edges) {
  if (p < 1) throw std::invalid_argument("EdgeSet: p must be >= 1");
  for (auto& [u, v] : edges) {
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= p) throw std::invalid_argument("EdgeSet: node index out of range");
    if (u == v) throw std::invalid_argument("EdgeSet: self-loops are not allowed");
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw std::invalid_argument("EdgeSet: duplicate edge");
  EdgeSet es;
  es.p = p;
  es.edges = std::move(edges);
  return es;
}

EdgeSet edges_of(const IsingModel& m) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : m.coupling_entries())
    if (e.value != 0.0) edges.emplace_back(e.u, e.v);
  return make_edge_set(m.p(), std::move(edges));
}

EdgeSet threshold_edges(const CouplingEstimate& est, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("threshold_edges: alpha must be positive");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : est.couplings)
    if (std::abs(e.value) >= 0.5 * alpha) edges.emplace_back(e.u, e.v);
  return make_edge_set(est.p, std::move(edges));
}

EdgeComparison compare_edges(const EdgeSet& predicted, const EdgeSet& truth) {
  EdgeComparison c;
  for (const auto& e : predicted.edges)
    if (!truth.contains(e.first, e.second)) ++c.false_positives;
  for (const auto& e : truth.edges)
    if (!predicted.contains(e.first, e.second)) ++c.false_negatives;
  c.exact = c.false_positives == 0 && c.false_negatives == 0;
  return c;
}

}  // namespace iscreen
