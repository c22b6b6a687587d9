#include "iscreen/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "iscreen/errors.hpp"
#include "iscreen/rng.hpp"

namespace iscreen {

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::er: return "er";
    case Topology::regular: return "regular";
    case Topology::ring: return "ring";
    case Topology::grid: return "grid";
  }
  return "?";
}

Topology topology_from_name(const std::string& name) {
  if (name == "er") return Topology::er;
  if (name == "regular") return Topology::regular;
  if (name == "ring") return Topology::ring;
  if (name == "grid") return Topology::grid;
  throw InfeasibleError("unknown topology: " + name);
}

static std::vector<std::pair<int, int>> make_edges(const GeneratorOptions& opt, SplitMix64 rng) {
  const int p = opt.p;
  std::vector<std::pair<int, int>> edges;
  switch (opt.topology) {
    case Topology::ring: {
      if (p < 3) throw InfeasibleError("ring topology needs p >= 3");
      for (int i = 0; i + 1 < p; ++i) edges.emplace_back(i, i + 1);
      edges.emplace_back(0, p - 1);
      break;
    }
    case Topology::grid: {
      const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
      if (r < 2 || r * r != p) throw InfeasibleError("grid topology needs p a perfect square >= 4");
      auto id = [r](int i, int j) { return i * r + j; };
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          if (j + 1 < r) edges.emplace_back(id(i, j), id(i, j + 1));
          if (i + 1 < r) edges.emplace_back(id(i, j), id(i + 1, j));
        }
      break;
    }
    case Topology::er: {
      double q = opt.er_prob >= 0 ? opt.er_prob : std::min(1.0, 2.0 / p);
      if (q < 0 || q > 1) throw InfeasibleError("er-prob must lie in [0,1]");
      for (int u = 0; u < p; ++u)
        for (int v = u + 1; v < p; ++v)
          if (rng.next_double() < q) edges.emplace_back(u, v);
      break;
    }
    case Topology::regular: {
      const int d = opt.degree;
      if (d < 0 || d >= p) throw InfeasibleError("regular degree must lie in [0, p-1]");
      if ((static_cast<long long>(p) * d) % 2 != 0)
        throw InfeasibleError("regular topology needs p*degree even");
      if (d == 0) break;
      // Configuration model with rejection of loops and parallel edges.
      for (int attempt = 0; attempt < 500; ++attempt) {
        std::vector<int> stubs;
        stubs.reserve(static_cast<std::size_t>(p) * d);
        for (int u = 0; u < p; ++u)
          for (int k = 0; k < d; ++k) stubs.push_back(u);
        for (std::size_t i = stubs.size(); i > 1; --i)
          std::swap(stubs[i - 1], stubs[rng.next_below(i)]);
        std::set<std::pair<int, int>> seen;
        bool ok = true;
        for (std::size_t i = 0; ok && i + 1 < stubs.size(); i += 2) {
          int u = stubs[i], v = stubs[i + 1];
          if (u == v) { ok = false; break; }
          if (u > v) std::swap(u, v);
          ok = seen.emplace(u, v).second;
        }
        if (ok) {
          edges.assign(seen.begin(), seen.end());
          break;
        }
      }
      if (edges.empty()) throw InfeasibleError("could not realize a random regular graph");
      break;
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

IsingModel generate_model(const GeneratorOptions& opt) {
  if (opt.p <= 0) throw InfeasibleError("generator needs p > 0");
  if (opt.alpha < 0) throw InfeasibleError("alpha must be nonnegative");
  const double beta = opt.beta >= 0 ? opt.beta : opt.alpha;
  if (beta < opt.alpha) throw InfeasibleError("beta must be >= alpha");

  SplitMix64 root(opt.seed);
  auto edges = make_edges(opt, root.split(0));

  std::vector<int> deg(opt.p, 0);
  for (auto& [u, v] : edges) { ++deg[u]; ++deg[v]; }
  const int maxdeg = edges.empty() ? 0 : *std::max_element(deg.begin(), deg.end());

  if (opt.gamma > 0 && opt.alpha * maxdeg > opt.gamma)
    throw InfeasibleError("infeasible: alpha * max-degree exceeds gamma");

  double h = opt.field_range;
  if (h < 0) h = opt.gamma > 0 ? std::max(0.0, opt.gamma - maxdeg * beta) : 0.0;

  SplitMix64 mag = root.split(1), sign = root.split(2), fld = root.split(3);
  std::vector<CouplingEntry> couplings;
  couplings.reserve(edges.size());
  for (auto& [u, v] : edges)
    couplings.push_back({u, v, sign.next_sign() * mag.next_uniform(opt.alpha, beta)});
  std::vector<double> fields(opt.p, 0.0);
  for (auto& f : fields) f = h > 0 ? fld.next_uniform(-h, h) : 0.0;

  if (opt.gamma > 0) {
    double w0 = 0.0;
    for (int u = 0; u < opt.p; ++u) {
      double nu = std::abs(fields[u]);
      for (auto& c : couplings)
        if (c.u == u || c.v == u) nu += std::abs(c.value);
      w0 = std::max(w0, nu);
    }
    if (w0 <= 0) throw InfeasibleError("cannot rescale an all-zero model to gamma");
    const double s = opt.gamma / w0;
    for (auto& c : couplings) c.value *= s;
    for (auto& f : fields) f *= s;
    for (auto& c : couplings)
      if (std::abs(c.value) < opt.alpha - 1e-9)
        throw InfeasibleError("rescaling to gamma pushed a coupling below alpha");
  }

  return IsingModel(opt.p, std::move(couplings), std::move(fields));
}

}  // namespace iscreen
