#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "iscreen/model.hpp"
#include "iscreen/rng.hpp"

namespace testutil {

inline iscreen::IsingModel zero_model(int p) {
  return iscreen::IsingModel(p, {}, std::vector<double>(p, 0.0));
}

inline iscreen::IsingModel single_edge_model(int p, int u, int v, double theta) {
  return iscreen::IsingModel(p, {{u, v, theta}}, std::vector<double>(p, 0.0));
}

inline iscreen::IsingModel field_only_model(std::vector<double> fields) {
  const int p = static_cast<int>(fields.size());
  return iscreen::IsingModel(p, {}, std::move(fields));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace testutil
