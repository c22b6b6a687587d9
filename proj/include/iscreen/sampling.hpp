#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iscreen/model.hpp"

namespace iscreen {

enum class SampleMethod { exact, gibbs };

std::string sample_method_name(SampleMethod m);
SampleMethod sample_method_from_name(const std::string& name);

// n spin configurations, row-major. Immutable once built.
struct Dataset {
  int p = 0;
  std::int64_t n = 0;
  SampleMethod method = SampleMethod::exact;
  std::uint64_t seed = 0;
  std::int64_t burn_in = 0;   // sweeps (gibbs only)
  std::int64_t thinning = 0;  // sweeps between records (gibbs only)
  std::vector<std::int8_t> spins;  // n*p entries, each -1 or +1

  std::span<const std::int8_t> row(std::int64_t i) const {
    return {spins.data() + i * p, static_cast<std::size_t>(p)};
  }
};

// i.i.d. draws by inverse CDF over the exact 2^p probability table.
// Deterministic given seed.
Dataset sample_exact(const IsingModel& m, std::int64_t n, std::uint64_t seed);

// Single-site Gibbs sweeps with conditional
//   P(sigma_v = +1 | rest) = (1 + tanh(sum_j theta_vj sigma_j + theta_v)) / 2,
// recording one configuration every `thinning` sweeps after `burn_in` sweeps.
// Defaults (arguments < 0): burn_in = 10*p, thinning = p. Violates the
// i.i.d. assumption; flagged via Dataset.method.
Dataset sample_gibbs(const IsingModel& m, std::int64_t n, std::uint64_t seed,
                     std::int64_t burn_in = -1, std::int64_t thinning = -1);

}  // namespace iscreen
