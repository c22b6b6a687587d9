#include "iscreen/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iscreen/errors.hpp"
#include "iscreen/rng.hpp"

namespace iscreen {

std::string sample_method_name(SampleMethod m) {
  return m == SampleMethod::exact ? "exact" : "gibbs";
}

SampleMethod sample_method_from_name(const std::string& name) {
  if (name == "exact") return SampleMethod::exact;
  if (name == "gibbs") return SampleMethod::gibbs;
  throw SchemaError("unknown sampling method: " + name);
}

Dataset sample_exact(const IsingModel& m, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_exact: n must be >= 1");
  const auto probs = exact_distribution(m);
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  Dataset d;
  d.p = m.p();
  d.n = n;
  d.method = SampleMethod::exact;
  d.seed = seed;
  d.spins.resize(static_cast<std::size_t>(n) * m.p());
  SplitMix64 rng = SplitMix64(seed).split(0);
  for (std::int64_t t = 0; t < n; ++t) {
    const double u = rng.next_double();
    const std::uint64_t idx =
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    auto* row = d.spins.data() + t * d.p;
    for (int i = 0; i < d.p; ++i) row[i] = (idx >> i) & 1 ? -1 : +1;
  }
  return d;
}

Dataset sample_gibbs(const IsingModel& m, std::int64_t n, std::uint64_t seed,
                     std::int64_t burn_in, std::int64_t thinning) {
  const int p = m.p();
  if (n < 0) throw std::invalid_argument("sample_gibbs: n must be >= 0");
  if (burn_in < 0) burn_in = 10 * static_cast<std::int64_t>(p);
  if (thinning < 0) thinning = p;
  if (thinning < 1) throw std::invalid_argument("sample_gibbs: thinning must be >= 1");

  Dataset d;
  d.p = p;
  d.n = n;
  d.method = SampleMethod::gibbs;
  d.seed = seed;
  d.burn_in = burn_in;
  d.thinning = thinning;
  d.spins.resize(static_cast<std::size_t>(n) * p);

  SplitMix64 root(seed);
  SplitMix64 init = root.split(0), walk = root.split(1);
  std::vector<std::int8_t> s(p);
  for (auto& x : s) x = init.next_sign();

  auto sweep = [&] {
    for (int v = 0; v < p; ++v) {
      double h = m.fields()[v];
      for (const auto& [j, value] : m.neighbors(v)) h += value * s[j];
      const double pplus = 0.5 * (1.0 + std::tanh(h));
      s[v] = walk.next_double() < pplus ? +1 : -1;
    }
  };

  for (std::int64_t t = 0; t < burn_in; ++t) sweep();
  for (std::int64_t t = 0; t < n; ++t) {
    for (std::int64_t k = 0; k < thinning; ++k) sweep();
    std::copy(s.begin(), s.end(), d.spins.begin() + t * p);
  }
  return d;
}

}  // namespace iscreen
