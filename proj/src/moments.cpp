#include "iscreen/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "iscreen/errors.hpp"

namespace iscreen {

namespace {

constexpr int kDenseLimit = 16;  // flat 2^p storage below this many spins

void check_key_range(std::uint64_t mask, int p, const char* what) {
  if (p < 64 && (mask >> p) != 0)
    throw std::invalid_argument(std::string(what) + ": key references spins outside the model");
}

}  // namespace

std::string MonomialKey::str() const {
  std::string out;
  for (int i = 0; i < 64; ++i) {
    if (!((mask >> i) & 1)) continue;
    if (!out.empty()) out += ';';
    out += std::to_string(i);
  }
  return out;
}

MonomialKey MonomialKey::parse(const std::string& text, int p) {
  MonomialKey key;
  if (text.empty()) return key;
  std::size_t pos = 0;
  int last = -1;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find(';', pos), text.size());
    const std::string token = text.substr(pos, next - pos);
    if (token.empty()) throw SchemaError("moment key has an empty index: \"" + text + "\"");
    int idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoi(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw SchemaError("moment key index is not an integer: \"" + token + "\"");
    }
    if (idx < 0 || idx >= p)
      throw SchemaError("moment key index out of range: " + token);
    if (idx <= last)
      throw SchemaError("moment key indices must be strictly ascending: \"" + text + "\"");
    last = idx;
    key.mask |= std::uint64_t{1} << idx;
    pos = next + 1;
    if (next == text.size()) break;
  }
  return key;
}

MonomialKey reduce_multiset(const std::vector<int>& indices) {
  MonomialKey key;
  for (int i : indices) {
    if (i < 0 || i >= 64) throw std::invalid_argument("reduce_multiset: index out of range");
    key.mask ^= std::uint64_t{1} << i;
  }
  return key;
}

void fwht_inplace(std::vector<double>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fwht_inplace: length must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = a[j], y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
    }
  }
}

MomentTable::MomentTable() : query_log_(std::make_shared<std::atomic<int>>(-1)) {}

MomentTable::MomentTable(int p, int max_degree, std::int64_t n)
    : p_(p),
      max_degree_(max_degree),
      n_(n),
      dense_(p <= kDenseLimit),
      query_log_(std::make_shared<std::atomic<int>>(-1)) {
  if (p < 1 || p > 63) throw std::invalid_argument("MomentTable: p must be in [1, 63]");
  if (max_degree < 0 || max_degree > p)
    throw std::invalid_argument("MomentTable: max_degree must be in [0, p]");
  if (n != kOracleN && n < 1)
    throw std::invalid_argument("MomentTable: n must be >= 1 or the oracle sentinel");
  if (dense_)
    flat_.assign(std::size_t{1} << p, std::numeric_limits<double>::quiet_NaN());
}

void MomentTable::set(std::uint64_t mask, double value) {
  check_key_range(mask, p_, "MomentTable::set");
  if (std::popcount(mask) > max_degree_)
    throw std::invalid_argument("MomentTable::set: key degree exceeds the table order");
  if (!std::isfinite(value))
    throw std::invalid_argument("MomentTable::set: value must be finite");
  // Spin monomials average to something in [-1, 1]; allow a hair of slack
  // so oracle tables built in floating point are never rejected.
  if (std::abs(value) > 1.0 + 1e-9)
    throw std::invalid_argument("MomentTable::set: moment outside [-1, 1]");
  if (dense_)
    flat_[mask] = value;
  else
    map_[mask] = value;
}

void MomentTable::record_query(int degree) const {
  int seen = query_log_->load(std::memory_order_relaxed);
  while (degree > seen &&
         !query_log_->compare_exchange_weak(seen, degree, std::memory_order_relaxed)) {
  }
}

double MomentTable::query(std::uint64_t mask) const {
  check_key_range(mask, p_, "MomentTable::query");
  const int deg = std::popcount(mask);
  record_query(deg);
  if (deg > max_degree_)
    throw MissingMomentError("moment of degree " + std::to_string(deg) + " requested (key \"" +
                             MonomialKey(mask).str() + "\") but the table only holds degree <= " +
                             std::to_string(max_degree_));
  if (dense_) {
    const double v = flat_[mask];
    if (std::isnan(v))
      throw MissingMomentError("moment \"" + MonomialKey(mask).str() + "\" is absent from the table");
    return v;
  }
  const auto it = map_.find(mask);
  if (it == map_.end())
    throw MissingMomentError("moment \"" + MonomialKey(mask).str() + "\" is absent from the table");
  return it->second;
}

bool MomentTable::contains(std::uint64_t mask) const {
  if (p_ < 64 && (mask >> p_) != 0) return false;
  if (std::popcount(mask) > max_degree_) return false;
  if (dense_) return !std::isnan(flat_[mask]);
  return map_.count(mask) != 0;
}

int MomentTable::max_queried_degree() const { return query_log_->load(); }

void MomentTable::reset_query_log() const { query_log_->store(-1); }

std::vector<std::pair<std::uint64_t, double>> MomentTable::entries() const {
  std::vector<std::pair<std::uint64_t, double>> out;
  if (dense_) {
    for (std::uint64_t mask = 0; mask < flat_.size(); ++mask)
      if (!std::isnan(flat_[mask])) out.emplace_back(mask, flat_[mask]);
  } else {
    out.assign(map_.begin(), map_.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const int da = std::popcount(a.first), db = std::popcount(b.first);
    return da != db ? da < db : a.first < b.first;
  });
  return out;
}

std::size_t MomentTable::size() const {
  if (!dense_) return map_.size();
  std::size_t c = 0;
  for (double v : flat_)
    if (!std::isnan(v)) ++c;
  return c;
}

namespace {

// Accumulates, for one row of spins, the product over every subset of size
// <= remaining starting at index `from`.
void accumulate_subsets(const std::int8_t* row, int p, int from, int remaining,
                        std::uint64_t mask, double prod,
                        std::unordered_map<std::uint64_t, double>& acc) {
  acc[mask] += prod;
  if (remaining == 0) return;
  for (int j = from; j < p; ++j)
    accumulate_subsets(row, p, j + 1, remaining - 1, mask | (std::uint64_t{1} << j),
                       prod * row[j], acc);
}

void for_each_key(int p, int from, int remaining, std::uint64_t mask,
                  const std::function<void(std::uint64_t)>& f) {
  f(mask);
  if (remaining == 0) return;
  for (int j = from; j < p; ++j)
    for_each_key(p, j + 1, remaining - 1, mask | (std::uint64_t{1} << j), f);
}

}  // namespace

MomentTable build_moments(const Dataset& data, int max_degree) {
  const int p = data.p;
  if (data.n < 1) throw std::invalid_argument("build_moments: dataset is empty");
  if (data.spins.size() != static_cast<std::size_t>(data.n) * p)
    throw std::invalid_argument("build_moments: dataset shape mismatch");
  MomentTable table(p, max_degree, data.n);
  const double inv_n = 1.0 / static_cast<double>(data.n);

  if (p <= kDenseLimit) {
    // Histogram the configurations, then one transform yields every moment.
    std::vector<double> counts(std::size_t{1} << p, 0.0);
    for (std::int64_t t = 0; t < data.n; ++t) {
      const std::int8_t* row = data.spins.data() + t * p;
      std::uint64_t idx = 0;
      for (int i = 0; i < p; ++i)
        if (row[i] < 0) idx |= std::uint64_t{1} << i;
      counts[idx] += 1.0;
    }
    fwht_inplace(counts);
    for (std::uint64_t mask = 0; mask < counts.size(); ++mask)
      if (std::popcount(mask) <= max_degree) table.set(mask, counts[mask] * inv_n);
    return table;
  }

  std::unordered_map<std::uint64_t, double> acc;
  for (std::int64_t t = 0; t < data.n; ++t)
    accumulate_subsets(data.spins.data() + t * p, p, 0, max_degree, 0, 1.0, acc);
  for (const auto& [mask, sum] : acc) table.set(mask, sum * inv_n);
  return table;
}

MomentTable exact_table(const IsingModel& m, int max_degree) {
  const int p = m.p();
  MomentTable table(p, max_degree, kOracleN);
  if (p <= 20) {
    std::vector<double> probs = exact_distribution(m);
    fwht_inplace(probs);
    for (std::uint64_t mask = 0; mask < probs.size(); ++mask)
      if (std::popcount(mask) <= max_degree) table.set(mask, probs[mask]);
    return table;
  }
  for_each_key(p, 0, max_degree, 0,
               [&](std::uint64_t mask) { table.set(mask, exact_moment(m, mask)); });
  return table;
}

}  // namespace iscreen
