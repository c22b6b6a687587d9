#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iscreen/model.hpp"
#include "iscreen/sampling.hpp"

namespace iscreen {

// Sample-size sentinel marking tables whose values are exact rather than
// empirical averages.
inline constexpr std::int64_t kOracleN = -1;

// A monomial over spins is identified by the subset of participating sites,
// stored as a bit mask (bit i set <=> spin i participates).
struct MonomialKey {
  std::uint64_t mask = 0;

  MonomialKey() = default;
  explicit MonomialKey(std::uint64_t m) : mask(m) {}

  int degree() const { return std::popcount(mask); }

  // Serialized form: ascending indices joined by ';', e.g. "0;3;5".  The
  // empty product is the empty string.
  std::string str() const;
  static MonomialKey parse(const std::string& text, int p);
};

// Reduces a multiset of site indices to its parity set: indices appearing an
// even number of times cancel because spins square to one.
MonomialKey reduce_multiset(const std::vector<int>& indices);

// Two already-reduced keys multiply by symmetric difference.
inline std::uint64_t reduce(std::uint64_t a, std::uint64_t b) { return a ^ b; }

// In-place Walsh-Hadamard transform with +/-1 characters; length must be a
// power of two.  Unnormalized: applying it twice multiplies by the length.
void fwht_inplace(std::vector<double>& a);

// Table of (empirical or exact) moments E[prod_{i in K} sigma_i] for every
// key K of degree at most max_degree.  Copies share the query log so that
// the highest degree ever requested can be audited after a run.
class MomentTable {
 public:
  MomentTable();
  MomentTable(int p, int max_degree, std::int64_t n);

  int p() const { return p_; }
  int max_degree() const { return max_degree_; }
  std::int64_t n() const { return n_; }
  bool is_oracle() const { return n_ == kOracleN; }

  void set(std::uint64_t mask, double value);

  // Looks up a reduced key; records its degree in the shared query log and
  // throws MissingMomentError when the key exceeds the table order.
  double query(std::uint64_t mask) const;

  bool contains(std::uint64_t mask) const;

  // Highest degree seen by query() since construction or the last reset.
  int max_queried_degree() const;
  void reset_query_log() const;

  // All stored (key, value) pairs ordered by (degree, mask).
  std::vector<std::pair<std::uint64_t, double>> entries() const;
  std::size_t size() const;

 private:
  void record_query(int degree) const;

  int p_ = 0;
  int max_degree_ = 0;
  std::int64_t n_ = kOracleN;
  bool dense_ = true;
  std::vector<double> flat_;  // used when p <= 16; absent keys hold NaN
  std::unordered_map<std::uint64_t, double> map_;
  std::shared_ptr<std::atomic<int>> query_log_;
};

// Empirical moments of every monomial of degree <= max_degree.
MomentTable build_moments(const Dataset& data, int max_degree);

// Exact moments under the model's distribution; n is set to the oracle
// sentinel.
MomentTable exact_table(const IsingModel& m, int max_degree);

}  // namespace iscreen
