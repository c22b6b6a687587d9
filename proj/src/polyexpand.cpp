#include "iscreen/polyexpand.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iscreen {

namespace {

constexpr int kDensePolyLimit = 16;

void check_mask(std::uint64_t mask, int p) {
  if (p < 64 && (mask >> p) != 0)
    throw std::invalid_argument("MultilinearPoly: monomial references spins outside the model");
}

}  // namespace

MultilinearPoly::MultilinearPoly(int p, bool force_sparse)
    : p_(p), dense_(p <= kDensePolyLimit && !force_sparse) {
  if (p < 1 || p > 63) throw std::invalid_argument("MultilinearPoly: p must be in [1, 63]");
  if (dense_) flat_.assign(std::size_t{1} << p, 0.0);
}

void MultilinearPoly::add_term(std::uint64_t mask, double c) {
  check_mask(mask, p_);
  if (dense_) {
    flat_[mask] += c;
  } else {
    auto [it, inserted] = map_.emplace(mask, c);
    if (!inserted) it->second += c;
  }
}

double MultilinearPoly::coeff(std::uint64_t mask) const {
  check_mask(mask, p_);
  if (dense_) return flat_[mask];
  const auto it = map_.find(mask);
  return it == map_.end() ? 0.0 : it->second;
}

void MultilinearPoly::add_poly(const MultilinearPoly& other) {
  if (other.p_ != p_) throw std::invalid_argument("MultilinearPoly: mixed sizes");
  for (const auto& [mask, c] : other.terms()) add_term(mask, c);
}

void MultilinearPoly::scale(double s) {
  if (dense_) {
    for (double& c : flat_) c *= s;
  } else {
    for (auto& [mask, c] : map_) c *= s;
  }
}

void MultilinearPoly::mul_linear_reduce(
    const std::vector<std::pair<std::uint64_t, double>>& form, double scale) {
  for (const auto& [mask, c] : form) check_mask(mask, p_);
  if (dense_) {
    std::vector<double> next(flat_.size(), 0.0);
    for (std::uint64_t mask = 0; mask < flat_.size(); ++mask) {
      const double c = flat_[mask];
      if (c == 0.0) continue;
      for (const auto& [fmask, fc] : form) next[mask ^ fmask] += c * fc * scale;
    }
    flat_.swap(next);
  } else {
    std::unordered_map<std::uint64_t, double> next;
    next.reserve(map_.size() * form.size());
    for (const auto& [mask, c] : map_)
      for (const auto& [fmask, fc] : form) next[mask ^ fmask] += c * fc * scale;
    map_.swap(next);
  }
  drop_small(kDropTol);
}

void MultilinearPoly::drop_small(double tol) {
  if (dense_) {
    for (double& c : flat_)
      if (std::abs(c) < tol) c = 0.0;
  } else {
    for (auto it = map_.begin(); it != map_.end();)
      it = std::abs(it->second) < tol ? map_.erase(it) : std::next(it);
  }
}

double MultilinearPoly::l1_norm() const {
  double s = 0.0;
  if (dense_) {
    for (double c : flat_) s += std::abs(c);
  } else {
    for (const auto& [mask, c] : map_) s += std::abs(c);
  }
  return s;
}

int MultilinearPoly::degree() const {
  int d = -1;
  if (dense_) {
    for (std::uint64_t mask = 0; mask < flat_.size(); ++mask)
      if (flat_[mask] != 0.0) d = std::max(d, std::popcount(mask));
  } else {
    for (const auto& [mask, c] : map_)
      if (c != 0.0) d = std::max(d, std::popcount(mask));
  }
  return d;
}

std::size_t MultilinearPoly::term_count() const { return terms().size(); }

std::vector<std::pair<std::uint64_t, double>> MultilinearPoly::terms() const {
  std::vector<std::pair<std::uint64_t, double>> out;
  if (dense_) {
    for (std::uint64_t mask = 0; mask < flat_.size(); ++mask)
      if (flat_[mask] != 0.0) out.emplace_back(mask, flat_[mask]);
  } else {
    for (const auto& [mask, c] : map_)
      if (c != 0.0) out.emplace_back(mask, c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const int da = std::popcount(a.first), db = std::popcount(b.first);
    return da != db ? da < db : a.first < b.first;
  });
  return out;
}

std::vector<std::pair<std::uint64_t, double>> local_energy_form(const LocalParams& lp) {
  if (lp.node < 0 || lp.node >= lp.p)
    throw std::invalid_argument("local_energy_form: node out of range");
  std::vector<std::pair<std::uint64_t, double>> form;
  const std::uint64_t ubit = std::uint64_t{1} << lp.node;
  if (lp.field != 0.0) form.emplace_back(ubit, lp.field);
  for (int v = 0; v < lp.p; ++v) {
    if (v == lp.node) continue;
    const double c = lp.coupling_to(v);
    if (c != 0.0) form.emplace_back(ubit | (std::uint64_t{1} << v), c);
  }
  return form;
}

std::vector<MultilinearPoly> taylor_term_polys(const LocalParams& lp, int d,
                                               bool force_sparse) {
  if (d < 0) throw std::invalid_argument("taylor_term_polys: degree must be >= 0");
  const auto form = local_energy_form(lp);
  std::vector<MultilinearPoly> out;
  out.reserve(d + 1);
  MultilinearPoly pk(lp.p, force_sparse);
  pk.add_term(0, 1.0);
  out.push_back(pk);
  for (int k = 1; k <= d; ++k) {
    pk.mul_linear_reduce(form, -1.0 / k);
    out.push_back(pk);
  }
  return out;
}

MultilinearPoly taylor_screen_poly(const LocalParams& lp, int d, bool force_sparse) {
  if (d < 0) throw std::invalid_argument("taylor_screen_poly: degree must be >= 0");
  const auto form = local_energy_form(lp);
  MultilinearPoly q(lp.p, force_sparse);
  q.add_term(0, 1.0);
  MultilinearPoly pk(lp.p, force_sparse);
  pk.add_term(0, 1.0);
  for (int k = 1; k <= d; ++k) {
    pk.mul_linear_reduce(form, -1.0 / k);
    q.add_poly(pk);
  }
  return q;
}

namespace {

// Per-call memoization of table lookups; the table's own query log still
// sees every distinct key once.
class QueryCache {
 public:
  explicit QueryCache(const MomentTable& t) : t_(t), dense_(t.p() <= kDensePolyLimit) {
    if (dense_)
      flat_.assign(std::size_t{1} << t.p(), std::numeric_limits<double>::quiet_NaN());
  }

  double get(std::uint64_t mask) {
    if (dense_) {
      double& slot = flat_[mask];
      if (std::isnan(slot)) slot = t_.query(mask);
      return slot;
    }
    const auto it = map_.find(mask);
    if (it != map_.end()) return it->second;
    const double v = t_.query(mask);
    map_.emplace(mask, v);
    return v;
  }

 private:
  const MomentTable& t_;
  bool dense_;
  std::vector<double> flat_;
  std::unordered_map<std::uint64_t, double> map_;
};

void check_table(const LocalParams& lp, const MomentTable& table, const char* what) {
  if (table.p() != lp.p)
    throw std::invalid_argument(std::string(what) + ": table and parameters disagree on p");
}

}  // namespace

double surrogate_loss(const LocalParams& lp, int d, const MomentTable& table) {
  check_table(lp, table, "surrogate_loss");
  const MultilinearPoly q = taylor_screen_poly(lp, d);
  QueryCache cache(table);
  double loss = 0.0;
  for (const auto& [mask, c] : q.terms()) loss += c * cache.get(mask);
  return loss;
}

std::vector<double> approx_gradient(const LocalParams& lp, int d, const MomentTable& table) {
  check_table(lp, table, "approx_gradient");
  const MultilinearPoly q = taylor_screen_poly(lp, d);
  QueryCache cache(table);
  const std::uint64_t ubit = std::uint64_t{1} << lp.node;
  std::vector<double> grad(lp.p, 0.0);
  for (const auto& [mask, c] : q.terms()) {
    const std::uint64_t shifted = mask ^ ubit;
    grad[lp.node] -= c * cache.get(shifted);
    for (int v = 0; v < lp.p; ++v) {
      if (v == lp.node) continue;
      grad[v] -= c * cache.get(shifted ^ (std::uint64_t{1} << v));
    }
  }
  return grad;
}

double approx_field_derivative(const LocalParams& lp, int d, const MomentTable& table) {
  check_table(lp, table, "approx_field_derivative");
  const MultilinearPoly q = taylor_screen_poly(lp, d);
  QueryCache cache(table);
  const std::uint64_t ubit = std::uint64_t{1} << lp.node;
  double df = 0.0;
  for (const auto& [mask, c] : q.terms()) df -= c * cache.get(mask ^ ubit);
  return df;
}

int required_table_degree_couplings(int d, int p) {
  if (d < 0) throw std::invalid_argument("required_table_degree_couplings: degree must be >= 0");
  return std::min(p, d + 2 - (d % 2));
}

int required_table_degree_fields(int d, int p) {
  if (d < 0) throw std::invalid_argument("required_table_degree_fields: degree must be >= 0");
  return std::min(p, d + 1 - (d % 2));
}

}  // namespace iscreen
