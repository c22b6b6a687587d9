#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"

namespace iscreen {

// Coefficients whose magnitude falls below this after a multiplication are
// removed from the polynomial.
inline constexpr double kDropTol = 1e-15;

// Multilinear polynomial in the spins: a map from monomial bit masks to real
// coefficients.  Spins square to one, so products of monomials reduce by
// symmetric difference of their masks.  For p <= 16 the coefficients live in
// a flat array of length 2^p; larger p (or force_sparse) uses a hash map.
// Both paths compute identical values.
class MultilinearPoly {
 public:
  explicit MultilinearPoly(int p, bool force_sparse = false);

  int p() const { return p_; }
  bool dense() const { return dense_; }

  void add_term(std::uint64_t mask, double c);
  double coeff(std::uint64_t mask) const;
  void add_poly(const MultilinearPoly& other);
  void scale(double s);

  // self <- scale * self * sum_j form[j].coeff * monomial(form[j].mask),
  // then coefficients below kDropTol are dropped.
  void mul_linear_reduce(const std::vector<std::pair<std::uint64_t, double>>& form,
                         double scale = 1.0);

  void drop_small(double tol = kDropTol);
  double l1_norm() const;
  int degree() const;  // highest degree with nonzero coefficient; -1 if empty
  std::size_t term_count() const;

  // Nonzero terms ordered by (degree, mask).
  std::vector<std::pair<std::uint64_t, double>> terms() const;

 private:
  int p_;
  bool dense_;
  std::vector<double> flat_;
  std::unordered_map<std::uint64_t, double> map_;
};

// The local energy of the node as a linear form in monomials: the field
// enters on monomial {node} and each coupling c_v on monomial {node, v}.
std::vector<std::pair<std::uint64_t, double>> local_energy_form(const LocalParams& lp);

// Terms P_0, ..., P_d of the Taylor expansion of exp(-local energy):
// P_0 = 1 and P_k = P_{k-1} * (local energy) * (-1/k).
std::vector<MultilinearPoly> taylor_term_polys(const LocalParams& lp, int d,
                                               bool force_sparse = false);

// Degree-d surrogate Q = sum_k P_k whose expectation approximates the
// node-wise loss E[exp(-local energy)].
MultilinearPoly taylor_screen_poly(const LocalParams& lp, int d,
                                   bool force_sparse = false);

// Expected value of the surrogate under the table's distribution.
double surrogate_loss(const LocalParams& lp, int d, const MomentTable& table);

// Gradient of the surrogate loss with respect to the local parameters, in
// the dense layout of LocalParams::to_vector(): slot lp.node holds the field
// derivative and slot v the derivative for the coupling to v.  Table lookups
// are memoized within the call.
std::vector<double> approx_gradient(const LocalParams& lp, int d, const MomentTable& table);

// Derivative of the surrogate loss with respect to the field alone, used
// when the couplings are held fixed.
double approx_field_derivative(const LocalParams& lp, int d, const MomentTable& table);

// Highest moment degree the full gradient pass can request.
int required_table_degree_couplings(int d, int p);

// Highest moment degree a field-only pass can request.
int required_table_degree_fields(int d, int p);

}  // namespace iscreen
