#pragma once

#include <span>
#include <utility>
#include <vector>

#include "eot/instance.hpp"

namespace eot {

/// Regularization strength, strictly positive and finite.
class Epsilon {
 public:
  explicit Epsilon(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Dual variable aligned with one measure's atoms.
using Potential = std::vector<double>;

struct PotentialPair {
  Potential u;
  Potential v;
};

/// Log-domain soft-min kernel shared by every transform in the library:
///
///   out[r] = -eps * log sum_k exp(log_weights[k] + (potential[k] - c(r, k)) / eps)
///
/// with c(r, k) = cost[r * row_stride + k * col_stride]. Infinite costs
/// contribute nothing. The inner sum runs in increasing k with compensated
/// accumulation after subtracting the per-output maximum, so each out[r] is
/// independent of `threads`. Throws AllTermsVanish if every term of some
/// output is zero.
void soft_min_transform(std::span<const double> cost, std::size_t row_stride,
                        std::size_t col_stride, std::span<const double> log_weights,
                        std::span<const double> potential, double eps, std::span<double> out,
                        unsigned threads = 1);

/// (c,eps)-transform of u (on mu, the row measure) into a potential on the
/// column measure.
Potential ceps_transform(const Potential& u, const CostMatrix& cost, const DiscreteMeasure& mu,
                         Epsilon eps, unsigned threads = 1);

/// (c,eps)-transform of v (on nu, the column measure) into a potential on the
/// row measure.
Potential ceps_transform_columns(const Potential& v, const CostMatrix& cost,
                                 const DiscreteMeasure& nu, Epsilon eps, unsigned threads = 1);

/// Total mass sum_ij mu_i nu_j exp((u_i + v_j - c_ij) / eps) of the Gibbs
/// plan. Throws Overflow when the sum leaves the double range.
double gibbs_mass(const Potential& u, const Potential& v, const CostMatrix& cost,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps);

/// D_eps(u, v) = <u, mu> + <v, nu> - eps * gibbs_mass + eps.
double dual_value(const Potential& u, const Potential& v, const CostMatrix& cost,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps);

/// <u, mu> + <v, nu>, valid only when v is the transform of u (checked to
/// 1e-10, NotATransformPair otherwise).
double simple_dual_value(const Potential& u, const Potential& v, const CostMatrix& cost,
                         const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps);

/// Shift/transform construction that turns any pair with nonnegative dual
/// value into one bounded by K in sup norm, with nonnegative integrals and
/// no smaller dual value:
///   a0 = D(u, u^T)/2 - <u, mu>,  u_bar = u + a0,  v_bar = u^T - a0,
///   u_out = v_bar^T,  v_out = u_out^T.
/// Throws NegativeDualValue when D(u, v) < 0.
PotentialPair normalize_pair(const Potential& u, const Potential& v, const CostMatrix& cost,
                             const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps);

/// Shifts (u + a, v - a) so that <u, mu> = <v, nu>. Leaves D_eps and the
/// Gibbs plan unchanged.
PotentialPair split_evenly(const Potential& u, const Potential& v, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu);

/// Requires finite entries and matching length.
void check_potential(std::span<const double> p, std::size_t expected_size, const char* what);

}  // namespace eot
