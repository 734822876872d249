#pragma once

#include <span>
#include <vector>

#include "eot/dual.hpp"
#include "eot/instance.hpp"

namespace eot {

/// Nonnegative weights over atom-index tuples, same layout as CostTensor.
struct CouplingPlan {
  std::vector<std::size_t> shape;
  std::vector<double> weights;

  double at(std::size_t i, std::size_t j) const noexcept { return weights[i * shape[1] + j]; }
};

/// gamma_ij = mu_i nu_j exp((u_i + v_j - c_ij) / eps); exactly 0 where c is infinite.
CouplingPlan primal_plan(const Potential& u, const Potential& v, const CostMatrix& cost,
                         const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps);

/// Marginal sums of a plan, one vector per axis.
std::vector<std::vector<double>> plan_marginals(const CouplingPlan& plan);

/// Largest absolute deviation of any marginal sum from its target weight.
double marginal_residual(const CouplingPlan& plan, std::span<const DiscreteMeasure> measures);
double marginal_residual(const CouplingPlan& plan, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu);

/// KL divergence sum gamma log(gamma / prod weights), 0 log 0 = 0. No
/// trailing -1: with this convention C_eps equals D_eps at the optimum.
double relative_entropy(const CouplingPlan& plan, std::span<const DiscreteMeasure> measures);

/// sum c * gamma; +inf if positive mass sits on an infinite cost.
double transport_cost(const CouplingPlan& plan, const CostTensor& cost);

/// C_eps(gamma) = transport_cost + eps * relative_entropy.
double primal_value(const CouplingPlan& plan, const CostTensor& cost,
                    std::span<const DiscreteMeasure> measures, Epsilon eps);

/// C_eps(plan) - D_eps(u, v). Weak duality makes this >= 0 for feasible plans.
double duality_gap(const Potential& u, const Potential& v, const CouplingPlan& plan,
                   const Instance& instance, Epsilon eps);

}  // namespace eot
