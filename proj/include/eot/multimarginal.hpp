#pragma once

#include <span>
#include <vector>

#include "eot/dual.hpp"
#include "eot/instance.hpp"
#include "eot/primal.hpp"
#include "eot/sinkhorn.hpp"

namespace eot {

using MultiPotentials = std::vector<Potential>;

/// sum_i <u_i, rho_i> - eps * sum_tuples (prod weights) exp((sum_i u_i - c) / eps) + eps.
double mm_dual_value(std::span<const Potential> potentials, const CostTensor& cost,
                     std::span<const DiscreteMeasure> measures, Epsilon eps);

/// (c,eps)-transform into slot `slot`:
///   out(k) = -eps log sum_{other indices} (prod other weights) exp((sum_{j != slot} u_j - c) / eps).
/// potentials[slot] is ignored and may be empty. Other indices are visited in
/// lexicographic order with the last index fastest.
Potential mm_transform(std::span<const Potential> potentials, const CostTensor& cost,
                       std::span<const DiscreteMeasure> measures, Epsilon eps, std::size_t slot);

/// Constant-shift cascade followed by two transform sweeps. The output has
/// dual value at least that of the input, nonnegative integrals
/// <u_i, rho_i>, and -(N-1)K <= u_i <= K. The last slot is re-transformed
/// first if it is not already the transform of the others. Throws
/// NegativeDualValue when the dual value is negative.
MultiPotentials mm_normalize(std::span<const Potential> potentials, const CostTensor& cost,
                             std::span<const DiscreteMeasure> measures, Epsilon eps);

/// Adds constants summing to zero so every <u_i, rho_i> equals the mean.
MultiPotentials mm_split_evenly(std::span<const Potential> potentials,
                                std::span<const DiscreteMeasure> measures);

/// Gibbs tensor prod(weights) exp((sum u_i - c) / eps), zero on infinite cost.
CouplingPlan mm_primal_plan(std::span<const Potential> potentials, const CostTensor& cost,
                            std::span<const DiscreteMeasure> measures, Epsilon eps);

/// Cyclic N-marginal Sinkhorn: u_1 <- T_1(u_2..u_N), ..., u_N <- T_N(u_1..u_{N-1}),
/// starting from u_i = 0 (i < N) and u_N = T_N(0, .., 0). Stopping and
/// reporting follow sinkhorn_solve; for N = 2 the arithmetic is identical.
SolveReport mm_sinkhorn(const Instance& instance, Epsilon eps, const SolveOptions& opts = {});

}  // namespace eot
