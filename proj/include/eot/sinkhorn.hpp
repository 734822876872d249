#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "eot/dual.hpp"
#include "eot/instance.hpp"
#include "eot/primal.hpp"

namespace eot {

struct SolveOptions {
  double tol_potential = 1e-10;
  double tol_marginal = 1e-9;
  std::size_t max_iters = 10000;
  /// Decreasing epsilons solved first, each warm-starting the next. Entries
  /// not larger than the target epsilon are skipped.
  std::vector<double> eps_schedule;
  /// Worker threads for transforms; results do not depend on this.
  unsigned threads = 1;
  /// Called once per recorded iterate of the final stage with the raw
  /// (unshifted) potentials.
  std::function<void(std::size_t iter, std::span<const Potential> potentials)> on_iterate;

  /// Throws InvalidArgument on non-positive tolerances or a schedule that is
  /// not strictly decreasing and positive.
  void validate() const;
};

struct TraceRow {
  std::size_t iter = 0;
  double dual = 0.0;
  double primal = 0.0;
  double gap = 0.0;
  double marginal_residual = 0.0;
  double elapsed_ms = 0.0;
};

struct SolveReport {
  double epsilon = 0.0;
  /// One potential per marginal, shifted so every <u_i, rho_i> is equal.
  std::vector<Potential> potentials;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;
  double marginal_residual = 0.0;
  /// Iterations of the final epsilon stage.
  std::size_t iterations = 0;
  /// Iterations summed over all annealing stages.
  std::size_t total_iterations = 0;
  bool converged = false;
  double K = 0.0;
  CouplingPlan plan;
  std::vector<TraceRow> trace;
};

/// Two-marginal Sinkhorn in the log domain. Starting from u = 0, v = u^T it
/// alternates u <- v^T, v <- u^T and stops once the sup-norm change of both
/// potentials is below tol_potential and the plan's marginal residual is below
/// tol_marginal. A run that hits max_iters returns with converged == false.
SolveReport sinkhorn_solve(const Instance& instance, Epsilon eps, const SolveOptions& opts = {});

/// Same as above, starting the first stage from `u_start` instead of zero.
SolveReport sinkhorn_solve(const Instance& instance, Epsilon eps, const SolveOptions& opts,
                           const Potential& u_start);

}  // namespace eot
