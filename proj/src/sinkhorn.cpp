#include "eot/sinkhorn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "eot/error.hpp"
#include "eot/numeric.hpp"

namespace eot {

void SolveOptions::validate() const {
  if (!(tol_potential > 0.0) || !(tol_marginal > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be > 0");
  }
  if (max_iters == 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    if (!(eps_schedule[k] > 0.0) || !std::isfinite(eps_schedule[k])) {
      throw Error(ErrorCode::InvalidArgument, "epsilon schedule entries must be > 0");
    }
    if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "epsilon schedule must be strictly decreasing");
    }
  }
}

namespace {

double sup_change(const Potential& a, const Potential& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::fabs(a[k] - b[k]));
  return d;
}

struct StageResult {
  Potential u;
  Potential v;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

// Rows of the cost (c_i.) drive u <- v^T, rows of the transpose drive v <- u^T.
StageResult run_stage(const CostMatrix& cost, const CostMatrix& cost_t, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu, double eps, Potential u, const SolveOptions& opts,
                      bool final_stage) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const std::size_t n = mu.size(), m = nu.size();

  auto to_v = [&](const Potential& from, Potential& out) {
    soft_min_transform(cost_t.data(), n, 1, mu.log_weights(), from, eps, out, opts.threads);
  };
  auto to_u = [&](const Potential& from, Potential& out) {
    soft_min_transform(cost.data(), m, 1, nu.log_weights(), from, eps, out, opts.threads);
  };

  StageResult res;
  Potential v(m), u_next(n), v_next(m), rows(n);
  to_v(u, v);
  double delta = 0.0;
  std::size_t iter = 0;
  for (;;) {
    to_u(v, u_next);
    // Row sums of the Gibbs plan of (u, v); its column sums equal nu because v = u^T.
    for (std::size_t i = 0; i < n; ++i) rows[i] = mu.weights()[i] * std::exp((u[i] - u_next[i]) / eps);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::fabs(rows[i] - mu.weights()[i]));
    const double mass = compensated_sum(rows);
    const double linear = compensated_dot(u, mu.weights()) + compensated_dot(v, nu.weights());
    const double dual = linear - eps * mass + eps;
    const double primal = compensated_dot(u, rows) + compensated_dot(v, nu.weights());
    if (final_stage) {
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      res.trace.push_back({iter, dual, primal, primal - dual, residual, ms});
      if (opts.on_iterate) {
        const Potential both[] = {u, v};
        opts.on_iterate(iter, both);
      }
    }
    if (iter >= 1 && delta <= opts.tol_potential && residual <= opts.tol_marginal) {
      res.converged = true;
      break;
    }
    if (iter >= opts.max_iters) break;
    to_v(u_next, v_next);
    delta = std::max(sup_change(u_next, u), sup_change(v_next, v));
    std::swap(u, u_next);
    std::swap(v, v_next);
    ++iter;
  }
  res.u = std::move(u);
  res.v = std::move(v);
  res.iterations = iter;
  return res;
}

}  // namespace

SolveReport sinkhorn_solve(const Instance& instance, Epsilon eps, const SolveOptions& opts) {
  if (instance.num_marginals() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "sinkhorn_solve needs exactly two marginals");
  }
  return sinkhorn_solve(instance, eps, opts, Potential(instance.measure(0).size(), 0.0));
}

SolveReport sinkhorn_solve(const Instance& instance, Epsilon eps, const SolveOptions& opts,
                           const Potential& u_start) {
  if (instance.num_marginals() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "sinkhorn_solve needs exactly two marginals");
  }
  opts.validate();
  const DiscreteMeasure& mu = instance.measure(0);
  const DiscreteMeasure& nu = instance.measure(1);
  check_potential(u_start, mu.size(), "initial u");
  const CostMatrix& cost = instance.cost();
  const CostMatrix cost_t = cost.transposed();

  std::vector<double> stages;
  for (double e : opts.eps_schedule) {
    if (e > eps.value()) stages.push_back(e);
  }
  stages.push_back(eps.value());

  SolveReport report;
  report.epsilon = eps.value();
  report.K = instance.K();
  Potential u = u_start;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const bool last = s + 1 == stages.size();
    StageResult st = run_stage(cost, cost_t, mu, nu, stages[s], u, opts, last);
    report.total_iterations += st.iterations;
    PotentialPair shifted = split_evenly(st.u, st.v, mu, nu);
    u = shifted.u;
    if (last) {
      report.iterations = st.iterations;
      report.converged = st.converged;
      report.trace = std::move(st.trace);
      report.potentials = {std::move(shifted.u), std::move(shifted.v)};
    }
  }
  const Potential& uf = report.potentials[0];
  const Potential& vf = report.potentials[1];
  report.plan = primal_plan(uf, vf, cost, mu, nu, eps);
  report.dual_value = dual_value(uf, vf, cost, mu, nu, eps);
  report.primal_value = primal_value(report.plan, cost, instance.measures(), eps);
  report.gap = report.primal_value - report.dual_value;
  report.marginal_residual = marginal_residual(report.plan, instance.measures());
  return report;
}

}  // namespace eot
