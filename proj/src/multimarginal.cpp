#include "eot/multimarginal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "eot/error.hpp"
#include "eot/numeric.hpp"

namespace eot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shapes(std::span<const Potential> potentials, const CostTensor& cost,
                  std::span<const DiscreteMeasure> measures, std::size_t skip) {
  if (measures.size() < 2 || cost.rank() != measures.size() || potentials.size() != measures.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need N >= 2 potentials, measures and a rank-N cost");
  }
  for (std::size_t a = 0; a < measures.size(); ++a) {
    if (cost.extent(a) != measures[a].size()) {
      throw Error(ErrorCode::DimensionMismatch, "cost extent differs from atom count");
    }
    if (a != skip) check_potential(potentials[a], measures[a].size(), "potential");
  }
}

void advance(std::vector<std::size_t>& idx, const std::vector<std::size_t>& shape) {
  for (std::size_t a = shape.size(); a-- > 0;) {
    if (++idx[a] < shape[a]) return;
    idx[a] = 0;
  }
}

// Exponent of one tuple, log of its Gibbs weight, with slot `skip` left out
// (skip == N keeps every slot). Accumulation runs in increasing axis order.
double tuple_exponent(std::span<const Potential> potentials, std::span<const DiscreteMeasure> measures,
                      const std::vector<std::size_t>& idx, double c, double eps, std::size_t skip) {
  double lw = 0.0, su = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    if (a == skip) continue;
    lw += measures[a].log_weights()[idx[a]];
    su += potentials[a][idx[a]];
  }
  return lw + (su - c) / eps;
}

void transform_into(std::span<const Potential> potentials, const CostTensor& cost,
                    std::span<const DiscreteMeasure> measures, double eps, std::size_t slot,
                    Potential& out) {
  const std::size_t m = measures[slot].size();
  std::vector<double> top(m, kNegInf);
  std::vector<std::size_t> idx(cost.rank(), 0);
  for (std::size_t flat = 0; flat < cost.size(); ++flat, advance(idx, cost.shape())) {
    const double c = cost[flat];
    if (!std::isfinite(c)) continue;
    top[idx[slot]] = std::max(top[idx[slot]], tuple_exponent(potentials, measures, idx, c, eps, slot));
  }
  std::vector<CompensatedSum> acc(m);
  std::fill(idx.begin(), idx.end(), 0);
  for (std::size_t flat = 0; flat < cost.size(); ++flat, advance(idx, cost.shape())) {
    const double c = cost[flat];
    if (!std::isfinite(c)) continue;
    const std::size_t k = idx[slot];
    acc[k].add(std::exp(tuple_exponent(potentials, measures, idx, c, eps, slot) - top[k]));
  }
  out.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (top[k] == kNegInf) {
      throw Error(ErrorCode::AllTermsVanish, "every cost entry of some output atom is infinite");
    }
    out[k] = -eps * (top[k] + std::log(acc[k].value()));
  }
}

double linear_part(std::span<const Potential> potentials, std::span<const DiscreteMeasure> measures) {
  double s = 0.0;
  for (std::size_t a = 0; a < measures.size(); ++a) {
    s += compensated_dot(potentials[a], measures[a].weights());
  }
  return s;
}

}  // namespace

double mm_dual_value(std::span<const Potential> potentials, const CostTensor& cost,
                     std::span<const DiscreteMeasure> measures, Epsilon eps) {
  const std::size_t none = measures.size();
  check_shapes(potentials, cost, measures, none);
  const double e = eps.value();
  std::vector<double> terms(cost.size(), kNegInf);
  double top = kNegInf;
  std::vector<std::size_t> idx(cost.rank(), 0);
  for (std::size_t flat = 0; flat < cost.size(); ++flat, advance(idx, cost.shape())) {
    const double c = cost[flat];
    if (!std::isfinite(c)) continue;
    terms[flat] = tuple_exponent(potentials, measures, idx, c, e, none);
    top = std::max(top, terms[flat]);
  }
  double mass = 0.0;
  if (top != kNegInf) {
    CompensatedSum acc;
    for (double t : terms) acc.add(std::exp(t - top));
    mass = std::exp(top) * acc.value();
    if (!std::isfinite(mass) || !std::isfinite(e * mass)) {
      throw Error(ErrorCode::Overflow, "exponential sum of the dual functional overflows");
    }
  }
  return linear_part(potentials, measures) - e * mass + e;
}

Potential mm_transform(std::span<const Potential> potentials, const CostTensor& cost,
                       std::span<const DiscreteMeasure> measures, Epsilon eps, std::size_t slot) {
  if (slot >= measures.size()) throw Error(ErrorCode::InvalidArgument, "slot out of range");
  check_shapes(potentials, cost, measures, slot);
  Potential out;
  transform_into(potentials, cost, measures, eps.value(), slot, out);
  return out;
}

MultiPotentials mm_split_evenly(std::span<const Potential> potentials,
                                std::span<const DiscreteMeasure> measures) {
  const std::size_t n = measures.size();
  std::vector<double> integrals(n);
  for (std::size_t a = 0; a < n; ++a) integrals[a] = compensated_dot(potentials[a], measures[a].weights());
  const double mean = compensated_sum(integrals) / static_cast<double>(n);
  MultiPotentials out(potentials.begin(), potentials.end());
  for (std::size_t a = 0; a < n; ++a) {
    const double shift = mean - integrals[a];
    for (double& x : out[a]) x += shift;
  }
  return out;
}

MultiPotentials mm_normalize(std::span<const Potential> potentials, const CostTensor& cost,
                             std::span<const DiscreteMeasure> measures, Epsilon eps) {
  const std::size_t n = measures.size();
  check_shapes(potentials, cost, measures, n);
  MultiPotentials u(potentials.begin(), potentials.end());
  if (mm_dual_value(u, cost, measures, eps) < 0.0) {
    throw Error(ErrorCode::NegativeDualValue, "normalization needs potentials with D >= 0");
  }
  const Potential last = mm_transform(u, cost, measures, eps, n - 1);
  for (std::size_t k = 0; k < last.size(); ++k) {
    if (std::fabs(last[k] - u[n - 1][k]) > 1e-10 * std::max(1.0, std::fabs(last[k]))) {
      u[n - 1] = last;
      break;
    }
  }
  double level = mm_dual_value(u, cost, measures, eps);

  // Cascade: slot k gets -sum_{j<k} a_j/(N-j) + a_k, the last slot only the
  // accumulated offset; the constants sum to zero.
  double offset = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    for (double& x : u[k]) x -= offset;
    const double a = level / 2.0 - compensated_dot(u[k], measures[k].weights());
    for (double& x : u[k]) x += a;
    offset += a / static_cast<double>(n - 1 - k);
    level /= 2.0;
  }
  for (double& x : u[n - 1]) x -= offset;

  for (int sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t k = 0; k < n; ++k) transform_into(u, cost, measures, eps.value(), k, u[k]);
  }
  return u;
}

CouplingPlan mm_primal_plan(std::span<const Potential> potentials, const CostTensor& cost,
                            std::span<const DiscreteMeasure> measures, Epsilon eps) {
  const std::size_t none = measures.size();
  check_shapes(potentials, cost, measures, none);
  CouplingPlan plan{cost.shape(), std::vector<double>(cost.size(), 0.0)};
  std::vector<std::size_t> idx(cost.rank(), 0);
  for (std::size_t flat = 0; flat < cost.size(); ++flat, advance(idx, cost.shape())) {
    const double c = cost[flat];
    if (!std::isfinite(c)) continue;
    plan.weights[flat] = std::exp(tuple_exponent(potentials, measures, idx, c, eps.value(), none));
  }
  return plan;
}

namespace {

struct StageResult {
  MultiPotentials u;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

StageResult run_mm_stage(const Instance& inst, double eps, MultiPotentials u, const SolveOptions& opts,
                         bool final_stage) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto& measures = inst.measures();
  const CostTensor& cost = inst.cost();
  const std::size_t n = measures.size();
  const std::size_t none = n;

  transform_into(u, cost, measures, eps, n - 1, u[n - 1]);
  MultiPotentials next = u;
  StageResult res;
  double delta = 0.0;
  std::size_t iter = 0;
  std::vector<std::vector<double>> marg(n);
  for (;;) {
    transform_into(u, cost, measures, eps, 0, next[0]);
    const DiscreteMeasure& first = measures[0];
    marg[0].resize(first.size());
    for (std::size_t k = 0; k < first.size(); ++k) {
      marg[0][k] = first.weights()[k] * std::exp((u[0][k] - next[0][k]) / eps);
    }
    if (n > 2) {
      // Middle slots are not pinned by the sweep; sum the Gibbs tensor directly.
      std::vector<std::vector<CompensatedSum>> acc(n);
      for (std::size_t a = 1; a + 1 < n; ++a) acc[a].resize(measures[a].size());
      std::vector<std::size_t> idx(n, 0);
      for (std::size_t flat = 0; flat < cost.size(); ++flat, advance(idx, cost.shape())) {
        const double c = cost[flat];
        if (!std::isfinite(c)) continue;
        const double g = std::exp(tuple_exponent(u, measures, idx, c, eps, none));
        for (std::size_t a = 1; a + 1 < n; ++a) acc[a][idx[a]].add(g);
      }
      for (std::size_t a = 1; a + 1 < n; ++a) {
        marg[a].clear();
        for (const auto& s : acc[a]) marg[a].push_back(s.value());
      }
    }
    marg[n - 1].assign(measures[n - 1].weights().begin(), measures[n - 1].weights().end());

    double residual = 0.0;
    for (std::size_t a = 0; a + 1 < n; ++a) {
      for (std::size_t k = 0; k < marg[a].size(); ++k) {
        residual = std::max(residual, std::fabs(marg[a][k] - measures[a].weights()[k]));
      }
    }
    const double mass = compensated_sum(marg[0]);
    const double dual = linear_part(u, measures) - eps * mass + eps;
    double primal = 0.0;
    for (std::size_t a = 0; a < n; ++a) primal += compensated_dot(u[a], marg[a]);
    if (final_stage) {
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      res.trace.push_back({iter, dual, primal, primal - dual, residual, ms});
      if (opts.on_iterate) opts.on_iterate(iter, u);
    }
    if (iter >= 1 && delta <= opts.tol_potential && residual <= opts.tol_marginal) {
      res.converged = true;
      break;
    }
    if (iter >= opts.max_iters) break;
    // Gauss-Seidel sweep: slot k sees the fresh values of slots < k.
    for (std::size_t k = 1; k < n; ++k) {
      MultiPotentials mixed(n);
      for (std::size_t a = 0; a < n; ++a) mixed[a] = a < k ? next[a] : u[a];
      transform_into(mixed, cost, measures, eps, k, next[k]);
    }
    delta = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t k = 0; k < u[a].size(); ++k) delta = std::max(delta, std::fabs(next[a][k] - u[a][k]));
    }
    std::swap(u, next);
    ++iter;
  }
  res.u = std::move(u);
  res.iterations = iter;
  return res;
}

}  // namespace

SolveReport mm_sinkhorn(const Instance& instance, Epsilon eps, const SolveOptions& opts) {
  opts.validate();
  const auto& measures = instance.measures();
  const std::size_t n = measures.size();
  std::vector<double> stages;
  for (double e : opts.eps_schedule) {
    if (e > eps.value()) stages.push_back(e);
  }
  stages.push_back(eps.value());

  SolveReport report;
  report.epsilon = eps.value();
  report.K = instance.K();
  MultiPotentials u(n);
  for (std::size_t a = 0; a < n; ++a) u[a].assign(measures[a].size(), 0.0);
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const bool last = s + 1 == stages.size();
    StageResult st = run_mm_stage(instance, stages[s], u, opts, last);
    report.total_iterations += st.iterations;
    u = mm_split_evenly(st.u, measures);
    if (last) {
      report.iterations = st.iterations;
      report.converged = st.converged;
      report.trace = std::move(st.trace);
    }
  }
  report.potentials = u;
  report.plan = mm_primal_plan(u, instance.cost(), measures, eps);
  report.dual_value = mm_dual_value(u, instance.cost(), measures, eps);
  report.primal_value = primal_value(report.plan, instance.cost(), measures, eps);
  report.gap = report.primal_value - report.dual_value;
  report.marginal_residual = marginal_residual(report.plan, measures);
  return report;
}

}  // namespace eot
