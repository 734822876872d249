#include "eot/primal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eot/error.hpp"
#include "eot/numeric.hpp"

namespace eot {

namespace {

void check_plan_shape(const CouplingPlan& plan, std::span<const DiscreteMeasure> measures) {
  if (plan.shape.size() != measures.size()) {
    throw Error(ErrorCode::DimensionMismatch, "plan rank differs from number of marginals");
  }
  for (std::size_t a = 0; a < measures.size(); ++a) {
    if (plan.shape[a] != measures[a].size()) {
      throw Error(ErrorCode::DimensionMismatch, "plan extent differs from atom count");
    }
  }
}

}  // namespace

CouplingPlan primal_plan(const Potential& u, const Potential& v, const CostMatrix& cost,
                         const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps) {
  if (cost.rank() != 2 || cost.extent(0) != mu.size() || cost.extent(1) != nu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost shape does not match the measures");
  }
  check_potential(u, mu.size(), "u");
  check_potential(v, nu.size(), "v");
  const std::size_t n = mu.size(), m = nu.size();
  CouplingPlan plan{{n, m}, std::vector<double>(n * m, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost.at(i, j);
      if (!std::isfinite(c)) continue;
      plan.weights[i * m + j] = std::exp(mu.log_weights()[i] + nu.log_weights()[j] +
                                         (u[i] + v[j] - c) / eps.value());
    }
  }
  return plan;
}

std::vector<std::vector<double>> plan_marginals(const CouplingPlan& plan) {
  const std::size_t rank = plan.shape.size();
  std::vector<std::vector<CompensatedSum>> acc(rank);
  for (std::size_t a = 0; a < rank; ++a) acc[a].resize(plan.shape[a]);
  std::vector<std::size_t> idx(rank, 0);
  for (double w : plan.weights) {
    for (std::size_t a = 0; a < rank; ++a) acc[a][idx[a]].add(w);
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < plan.shape[a]) break;
      idx[a] = 0;
    }
  }
  std::vector<std::vector<double>> out(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    for (const auto& s : acc[a]) out[a].push_back(s.value());
  }
  return out;
}

double marginal_residual(const CouplingPlan& plan, std::span<const DiscreteMeasure> measures) {
  check_plan_shape(plan, measures);
  const auto marg = plan_marginals(plan);
  double worst = 0.0;
  for (std::size_t a = 0; a < marg.size(); ++a) {
    for (std::size_t k = 0; k < marg[a].size(); ++k) {
      worst = std::max(worst, std::fabs(marg[a][k] - measures[a].weights()[k]));
    }
  }
  return worst;
}

double marginal_residual(const CouplingPlan& plan, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu) {
  const DiscreteMeasure both[] = {mu, nu};
  return marginal_residual(plan, both);
}

double relative_entropy(const CouplingPlan& plan, std::span<const DiscreteMeasure> measures) {
  check_plan_shape(plan, measures);
  const std::size_t rank = plan.shape.size();
  std::vector<std::size_t> idx(rank, 0);
  CompensatedSum acc;
  for (double g : plan.weights) {
    if (g > 0.0) {
      double log_ref = 0.0;
      for (std::size_t a = 0; a < rank; ++a) log_ref += measures[a].log_weights()[idx[a]];
      acc.add(g * (std::log(g) - log_ref));
    }
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < plan.shape[a]) break;
      idx[a] = 0;
    }
  }
  return acc.value();
}

double transport_cost(const CouplingPlan& plan, const CostTensor& cost) {
  if (plan.weights.size() != cost.size()) {
    throw Error(ErrorCode::DimensionMismatch, "plan and cost differ in size");
  }
  CompensatedSum acc;
  for (std::size_t k = 0; k < cost.size(); ++k) {
    const double g = plan.weights[k];
    if (g == 0.0) continue;
    if (!std::isfinite(cost[k])) return std::numeric_limits<double>::infinity();
    acc.add(cost[k] * g);
  }
  return acc.value();
}

double primal_value(const CouplingPlan& plan, const CostTensor& cost,
                    std::span<const DiscreteMeasure> measures, Epsilon eps) {
  const double tc = transport_cost(plan, cost);
  if (!std::isfinite(tc)) return tc;
  return tc + eps.value() * relative_entropy(plan, measures);
}

double duality_gap(const Potential& u, const Potential& v, const CouplingPlan& plan,
                   const Instance& instance, Epsilon eps) {
  if (instance.num_marginals() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "duality_gap is the two-marginal form");
  }
  const double primal = primal_value(plan, instance.cost(), instance.measures(), eps);
  return primal - dual_value(u, v, instance.cost(), instance.measure(0), instance.measure(1), eps);
}

}  // namespace eot
