#include "eot/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eot/error.hpp"
#include "eot/numeric.hpp"
#include "eot/oracle.hpp"

namespace eot {

RadiusSchedule::RadiusSchedule(std::vector<double> radii) : radii_(std::move(radii)) {
  if (radii_.empty()) throw Error(ErrorCode::InvalidArgument, "radius schedule is empty");
  for (std::size_t k = 0; k < radii_.size(); ++k) {
    if (!(radii_[k] > 0.0) || !std::isfinite(radii_[k])) {
      throw Error(ErrorCode::InvalidArgument, "radii must be finite and > 0");
    }
    if (k > 0 && !(radii_[k] < radii_[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "radii must be strictly decreasing");
    }
  }
}

RadiusSchedule RadiusSchedule::geometric(double first, double ratio, std::size_t count) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "ratio must be in (0, 1)");
  std::vector<double> r(count);
  double x = first;
  for (std::size_t k = 0; k < count; ++k, x *= ratio) r[k] = x;
  return RadiusSchedule(std::move(r));
}

UniformBoxSampler::UniformBoxSampler(double lo, double hi, std::size_t dim) : lo_(lo), hi_(hi), dim_(dim) {
  if (!(hi > lo) || dim == 0) throw Error(ErrorCode::InvalidArgument, "uniform box needs lo < hi, dim >= 1");
}

bool UniformBoxSampler::draw(const Point& center, double radius, std::mt19937_64& rng,
                             std::size_t count, std::vector<Point>& out) const {
  if (center.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "centre has wrong dimension");
  Point lo(dim_), hi(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    lo[d] = std::max(lo_, center[d] - radius);
    hi[d] = std::min(hi_, center[d] + radius);
    if (!(hi[d] > lo[d])) return false;
  }
  Point p(dim_);
  for (std::size_t s = 0; s < count; ++s) {
    for (;;) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) {
        p[d] = lo[d] + (hi[d] - lo[d]) * unit_interval(rng());
        r2 += (p[d] - center[d]) * (p[d] - center[d]);
      }
      if (dim_ == 1 || r2 < radius * radius) break;
    }
    out.push_back(p);
  }
  return true;
}

WeightedGridSampler::WeightedGridSampler(DiscreteMeasure measure) : measure_(std::move(measure)) {}

bool WeightedGridSampler::draw(const Point& center, double radius, std::mt19937_64& rng,
                               std::size_t count, std::vector<Point>& out) const {
  std::vector<std::size_t> inside;
  std::vector<double> cumulative;
  double total = 0.0;
  for (std::size_t k = 0; k < measure_.size(); ++k) {
    const Point& p = measure_.point(k);
    if (p.size() != center.size()) throw Error(ErrorCode::DimensionMismatch, "centre has wrong dimension");
    double r2 = 0.0;
    for (std::size_t d = 0; d < p.size(); ++d) r2 += (p[d] - center[d]) * (p[d] - center[d]);
    if (r2 < radius * radius) {
      inside.push_back(k);
      total += measure_.weights()[k];
      cumulative.push_back(total);
    }
  }
  if (inside.empty()) return false;
  for (std::size_t s = 0; s < count; ++s) {
    const double target = unit_interval(rng()) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const std::size_t pos = std::min<std::size_t>(it - cumulative.begin(), inside.size() - 1);
    out.push_back(measure_.point(inside[pos]));
  }
  return true;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ b);
}

CtildeEstimate ctilde_estimate(const PairCost& cost, const BallSampler& first,
                               const BallSampler& second, const Point& x, const Point& y,
                               const RadiusSchedule& schedule, const CtildeOptions& opts) {
  if (opts.samples == 0 || !(opts.eta >= 0.0 && opts.eta < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need samples > 0 and eta in [0, 1)");
  }
  std::mt19937_64 rng(opts.seed);
  const std::size_t q_index =
      std::min(opts.samples - 1, static_cast<std::size_t>(std::floor(opts.eta * opts.samples)));
  CtildeEstimate est;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Point> xs, ys;
  std::vector<double> values;
  for (double r : schedule.radii()) {
    xs.clear();
    ys.clear();
    if (!first.draw(x, r, rng, opts.samples, xs) || !second.draw(y, r, rng, opts.samples, ys)) {
      throw Error(ErrorCode::EmptyBall, "no mass in the ball of radius " + std::to_string(r));
    }
    values.resize(opts.samples);
    for (std::size_t s = 0; s < opts.samples; ++s) values[s] = cost(xs[s], ys[s]);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(q_index), values.end());
    const double previous = best;
    best = std::max(best, values[q_index]);
    est.per_radius.push_back(best);
    if (opts.plateau_tol > 0.0 && est.per_radius.size() >= 2 && best - previous < opts.plateau_tol) break;
  }
  est.value = best;
  return est;
}

CostMatrix ctilde_tabulate(const PairCost& cost, const BallSampler& first, const BallSampler& second,
                           const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const RadiusSchedule& schedule, const CtildeOptions& opts) {
  std::vector<double> table(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      CtildeOptions local = opts;
      local.seed = derive_seed(opts.seed, i, j);
      table[i * nu.size() + j] =
          ctilde_estimate(cost, first, second, mu.point(i), nu.point(j), schedule, local).value;
    }
  }
  return CostTensor({mu.size(), nu.size()}, std::move(table));
}

double kantorovich_residual(const Potential& u, const Potential& v, const CostMatrix& cost) {
  if (cost.rank() != 2 || u.size() != cost.extent(0) || v.size() != cost.extent(1)) {
    throw Error(ErrorCode::DimensionMismatch, "potentials do not match the cost");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double c = cost.at(i, j);
      if (std::isfinite(c)) worst = std::max(worst, u[i] + v[j] - c);
    }
  }
  return worst;
}

EpsStudyReport eps_limit_study(const Instance& instance, std::span<const double> eps_list,
                               const SolveOptions& opts, const CostMatrix* ctilde_cost) {
  if (instance.num_marginals() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "epsilon study needs two marginals");
  }
  if (eps_list.empty()) throw Error(ErrorCode::InvalidArgument, "epsilon list is empty");
  for (std::size_t k = 1; k < eps_list.size(); ++k) {
    if (!(eps_list[k] < eps_list[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "epsilon list must be strictly decreasing");
    }
  }
  const DiscreteMeasure& mu = instance.measure(0);
  const DiscreteMeasure& nu = instance.measure(1);
  EpsStudyReport report;
  report.oracle_cost = ctilde_cost ? OracleCost::CtildeTabulated : OracleCost::Original;
  report.oracle_value = exact_ot_oracle(ctilde_cost ? *ctilde_cost : instance.cost(), mu, nu).value;

  Potential u_start(mu.size(), 0.0);
  for (double e : eps_list) {
    const Epsilon eps(e);
    SolveReport r = sinkhorn_solve(instance, eps, opts, u_start);
    EpsStudyRow row;
    row.epsilon = e;
    row.dual = r.dual_value;
    row.primal = r.primal_value;
    row.gap = r.gap;
    row.oracle_gap = std::fabs(r.dual_value - report.oracle_value);
    row.kantorovich_residual = kantorovich_residual(r.potentials[0], r.potentials[1], instance.cost());
    row.iterations = r.iterations;
    row.converged = r.converged;
    report.rows.push_back(row);
    u_start = r.potentials[0];
    report.final_potentials = {r.potentials[0], r.potentials[1]};
  }
  return report;
}

Instance counterexample_instance(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid size must be >= 2");
  std::vector<Point> points(n);
  for (std::size_t k = 0; k < n; ++k) points[k] = {(static_cast<double>(k) + 0.5) / static_cast<double>(n)};
  const std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<DiscreteMeasure> measures{make_measure(points, weights), make_measure(points, weights)};
  return Instance::create(std::move(measures), CostSpec::custom("step-example"));
}

LipschitzBound coulomb_lipschitz_bound(double M, double alpha, double eps, double K) {
  if (!(alpha > 0.0) || !(eps > 0.0) || !(M >= 0.0) || !(K >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need alpha, eps > 0 and M, K >= 0");
  }
  const double p = (alpha + 1.0) / alpha;
  LipschitzBound b;
  b.L = std::pow(eps / alpha, 1.0 / alpha) * std::pow(alpha + 1.0, p) * std::exp(-p);
  b.transform_lipschitz = eps * std::exp((2.0 * M + K) / eps) * b.L;
  return b;
}

double transform_at(const Potential& u, const DiscreteMeasure& mu, const PairCost& cost,
                    const Point& y, Epsilon eps) {
  check_potential(u, mu.size(), "u");
  std::vector<double> terms(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double c = cost(mu.point(i), y);
    terms[i] = std::isfinite(c) ? mu.log_weights()[i] + (u[i] - c) / eps.value()
                                : -std::numeric_limits<double>::infinity();
  }
  const double l = log_sum_exp(terms);
  if (!std::isfinite(l)) throw Error(ErrorCode::AllTermsVanish, "transform undefined at this point");
  return -eps.value() * l;
}

LipschitzProbe probe_transform_lipschitz(const Potential& u, const DiscreteMeasure& mu, double alpha,
                                         Epsilon eps,
                                         std::span<const std::pair<Point, Point>> pairs) {
  const PairCost cost = analytic_pair_cost(CostSpec::power_distance(alpha));
  LipschitzProbe probe;
  for (double x : u) probe.sup_norm = std::max(probe.sup_norm, std::fabs(x));
  auto conditional = [&](const Point& y) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < mu.size(); ++i) acc.add(mu.weights()[i] * cost(mu.point(i), y));
    return acc.value();
  };
  for (const auto& [y1, y2] : pairs) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < y1.size(); ++k) d2 += (y1[k] - y2[k]) * (y1[k] - y2[k]);
    const double d = std::sqrt(d2);
    if (d == 0.0) continue;
    const double q = std::fabs(transform_at(u, mu, cost, y1, eps) - transform_at(u, mu, cost, y2, eps)) / d;
    probe.max_quotient = std::max(probe.max_quotient, q);
    probe.K = std::max({probe.K, conditional(y1), conditional(y2)});
  }
  return probe;
}

}  // namespace eot
