#include "eot/dual.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "eot/error.hpp"
#include "eot/numeric.hpp"

namespace eot {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Epsilon::Epsilon(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be finite and > 0");
  }
}

void check_potential(std::span<const double> p, std::size_t expected_size, const char* what) {
  if (p.size() != expected_size) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has " +
                                                  std::to_string(p.size()) + " entries, expected " +
                                                  std::to_string(expected_size));
  }
  for (double x : p) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is not finite");
  }
}

void soft_min_transform(std::span<const double> cost, std::size_t row_stride,
                        std::size_t col_stride, std::span<const double> log_weights,
                        std::span<const double> potential, double eps, std::span<double> out,
                        unsigned threads) {
  const std::size_t cols = log_weights.size();
  std::atomic<bool> vanished{false};
  parallel_for(out.size(), cols, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> terms(cols);
    for (std::size_t r = begin; r < end; ++r) {
      const double* row = cost.data() + r * row_stride;
      double top = kNegInf;
      for (std::size_t k = 0; k < cols; ++k) {
        const double c = row[k * col_stride];
        const double t = std::isfinite(c) ? log_weights[k] + (potential[k] - c) / eps : kNegInf;
        terms[k] = t;
        top = std::max(top, t);
      }
      if (top == kNegInf) {
        vanished.store(true, std::memory_order_relaxed);
        out[r] = std::numeric_limits<double>::infinity();
        continue;
      }
      CompensatedSum acc;
      for (std::size_t k = 0; k < cols; ++k) acc.add(std::exp(terms[k] - top));
      out[r] = -eps * (top + std::log(acc.value()));
    }
  });
  if (vanished.load()) {
    throw Error(ErrorCode::AllTermsVanish, "every cost entry of some output atom is infinite");
  }
}

Potential ceps_transform(const Potential& u, const CostMatrix& cost, const DiscreteMeasure& mu,
                         Epsilon eps, unsigned threads) {
  if (cost.rank() != 2 || cost.extent(0) != mu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost rows must match the source measure");
  }
  check_potential(u, mu.size(), "u");
  Potential v(cost.extent(1));
  soft_min_transform(cost.data(), 1, cost.extent(1), mu.log_weights(), u, eps.value(), v, threads);
  return v;
}

Potential ceps_transform_columns(const Potential& v, const CostMatrix& cost,
                                 const DiscreteMeasure& nu, Epsilon eps, unsigned threads) {
  if (cost.rank() != 2 || cost.extent(1) != nu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost columns must match the source measure");
  }
  check_potential(v, nu.size(), "v");
  Potential u(cost.extent(0));
  soft_min_transform(cost.data(), cost.extent(1), 1, nu.log_weights(), v, eps.value(), u, threads);
  return u;
}

double gibbs_mass(const Potential& u, const Potential& v, const CostMatrix& cost,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps) {
  if (cost.rank() != 2 || cost.extent(0) != mu.size() || cost.extent(1) != nu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost shape does not match the measures");
  }
  check_potential(u, mu.size(), "u");
  check_potential(v, nu.size(), "v");
  const double e = eps.value();
  const std::size_t n = mu.size(), m = nu.size();
  std::vector<double> terms(n * m);
  double top = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost.at(i, j);
      const double t = std::isfinite(c)
                           ? mu.log_weights()[i] + nu.log_weights()[j] + (u[i] + v[j] - c) / e
                           : kNegInf;
      terms[i * m + j] = t;
      top = std::max(top, t);
    }
  }
  if (top == kNegInf) return 0.0;
  CompensatedSum acc;
  for (double t : terms) acc.add(std::exp(t - top));
  const double mass = std::exp(top) * acc.value();
  if (!std::isfinite(mass) || !std::isfinite(e * mass)) {
    throw Error(ErrorCode::Overflow, "exponential sum of the dual functional overflows");
  }
  return mass;
}

double dual_value(const Potential& u, const Potential& v, const CostMatrix& cost,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps) {
  const double mass = gibbs_mass(u, v, cost, mu, nu, eps);
  const double linear = compensated_dot(u, mu.weights()) + compensated_dot(v, nu.weights());
  return linear - eps.value() * mass + eps.value();
}

double simple_dual_value(const Potential& u, const Potential& v, const CostMatrix& cost,
                         const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps) {
  const Potential expected = ceps_transform(u, cost, mu, eps);
  check_potential(v, expected.size(), "v");
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (std::fabs(v[j] - expected[j]) > 1e-10 * std::max(1.0, std::fabs(expected[j]))) {
      throw Error(ErrorCode::NotATransformPair, "v is not the (c,eps)-transform of u");
    }
  }
  return compensated_dot(u, mu.weights()) + compensated_dot(v, nu.weights());
}

PotentialPair normalize_pair(const Potential& u, const Potential& v, const CostMatrix& cost,
                             const DiscreteMeasure& mu, const DiscreteMeasure& nu, Epsilon eps) {
  if (dual_value(u, v, cost, mu, nu, eps) < 0.0) {
    throw Error(ErrorCode::NegativeDualValue, "normalization needs a pair with D >= 0");
  }
  const Potential ut = ceps_transform(u, cost, mu, eps);
  const double d = dual_value(u, ut, cost, mu, nu, eps);
  const double a0 = d / 2.0 - compensated_dot(u, mu.weights());
  Potential v_bar = ut;
  for (double& x : v_bar) x -= a0;
  PotentialPair out;
  out.u = ceps_transform_columns(v_bar, cost, nu, eps);
  out.v = ceps_transform(out.u, cost, mu, eps);
  return out;
}

PotentialPair split_evenly(const Potential& u, const Potential& v, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) {
  const double a = (compensated_dot(v, nu.weights()) - compensated_dot(u, mu.weights())) / 2.0;
  PotentialPair out{u, v};
  for (double& x : out.u) x += a;
  for (double& x : out.v) x -= a;
  return out;
}

}  // namespace eot
