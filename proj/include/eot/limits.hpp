#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "eot/dual.hpp"
#include "eot/instance.hpp"
#include "eot/sinkhorn.hpp"

namespace eot {

/// Strictly decreasing positive radii.
class RadiusSchedule {
 public:
  explicit RadiusSchedule(std::vector<double> radii);
  /// r_k = first * ratio^k, k = 0..count-1. Defaults: 0.25 * 2^-k, k = 0..12.
  static RadiusSchedule geometric(double first = 0.25, double ratio = 0.5, std::size_t count = 13);
  const std::vector<double>& radii() const noexcept { return radii_; }

 private:
  std::vector<double> radii_;
};

/// One factor of a product measure that can draw samples restricted to a
/// Euclidean ball B_r(center) = {p : |p - center| < r}.
class BallSampler {
 public:
  virtual ~BallSampler() = default;
  /// Appends `count` iid draws from the measure conditioned on the ball.
  /// Returns false (appending nothing) when the ball has zero mass.
  virtual bool draw(const Point& center, double radius, std::mt19937_64& rng, std::size_t count,
                    std::vector<Point>& out) const = 0;
};

/// Normalized Lebesgue measure on the cube [lo, hi]^dim.
class UniformBoxSampler final : public BallSampler {
 public:
  UniformBoxSampler(double lo, double hi, std::size_t dim = 1);
  bool draw(const Point& center, double radius, std::mt19937_64& rng, std::size_t count,
            std::vector<Point>& out) const override;

 private:
  double lo_, hi_;
  std::size_t dim_;
};

/// Atoms of a discrete measure, drawn proportionally to weight.
class WeightedGridSampler final : public BallSampler {
 public:
  explicit WeightedGridSampler(DiscreteMeasure measure);
  bool draw(const Point& center, double radius, std::mt19937_64& rng, std::size_t count,
            std::vector<Point>& out) const override;

 private:
  DiscreteMeasure measure_;
};

struct CtildeOptions {
  std::size_t samples = 10'000;
  /// Quantile used as the essential infimum over a ball.
  double eta = 1e-3;
  std::uint64_t seed = 42;
  /// Stop once two consecutive radii agree to this tolerance; <= 0 scans the
  /// whole schedule.
  double plateau_tol = 0.0;
};

struct CtildeEstimate {
  double value = 0.0;
  /// Monotone (running max) estimate after each radius that was evaluated.
  std::vector<double> per_radius;
};

/// Estimates c~(x, y) = sup_r essinf_{B_r((x, y))} c with respect to the
/// product of the two samplers. Balls on the product use the max of the
/// factor distances, so B_r((x, y)) = B_r(x) x B_r(y). Throws EmptyBall if
/// the smallest evaluated ball carries no mass.
CtildeEstimate ctilde_estimate(const PairCost& cost, const BallSampler& first,
                               const BallSampler& second, const Point& x, const Point& y,
                               const RadiusSchedule& schedule, const CtildeOptions& opts = {});

/// c~ at every atom pair of (mu, nu); the seed of pair (i, j) is derived from
/// opts.seed, i and j so the table does not depend on evaluation order.
CostMatrix ctilde_tabulate(const PairCost& cost, const BallSampler& first, const BallSampler& second,
                           const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const RadiusSchedule& schedule, const CtildeOptions& opts = {});

/// Deterministic per-item seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// max(0, max_ij (u_i + v_j - c_ij)) over finite cost entries.
double kantorovich_residual(const Potential& u, const Potential& v, const CostMatrix& cost);

struct EpsStudyRow {
  double epsilon = 0.0;
  double dual = 0.0;
  double primal = 0.0;
  double gap = 0.0;
  /// |dual - oracle value|.
  double oracle_gap = 0.0;
  double kantorovich_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

enum class OracleCost { Original, CtildeTabulated };

struct EpsStudyReport {
  std::vector<EpsStudyRow> rows;
  double oracle_value = 0.0;
  OracleCost oracle_cost = OracleCost::Original;
  /// Potentials at the smallest epsilon.
  PotentialPair final_potentials;
};

/// Solves for each epsilon in decreasing order, warm-starting from the
/// previous potentials, and compares against the exact transport value of
/// the designated cost (the instance cost when `ctilde_cost` is null).
EpsStudyReport eps_limit_study(const Instance& instance, std::span<const double> eps_list,
                               const SolveOptions& opts, const CostMatrix* ctilde_cost = nullptr);

/// Uniform n-point grids (cell centres) on [0, 1] with the step cost:
/// 0 on the diagonal, 1/2 below it (j < i), 1 above it (j > i).
Instance counterexample_instance(std::size_t n);

struct LipschitzBound {
  /// Lipschitz constant of t -> exp(-1 / (eps t^alpha)) on (0, inf).
  double L = 0.0;
  /// eps * exp((2M + K) / eps) * L.
  double transform_lipschitz = 0.0;
};

LipschitzBound coulomb_lipschitz_bound(double M, double alpha, double eps, double K);

/// (c,eps)-transform of u evaluated at an arbitrary point y:
///   -eps log sum_i mu_i exp((u_i - c(x_i, y)) / eps).
double transform_at(const Potential& u, const DiscreteMeasure& mu, const PairCost& cost,
                    const Point& y, Epsilon eps);

struct LipschitzProbe {
  /// Largest |T(y1) - T(y2)| / |y1 - y2| over the probes.
  double max_quotient = 0.0;
  /// max |u_i|.
  double sup_norm = 0.0;
  /// Largest sum_i mu_i c(x_i, y) over the probed points.
  double K = 0.0;
};

/// Difference quotients of the transform under c = |x - y|^-alpha.
LipschitzProbe probe_transform_lipschitz(const Potential& u, const DiscreteMeasure& mu, double alpha,
                                         Epsilon eps,
                                         std::span<const std::pair<Point, Point>> pairs);

}  // namespace eot
