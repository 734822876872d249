#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eot {

using Point = std::vector<double>;

/// Finite probability measure: atoms in R^d with strictly positive weights
/// summing to one. Immutable after construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  const Point& point(std::size_t k) const { return points_.at(k); }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> log_weights() const noexcept { return log_weights_; }

 private:
  friend DiscreteMeasure make_measure(std::vector<Point> points, std::vector<double> weights);

  std::vector<Point> points_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::size_t dimension_ = 0;
};

/// Weights within 1e-9 of summing to one are renormalized exactly; anything
/// further off is rejected.
DiscreteMeasure make_measure(std::vector<Point> points, std::vector<double> weights);

/// Convenience: atoms at 0, 1, ..., n-1 on the real line.
DiscreteMeasure make_indexed_measure(std::vector<double> weights);

enum class CostKind {
  ExplicitMatrix,
  ExplicitTensor,
  PowerDistance,    // c(x, y) = d(x, y)^(-alpha)
  CoulombPairwise,  // c(x_1..x_N) = sum_{i<j} d(x_i, x_j)^(-exponent)
  CustomAnalytic,   // named closed-form cost, see analytic_pair_cost
};

const char* to_string(CostKind kind) noexcept;

struct CostSpec {
  CostKind kind = CostKind::ExplicitMatrix;
  /// alpha for power-distance, exponent for coulomb-pairwise.
  double exponent = 1.0;
  /// Name for custom-analytic: "step-example", "abs-diff", "squared-distance".
  std::string analytic_name;
  /// Explicit entries, row-major with the last index varying fastest.
  std::vector<double> values;

  static CostSpec explicit_matrix(const std::vector<std::vector<double>>& rows);
  static CostSpec explicit_tensor(std::vector<double> flat);
  static CostSpec power_distance(double alpha);
  static CostSpec coulomb_pairwise(double exponent);
  static CostSpec custom(std::string name);
};

/// Dense cost array over atom-index tuples, entries in [0, +inf].
class CostTensor {
 public:
  static constexpr std::size_t kMaxEntries = 100'000'000;

  CostTensor() = default;
  /// Throws NegativeCost on negative or NaN entries, DimensionMismatch when
  /// data does not fill shape, TooLarge above kMaxEntries, and
  /// AssumptionViolated when some atom has only infinite-cost tuples.
  CostTensor(std::vector<std::size_t> shape, std::vector<double> data);

  std::size_t rank() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<std::size_t>& strides() const noexcept { return strides_; }

  double operator[](std::size_t flat) const noexcept { return data_[flat]; }
  /// Matrix access; rank must be 2.
  double at(std::size_t i, std::size_t j) const noexcept { return data_[i * shape_[1] + j]; }
  bool all_finite() const noexcept;

  /// Rank-2 transpose.
  CostTensor transposed() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

using CostMatrix = CostTensor;

CostMatrix make_cost_matrix(const std::vector<std::vector<double>>& rows);

using PairCost = std::function<double(std::span<const double>, std::span<const double>)>;

/// Closed-form two-argument cost for power-distance and custom-analytic specs.
PairCost analytic_pair_cost(const CostSpec& spec);

CostTensor tabulate_cost(const CostSpec& spec, std::span<const DiscreteMeasure> measures);

struct AssumptionBound {
  double K = 0.0;
  /// conditional[i][k]: weighted average of c over all other coordinates with
  /// marginal i pinned at atom k.
  std::vector<std::vector<double>> conditional;
  /// max_k conditional[i][k] per marginal.
  std::vector<double> per_marginal_max;
};

/// Discrete form of the uniform conditional-cost bound. Throws
/// AssumptionViolated if any conditional average is infinite.
AssumptionBound assumption_bound(const CostTensor& cost, std::span<const DiscreteMeasure> measures);

/// Validated problem data: N >= 2 marginals, tabulated cost and its bound.
class Instance {
 public:
  static Instance create(std::vector<DiscreteMeasure> measures, CostSpec spec);
  static Instance from_cost(std::vector<DiscreteMeasure> measures, CostTensor cost);

  std::size_t num_marginals() const noexcept { return measures_.size(); }
  const std::vector<DiscreteMeasure>& measures() const noexcept { return measures_; }
  const DiscreteMeasure& measure(std::size_t i) const { return measures_.at(i); }
  const CostTensor& cost() const noexcept { return cost_; }
  const CostSpec& spec() const noexcept { return spec_; }
  const AssumptionBound& bound() const noexcept { return bound_; }
  double K() const noexcept { return bound_.K; }
  /// Hex SHA-256 of the canonical binary form (weights, points, cost).
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::vector<DiscreteMeasure> measures_;
  CostSpec spec_;
  CostTensor cost_;
  AssumptionBound bound_;
  std::string digest_;
};

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::byte> bytes);

/// Parses the instance document:
///   { "marginals": [{"points": [[..],..], "weights": [..]}, ..],
///     "cost": {"kind": .., "matrix" | "tensor" | "params": ..},
///     "metric": "euclidean" }
/// Infinite entries may be written as the strings "inf" or "Infinity".
Instance parse_instance_json(std::string_view text);
Instance load_instance_file(const std::string& path);

}  // namespace eot
