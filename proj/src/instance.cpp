#include "eot/instance.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "eot/error.hpp"
#include "eot/numeric.hpp"
#include "json.hpp"

namespace eot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightSumTolerance = 1e-9;

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "points have different dimensions");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double inverse_power(double distance, double exponent) {
  if (distance == 0.0) return kInf;
  return std::pow(distance, -exponent);
}

// Visits every multi-index of `shape` in lexicographic order (last index
// fastest), handing the flat offset and the index vector to `fn`.
template <typename Fn>
void for_each_tuple(const std::vector<std::size_t>& shape, Fn&& fn) {
  std::vector<std::size_t> idx(shape.size(), 0);
  std::size_t total = 1;
  for (std::size_t e : shape) total *= e;
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, idx);
    for (std::size_t axis = shape.size(); axis-- > 0;) {
      if (++idx[axis] < shape[axis]) break;
      idx[axis] = 0;
    }
  }
}

std::size_t checked_total(const std::vector<std::size_t>& shape) {
  std::size_t total = 1;
  for (std::size_t e : shape) {
    if (e == 0) throw Error(ErrorCode::EmptySupport, "cost tensor has an empty axis");
    if (total > CostTensor::kMaxEntries / e) {
      throw Error(ErrorCode::TooLarge, "cost tensor exceeds 1e8 entries");
    }
    total *= e;
  }
  return total;
}

}  // namespace

DiscreteMeasure make_measure(std::vector<Point> points, std::vector<double> weights) {
  if (weights.empty() || points.empty()) {
    throw Error(ErrorCode::EmptySupport, "measure needs at least one atom");
  }
  if (points.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "points and weights differ in length");
  }
  const std::size_t dim = points.front().size();
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "points must have dimension >= 1");
  for (const Point& p : points) {
    if (p.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "points have inconsistent dimensions");
    }
    for (double x : p) {
      if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite coordinate");
    }
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::NonpositiveWeight, "weights must be finite and > 0");
    }
  }
  const double total = compensated_sum(weights);
  if (std::fabs(total - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total << ", expected 1";
    throw Error(ErrorCode::WeightSumOutOfRange, msg.str());
  }
  for (double& w : weights) w /= total;

  DiscreteMeasure m;
  m.points_ = std::move(points);
  m.weights_ = std::move(weights);
  m.log_weights_.resize(m.weights_.size());
  std::transform(m.weights_.begin(), m.weights_.end(), m.log_weights_.begin(),
                 [](double w) { return std::log(w); });
  m.dimension_ = dim;
  return m;
}

DiscreteMeasure make_indexed_measure(std::vector<double> weights) {
  std::vector<Point> points(weights.size());
  for (std::size_t k = 0; k < points.size(); ++k) points[k] = {static_cast<double>(k)};
  return make_measure(std::move(points), std::move(weights));
}

const char* to_string(CostKind kind) noexcept {
  switch (kind) {
    case CostKind::ExplicitMatrix: return "explicit-matrix";
    case CostKind::ExplicitTensor: return "explicit-tensor";
    case CostKind::PowerDistance: return "power-distance";
    case CostKind::CoulombPairwise: return "coulomb-pairwise";
    case CostKind::CustomAnalytic: return "custom-analytic";
  }
  return "unknown";
}

CostSpec CostSpec::explicit_matrix(const std::vector<std::vector<double>>& rows) {
  CostSpec s;
  s.kind = CostKind::ExplicitMatrix;
  for (const auto& r : rows) s.values.insert(s.values.end(), r.begin(), r.end());
  return s;
}

CostSpec CostSpec::explicit_tensor(std::vector<double> flat) {
  CostSpec s;
  s.kind = CostKind::ExplicitTensor;
  s.values = std::move(flat);
  return s;
}

CostSpec CostSpec::power_distance(double alpha) {
  CostSpec s;
  s.kind = CostKind::PowerDistance;
  s.exponent = alpha;
  return s;
}

CostSpec CostSpec::coulomb_pairwise(double exponent) {
  CostSpec s;
  s.kind = CostKind::CoulombPairwise;
  s.exponent = exponent;
  return s;
}

CostSpec CostSpec::custom(std::string name) {
  CostSpec s;
  s.kind = CostKind::CustomAnalytic;
  s.analytic_name = std::move(name);
  return s;
}

CostTensor::CostTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw Error(ErrorCode::DimensionMismatch, "cost needs rank >= 1");
  const std::size_t total = checked_total(shape_);
  if (data_.size() != total) {
    throw Error(ErrorCode::DimensionMismatch, "cost entries do not match the atom counts");
  }
  for (double c : data_) {
    if (std::isnan(c) || c < 0.0) {
      throw Error(ErrorCode::NegativeCost, "cost entries must lie in [0, +inf]");
    }
  }
  strides_.assign(shape_.size(), 1);
  for (std::size_t axis = shape_.size() - 1; axis-- > 0;) {
    strides_[axis] = strides_[axis + 1] * shape_[axis + 1];
  }
  if (all_finite()) return;
  // Every atom of every marginal needs at least one finite-cost tuple.
  std::vector<std::vector<char>> seen(shape_.size());
  for (std::size_t a = 0; a < shape_.size(); ++a) seen[a].assign(shape_[a], 0);
  for_each_tuple(shape_, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    if (std::isfinite(data_[flat])) {
      for (std::size_t a = 0; a < idx.size(); ++a) seen[a][idx[a]] = 1;
    }
  });
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    for (std::size_t k = 0; k < shape_[a]; ++k) {
      if (!seen[a][k]) {
        throw Error(ErrorCode::AssumptionViolated,
                    "marginal " + std::to_string(a) + " atom " + std::to_string(k) +
                        " has infinite cost against every tuple");
      }
    }
  }
}

bool CostTensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double c) { return std::isfinite(c); });
}

CostTensor CostTensor::transposed() const {
  if (rank() != 2) throw Error(ErrorCode::DimensionMismatch, "transpose needs a matrix");
  const std::size_t n = shape_[0], m = shape_[1];
  std::vector<double> t(data_.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) t[j * n + i] = data_[i * m + j];
  }
  return CostTensor({m, n}, std::move(t));
}

CostMatrix make_cost_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptySupport, "cost matrix has no rows");
  const std::size_t m = rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != m) throw Error(ErrorCode::DimensionMismatch, "ragged cost matrix");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return CostTensor({rows.size(), m}, std::move(flat));
}

PairCost analytic_pair_cost(const CostSpec& spec) {
  switch (spec.kind) {
    case CostKind::PowerDistance:
    case CostKind::CoulombPairwise: {
      const double e = spec.exponent;
      if (!(e > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponent must be > 0");
      return [e](std::span<const double> x, std::span<const double> y) {
        return inverse_power(euclidean(x, y), e);
      };
    }
    case CostKind::CustomAnalytic:
      if (spec.analytic_name == "step-example") {
        // 0 on the diagonal, 1/2 below it (y < x), 1 above it (y > x).
        return [](std::span<const double> x, std::span<const double> y) {
          if (y[0] < x[0]) return 0.5;
          if (y[0] > x[0]) return 1.0;
          return 0.0;
        };
      }
      if (spec.analytic_name == "abs-diff") {
        return [](std::span<const double> x, std::span<const double> y) { return euclidean(x, y); };
      }
      if (spec.analytic_name == "squared-distance") {
        return [](std::span<const double> x, std::span<const double> y) {
          const double d = euclidean(x, y);
          return d * d;
        };
      }
      throw Error(ErrorCode::InvalidArgument, "unknown analytic cost '" + spec.analytic_name + "'");
    default:
      throw Error(ErrorCode::InvalidArgument,
                  std::string("cost kind ") + to_string(spec.kind) + " is not analytic");
  }
}

CostTensor tabulate_cost(const CostSpec& spec, std::span<const DiscreteMeasure> measures) {
  if (measures.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two marginals");
  std::vector<std::size_t> shape;
  for (const auto& m : measures) shape.push_back(m.size());
  const std::size_t total = checked_total(shape);

  switch (spec.kind) {
    case CostKind::ExplicitMatrix:
      if (measures.size() != 2) {
        throw Error(ErrorCode::DimensionMismatch, "explicit matrix needs exactly two marginals");
      }
      [[fallthrough]];
    case CostKind::ExplicitTensor:
      if (spec.values.size() != total) {
        throw Error(ErrorCode::DimensionMismatch, "explicit cost has " +
                                                      std::to_string(spec.values.size()) +
                                                      " entries, expected " + std::to_string(total));
      }
      return CostTensor(shape, spec.values);
    case CostKind::PowerDistance:
    case CostKind::CustomAnalytic: {
      if (measures.size() != 2) {
        throw Error(ErrorCode::DimensionMismatch, "pairwise cost needs exactly two marginals");
      }
      const PairCost c = analytic_pair_cost(spec);
      std::vector<double> data(total);
      for (std::size_t i = 0; i < shape[0]; ++i) {
        for (std::size_t j = 0; j < shape[1]; ++j) {
          data[i * shape[1] + j] = c(measures[0].point(i), measures[1].point(j));
        }
      }
      return CostTensor(shape, std::move(data));
    }
    case CostKind::CoulombPairwise: {
      if (!(spec.exponent > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponent must be > 0");
      std::vector<double> data(total);
      for_each_tuple(shape, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
          for (std::size_t b = a + 1; b < idx.size(); ++b) {
            s += inverse_power(euclidean(measures[a].point(idx[a]), measures[b].point(idx[b])),
                               spec.exponent);
          }
        }
        data[flat] = s;
      });
      return CostTensor(shape, std::move(data));
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown cost kind");
}

AssumptionBound assumption_bound(const CostTensor& cost, std::span<const DiscreteMeasure> measures) {
  if (cost.rank() != measures.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost rank differs from number of marginals");
  }
  for (std::size_t a = 0; a < measures.size(); ++a) {
    if (cost.extent(a) != measures[a].size()) {
      throw Error(ErrorCode::DimensionMismatch, "cost extent differs from atom count");
    }
  }
  const std::size_t n = measures.size();
  std::vector<std::vector<CompensatedSum>> acc(n);
  for (std::size_t a = 0; a < n; ++a) acc[a].resize(measures[a].size());

  bool violated = false;
  for_each_tuple(cost.shape(), [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    const double c = cost[flat];
    if (!std::isfinite(c)) {
      violated = true;
      return;
    }
    for (std::size_t a = 0; a < n; ++a) {
      double w = 1.0;
      for (std::size_t b = 0; b < n; ++b) {
        if (b != a) w *= measures[b].weights()[idx[b]];
      }
      acc[a][idx[a]].add(c * w);
    }
  });
  if (violated) {
    throw Error(ErrorCode::AssumptionViolated,
                "an infinite cost entry carries positive product weight");
  }

  AssumptionBound out;
  out.conditional.resize(n);
  out.per_marginal_max.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (const auto& s : acc[a]) {
      const double v = s.value();
      out.conditional[a].push_back(v);
      out.per_marginal_max[a] = std::max(out.per_marginal_max[a], v);
    }
    out.K = std::max(out.K, out.per_marginal_max[a]);
  }
  return out;
}

namespace {

struct DigestBuilder {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

  DigestBuilder() { EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr); }
  void add_u64(std::uint64_t v) { EVP_DigestUpdate(ctx.get(), &v, sizeof v); }
  void add_bytes(std::span<const std::byte> b) { EVP_DigestUpdate(ctx.get(), b.data(), b.size()); }
  void add_doubles(std::span<const double> xs) {
    for (double x : xs) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      add_u64(bits);
    }
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
      s.push_back(digits[md[i] >> 4]);
      s.push_back(digits[md[i] & 15]);
    }
    return s;
  }
};

}  // namespace

std::string sha256_hex(std::span<const std::byte> bytes) {
  DigestBuilder d;
  d.add_bytes(bytes);
  return d.hex();
}

namespace {

std::string compute_digest(const std::vector<DiscreteMeasure>& measures, const CostTensor& cost) {
  DigestBuilder d;
  d.add_u64(measures.size());
  for (const auto& m : measures) {
    d.add_u64(m.size());
    d.add_u64(m.dimension());
    for (const auto& p : m.points()) d.add_doubles(p);
    d.add_doubles(m.weights());
  }
  for (std::size_t e : cost.shape()) d.add_u64(e);
  d.add_doubles(cost.data());
  return d.hex();
}

}  // namespace

Instance Instance::create(std::vector<DiscreteMeasure> measures, CostSpec spec) {
  CostTensor cost = tabulate_cost(spec, measures);
  Instance inst = from_cost(std::move(measures), std::move(cost));
  inst.spec_ = std::move(spec);
  return inst;
}

Instance Instance::from_cost(std::vector<DiscreteMeasure> measures, CostTensor cost) {
  if (measures.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two marginals");
  Instance inst;
  inst.bound_ = assumption_bound(cost, measures);
  inst.spec_.kind = cost.rank() == 2 ? CostKind::ExplicitMatrix : CostKind::ExplicitTensor;
  inst.digest_ = compute_digest(measures, cost);
  inst.measures_ = std::move(measures);
  inst.cost_ = std::move(cost);
  return inst;
}

namespace {

using nlohmann::json;

double json_number(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity" || s == "+Infinity") return kInf;
  }
  throw Error(ErrorCode::Parse, std::string("expected a number for ") + what);
}

void flatten_numbers(const json& v, std::vector<double>& out) {
  if (v.is_array()) {
    for (const auto& e : v) flatten_numbers(e, out);
  } else {
    out.push_back(json_number(v, "cost entry"));
  }
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

CostSpec parse_cost(const json& c) {
  const std::string kind = require(c, "kind").get<std::string>();
  const json params = c.contains("params") ? c.at("params") : json::object();
  if (kind == "explicit-matrix") {
    CostSpec s;
    s.kind = CostKind::ExplicitMatrix;
    flatten_numbers(require(c, "matrix"), s.values);
    return s;
  }
  if (kind == "explicit-tensor") {
    CostSpec s;
    s.kind = CostKind::ExplicitTensor;
    flatten_numbers(require(c, "tensor"), s.values);
    return s;
  }
  if (kind == "power-distance") {
    return CostSpec::power_distance(params.is_object() && params.contains("alpha")
                                        ? json_number(params.at("alpha"), "alpha")
                                        : 1.0);
  }
  if (kind == "coulomb-pairwise") {
    return CostSpec::coulomb_pairwise(params.is_object() && params.contains("exponent")
                                          ? json_number(params.at("exponent"), "exponent")
                                          : 1.0);
  }
  if (kind == "custom-analytic") {
    return CostSpec::custom(require(params, "name").get<std::string>());
  }
  throw Error(ErrorCode::Parse, "unknown cost kind '" + kind + "'");
}

}  // namespace

Instance parse_instance_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("instance is not valid JSON: ") + e.what());
  }
  try {
    if (doc.contains("metric") && doc.at("metric").get<std::string>() != "euclidean") {
      throw Error(ErrorCode::Parse, "only the euclidean metric is supported");
    }
    std::vector<DiscreteMeasure> measures;
    for (const auto& m : require(doc, "marginals")) {
      std::vector<Point> points;
      for (const auto& p : require(m, "points")) {
        Point pt;
        if (p.is_array()) {
          for (const auto& x : p) pt.push_back(json_number(x, "coordinate"));
        } else {
          pt.push_back(json_number(p, "coordinate"));
        }
        points.push_back(std::move(pt));
      }
      std::vector<double> weights;
      for (const auto& w : require(m, "weights")) weights.push_back(json_number(w, "weight"));
      measures.push_back(make_measure(std::move(points), std::move(weights)));
    }
    return Instance::create(std::move(measures), parse_cost(require(doc, "cost")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed instance: ") + e.what());
  }
}

Instance load_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance_json(buf.str());
}

}  // namespace eot
