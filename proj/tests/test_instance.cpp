#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "eot/error.hpp"
#include "eot/instance.hpp"
#include "test_support.hpp"

namespace {

using namespace eot;
using eot::testing::random_cost;
using eot::testing::random_weights;

constexpr double kInf = std::numeric_limits<double>::infinity();

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an eot::Error";
  return ErrorCode::InvalidArgument;
}

TEST(Measure, Singleton) {
  const DiscreteMeasure m = make_measure({{0.0}}, {1.0});
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m.dimension(), 1u);
  EXPECT_EQ(m.weights()[0], 1.0);
  EXPECT_EQ(m.log_weights()[0], 0.0);
}

TEST(Measure, TwoPointUniform) {
  const DiscreteMeasure m = make_measure({{0.0}, {1.0}}, {0.5, 0.5});
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.weights()[0], 0.5);
  EXPECT_DOUBLE_EQ(m.log_weights()[1], std::log(0.5));
}

TEST(Measure, RejectsBadInput) {
  EXPECT_EQ(code_of([] { make_measure({{0.0}, {1.0}}, {0.5, 0.4}); }), ErrorCode::WeightSumOutOfRange);
  EXPECT_EQ(code_of([] { make_measure({{0.0}, {1.0}}, {1.0, 0.0}); }), ErrorCode::NonpositiveWeight);
  EXPECT_EQ(code_of([] { make_measure({{0.0}, {1.0}}, {1.5, -0.5}); }), ErrorCode::NonpositiveWeight);
  EXPECT_EQ(code_of([] { make_measure({}, {}); }), ErrorCode::EmptySupport);
  EXPECT_EQ(code_of([] { make_measure({{0.0}}, {0.5, 0.5}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { make_measure({{0.0}, {1.0, 2.0}}, {0.5, 0.5}); }), ErrorCode::DimensionMismatch);
}

TEST(Measure, RenormalizesSmallDrift) {
  const DiscreteMeasure m = make_measure({{0.0}, {1.0}, {2.0}}, {0.3333333333, 0.3333333333, 0.3333333333});
  double total = 0.0;
  for (double w : m.weights()) total += w;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_EQ(code_of([] { make_measure({{0.0}, {1.0}}, {0.5, 0.5 + 1e-7}); }), ErrorCode::WeightSumOutOfRange);
}

TEST(Tabulate, ExplicitMatrixIsCopied) {
  const DiscreteMeasure m = make_measure({{0.0}, {1.0}}, {0.5, 0.5});
  const std::vector<DiscreteMeasure> ms{m, m};
  const CostTensor c = tabulate_cost(CostSpec::explicit_matrix({{0, 1}, {1, 0}}), ms);
  ASSERT_EQ(c.shape(), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(c.at(0, 0), 0.0);
  EXPECT_EQ(c.at(0, 1), 1.0);
  EXPECT_EQ(c.at(1, 0), 1.0);
  EXPECT_EQ(c.at(1, 1), 0.0);
}

TEST(Tabulate, PowerDistanceHasInfiniteDiagonal) {
  const DiscreteMeasure m = make_measure({{0.0}, {1.0}}, {0.5, 0.5});
  const std::vector<DiscreteMeasure> ms{m, m};
  const CostTensor c = tabulate_cost(CostSpec::power_distance(1.0), ms);
  EXPECT_EQ(c.at(0, 0), kInf);
  EXPECT_EQ(c.at(0, 1), 1.0);
  EXPECT_EQ(c.at(1, 0), 1.0);
  EXPECT_EQ(c.at(1, 1), kInf);
}

TEST(Tabulate, PowerDistanceSymmetricOnSharedPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point> pts;
  for (int k = 0; k < 6; ++k) pts.push_back({u(rng), u(rng), u(rng)});
  const DiscreteMeasure m = make_measure(pts, random_weights(6, rng));
  const std::vector<DiscreteMeasure> ms{m, m};
  const CostTensor c = tabulate_cost(CostSpec::power_distance(1.5), ms);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(c.at(i, j), c.at(j, i));
  }
}

TEST(Tabulate, CoulombPairwiseOnSingletons) {
  const std::vector<DiscreteMeasure> ms{make_measure({{0.0}}, {1.0}), make_measure({{1.0}}, {1.0}),
                                        make_measure({{3.0}}, {1.0})};
  const CostTensor c1 = tabulate_cost(CostSpec::coulomb_pairwise(1.0), ms);
  ASSERT_EQ(c1.size(), 1u);
  EXPECT_NEAR(c1[0], 1.0 + 1.0 / 3.0 + 1.0 / 2.0, 1e-15);
  const CostTensor c2 = tabulate_cost(CostSpec::coulomb_pairwise(2.0), ms);
  EXPECT_NEAR(c2[0], 1.0 + 1.0 / 9.0 + 1.0 / 4.0, 1e-15);
}

TEST(Tabulate, StepExample) {
  const DiscreteMeasure m = make_measure({{0.25}, {0.75}}, {0.5, 0.5});
  const std::vector<DiscreteMeasure> ms{m, m};
  const CostTensor c = tabulate_cost(CostSpec::custom("step-example"), ms);
  EXPECT_EQ(c.at(0, 0), 0.0);
  EXPECT_EQ(c.at(0, 1), 1.0);
  EXPECT_EQ(c.at(1, 0), 0.5);
  EXPECT_EQ(c.at(1, 1), 0.0);
}

TEST(Tabulate, RejectsMismatchAndNegatives) {
  const DiscreteMeasure m = make_measure({{0.0}, {1.0}}, {0.5, 0.5});
  const std::vector<DiscreteMeasure> ms{m, m};
  EXPECT_EQ(code_of([&] { tabulate_cost(CostSpec::explicit_matrix({{0, 1, 2}, {1, 0, 2}}), ms); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { tabulate_cost(CostSpec::explicit_matrix({{0, -1}, {1, 0}}), ms); }),
            ErrorCode::NegativeCost);
  EXPECT_EQ(code_of([] { CostTensor({20000, 20000}, {}); }), ErrorCode::TooLarge);
  EXPECT_EQ(code_of([] { CostTensor({2, 2}, {0, kInf, kInf, kInf}); }), ErrorCode::AssumptionViolated);
}

TEST(Bound, TwoPointIsHalf) {
  const Instance inst = eot::testing::two_point_instance();
  EXPECT_EQ(inst.K(), 0.5);
  ASSERT_EQ(inst.bound().per_marginal_max.size(), 2u);
  EXPECT_EQ(inst.bound().per_marginal_max[0], 0.5);
  EXPECT_EQ(inst.bound().per_marginal_max[1], 0.5);
}

TEST(Bound, ZeroCost) {
  const DiscreteMeasure m = make_measure({{0.0}, {1.0}}, {0.3, 0.7});
  const CostTensor c({2, 2}, {0, 0, 0, 0});
  EXPECT_EQ(assumption_bound(c, std::vector<DiscreteMeasure>{m, m}).K, 0.0);
}

TEST(Bound, InfiniteEntryWithWeightIsRejected) {
  const DiscreteMeasure m = make_measure({{0.0}, {1.0}}, {0.5, 0.5});
  const CostTensor c({2, 2}, {kInf, 1, 1, 0});
  EXPECT_EQ(code_of([&] { assumption_bound(c, std::vector<DiscreteMeasure>{m, m}); }),
            ErrorCode::AssumptionViolated);
  EXPECT_EQ(code_of([&] { Instance::from_cost({m, m}, c); }), ErrorCode::AssumptionViolated);
}

TEST(Bound, MonotoneInCost) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> bump(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<DiscreteMeasure> ms{make_indexed_measure(random_weights(4, rng)),
                                          make_indexed_measure(random_weights(5, rng))};
    const CostTensor c = random_cost({4, 5}, rng);
    std::vector<double> larger(c.data().begin(), c.data().end());
    for (double& x : larger) x += bump(rng);
    const CostTensor c2({4, 5}, larger);
    EXPECT_LE(assumption_bound(c, ms).K, assumption_bound(c2, ms).K);
  }
}

TEST(Bound, MatchesDirectConditionalSums) {
  std::mt19937_64 rng(12);
  const std::vector<DiscreteMeasure> ms{make_indexed_measure(random_weights(3, rng)),
                                        make_indexed_measure(random_weights(4, rng))};
  const CostTensor c = random_cost({3, 4}, rng);
  double K = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 4; ++j) s += ms[1].weights()[j] * c.at(i, j);
    K = std::max(K, s);
  }
  for (std::size_t j = 0; j < 4; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += ms[0].weights()[i] * c.at(i, j);
    K = std::max(K, s);
  }
  EXPECT_NEAR(assumption_bound(c, ms).K, K, 1e-15);
}

TEST(Json, ParsesTwoPoint) {
  const Instance inst = parse_instance_json(R"({
    "marginals": [{"points": [[0], [1]], "weights": [0.5, 0.5]},
                  {"points": [0, 1], "weights": [0.5, 0.5]}],
    "cost": {"kind": "explicit-matrix", "matrix": [[0, 1], [1, 0]]},
    "metric": "euclidean"})");
  EXPECT_EQ(inst.num_marginals(), 2u);
  EXPECT_EQ(inst.digest(), eot::testing::two_point_instance().digest());
}

TEST(Json, InfinityStringsReachTheBoundCheck) {
  for (const char* word : {"inf", "Infinity"}) {
    const std::string doc = std::string(R"({
      "marginals": [{"points": [[0], [1]], "weights": [0.5, 0.5]},
                    {"points": [[0], [1]], "weights": [0.5, 0.5]}],
      "cost": {"kind": "explicit-matrix", "matrix": [[0, 1], [1, ")") + word + R"("]]}})";
    EXPECT_EQ(code_of([&] { parse_instance_json(doc); }), ErrorCode::AssumptionViolated);
  }
}

TEST(Json, AnalyticKinds) {
  const Instance inst = parse_instance_json(R"({
    "marginals": [{"points": [[0], [2]], "weights": [0.5, 0.5]},
                  {"points": [[1], [3]], "weights": [0.5, 0.5]}],
    "cost": {"kind": "power-distance", "params": {"alpha": 2}}})");
  EXPECT_DOUBLE_EQ(inst.cost().at(0, 1), 1.0 / 9.0);
  const Instance step = parse_instance_json(R"({
    "marginals": [{"points": [[0.1], [0.9]], "weights": [0.5, 0.5]},
                  {"points": [[0.1], [0.9]], "weights": [0.5, 0.5]}],
    "cost": {"kind": "custom-analytic", "params": {"name": "step-example"}}})");
  EXPECT_EQ(step.cost().at(1, 0), 0.5);
}

TEST(Json, Errors) {
  EXPECT_EQ(code_of([] { parse_instance_json("{"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { parse_instance_json(R"({"marginals": []})"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] {
              parse_instance_json(R"({
    "marginals": [{"points": [[0]], "weights": [1]}, {"points": [[0]], "weights": [1]}],
    "cost": {"kind": "explicit-matrix", "matrix": [[0]]}, "metric": "manhattan"})");
            }),
            ErrorCode::Parse);
  EXPECT_EQ(code_of([] { load_instance_file("/nonexistent/instance.json"); }), ErrorCode::Io);
}

TEST(Digest, StableAndSensitive) {
  const Instance a = eot::testing::two_point_instance();
  const Instance b = eot::testing::two_point_instance();
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.digest().size(), 64u);
  std::vector<DiscreteMeasure> m{make_measure({{0.0}, {1.0}}, {0.25, 0.75}),
                                 make_measure({{0.0}, {1.0}}, {0.5, 0.5})};
  const Instance c = Instance::from_cost(std::move(m), make_cost_matrix({{0, 1}, {1, 0}}));
  EXPECT_NE(a.digest(), c.digest());
}

TEST(Digest, KnownSha256) {
  const std::string abc = "abc";
  EXPECT_EQ(sha256_hex(std::as_bytes(std::span(abc.data(), abc.size()))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
