#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eot/dual.hpp"
#include "eot/error.hpp"
#include "eot/numeric.hpp"
#include "eot/primal.hpp"
#include "eot/sinkhorn.hpp"
#include "test_support.hpp"

namespace {

using namespace eot;
using eot::testing::random_instance;
using eot::testing::sup_distance;

double closed_form(double eps) { return eps * std::log(2.0 / (1.0 + std::exp(-1.0 / eps))); }

TEST(Sinkhorn, SingletonConvergesImmediately) {
  const SolveReport r = sinkhorn_solve(eot::testing::singleton_instance(), Epsilon(0.5));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.dual_value, 0.0);
  EXPECT_EQ(r.potentials[0][0], 0.0);
  EXPECT_EQ(r.potentials[1][0], 0.0);
}

TEST(Sinkhorn, TwoPointClosedForm) {
  const Instance inst = eot::testing::two_point_instance();
  const SolveReport one = sinkhorn_solve(inst, Epsilon(1.0));
  EXPECT_TRUE(one.converged);
  EXPECT_LE(one.iterations, 2u);
  EXPECT_NEAR(one.dual_value, closed_form(1.0), 1e-14);
  EXPECT_NEAR(one.dual_value, 0.379885, 1e-6);
  const SolveReport tenth = sinkhorn_solve(inst, Epsilon(0.1));
  EXPECT_NEAR(tenth.dual_value, closed_form(0.1), 1e-14);
  EXPECT_NEAR(tenth.dual_value, 0.069310, 1e-6);
  const double a = 0.5 * closed_form(1.0);
  for (const auto& p : one.potentials) {
    for (double x : p) EXPECT_NEAR(x, a, 1e-14);
  }
}

TEST(Sinkhorn, ConvergedReportIsConsistent) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(3 + trial % 7, 2 + trial % 5, rng);
    const Epsilon eps(0.1 + 0.05 * (trial % 4));
    const SolveReport r = sinkhorn_solve(inst, eps);
    ASSERT_TRUE(r.converged);
    const Potential& u = r.potentials[0];
    const Potential& v = r.potentials[1];
    EXPECT_LE(sup_distance(u, ceps_transform_columns(v, inst.cost(), inst.measure(1), eps)), 1e-9);
    EXPECT_LE(sup_distance(v, ceps_transform(u, inst.cost(), inst.measure(0), eps)), 1e-9);
    EXPECT_LE(r.marginal_residual, 1e-9);
    EXPECT_NEAR(r.dual_value, dual_value(u, v, inst.cost(), inst.measure(0), inst.measure(1), eps), 1e-15);
    EXPECT_LE(std::fabs(r.gap), 1e-8);
    EXPECT_GE(r.gap, -1e-9);
    for (const auto& p : r.potentials) {
      for (double x : p) {
        EXPECT_GE(x, -inst.K() - 1e-6);
        EXPECT_LE(x, inst.K() + 1e-6);
      }
    }
    EXPECT_NEAR(compensated_dot(u, inst.measure(0).weights()), compensated_dot(v, inst.measure(1).weights()),
                1e-12);
  }
}

TEST(Sinkhorn, TraceIsMonotone) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = random_instance(8, 6, rng);
    const SolveReport r = sinkhorn_solve(inst, Epsilon(0.02));
    ASSERT_FALSE(r.trace.empty());
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_GE(r.trace[k].dual, r.trace[k - 1].dual - 1e-12);
      EXPECT_EQ(r.trace[k].iter, r.trace[k - 1].iter + 1);
    }
  }
}

TEST(Sinkhorn, IteratesStayWithinK) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(6, 7, rng);
    const double K = inst.K();
    SolveOptions opts;
    std::size_t seen = 0;
    opts.on_iterate = [&](std::size_t, std::span<const Potential> pots) {
      ++seen;
      for (const auto& p : pots) {
        for (double x : p) {
          EXPECT_GE(x, -K - 1e-6);
          EXPECT_LE(x, K + 1e-6);
        }
      }
    };
    sinkhorn_solve(inst, Epsilon(0.05), opts);
    EXPECT_GT(seen, 0u);
  }
}

TEST(Sinkhorn, MaxItersReturnsUnconvergedReport) {
  std::mt19937_64 rng(24);
  const Instance inst = random_instance(10, 10, rng);
  SolveOptions opts;
  opts.max_iters = 2;
  const SolveReport r = sinkhorn_solve(inst, Epsilon(0.01), opts);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_EQ(r.potentials.size(), 2u);
}

TEST(Sinkhorn, AnnealingReachesSameOptimum) {
  std::mt19937_64 rng(25);
  const Instance inst = random_instance(12, 9, rng);
  const SolveReport plain = sinkhorn_solve(inst, Epsilon(0.01));
  SolveOptions opts;
  opts.eps_schedule = {1.0, 0.3, 0.1, 0.03};
  const SolveReport annealed = sinkhorn_solve(inst, Epsilon(0.01), opts);
  ASSERT_TRUE(plain.converged);
  ASSERT_TRUE(annealed.converged);
  EXPECT_NEAR(plain.dual_value, annealed.dual_value, 1e-9);
  EXPECT_GT(annealed.total_iterations, annealed.iterations);
}

TEST(Sinkhorn, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(26);
  const Instance inst = random_instance(400, 300, rng);
  SolveOptions one, many;
  many.threads = 4;
  const SolveReport a = sinkhorn_solve(inst, Epsilon(0.05), one);
  const SolveReport b = sinkhorn_solve(inst, Epsilon(0.05), many);
  EXPECT_EQ(a.potentials, b.potentials);
  EXPECT_EQ(a.dual_value, b.dual_value);
  EXPECT_EQ(a.plan.weights, b.plan.weights);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Sinkhorn, OptionsAreValidated) {
  const Instance inst = eot::testing::two_point_instance();
  SolveOptions bad;
  bad.tol_potential = 0.0;
  EXPECT_THROW(sinkhorn_solve(inst, Epsilon(1.0), bad), Error);
  SolveOptions sched;
  sched.eps_schedule = {0.5, 1.0};
  EXPECT_THROW(sinkhorn_solve(inst, Epsilon(0.1), sched), Error);
  SolveOptions zero_iters;
  zero_iters.max_iters = 0;
  EXPECT_THROW(sinkhorn_solve(inst, Epsilon(0.1), zero_iters), Error);
}

TEST(MarginalResidual, Examples) {
  const DiscreteMeasure mu = make_indexed_measure({0.3, 0.7});
  const DiscreteMeasure nu = make_indexed_measure({0.4, 0.6});
  CouplingPlan product{{2, 2}, {0.12, 0.18, 0.28, 0.42}};
  EXPECT_LE(marginal_residual(product, mu, nu), 1e-16);
  CouplingPlan perturbed = product;
  perturbed.weights[1] += 1e-3;
  EXPECT_GE(marginal_residual(perturbed, mu, nu), 5e-4);

  const Instance inst = eot::testing::two_point_instance();
  const SolveReport r = sinkhorn_solve(inst, Epsilon(1.0));
  EXPECT_LE(marginal_residual(r.plan, inst.measure(0), inst.measure(1)), 1e-9);
}

}  // namespace
