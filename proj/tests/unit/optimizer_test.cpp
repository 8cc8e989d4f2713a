#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bandsplit/error.hpp"
#include "bandsplit/optimizer.hpp"
#include "test_support.hpp"

namespace bandsplit {
namespace {

using testing::det_band;
using testing::random_instance;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoError;
}

double even_split_objective(double lambda, const std::vector<BandStats>& s) {
  RateAllocation a{std::vector<double>(s.size(), lambda / static_cast<double>(s.size()))};
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (a.lambdas[j] >= s[j].mu) return INFINITY;
  }
  return aggregate_delay(a, s);
}

double proportional_objective(double lambda, const std::vector<BandStats>& s) {
  double cap = 0.0;
  for (const auto& b : s) cap += b.mu;
  RateAllocation a;
  for (const auto& b : s) a.lambdas.push_back(lambda * b.mu / cap);
  return aggregate_delay(a, s);
}

TEST(GammaApprox, HandEvaluated) {
  std::vector<double> mus{10.0, 10.0};
  EXPECT_NEAR(gamma_approx(12.0, mus), 4000.0 / 1536.0, 1e-12);
}

TEST(GammaApprox, SingleBand) {
  std::vector<double> mus{8.0};
  EXPECT_NEAR(gamma_approx(3.0, mus), 512.0 / (2.0 * 3.0 * 25.0), 1e-12);
}

TEST(GammaApprox, Overload) {
  std::vector<double> mus{10.0, 10.0};
  EXPECT_EQ(code_of([&] { gamma_approx(20.0, mus); }), ErrorCode::kOverload);
}

TEST(LambdaStar, SymmetricAllMinusIsEqual) {
  std::vector<BandStats> s(2, det_band(10.0, 0.05, 0.003));
  std::vector<double> mus{10.0, 10.0};
  std::vector<int> minus{-1, -1};
  auto r = lambda_star_given_gamma(gamma_approx(12.0, mus), s, 12.0, minus);
  EXPECT_DOUBLE_EQ(r[0], r[1]);
}

TEST(LambdaStar, PlusBranchExceedsServiceRate) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    auto inst = random_instance(rng, 2 + i % 2);
    std::vector<int> plus(inst.stats.size(), +1);
    std::vector<double> mus;
    for (const auto& b : inst.stats) mus.push_back(b.mu);
    const double gamma = 10.0 * gamma_approx(inst.lambda, mus);
    auto r = lambda_star_given_gamma(gamma, inst.stats, inst.lambda, plus);
    for (std::size_t j = 0; j < r.size(); ++j) EXPECT_GT(r[j], inst.stats[j].mu);
  }
}

TEST(LambdaStar, NonPositiveRadicand) {
  std::vector<BandStats> s{det_band(10.0, 0.1, 0.011)};
  std::vector<int> minus{-1};
  EXPECT_EQ(code_of([&] { lambda_star_given_gamma(0.0, s, 5.0, minus); }), ErrorCode::kBranchInvalid);
}

TEST(LambdaStar, MinusRootNonDecreasingInGamma) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    auto inst = random_instance(rng, 1);
    double prev = -INFINITY;
    for (double g = 1e-3; g < 1e3; g *= 1.1) {
      std::vector<int> minus{-1};
      try {
        const double r = lambda_star_given_gamma(g, inst.stats, inst.lambda, minus)[0];
        EXPECT_GE(r, prev - 1e-12);
        prev = r;
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::kBranchInvalid);
      }
    }
  }
}

TEST(Solve, SingleBandTakesEverything) {
  std::vector<BandStats> s{BandStats{10.0, 0.05, 0.3, 0.2}};
  for (auto* solve : {&solve_closed_form, &solve_numeric, &solve_grid}) {
    auto sol = solve(5.0, s, {});
    ASSERT_EQ(sol.alloc.size(), 1u);
    EXPECT_DOUBLE_EQ(sol.alloc.lambdas[0], 5.0);
  }
}

TEST(Solve, IdenticalBandsSplitEvenly) {
  std::vector<BandStats> s(2, det_band(8.0, 0.02, 0.0005));
  for (auto* solve : {&solve_closed_form, &solve_numeric, &solve_grid}) {
    auto sol = solve(10.0, s, {});
    EXPECT_NEAR(sol.alloc.lambdas[0], 5.0, 1e-6);
    EXPECT_NEAR(sol.alloc.lambdas[1], 5.0, 1e-6);
  }
}

TEST(Solve, GoldenAsymmetricInstance) {
  // Frozen from an independent brute-force scan of lambda_1 at 1e-4 steps.
  constexpr double kGoldenLambda1 = 10.0791;
  constexpr double kGoldenObjective = 0.1362396985743432;
  std::vector<BandStats> s{det_band(20.0, 0.1, 0.011), det_band(10.0, 0.1, 0.011)};
  for (auto* solve : {&solve_closed_form, &solve_numeric, &solve_grid}) {
    auto sol = solve(12.0, s, {});
    EXPECT_NEAR(sol.alloc.lambdas[0], kGoldenLambda1, 1e-3 * 12.0);
    EXPECT_NEAR(sol.alloc.lambdas[1], 12.0 - kGoldenLambda1, 1e-3 * 12.0);
    EXPECT_NEAR(sol.objective, kGoldenObjective, 1e-8);
    EXPECT_TRUE(feasible(sol.alloc, s, 12.0));
  }
}

TEST(Solve, ClosedFormDelegatesBelowThreshold) {
  // With two bands 2*lambda < 4*mu_max, so the default threshold of 10 never
  // trusts the approximation.
  std::vector<BandStats> s{det_band(10.0, 0.01, 0.0002), det_band(9.8, 0.01, 0.0002)};
  EXPECT_EQ(solve_closed_form(19.0, s, {}).method, SolveMethod::kNumericGamma);
}

TEST(Solve, ApproximateRootsMissingTheSumAreRejected) {
  OptimizerConfig cfg;
  cfg.approx_threshold = 1.0;
  std::vector<BandStats> s{det_band(10.0, 0.01, 0.0002), det_band(9.8, 0.01, 0.0002)};
  std::vector<double> mus{10.0, 9.8};
  std::vector<int> minus{-1, -1};
  const auto approx = lambda_star_given_gamma(gamma_approx(19.0, mus), s, 19.0, minus);
  EXPECT_GT(std::abs(approx[0] + approx[1] - 19.0), 1e-3);
  auto sol = solve_closed_form(19.0, s, cfg);
  EXPECT_EQ(sol.method, SolveMethod::kNumericGamma);
  EXPECT_TRUE(feasible(sol.alloc, s, 19.0));
}

TEST(Solve, ClosedFormWithLowThresholdNoWorseThanGridPlusSlack) {
  OptimizerConfig cfg;
  cfg.approx_threshold = 0.1;
  std::mt19937_64 rng(13);
  for (int i = 0; i < 30; ++i) {
    auto inst = random_instance(rng, 2);
    auto approx = solve_closed_form(inst.lambda, inst.stats, cfg);
    auto numeric = solve_numeric(inst.lambda, inst.stats, {});
    if (approx.method == SolveMethod::kClosedFormApprox) {
      EXPECT_LE(numeric.objective, approx.objective + 1e-9);
    }
  }
}

TEST(Solve, WeakBandDropsOutOfActiveSet) {
  std::vector<BandStats> s{BandStats{20.0, 1.0 / 400.0, 0.01, 0.0001}, BandStats{0.5, 8.0, 1.0, 50.0}};
  auto numeric = solve_numeric(5.0, s, {});
  EXPECT_DOUBLE_EQ(numeric.alloc.lambdas[1], 0.0);
  EXPECT_NEAR(numeric.alloc.lambdas[0], 5.0, 1e-12);
  EXPECT_TRUE(feasible_on_support(numeric.alloc, s, 5.0));
  auto grid = solve_grid(5.0, s, {});
  EXPECT_LT(grid.alloc.lambdas[1], 1e-6);
  EXPECT_NEAR(numeric.objective, grid.objective, 1e-9);
  auto closed = solve_closed_form(5.0, s, {});
  EXPECT_DOUBLE_EQ(closed.alloc.lambdas[1], 0.0);
}

TEST(Solve, OverloadRejected) {
  std::vector<BandStats> s(2, det_band(10.0, 0.01, 0.0002));
  EXPECT_EQ(code_of([&] { solve_closed_form(20.0, s, {}); }), ErrorCode::kOverload);
  EXPECT_EQ(code_of([&] { solve_numeric(25.0, s, {}); }), ErrorCode::kOverload);
}

TEST(Solve, GridDimensionLimit) {
  std::vector<BandStats> s(5, det_band(10.0, 0.01, 0.0002));
  EXPECT_EQ(code_of([&] { solve_grid(10.0, s, {}); }), ErrorCode::kDimensionTooLarge);
  EXPECT_NO_THROW(solve_numeric(10.0, s, {}));
}

TEST(SolveProperty, OracleAgreementOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    auto inst = random_instance(rng, 2 + i % 2);
    auto grid = solve_grid(inst.lambda, inst.stats, {});
    auto closed = solve_closed_form(inst.lambda, inst.stats, {});
    auto numeric = solve_numeric(inst.lambda, inst.stats, {});
    EXPECT_LE(std::abs(closed.objective - grid.objective), std::max(1e-3 * grid.objective, 1e-6)) << i;
    EXPECT_LE(std::abs(numeric.objective - grid.objective), 1e-4 * grid.objective) << i;
    EXPECT_TRUE(feasible_on_support(numeric.alloc, inst.stats, inst.lambda)) << i;
  }
}

TEST(SolveProperty, StationarityAtInteriorSolutions) {
  std::mt19937_64 rng(99);
  int interior = 0;
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, 2 + i % 2);
    auto sol = solve_numeric(inst.lambda, inst.stats, {});
    if (!feasible(sol.alloc, inst.stats, inst.lambda)) continue;
    ++interior;
    std::vector<double> grads;
    for (std::size_t j = 0; j < inst.stats.size(); ++j) {
      const double l = sol.alloc.lambdas[j];
      const double h = 1e-5 * std::min(l, inst.stats[j].mu - l);
      grads.push_back((objective_term(l + h, inst.lambda, inst.stats[j]) -
                       objective_term(l - h, inst.lambda, inst.stats[j])) /
                      (2.0 * h));
    }
    const auto [lo, hi] = std::minmax_element(grads.begin(), grads.end());
    EXPECT_LE((*hi - *lo) / std::abs(*hi), 1e-4) << i;
  }
  EXPECT_GT(interior, 50);
}

TEST(SolveProperty, DominatesEvenAndProportionalSplits) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, 2 + i % 2);
    auto sol = solve_closed_form(inst.lambda, inst.stats, {});
    EXPECT_LE(sol.objective, even_split_objective(inst.lambda, inst.stats) + 1e-12);
    EXPECT_LE(sol.objective, proportional_objective(inst.lambda, inst.stats) + 1e-12);
  }
}

TEST(SolveProperty, ScalesWithRates) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> cd(0.1, 10.0);
  for (int i = 0; i < 30; ++i) {
    auto inst = random_instance(rng, 2 + i % 2);
    const double c = cd(rng);
    auto scaled = inst.stats;
    for (auto& s : scaled) {
      s.mu *= c;
      s.x2 /= c * c;
      s.vbar /= c;
      s.v2 /= c * c;
    }
    auto a = solve_numeric(inst.lambda, inst.stats, {});
    auto b = solve_numeric(c * inst.lambda, scaled, {});
    for (std::size_t j = 0; j < a.alloc.size(); ++j) {
      EXPECT_NEAR(b.alloc.lambdas[j], c * a.alloc.lambdas[j], 1e-7 * c * inst.lambda);
    }
  }
}

TEST(SolveProperty, OnlyAllMinusBranchStaysBelowServiceRates) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    auto inst = random_instance(rng, 2);
    const auto sol = solve_numeric(inst.lambda, inst.stats, {});
    if (!feasible(sol.alloc, inst.stats, inst.lambda)) continue;
    for (int code = 0; code < 4; ++code) {
      std::vector<int> branch{(code & 2) ? 1 : -1, (code & 1) ? 1 : -1};
      auto r = lambda_star_given_gamma(sol.gamma, inst.stats, inst.lambda, branch);
      const bool below = r[0] < inst.stats[0].mu && r[1] < inst.stats[1].mu;
      EXPECT_EQ(below, code == 0);
    }
    // The exact multiplier reproduces the solution on the all-minus branch.
    auto r = lambda_star_given_gamma(sol.gamma, inst.stats, inst.lambda, std::vector<int>{-1, -1});
    EXPECT_NEAR(r[0], sol.alloc.lambdas[0], 1e-6 * inst.lambda);
  }
}

}  // namespace
}  // namespace bandsplit
