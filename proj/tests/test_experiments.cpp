#include <gtest/gtest.h>

#include <cmath>

#include "gpest/analytic.hpp"
#include "gpest/experiments.hpp"
#include "welford.hpp"

using namespace gpest;

namespace {

Scenario with(Scenario sc, std::uint64_t reps, std::uint64_t seed, unsigned threads = 1) {
  sc.replicates = reps;
  sc.seed = seed;
  sc.threads = threads;
  return sc;
}

void expect_same(const ComponentSummary& a, const ComponentSummary& b) {
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_EQ(a.mse, b.mse);
  EXPECT_EQ(a.se_mean, b.se_mean);
  EXPECT_EQ(a.se_variance, b.se_variance);
  EXPECT_EQ(a.se_mse, b.se_mse);
}

}  // namespace

TEST(Scenario, Validation) {
  const ModelParams p{1, 0, 1};
  EXPECT_NO_THROW(Scenario::naive(p, 5).validate());
  EXPECT_NO_THROW(Scenario::hayashi(p, 3, 0.1).validate());
  EXPECT_NO_THROW(Scenario::corrected(p, 3, 0, 0.1).validate());
  Scenario bad = Scenario::corrected(p, 3, 4, 0.1);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = Scenario::naive(p, 8);
  bad.network = NetworkKind::g2;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = Scenario::hayashi(p, 3, 0.1);
  bad.network = NetworkKind::g2_truncated;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = Scenario::naive(p, 6);
  bad.network = NetworkKind::g1;
  bad.estimator = EstimatorKind::corrected;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = Scenario::naive(p, 1);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = Scenario::naive(p, 4);
  bad.replicates = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  Scenario g1 = Scenario::naive(p, 6);
  g1.network = NetworkKind::g1;
  g1.estimator = EstimatorKind::hayashi;
  EXPECT_NO_THROW(g1.validate());
  EXPECT_EQ(to_string(NetworkKind::g2_truncated), "g2_truncated");
  EXPECT_EQ(to_string(EstimatorKind::corrected), "corrected");
}

TEST(MonteCarlo, HayashiMeanShrinks) {
  const auto s = run_monte_carlo(with(Scenario::hayashi({1, 0, 1}, 2, 0.5), 1000000, 1));
  EXPECT_NEAR(s.theta.mean, std::pow(4.0, -0.25), 4 * s.theta.se_mean);
  EXPECT_EQ(s.replicates, 1000000u);
}

TEST(MonteCarlo, NaiveTwoModeMse) {
  const auto s = run_monte_carlo(with(Scenario::naive({0, 0, 1}, 2), 1000000, 2));
  EXPECT_NEAR(s.nu.mse, 4.0, 4 * s.nu.se_mse);
}

TEST(MonteCarlo, SummaryInvariants) {
  const auto s = run_monte_carlo(with(Scenario::corrected({1, 0.5, 1}, 3, 1, 0.3), 5000, 3));
  for (const auto* c : {&s.theta, &s.eta, &s.nu}) {
    EXPECT_GT(c->se_mean, 0.0);
    EXPECT_GT(c->se_variance, 0.0);
    EXPECT_GT(c->se_mse, 0.0);
    const double bias = c->mean - c->truth;
    EXPECT_GE(c->mse, bias * bias - 1e-12);
  }
  EXPECT_NEAR(s.total_mse, s.theta.mse + s.eta.mse + s.nu.mse, 1e-12 * s.total_mse);
}

TEST(MonteCarlo, AgreesWithWelfordOracle) {
  const Scenario sc = with(Scenario::hayashi({1, 0.5, 2}, 3, 0.2), 20000, 4);
  testing_support::Welford wt, wn;
  const Network net = build_g2(3);
  for (std::uint64_t r = 0; r < sc.replicates; ++r) {
    RandomSource rng(sc.seed, r);
    auto e = sample_amplitudes(sc.params, 8, rng);
    apply_network_inplace(e, perturb(net, sc.noise, rng));
    const auto est = hayashi_estimate(measure(e, SelectionSet::first(8), rng));
    wt.add(est.theta);
    wn.add(est.nu);
  }
  const auto s = run_monte_carlo(sc);
  EXPECT_NEAR(s.theta.mean, wt.mean(), 1e-12);
  EXPECT_NEAR(s.theta.variance, wt.variance(), 1e-10);
  EXPECT_NEAR(s.nu.mean, wn.mean(), 1e-12);
  EXPECT_NEAR(s.nu.variance, wn.variance(), 1e-10);
  EXPECT_NEAR(s.theta.se_mean, wt.se_mean(), 1e-12);
}

TEST(MonteCarlo, NaiveDepthMatchesNaiveScheme) {
  const ModelParams p{1, -0.5, 2};
  const auto a = run_monte_carlo(with(Scenario::naive(p, 16), 20000, 5));
  const auto b = run_monte_carlo(with(Scenario::corrected(p, 4, 0, 0.3), 20000, 5));
  expect_same(a.theta, b.theta);
  expect_same(a.eta, b.eta);
  EXPECT_NEAR(a.nu.mean, b.nu.mean, 1e-12);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  for (const Scenario& base : {Scenario::hayashi({1, 0, 1}, 4, 0.1), Scenario::corrected({1, 0.5, 1}, 4, 2, 0.1)}) {
    const auto one = run_monte_carlo(with(base, 30000, 6, 1));
    const auto four = run_monte_carlo(with(base, 30000, 6, 4));
    expect_same(one.theta, four.theta);
    expect_same(one.eta, four.eta);
    expect_same(one.nu, four.nu);
    EXPECT_EQ(one.total_mse, four.total_mse);
    const auto rb1 = rao_blackwell_mc(with(base, 30000, 6, 1));
    const auto rb3 = rao_blackwell_mc(with(base, 30000, 6, 3));
    expect_same(rb1.nu, rb3.nu);
  }
}

TEST(ConditionalMoments, AgreeWithMeasurementSimulation) {
  const ModelParams p{1.2, -0.4, 1.5};
  const int m = 3, m0 = 1;
  const double eps = 0.4;
  RandomSource net_rng(7, 0);
  const Network net = perturb(build_g2_truncated(m, m0), {eps}, net_rng);
  std::vector<double> gains(8, 1.0);
  apply_network_inplace(std::span<double>(gains), net);
  const auto layout = corrected_layout(m, m0, eps);
  const auto cm = conditional_moments(layout, p, gains);
  testing_support::Welford wt, wn;
  for (int r = 0; r < 400000; ++r) {
    RandomSource rng(8, r);
    auto e = sample_amplitudes(p, 8, rng);
    apply_network_inplace(e, net);
    const auto est = evaluate(layout, measure(e, layout.selection, rng));
    wt.add(est.theta);
    wn.add(est.nu);
  }
  EXPECT_NEAR(wt.mean(), cm.mean.theta, 4 * wt.se_mean());
  EXPECT_NEAR(wn.mean(), cm.mean.nu, 4 * wn.se_mean());
  EXPECT_NEAR(wt.variance(), cm.variance.theta, 0.01 * cm.variance.theta);
  EXPECT_NEAR(wn.variance(), cm.variance.nu, 0.015 * cm.variance.nu);
}

TEST(RaoBlackwell, NoiselessIsExact) {
  const ModelParams p{1, 0.5, 2};
  const auto s = rao_blackwell_mc(with(Scenario::hayashi(p, 5, 0.0), 100, 9));
  const auto v2 = hayashi_covariance(p.nu, 32);
  EXPECT_NEAR(s.theta.mean, 1.0, 1e-12);
  EXPECT_NEAR(s.theta.variance, v2(0, 0), 1e-12);
  EXPECT_NEAR(s.nu.mean, 2.0, 1e-12);
  EXPECT_NEAR(s.nu.variance, v2(2, 2), 1e-12);
  EXPECT_NEAR(s.nu.se_mean, 0.0, 1e-12);
  const auto naive = rao_blackwell_mc(with(Scenario::naive(p, 32), 100, 9));
  EXPECT_DOUBLE_EQ(naive.nu.variance, naive_covariance(p.nu, 32)(2, 2));
}

TEST(RaoBlackwell, MatchesEngine) {
  const ModelParams p{1, 0, 1};
  const auto s = rao_blackwell_mc(with(Scenario::hayashi(p, 4, 0.1), 10000, 10));
  const auto en = hayashi_moments(g2_moment_engine(p, 0.1, 4, 4));
  EXPECT_NEAR(s.nu.mean, en.e_nu, 4 * s.nu.se_mean);
  EXPECT_NEAR(s.theta.mean, en.e_theta, 4 * s.theta.se_mean);
  EXPECT_NEAR(s.theta.variance, en.v_theta, 4 * s.theta.se_variance);
  EXPECT_NEAR(s.nu.variance, en.v_nu, 4 * s.nu.se_variance);
}

TEST(RaoBlackwell, MatchesEngineForCorrectedDepths) {
  const ModelParams p{1.5, 0.5, 1};
  for (int m = 2; m <= 6; m += 2) {
    for (int m0 = 0; m0 <= m; ++m0) {
      const auto s = rao_blackwell_mc(with(Scenario::corrected(p, m, m0, 0.5), 20000, 11));
      const auto en = corrected_moments(g2_moment_engine(p, 0.5, m, m0));
      EXPECT_NEAR(s.nu.mean, en.e_nu, 4 * s.nu.se_mean + 1e-12) << m << " " << m0;
      EXPECT_NEAR(s.nu.variance, en.v_nu, 4 * s.nu.se_variance + 1e-12) << m << " " << m0;
      EXPECT_NEAR(s.theta.variance, en.v_theta, 4 * s.theta.se_variance + 1e-12) << m << " " << m0;
    }
  }
}

// Per-replicate variance of plain MC over that of the conditional means is
// V(theta_hat) / V(E(theta_hat | angles)); the engine gives both exactly.
TEST(RaoBlackwell, ReducesVariance) {
  for (const auto& [p, at_least] : {std::pair{ModelParams{1, 0, 1}, 2.0}, std::pair{ModelParams{0.5, 0, 3}, 10.0}}) {
    const Scenario sc = with(Scenario::hayashi(p, 4, 0.5), 100000, 12);
    const auto plain = run_monte_carlo(sc);
    const auto rb = rao_blackwell_mc(sc);
    const auto en = hayashi_moments(g2_moment_engine(p, 0.5, 4, 4));
    const double conditional = en.v_theta - (p.nu + 1) / (2 * 16.0);  // minus E V(theta_hat | angles)
    const double exact_ratio = en.v_theta / conditional;
    const double measured = plain.theta.variance / (rb.theta.se_mean * rb.theta.se_mean * double(sc.replicates));
    EXPECT_NEAR(measured, exact_ratio, 0.05 * exact_ratio);
    EXPECT_GT(measured, at_least);
  }
}

TEST(Crossover, ResidualAndAsymptote) {
  for (const double nu : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    for (const double eps : {0.05, 0.1, 0.2, 0.5, 1.0, 3.0}) {
      const auto c = crossover_theta(nu, eps);
      EXPECT_GT(c.theta_star, 0.0);
      EXPECT_LE(c.residual, 1e-9);
      const auto at = mse_n2(c.theta_star, 0, nu, eps);
      EXPECT_NEAR(at.m_hat, at.m_bar, 1e-9 * at.m_bar);
    }
  }
  EXPECT_NEAR(crossover_theta(1e6, 0.2).theta_star, crossover_asymptote(0.2), 1e-3 * crossover_asymptote(0.2));
}

TEST(Crossover, MonotoneInEpsilon) {
  for (const double nu : {0.1, 1.0, 10.0, 100.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps = 0.02; eps <= 2.0; eps += 0.02) {
      const double t = crossover_theta(nu, eps).theta_star;
      EXPECT_LT(t, prev) << nu << " " << eps;
      prev = t;
    }
  }
}

TEST(Crossover, Errors) {
  EXPECT_THROW(crossover_theta(1.0, 0.0), std::domain_error);
  EXPECT_THROW(crossover_theta(-1.0, 0.1), std::invalid_argument);
}

TEST(Table1, GridShapeAndSeparation) {
  GridSpec g;
  g.n_list = {4, 16};
  g.theta_list = {0, 2};
  g.nu_list = {1};
  g.epsilon = 0.1;
  g.replicates = 2000;
  g.seed = 3;
  const auto rows = table1_grid(g);
  // per cell: hayashi + corrected(m/2) + corrected(m)
  ASSERT_EQ(rows.size(), 2u * 2u * 3u);
  EXPECT_EQ(rows[0].family, "hayashi");
  EXPECT_EQ(rows[1].family, "corrected");
  EXPECT_EQ(rows[1].m0, 1);
  EXPECT_EQ(rows[2].m0, 2);
  for (const auto& r : rows) {
    EXPECT_LE(r.rel_err, 1.0);
    EXPECT_TRUE(std::isfinite(r.rel_err));
    EXPECT_GT(r.se, 0.0);
    EXPECT_NEAR(r.rel_err, 1 - r.mse / r.naive_mse, 1e-15);
  }
  // Cells draw from disjoint streams.
  EXPECT_NE(rows[0].naive_mse, rows[3].naive_mse);
  g.threads = 3;
  const auto again = table1_grid(g);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].rel_err, again[i].rel_err);
}

TEST(Table1, NoiselessHayashiImprovesNu) {
  GridSpec g;
  g.n_list = {16};
  g.theta_list = {0};
  g.nu_list = {0};
  g.epsilon = 0.0;
  g.policy = DepthPolicy::full_m;
  g.replicates = 20000;
  const auto rows = table1_grid(g);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[0].rel_err, 0.0);
}

TEST(Table1, Validation) {
  GridSpec g;
  g.n_list = {8};
  g.theta_list = {1};
  g.nu_list = {1};
  EXPECT_THROW(g.validate(), std::invalid_argument);  // half of m = 3
  g.n_list = {12};
  g.policy = DepthPolicy::full_m;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g.n_list = {16};
  g.policy = DepthPolicy::explicit_depth;
  g.explicit_m0 = 5;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g.explicit_m0 = 3;
  EXPECT_NO_THROW(g.validate());
  g.theta_list.clear();
  EXPECT_THROW(g.validate(), std::invalid_argument);
}
