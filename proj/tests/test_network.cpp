#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gpest/network.hpp"
#include "welford.hpp"

using namespace gpest;

namespace {

constexpr double kQuarter = std::numbers::pi / 4;

AmplitudeEnsemble random_ensemble(std::size_t n, std::uint64_t stream) {
  RandomSource rng(100, stream);
  return sample_amplitudes({0.3, -1.2, 2.0}, n, rng);
}

double energy(const AmplitudeEnsemble& e) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += e.a[i] * e.a[i] + e.b[i] * e.b[i];
  return s;
}

// Dense Givens matrix for one op, built independently of compile_rotation.
Eigen::MatrixXd givens(std::size_t n, const BeamSplitterOp& op) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto j = static_cast<Eigen::Index>(op.j - 1), k = static_cast<Eigen::Index>(op.k - 1);
  g(j, j) = std::cos(op.tau);
  g(j, k) = std::sin(op.tau);
  g(k, j) = -std::sin(op.tau);
  g(k, k) = std::cos(op.tau);
  return g;
}

}  // namespace

TEST(ApplyOp, QuarterTurnSplitsEvenly) {
  AmplitudeEnsemble e({1.0, 0.0}, {0.0, 0.0});
  apply_op(e, {1, 2, kQuarter});
  EXPECT_NEAR(e.a[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(e.a[1], -std::sqrt(0.5), 1e-15);
  EXPECT_EQ(e.b[0], 0.0);
}

TEST(ApplyOp, ZeroAngleIsIdentity) {
  auto e = random_ensemble(5, 1);
  const auto before = e;
  apply_op(e, {2, 4, 0.0});
  EXPECT_EQ(e.a, before.a);
  EXPECT_EQ(e.b, before.b);
}

TEST(ApplyOp, PreservesPairNorms) {
  for (const double tau : {0.1, 0.7, -2.3, 5.0}) {
    AmplitudeEnsemble e({1.0, 2.0}, {3.0, 4.0});
    apply_op(e, {1, 2, tau});
    EXPECT_NEAR(e.a[0] * e.a[0] + e.a[1] * e.a[1], 5.0, 1e-12);
    EXPECT_NEAR(e.b[0] * e.b[0] + e.b[1] * e.b[1], 25.0, 1e-12);
  }
}

TEST(ApplyOp, ReadsOldValuesBeforeWriting) {
  AmplitudeEnsemble e({1.0, 2.0, 7.0}, {0.0, 0.0, 0.0});
  apply_op(e, {3, 1, 0.4});
  EXPECT_NEAR(e.a[2], 7.0 * std::cos(0.4) + 1.0 * std::sin(0.4), 1e-15);
  EXPECT_NEAR(e.a[0], -7.0 * std::sin(0.4) + 1.0 * std::cos(0.4), 1e-15);
  EXPECT_EQ(e.a[1], 2.0);
}

TEST(ApplyOp, RejectsBadIndices) {
  AmplitudeEnsemble e(3);
  EXPECT_THROW(apply_op(e, {0, 1, 0.1}), std::out_of_range);
  EXPECT_THROW(apply_op(e, {1, 4, 0.1}), std::out_of_range);
  EXPECT_THROW(apply_op(e, {2, 2, 0.1}), std::invalid_argument);
}

TEST(BuildG1, FourModes) {
  const Network net = build_g1(4);
  ASSERT_EQ(net.ops.size(), 3u);
  EXPECT_EQ(net.ops[0], (BeamSplitterOp{1, 2, kQuarter}));
  EXPECT_EQ(net.ops[1].j, 1u);
  EXPECT_EQ(net.ops[1].k, 3u);
  EXPECT_NEAR(net.ops[1].tau, std::atan(1 / std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(net.ops[2].tau, std::atan(1 / std::sqrt(3.0)), 1e-15);
  EXPECT_EQ(net.ops[2].k, 4u);
}

TEST(BuildG1, TwoModesAndErrors) {
  EXPECT_EQ(build_g1(2).ops, (std::vector<BeamSplitterOp>{{1, 2, std::atan(1.0)}}));
  EXPECT_THROW(build_g1(1), std::invalid_argument);
}

TEST(BuildG1, ConcentratesMean) {
  AmplitudeEnsemble e({1.0, 2.0, 3.0, 4.0}, {0, 0, 0, 0});
  e = apply_network(e, build_g1(4));
  EXPECT_NEAR(e.a[0], 5.0, 1e-14);
}

TEST(BuildG2, Shapes) {
  EXPECT_EQ(build_g2(2).ops, (std::vector<BeamSplitterOp>{{1, 2, kQuarter}, {3, 4, kQuarter}, {1, 3, kQuarter}}));
  EXPECT_TRUE(build_g2(0).ops.empty());
  EXPECT_EQ(build_g2(0).n, 1u);
  const Network g3 = build_g2(3);
  ASSERT_EQ(g3.ops.size(), 7u);
  EXPECT_EQ(g3.ops[3], (BeamSplitterOp{7, 8, kQuarter}));
  EXPECT_EQ(g3.ops[4], (BeamSplitterOp{1, 3, kQuarter}));
  EXPECT_EQ(g3.ops[5], (BeamSplitterOp{5, 7, kQuarter}));
  EXPECT_EQ(g3.ops[6], (BeamSplitterOp{1, 5, kQuarter}));
}

TEST(BuildG2, Truncated) {
  EXPECT_EQ(build_g2_truncated(2, 1).ops, (std::vector<BeamSplitterOp>{{1, 2, kQuarter}, {3, 4, kQuarter}}));
  EXPECT_EQ(build_g2_truncated(5, 5), build_g2(5));
  EXPECT_TRUE(build_g2_truncated(5, 0).ops.empty());
  EXPECT_EQ(build_g2_truncated(5, 0).n, 32u);
  EXPECT_THROW(build_g2_truncated(3, 4), std::invalid_argument);
  EXPECT_THROW(build_g2_truncated(3, -1), std::invalid_argument);
}

TEST(Perturb, ZeroNoiseIsIdentityAndDrawsNothing) {
  RandomSource rng(1, 1), twin(1, 1);
  const Network net = build_g2(3);
  EXPECT_EQ(perturb(net, {0.0}, rng), net);
  EXPECT_EQ(rng(), twin());
}

TEST(Perturb, AngleVarianceAndIndependence) {
  const Network net = build_g2(2);
  testing_support::Welford w0;
  double s01 = 0.0, s02 = 0.0, s12 = 0.0;
  const int draws = 100000;
  for (int r = 0; r < draws; ++r) {
    RandomSource rng(2, r);
    const Network p = perturb(net, {1.0}, rng);
    ASSERT_EQ(p.ops[2].j, 1u);
    ASSERT_EQ(p.ops[2].k, 3u);
    const double d0 = p.ops[0].tau - kQuarter, d1 = p.ops[1].tau - kQuarter, d2 = p.ops[2].tau - kQuarter;
    w0.add(d0);
    s01 += d0 * d1;
    s02 += d0 * d2;
    s12 += d1 * d2;
  }
  const double v = std::log(2.0);
  EXPECT_NEAR(w0.variance(), v, 0.02 * v);
  EXPECT_LT(std::abs(s01 / draws / v), 0.01);
  EXPECT_LT(std::abs(s02 / draws / v), 0.01);
  EXPECT_LT(std::abs(s12 / draws / v), 0.01);
}

TEST(Perturb, RejectsNegativeEpsilon) {
  RandomSource rng(0, 0);
  EXPECT_THROW(perturb(build_g2(1), {-0.1}, rng), std::invalid_argument);
}

TEST(ApplyNetwork, NoiselessG2Concentrates) {
  const AmplitudeEnsemble e({1.5, 1.5, 1.5, 1.5}, {-2, -2, -2, -2});
  const auto out = apply_network(e, build_g2(2));
  EXPECT_NEAR(out.a[0], 3.0, 1e-14);
  EXPECT_NEAR(out.b[0], -4.0, 1e-14);
  for (int i = 1; i < 4; ++i) {
    EXPECT_NEAR(out.a[i], 0.0, 1e-14);
    EXPECT_NEAR(out.b[i], 0.0, 1e-14);
  }
}

TEST(ApplyNetwork, EmptyIsIdentityAndMismatchThrows) {
  const auto e = random_ensemble(4, 2);
  const auto out = apply_network(e, Network{4, {}});
  EXPECT_EQ(out.a, e.a);
  EXPECT_THROW(apply_network(e, build_g2(3)), std::invalid_argument);
}

TEST(ApplyNetwork, ConservesEnergyUnderNoise) {
  for (int m : {1, 4, 8, 12}) {
    RandomSource rng(3, m);
    const auto e = random_ensemble(std::size_t{1} << m, m);
    const auto out = apply_network(e, perturb(build_g2(m), {2.0}, rng));
    EXPECT_NEAR(energy(out), energy(e), 1e-10 * energy(e)) << "m=" << m;
  }
}

TEST(CompileRotation, MatchesProductOfGivens) {
  RandomSource rng(4, 0);
  const Network net = perturb(build_g2(3), {0.7}, rng);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(8, 8);
  for (const auto& op : net.ops) expected = givens(8, op) * expected;
  EXPECT_LE((compile_rotation(net) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(CompileRotation, G2FirstRow) {
  const RotationMatrix r = compile_rotation(build_g2(2));
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(r(0, c), 0.5, 1e-15);
  EXPECT_EQ(compile_rotation(Network{3, {}}), Eigen::MatrixXd::Identity(3, 3));
}

TEST(CompileRotation, OrthogonalAndAgreesWithApply) {
  for (int trial = 0; trial < 20; ++trial) {
    RandomSource rng(5, trial);
    const int m = 1 + trial % 6;
    const std::size_t n = std::size_t{1} << m;
    const Network net = perturb(trial % 2 ? build_g2(m) : build_g1(n), {1.5}, rng);
    const RotationMatrix r = compile_rotation(net);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(r.rows(), r.cols());
    EXPECT_LE((r * r.transpose() - id).cwiseAbs().maxCoeff(), 1e-12);
    const auto e = random_ensemble(n, 50 + trial);
    const auto out = apply_network(e, net);
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(e.a.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(e.b.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd ra = r * a, rb = r * b;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(ra(static_cast<Eigen::Index>(i)), out.a[i], 1e-12);
      EXPECT_NEAR(rb(static_cast<Eigen::Index>(i)), out.b[i], 1e-12);
    }
  }
}

TEST(CompileRotation, G1AndG2ShareSignalRow) {
  for (int m = 1; m <= 6; ++m) {
    const std::size_t n = std::size_t{1} << m;
    const RotationMatrix r1 = compile_rotation(build_g1(n)), r2 = compile_rotation(build_g2(m));
    for (std::size_t c = 0; c < n; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      EXPECT_NEAR(r1(0, ci), 1 / std::sqrt(double(n)), 1e-13);
      EXPECT_NEAR(r2(0, ci), 1 / std::sqrt(double(n)), 1e-13);
    }
  }
}

TEST(CompileRotation, CompositionOrder) {
  RandomSource rng(6, 0);
  const Network first = perturb(build_g2(3), {1.0}, rng);
  const Network second = perturb(build_g1(8), {1.0}, rng);
  Network both = first;
  both.ops.insert(both.ops.end(), second.ops.begin(), second.ops.end());
  EXPECT_LE((compile_rotation(both) - compile_rotation(second) * compile_rotation(first)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NetworkText, Golden) {
  const Network net{4, {{1, 2, 0.5}, {3, 4, -0.25}, {1, 3, std::numbers::pi / 4}}};
  EXPECT_EQ(to_text(net), "1,2,0.5\n3,4,-0.25\n1,3,0.7853981633974483\n");
}

TEST(NetworkText, RoundTrip) {
  RandomSource rng(7, 0);
  const Network net = perturb(build_g2(4), {0.3}, rng);
  EXPECT_EQ(network_from_text(to_text(net), 16), net);
  EXPECT_EQ(network_from_text("# header\n\n1,2,0.5\n", 2), (Network{2, {{1, 2, 0.5}}}));
  EXPECT_THROW(network_from_text("1,2\n", 2), std::invalid_argument);
  EXPECT_THROW(network_from_text("1,5,0.1\n", 4), std::out_of_range);
}
