#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "gpest/model.hpp"

namespace gpest {

/// E[cos^p(tau) sin^q(tau)] for tau ~ N(mean, variance), exact via the
/// product-to-sum expansion and E[exp(i k tau)] = exp(i k mean - k^2 variance / 2).
/// Requires p, q >= 0, p + q <= 8, variance >= 0.
double trig_moment(int p, int q, double mean, double variance);

/// Mean and variance of the Hayashi estimators under a noisy G2 network.
/// `v_nu` is filled only by the moment engine; the closed forms give an order
/// bound for it, not a value.
struct Theorem1Result {
  double e_theta = 0.0;
  double e_eta = 0.0;
  double v_theta = 0.0;
  double v_eta = 0.0;
  double e_nu = 0.0;
  std::optional<double> v_nu;
};

/// Closed-form E and V of the Hayashi estimators for n = 2^m, angles
/// N(pi/4, epsilon log 2). Requires m >= 1, epsilon >= 0.
Theorem1Result theorem1_closed_forms(const ModelParams& params, double epsilon, int m);

/// E[u^p], p = 0..4.
using GainMoments = std::array<double, 5>;
/// E[A^a B^b] for a + b <= 4 (entries with a + b > 4 are zero).
using JointMoments = std::array<std::array<double, 5>, 5>;
/// E[r1^x r2^y], x, y <= 2.
using GainCross = std::array<std::array<double, 3>, 3>;
/// E[U^a V^b U'^c V'^d], a + b <= 2, c + d <= 2.
using CrossMoments = std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3>;

/// Exact moments of the mode classes of a noisy G2 network run to depth m0.
///
/// After the network, A' = theta * u + a and B' = eta * u + b where
/// u = R * (1, ..., 1) is the random "gain" vector and (a, b) are i.i.d.
/// N(0, nu/2) independent of R. Modes fall into classes:
///   - the leader of a block after t stages (the signal path; the mode 1 class),
///   - the residual left behind at stage t (2^(m-t) identically distributed modes).
/// Residuals of one stage are mutually independent; a stage-t1 residual is
/// correlated with a stage-t2 residual (t1 < t2) exactly when it lies inside
/// the t2 splitter's block.
struct MomentTables {
  ModelParams params;
  double epsilon = 0.0;
  int m = 0;
  int m0 = 0;

  std::vector<GainMoments> leader_gain;            // [t], t = 0..m0
  std::vector<GainMoments> residual_gain;          // [t], t = 1..m0 ([0] is zero)
  std::vector<std::vector<GainCross>> cross_gain;  // [t1][t2], 1 <= t1 < t2 <= m0

  std::vector<JointMoments> sig;                   // leader class, [t]
  std::vector<JointMoments> res;                   // residual class, [t]
  std::vector<std::vector<CrossMoments>> cross;    // [t1][t2]

  double mode_count() const;                  // 2^m
  double residual_count(int t) const;         // modes in residual class t
  double correlated_pairs(int t1, int t2) const;  // residual pairs (t1, t2) that are dependent
};

/// Requires 0 <= m0 <= m <= 62 and epsilon >= 0.
MomentTables g2_moment_engine(const ModelParams& params, double epsilon, int m, int m0);

/// Exact E and V of each estimate component.
struct EstimatorMoments {
  double e_theta = 0.0;
  double e_eta = 0.0;
  double v_theta = 0.0;
  double v_eta = 0.0;
  double e_nu = 0.0;
  double v_nu = 0.0;
};

/// Hayashi estimators from full-depth tables (m0 == m). V(nu) is assembled
/// pairwise from the residual and cross tables.
EstimatorMoments hayashi_moments(const MomentTables& tables);

/// Corrected estimators at the tables' depth. V(nu) uses the fact that the
/// gains of each block have squared norm equal to the block size, so only
/// leader moments enter.
EstimatorMoments corrected_moments(const MomentTables& tables);

/// Engine values packaged like the closed forms, with v_nu filled in.
Theorem1Result theorem1_from_engine(const ModelParams& params, double epsilon, int m);

/// Exact V(nu_hat) for the Hayashi estimator under noisy G2 on 2^m modes.
double hayashi_nu_variance(const ModelParams& params, double epsilon, int m);

/// Naive and Hayashi mean square errors for nu at n = 2.
struct MsePair {
  double m_bar = 0.0;
  double m_hat = 0.0;
};

MsePair mse_n2(double theta, double eta, double nu, double epsilon);

/// Corrected-estimator moments: E(theta), E(eta) and the location variances
/// from closed forms; E(nu) and V(nu) from the engine.
EstimatorMoments corrected_closed_forms(const ModelParams& params, double epsilon, int m, int m0);

}  // namespace gpest
