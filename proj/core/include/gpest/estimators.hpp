#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "gpest/model.hpp"

namespace gpest {

struct Estimates {
  double theta = 0.0;
  double eta = 0.0;
  double nu = 0.0;  // may be negative; no clamping
};

using CovarianceMatrix3 = Eigen::Matrix3d;

/// Sample means of X and Y; nu from the two unbiased sample variances minus 1.
/// Requires every mode heterodyned and n >= 2.
Estimates naive_estimate(const Observations& obs);

/// diag((nu+1)/2n, (nu+1)/2n, (nu+1)^2/(n-1)).
CovarianceMatrix3 naive_covariance(double nu, std::size_t n);

/// X_1/sqrt(n), Y_1/sqrt(n), mean of Z_2..Z_n. Requires S = {1}, n >= 2.
Estimates hayashi_estimate(const Observations& obs);

/// diag((nu+1)/2n, (nu+1)/2n, nu(nu+1)/(n-1)).
CovarianceMatrix3 hayashi_covariance(double nu, std::size_t n);

/// True when every eigenvalue is >= -tol.
bool is_positive_semidefinite(const CovarianceMatrix3& m, double tol = 1e-12);

/// Cross-term coefficients of the corrected nu estimator. `alpha` and `beta`
/// are the raw polynomial expressions in 2^m, 2^m0, 2^epsilon; `ratio` is
/// alpha/beta evaluated in a rearranged form that stays accurate for small
/// epsilon and finite at epsilon = 1 (where alpha = beta = 0).
struct AlphaBeta {
  double alpha;
  double beta;
  double ratio;
};

/// Throws std::invalid_argument unless 0 <= m0 < m and epsilon >= 0.
AlphaBeta alpha_beta(int m, int m0, double epsilon);

/// E(u^2) of a block leader's gain after m0 noisy G2 stages, u = (R 1)_leader:
/// 1 + 2^(-2 eps) * sum_{t<m0} 2^(t (1-eps)).
double leader_gain_second_moment(int m0, double epsilon);

/// Shared shape of the concentrated estimators (Hayashi and corrected):
///   theta = sum_S X / location_scale,  eta = sum_S Y / location_scale,
///   nu = count_weight * sum_C Z + square_weight * sum_S (X^2 + Y^2)
///        - cross_weight * sum_{j != k in S} (X_j X_k + Y_j Y_k) - offset.
struct ConcentratedLayout {
  SelectionSet selection;
  double location_scale;
  double count_weight;
  double square_weight;
  double cross_weight;
  double offset;
};

ConcentratedLayout hayashi_layout(std::size_t n);
ConcentratedLayout corrected_layout(int m, int m0, double epsilon);

/// Throws std::invalid_argument when the observation's heterodyne modes differ
/// from layout.selection.
Estimates evaluate(const ConcentratedLayout& layout, const Observations& obs);

/// Estimators after a G2 network stopped at depth m0, with heterodyne on the
/// 2^(m-m0) block leaders. The location normalizer 2^(m - m0/2 - eps*m0/2)
/// is used for both theta and eta.
Estimates corrected_estimate(const Observations& obs, int m, int m0, double epsilon);

}  // namespace gpest
