#include "gpest/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace gpest {
namespace {

void require_n(std::size_t n, const char* who) {
  if (n < 2) throw std::invalid_argument(fmt::format("{}: need n >= 2, got {}", who, n));
}

void require_nu(double nu, const char* who) {
  if (!(nu >= 0.0)) throw std::invalid_argument(fmt::format("{}: nu must be >= 0", who));
}

void check_depths(int m, int m0, double epsilon, const char* who) {
  if (m < 0 || m > 62 || m0 < 0 || m0 > m) {
    throw std::invalid_argument(fmt::format("{}: need 0 <= m0 <= m <= 62, got m={} m0={}", who, m, m0));
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument(fmt::format("{}: epsilon must be finite and >= 0", who));
  }
}

void check_selection(const ConcentratedLayout& layout, const Observations& obs) {
  const auto& modes = layout.selection.heterodyne();
  obs.validate(layout.selection.n());
  bool match = obs.heterodyne.size() == modes.size();
  for (std::size_t i = 0; match && i < modes.size(); ++i) match = obs.heterodyne[i].mode == modes[i];
  if (!match) {
    throw std::invalid_argument("estimator: heterodyne modes do not match the estimator's selection set");
  }
}

}  // namespace

Estimates naive_estimate(const Observations& obs) {
  const std::size_t n = obs.heterodyne.size();
  if (!obs.counts.empty()) throw std::invalid_argument("naive_estimate: every mode must be heterodyned");
  require_n(n, "naive_estimate");
  obs.validate(n);
  double sx = 0.0, sy = 0.0;
  for (const auto& h : obs.heterodyne) {
    sx += h.x;
    sy += h.y;
  }
  const double nn = static_cast<double>(n);
  const double mx = sx / nn;
  const double my = sy / nn;
  double qx = 0.0, qy = 0.0;
  for (const auto& h : obs.heterodyne) {
    qx += (h.x - mx) * (h.x - mx);
    qy += (h.y - my) * (h.y - my);
  }
  return {mx, my, qx / (nn - 1.0) + qy / (nn - 1.0) - 1.0};
}

CovarianceMatrix3 naive_covariance(double nu, std::size_t n) {
  require_n(n, "naive_covariance");
  require_nu(nu, "naive_covariance");
  const double nn = static_cast<double>(n);
  CovarianceMatrix3 v = CovarianceMatrix3::Zero();
  v(0, 0) = v(1, 1) = (nu + 1.0) / (2.0 * nn);
  v(2, 2) = (nu + 1.0) * (nu + 1.0) / (nn - 1.0);
  return v;
}

CovarianceMatrix3 hayashi_covariance(double nu, std::size_t n) {
  require_n(n, "hayashi_covariance");
  require_nu(nu, "hayashi_covariance");
  const double nn = static_cast<double>(n);
  CovarianceMatrix3 v = CovarianceMatrix3::Zero();
  v(0, 0) = v(1, 1) = (nu + 1.0) / (2.0 * nn);
  v(2, 2) = nu * (nu + 1.0) / (nn - 1.0);
  return v;
}

bool is_positive_semidefinite(const CovarianceMatrix3& m, double tol) {
  const Eigen::SelfAdjointEigenSolver<CovarianceMatrix3> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

double leader_gain_second_moment(int m0, double epsilon) {
  double geometric = 0.0;
  for (int t = 0; t < m0; ++t) geometric += std::exp2(t * (1.0 - epsilon));
  return 1.0 + std::exp2(-2.0 * epsilon) * geometric;
}

AlphaBeta alpha_beta(int m, int m0, double epsilon) {
  check_depths(m, m0, epsilon, "alpha_beta");
  if (m0 == m) {
    throw std::invalid_argument("alpha_beta: undefined at m0 = m (a single heterodyne mode has no cross terms)");
  }
  const double mm = m, m0d = m0, e = epsilon;
  const double alpha = std::exp2(-e - mm - m0d) *
                       (std::exp2((2.0 + e) * m0d) - std::exp2(1.0 + e + 2.0 * m0d + e * m0d) +
                        std::exp2(1.0 + e + mm + 2.0 * m0d + e * m0d) + std::exp2(2.0 * m0d + e * (2.0 + m0d)) -
                        std::exp2(mm + 2.0 * m0d + e * (2.0 + m0d)) - std::exp2(3.0 * m0d));
  const double beta = (std::exp2(e) - 2.0) * (std::exp2(mm) - 1.0) * (std::exp2(m0d) - std::exp2(mm));

  // alpha/beta == (N - E u^2) / ((N-1) L (L-1) (E u)^2) with E u = 2^(m0 (1-eps)/2).
  const double n = std::exp2(mm);
  const double leaders = std::exp2(mm - m0d);
  const double mean_sq = std::exp2(m0d * (1.0 - e));
  const double ratio =
      (n - leader_gain_second_moment(m0, epsilon)) / ((n - 1.0) * leaders * (leaders - 1.0) * mean_sq);
  return {alpha, beta, ratio};
}

ConcentratedLayout hayashi_layout(std::size_t n) {
  require_n(n, "hayashi_layout");
  const double nn = static_cast<double>(n);
  return {SelectionSet::first(n), std::sqrt(nn), 1.0 / (nn - 1.0), 0.0, 0.0, 0.0};
}

ConcentratedLayout corrected_layout(int m, int m0, double epsilon) {
  check_depths(m, m0, epsilon, "corrected_layout");
  if (m < 1) throw std::invalid_argument("corrected_layout: need m >= 1");
  const double n = std::exp2(m);
  const double block = std::exp2(m0);
  const double leaders = std::exp2(m - m0);
  ConcentratedLayout layout{SelectionSet::block_leaders(m, m0),
                            std::exp2(m - m0 / 2.0 - epsilon * m0 / 2.0),
                            1.0 / (n - 1.0),
                            (leaders - 1.0) / ((n - 1.0) * leaders),
                            0.0,
                            (n - block) / (block * (n - 1.0))};
  if (m0 < m) layout.cross_weight = alpha_beta(m, m0, epsilon).ratio;
  return layout;
}

Estimates evaluate(const ConcentratedLayout& layout, const Observations& obs) {
  check_selection(layout, obs);
  double sx = 0.0, sy = 0.0, squares = 0.0;
  for (const auto& h : obs.heterodyne) {
    sx += h.x;
    sy += h.y;
    squares += h.x * h.x + h.y * h.y;
  }
  double counts = 0.0;
  for (const auto& c : obs.counts) counts += static_cast<double>(c.z);

  Estimates est{sx / layout.location_scale, sy / layout.location_scale, layout.count_weight * counts};
  if (layout.square_weight != 0.0) est.nu += layout.square_weight * squares;
  if (layout.cross_weight != 0.0) {
    const double cross = (sx * sx + sy * sy) - squares;
    est.nu -= layout.cross_weight * cross;
  }
  est.nu -= layout.offset;
  return est;
}

Estimates hayashi_estimate(const Observations& obs) {
  require_n(obs.size(), "hayashi_estimate");
  return evaluate(hayashi_layout(obs.size()), obs);
}

Estimates corrected_estimate(const Observations& obs, int m, int m0, double epsilon) {
  return evaluate(corrected_layout(m, m0, epsilon), obs);
}

}  // namespace gpest
