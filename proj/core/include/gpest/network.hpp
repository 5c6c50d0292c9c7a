#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gpest/model.hpp"
#include "gpest/random.hpp"

namespace gpest {

/// Beam splitter g_tau^(j,k) acting on modes j and k (1-based, j != k):
///   A_j <- A_j cos(tau) + A_k sin(tau)
///   A_k <- -A_j sin(tau) + A_k cos(tau)
/// and identically on the B components. Transparency is cos^2(tau).
struct BeamSplitterOp {
  std::size_t j;
  std::size_t k;
  double tau;

  friend bool operator==(const BeamSplitterOp&, const BeamSplitterOp&) = default;
};

/// Ops in chronological order: ops.front() acts first.
struct Network {
  std::size_t n = 0;
  std::vector<BeamSplitterOp> ops;

  /// Throws std::out_of_range / std::invalid_argument on a bad op.
  void validate() const;

  friend bool operator==(const Network&, const Network&) = default;
};

/// Splitter-angle noise: each realized angle ~ N(nominal, epsilon * log 2).
struct NoiseSpec {
  double epsilon = 0.0;

  double angle_variance() const;
  void validate() const;
};

using RotationMatrix = Eigen::MatrixXd;

void apply_op(AmplitudeEnsemble& ensemble, const BeamSplitterOp& op);
/// Rotates a single real vector (A or B, or a gain vector).
void apply_op(std::span<double> v, const BeamSplitterOp& op);

/// Cascade: (1,2,atan 1), (1,3,atan 2^-1/2), ..., (1,n,atan (n-1)^-1/2).
Network build_g1(std::size_t n);

/// Balanced tree on n = 2^m modes. Stage t = 1..m pairs (j, j + 2^(t-1)) for
/// j = 1 mod 2^t in increasing j; every angle is pi/4.
Network build_g2(int m);

/// The first m0 stages of build_g2(m).
Network build_g2_truncated(int m, int m0);

/// Redraws every angle independently around its nominal value. Consumes no
/// random draws when epsilon == 0.
Network perturb(const Network& net, const NoiseSpec& noise, RandomSource& rng);

AmplitudeEnsemble apply_network(AmplitudeEnsemble ensemble, const Network& net);
void apply_network_inplace(AmplitudeEnsemble& ensemble, const Network& net);
void apply_network_inplace(std::span<double> v, const Network& net);

/// R such that apply_network maps A to R*A and B to R*B.
RotationMatrix compile_rotation(const Network& net);

/// One "j,k,tau" line per op; tau printed with round-trip precision.
std::string to_text(const Network& net);
/// Inverse of to_text. Blank lines and lines starting with '#' are skipped.
Network network_from_text(std::string_view text, std::size_t n);

}  // namespace gpest
