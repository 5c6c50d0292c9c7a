#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpest/estimators.hpp"
#include "gpest/model.hpp"
#include "gpest/network.hpp"

namespace gpest {

enum class NetworkKind { none, g1, g2, g2_truncated };
enum class EstimatorKind { naive, hayashi, corrected };

std::string_view to_string(NetworkKind kind);
std::string_view to_string(EstimatorKind kind);

/// One Monte Carlo configuration. naive pairs with no network, hayashi with
/// g1 or g2, corrected with g2_truncated at depth m0; g2 networks need n = 2^m.
struct Scenario {
  ModelParams params;
  std::size_t n = 2;
  NetworkKind network = NetworkKind::none;
  int m0 = 0;
  NoiseSpec noise;
  EstimatorKind estimator = EstimatorKind::naive;
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // never changes results

  static Scenario naive(const ModelParams& params, std::size_t n);
  static Scenario hayashi(const ModelParams& params, int m, double epsilon);
  static Scenario corrected(const ModelParams& params, int m, int m0, double epsilon);

  /// Throws std::invalid_argument on an inconsistent combination.
  void validate() const;
  /// log2(n); throws unless n is a power of two.
  int depth() const;
  Network nominal_network() const;
};

struct ComponentSummary {
  double truth = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  double se_mse = 0.0;
};

struct MCSummary {
  ComponentSummary theta;
  ComponentSummary eta;
  ComponentSummary nu;
  double total_mse = 0.0;  // E[(theta-)^2 + (eta-)^2 + (nu-)^2]
  double se_total_mse = 0.0;
  std::uint64_t replicates = 0;
  double wall_seconds = 0.0;
};

/// Fresh amplitudes, splitter angles and measurement outcomes per replicate;
/// replicate r draws from RandomSource(seed, r).
MCSummary run_monte_carlo(const Scenario& sc);

/// Conditional mean and variance of each estimate given the realized network.
struct ConditionalMoments {
  Estimates mean;
  Estimates variance;
};

/// Given gains u = R * (1..1), the estimator's conditional moments are closed
/// form: amplitudes are theta*u + N(0, nu/2), measurements are Gaussian/Poisson.
ConditionalMoments conditional_moments(const ConcentratedLayout& layout, const ModelParams& params,
                                       std::span<const double> gains);

/// Rao-Blackwellized Monte Carlo: samples only the splitter angles and
/// averages the closed-form conditional moments. Same targets as
/// run_monte_carlo with lower variance; exact when epsilon = 0.
MCSummary rao_blackwell_mc(const Scenario& sc);

struct CrossoverPoint {
  double nu;
  double epsilon;
  double theta_star;
  double residual;  // |M_hat - M_bar| / M_bar at theta_star
};

/// theta* > 0 where the n = 2 Hayashi and naive MSEs for nu coincide (eta = 0).
/// Requires epsilon > 0; throws std::runtime_error if no sign change for theta <= 1e6.
CrossoverPoint crossover_theta(double nu, double epsilon);

/// theta* as nu -> infinity: sqrt(1 / (2 (1 - 2^(-2 eps)))).
double crossover_asymptote(double epsilon);

enum class DepthPolicy { half_m, full_m, explicit_depth };

struct GridSpec {
  std::vector<std::size_t> n_list;
  std::vector<double> theta_list;
  std::vector<double> nu_list;
  double eta = 0.0;
  double epsilon = 0.0;
  DepthPolicy policy = DepthPolicy::half_m;
  int explicit_m0 = 0;
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
  int depth_for(int m) const;
};

struct RelErrRow {
  std::size_t n;
  double theta;
  double eta;
  double nu;
  double epsilon;
  int m0;
  std::string family;  // "hayashi" or "corrected"
  double rel_err;      // 1 - M_family / M_naive
  double se;
  double mse;
  double naive_mse;
};

using RelErrTable = std::vector<RelErrRow>;

/// Relative summed-MSE improvement over the naive scheme on every grid cell.
/// Each (cell, family) owns a distinct seed stream.
RelErrTable table1_grid(const GridSpec& spec);

}  // namespace gpest
