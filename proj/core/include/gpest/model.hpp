#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gpest/random.hpp"

namespace gpest {

// Modes are labelled 1..n throughout the public API, matching the way
// beam-splitter networks are usually drawn. Storage is 0-based.

/// Location (theta, eta) and scale (nu) of the amplitude prior. Each amplitude
/// component has prior variance nu / 2.
struct ModelParams {
  double theta = 0.0;
  double eta = 0.0;
  double nu = 0.0;

  /// Throws std::invalid_argument unless all fields are finite and nu >= 0.
  void validate() const;
};

/// Real and imaginary amplitude parts (A_j, B_j) of n modes.
struct AmplitudeEnsemble {
  std::vector<double> a;
  std::vector<double> b;

  AmplitudeEnsemble() = default;
  explicit AmplitudeEnsemble(std::size_t n) : a(n, 0.0), b(n, 0.0) {}
  AmplitudeEnsemble(std::vector<double> a_, std::vector<double> b_);

  std::size_t size() const { return a.size(); }
};

/// Modes observed by heterodyne detection; every other mode is photon-counted.
class SelectionSet {
 public:
  SelectionSet(std::size_t n, std::vector<std::size_t> heterodyne);

  static SelectionSet all(std::size_t n);
  static SelectionSet none(std::size_t n);
  /// {1}: only the first mode is heterodyned.
  static SelectionSet first(std::size_t n);
  /// Block leaders {2^m0 * j + 1 : j = 0 .. 2^(m-m0) - 1} of a G2 network cut at depth m0.
  static SelectionSet block_leaders(int m, int m0);

  std::size_t n() const { return n_; }
  const std::vector<std::size_t>& heterodyne() const { return het_; }
  std::vector<std::size_t> counting() const;
  bool contains(std::size_t mode) const;

  friend bool operator==(const SelectionSet&, const SelectionSet&) = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> het_;
};

struct HeterodyneRecord {
  std::size_t mode;
  double x;
  double y;
  friend bool operator==(const HeterodyneRecord&, const HeterodyneRecord&) = default;
};

struct CountRecord {
  std::size_t mode;
  std::int64_t z;
  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// Outcome of one measurement round. Records are sorted by mode and the two
/// index sets partition 1..n.
struct Observations {
  std::vector<HeterodyneRecord> heterodyne;
  std::vector<CountRecord> counts;

  std::size_t size() const { return heterodyne.size() + counts.size(); }
  /// Throws std::invalid_argument if the records do not partition 1..n or a count is negative.
  void validate(std::size_t n) const;

  friend bool operator==(const Observations&, const Observations&) = default;
};

/// Draws A_j ~ N(theta, nu/2), B_j ~ N(eta, nu/2) independently. nu = 0 gives
/// the degenerate point (theta, eta).
AmplitudeEnsemble sample_amplitudes(const ModelParams& params, std::size_t n, RandomSource& rng);

/// Given amplitudes: X_j ~ N(A_j, 1/2), Y_j ~ N(B_j, 1/2) on heterodyne modes,
/// Z_k ~ Poisson(A_k^2 + B_k^2) on counting modes.
Observations measure(const AmplitudeEnsemble& ensemble, const SelectionSet& sel, RandomSource& rng);

/// log of the measurement likelihood given the amplitudes. Returns -inf when a
/// count is positive on a mode of zero intensity.
double conditional_log_density(const Observations& obs, const AmplitudeEnsemble& ensemble);

/// log of the marginal likelihood with amplitudes integrated out, for
/// independent untransformed modes: modes in `signal_modes` carry means
/// (theta, eta), all others mean zero. Heterodyne marginals are
/// N(mean, (nu+1)/2); counting marginals are geometric with mean nu.
/// Counting on a signal mode with nonzero mean has no geometric marginal and is rejected.
double marginal_log_density(const Observations& obs, const ModelParams& params, const SelectionSet& signal_modes);

}  // namespace gpest
