#include "gpest/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gpest {

void ModelParams::validate() const {
  if (!std::isfinite(theta) || !std::isfinite(eta) || !std::isfinite(nu)) {
    throw std::invalid_argument("ModelParams: theta, eta and nu must be finite");
  }
  if (nu < 0.0) {
    throw std::invalid_argument("ModelParams: nu must be >= 0, got " + std::to_string(nu));
  }
}

AmplitudeEnsemble::AmplitudeEnsemble(std::vector<double> a_, std::vector<double> b_)
    : a(std::move(a_)), b(std::move(b_)) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("AmplitudeEnsemble: a and b must have equal length");
  }
}

SelectionSet::SelectionSet(std::size_t n, std::vector<std::size_t> heterodyne) : n_(n), het_(std::move(heterodyne)) {
  std::sort(het_.begin(), het_.end());
  if (std::adjacent_find(het_.begin(), het_.end()) != het_.end()) {
    throw std::invalid_argument("SelectionSet: duplicate mode");
  }
  if (!het_.empty() && (het_.front() < 1 || het_.back() > n_)) {
    throw std::out_of_range("SelectionSet: mode outside 1.." + std::to_string(n_));
  }
}

SelectionSet SelectionSet::all(std::size_t n) {
  std::vector<std::size_t> modes(n);
  for (std::size_t j = 0; j < n; ++j) modes[j] = j + 1;
  return SelectionSet(n, std::move(modes));
}

SelectionSet SelectionSet::none(std::size_t n) { return SelectionSet(n, {}); }

SelectionSet SelectionSet::first(std::size_t n) {
  if (n < 1) throw std::invalid_argument("SelectionSet::first: n must be >= 1");
  return SelectionSet(n, {1});
}

SelectionSet SelectionSet::block_leaders(int m, int m0) {
  if (m < 0 || m0 < 0 || m0 > m || m > 62) {
    throw std::invalid_argument("SelectionSet::block_leaders: need 0 <= m0 <= m");
  }
  const std::size_t n = std::size_t{1} << m;
  const std::size_t stride = std::size_t{1} << m0;
  std::vector<std::size_t> modes;
  modes.reserve(n / stride);
  for (std::size_t j = 0; j < n / stride; ++j) modes.push_back(stride * j + 1);
  return SelectionSet(n, std::move(modes));
}

std::vector<std::size_t> SelectionSet::counting() const {
  std::vector<std::size_t> out;
  out.reserve(n_ - het_.size());
  auto it = het_.begin();
  for (std::size_t j = 1; j <= n_; ++j) {
    if (it != het_.end() && *it == j) {
      ++it;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

bool SelectionSet::contains(std::size_t mode) const { return std::binary_search(het_.begin(), het_.end(), mode); }

void Observations::validate(std::size_t n) const {
  if (size() != n) {
    throw std::invalid_argument("Observations: expected " + std::to_string(n) + " records, got " +
                                std::to_string(size()));
  }
  std::vector<char> seen(n + 1, 0);
  auto mark = [&](std::size_t mode) {
    if (mode < 1 || mode > n) throw std::out_of_range("Observations: mode " + std::to_string(mode) + " out of range");
    if (seen[mode]++) throw std::invalid_argument("Observations: mode " + std::to_string(mode) + " observed twice");
  };
  for (const auto& h : heterodyne) mark(h.mode);
  for (const auto& c : counts) {
    mark(c.mode);
    if (c.z < 0) throw std::invalid_argument("Observations: negative count");
  }
}

AmplitudeEnsemble sample_amplitudes(const ModelParams& params, std::size_t n, RandomSource& rng) {
  if (n == 0) throw std::invalid_argument("sample_amplitudes: n must be >= 1");
  params.validate();
  const double sd = std::sqrt(params.nu / 2.0);
  AmplitudeEnsemble out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.a[j] = params.theta + sd * rng.standard_normal();
    out.b[j] = params.eta + sd * rng.standard_normal();
  }
  return out;
}

Observations measure(const AmplitudeEnsemble& ensemble, const SelectionSet& sel, RandomSource& rng) {
  const std::size_t n = ensemble.size();
  if (sel.n() != n) {
    throw std::invalid_argument("measure: selection is for " + std::to_string(sel.n()) + " modes, ensemble has " +
                            std::to_string(n));
  }
  const double sd = std::sqrt(0.5);
  Observations obs;
  obs.heterodyne.reserve(sel.heterodyne().size());
  obs.counts.reserve(n - sel.heterodyne().size());
  auto het = sel.heterodyne().begin();
  for (std::size_t mode = 1; mode <= n; ++mode) {
    const double a = ensemble.a[mode - 1];
    const double b = ensemble.b[mode - 1];
    if (het != sel.heterodyne().end() && *het == mode) {
      ++het;
      const double x = a + sd * rng.standard_normal();
      const double y = b + sd * rng.standard_normal();
      obs.heterodyne.push_back({mode, x, y});
    } else {
      obs.counts.push_back({mode, rng.poisson(a * a + b * b)});
    }
  }
  return obs;
}

double conditional_log_density(const Observations& obs, const AmplitudeEnsemble& ensemble) {
  obs.validate(ensemble.size());
  double log_p = 0.0;
  for (const auto& h : obs.heterodyne) {
    const double dx = h.x - ensemble.a[h.mode - 1];
    const double dy = h.y - ensemble.b[h.mode - 1];
    log_p += -dx * dx - dy * dy - std::log(std::numbers::pi);
  }
  for (const auto& c : obs.counts) {
    const double a = ensemble.a[c.mode - 1];
    const double b = ensemble.b[c.mode - 1];
    const double intensity = a * a + b * b;
    log_p -= intensity + std::lgamma(static_cast<double>(c.z) + 1.0);
    if (c.z > 0) {
      if (intensity == 0.0) return -std::numeric_limits<double>::infinity();
      log_p += static_cast<double>(c.z) * std::log(intensity);
    }
  }
  return log_p;
}

double marginal_log_density(const Observations& obs, const ModelParams& params, const SelectionSet& signal_modes) {
  params.validate();
  obs.validate(signal_modes.n());
  const double var = (params.nu + 1.0) / 2.0;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * var);
  double log_p = 0.0;
  for (const auto& h : obs.heterodyne) {
    const bool signal = signal_modes.contains(h.mode);
    const double dx = h.x - (signal ? params.theta : 0.0);
    const double dy = h.y - (signal ? params.eta : 0.0);
    log_p += 2.0 * log_norm - (dx * dx + dy * dy) / (2.0 * var);
  }
  for (const auto& c : obs.counts) {
    if (signal_modes.contains(c.mode) && (params.theta != 0.0 || params.eta != 0.0)) {
      throw std::invalid_argument("marginal_log_density: counting mode " + std::to_string(c.mode) +
                                  " carries a nonzero mean; its marginal is not geometric");
    }
    log_p -= std::log1p(params.nu);
    if (c.z > 0) {
      if (params.nu == 0.0) return -std::numeric_limits<double>::infinity();
      log_p += static_cast<double>(c.z) * (std::log(params.nu) - std::log1p(params.nu));
    }
  }
  return log_p;
}

}  // namespace gpest
