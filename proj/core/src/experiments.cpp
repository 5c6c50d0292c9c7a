#include "gpest/experiments.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "gpest/analytic.hpp"

namespace gpest {
namespace {

constexpr std::uint64_t kBlockSize = 4096;

/// Raw sums for one estimate component. d is the per-replicate (conditional)
/// mean minus the truth and w the conditional variance (zero for plain MC).
struct MomentSums {
  long double d1 = 0, d2 = 0, d3 = 0, d4 = 0;
  long double w = 0, w2 = 0, wd = 0, wd2 = 0;

  void add(double dv, double wv) {
    const long double d = dv, x = wv, dd = d * d;
    d1 += d;
    d2 += dd;
    d3 += dd * d;
    d4 += dd * dd;
    w += x;
    w2 += x * x;
    wd += x * d;
    wd2 += x * dd;
  }
  void merge(const MomentSums& o) {
    d1 += o.d1, d2 += o.d2, d3 += o.d3, d4 += o.d4;
    w += o.w, w2 += o.w2, wd += o.wd, wd2 += o.wd2;
  }
};

struct BlockSums {
  std::array<MomentSums, 3> comp;
  long double q = 0, q2 = 0;  // total squared error per replicate
  std::uint64_t count = 0;

  void add(const Estimates& mean, const Estimates& var, const ModelParams& truth) {
    const double d[3] = {mean.theta - truth.theta, mean.eta - truth.eta, mean.nu - truth.nu};
    const double w[3] = {var.theta, var.eta, var.nu};
    long double q_rep = 0;
    for (int c = 0; c < 3; ++c) {
      comp[c].add(d[c], w[c]);
      q_rep += static_cast<long double>(w[c]) + static_cast<long double>(d[c]) * d[c];
    }
    q += q_rep;
    q2 += q_rep * q_rep;
    ++count;
  }
  void merge(const BlockSums& o) {
    for (int c = 0; c < 3; ++c) comp[c].merge(o.comp[c]);
    q += o.q;
    q2 += o.q2;
    count += o.count;
  }
};

double safe_sqrt(long double x) { return x > 0 ? static_cast<double>(std::sqrt(x)) : 0.0; }

ComponentSummary summarize(const MomentSums& s, std::uint64_t count, double truth) {
  const long double r = count;
  const long double ed = s.d1 / r;
  const long double ed2 = s.d2 / r;
  const long double ew = s.w / r;
  const long double var_d = count > 1 ? (ed2 - ed * ed) * r / (r - 1) : 0;

  // q = w + d^2 estimates the MSE per replicate.
  const long double eq = ew + ed2;
  const long double eq2 = (s.w2 + 2 * s.wd2 + s.d4) / r;
  const long double var_q = eq2 - eq * eq;
  const long double cov_qd = (s.wd + s.d3) / r - eq * ed;
  // variance = E q - (E d)^2, delta method for its standard error.
  const long double var_variance = var_q - 4 * ed * cov_qd + 4 * ed * ed * var_d;

  ComponentSummary out;
  out.truth = truth;
  out.mean = truth + static_cast<double>(ed);
  out.variance = static_cast<double>(ew + var_d);
  out.mse = static_cast<double>(eq);
  out.se_mean = safe_sqrt(var_d / r);
  out.se_mse = safe_sqrt(var_q / r);
  out.se_variance = safe_sqrt(var_variance / r);
  return out;
}

/// Runs `body(replicate, sums)` over all replicates in fixed-size blocks and
/// reduces the block sums pairwise in block order, so the result does not
/// depend on the number of threads.
BlockSums run_blocks(std::uint64_t replicates, unsigned threads,
                     const std::function<void(std::uint64_t, BlockSums&)>& body) {
  const std::uint64_t blocks = (replicates + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> partial(blocks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      const std::uint64_t end = std::min(replicates, (b + 1) * kBlockSize);
      for (std::uint64_t rep = b * kBlockSize; rep < end; ++rep) body(rep, partial[b]);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  for (std::uint64_t width = 1; width < blocks; width *= 2) {
    for (std::uint64_t i = 0; i + width < blocks; i += 2 * width) partial[i].merge(partial[i + width]);
  }
  return blocks ? partial[0] : BlockSums{};
}

MCSummary finish(const BlockSums& sums, const ModelParams& truth, std::chrono::steady_clock::time_point start) {
  MCSummary out;
  out.replicates = sums.count;
  out.theta = summarize(sums.comp[0], sums.count, truth.theta);
  out.eta = summarize(sums.comp[1], sums.count, truth.eta);
  out.nu = summarize(sums.comp[2], sums.count, truth.nu);
  const long double r = sums.count;
  const long double eq = sums.q / r;
  out.total_mse = static_cast<double>(eq);
  out.se_total_mse = safe_sqrt((sums.q2 / r - eq * eq) / r);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ConcentratedLayout layout_for(const Scenario& sc) {
  if (sc.estimator == EstimatorKind::hayashi) return hayashi_layout(sc.n);
  return corrected_layout(sc.depth(), sc.m0, sc.noise.epsilon);
}

}  // namespace

std::string_view to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::none: return "none";
    case NetworkKind::g1: return "g1";
    case NetworkKind::g2: return "g2";
    case NetworkKind::g2_truncated: return "g2_truncated";
  }
  return "?";
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::naive: return "naive";
    case EstimatorKind::hayashi: return "hayashi";
    case EstimatorKind::corrected: return "corrected";
  }
  return "?";
}

Scenario Scenario::naive(const ModelParams& params, std::size_t n) {
  Scenario sc;
  sc.params = params;
  sc.n = n;
  return sc;
}

Scenario Scenario::hayashi(const ModelParams& params, int m, double epsilon) {
  Scenario sc;
  sc.params = params;
  sc.n = std::size_t{1} << m;
  sc.network = NetworkKind::g2;
  sc.m0 = m;
  sc.noise.epsilon = epsilon;
  sc.estimator = EstimatorKind::hayashi;
  return sc;
}

Scenario Scenario::corrected(const ModelParams& params, int m, int m0, double epsilon) {
  Scenario sc;
  sc.params = params;
  sc.n = std::size_t{1} << m;
  sc.network = NetworkKind::g2_truncated;
  sc.m0 = m0;
  sc.noise.epsilon = epsilon;
  sc.estimator = EstimatorKind::corrected;
  return sc;
}

int Scenario::depth() const {
  if (!std::has_single_bit(n)) throw std::invalid_argument(fmt::format("scenario: n = {} is not a power of two", n));
  return std::countr_zero(n);
}

void Scenario::validate() const {
  params.validate();
  noise.validate();
  if (replicates < 1) throw std::invalid_argument("scenario: replicates must be >= 1");
  if (n < 2) throw std::invalid_argument("scenario: n must be >= 2");
  switch (estimator) {
    case EstimatorKind::naive:
      if (network != NetworkKind::none) throw std::invalid_argument("scenario: naive estimator takes no network");
      break;
    case EstimatorKind::hayashi:
      if (network != NetworkKind::g1 && network != NetworkKind::g2) {
        throw std::invalid_argument("scenario: hayashi estimator needs a g1 or g2 network");
      }
      if (network == NetworkKind::g2) depth();
      break;
    case EstimatorKind::corrected:
      if (network != NetworkKind::g2_truncated) {
        throw std::invalid_argument("scenario: corrected estimator needs a g2_truncated network");
      }
      if (m0 < 0 || m0 > depth()) {
        throw std::invalid_argument(fmt::format("scenario: m0 = {} outside [0, {}]", m0, depth()));
      }
      break;
  }
}

Network Scenario::nominal_network() const {
  switch (network) {
    case NetworkKind::none: return Network{n, {}};
    case NetworkKind::g1: return build_g1(n);
    case NetworkKind::g2: return build_g2(depth());
    case NetworkKind::g2_truncated: return build_g2_truncated(depth(), m0);
  }
  return Network{n, {}};
}

MCSummary run_monte_carlo(const Scenario& sc) {
  sc.validate();
  const auto start = std::chrono::steady_clock::now();
  const Network nominal = sc.nominal_network();
  const bool naive = sc.estimator == EstimatorKind::naive;
  const SelectionSet selection = naive ? SelectionSet::all(sc.n) : layout_for(sc).selection;
  const ConcentratedLayout layout = naive ? hayashi_layout(sc.n) : layout_for(sc);
  const Estimates zero{};

  const BlockSums sums = run_blocks(sc.replicates, sc.threads, [&](std::uint64_t rep, BlockSums& acc) {
    RandomSource rng(sc.seed, rep);
    AmplitudeEnsemble ens = sample_amplitudes(sc.params, sc.n, rng);
    if (!naive) apply_network_inplace(ens, perturb(nominal, sc.noise, rng));
    const Observations obs = measure(ens, selection, rng);
    const Estimates est = naive ? naive_estimate(obs) : evaluate(layout, obs);
    acc.add(est, zero, sc.params);
  });
  return finish(sums, sc.params, start);
}

ConditionalMoments conditional_moments(const ConcentratedLayout& layout, const ModelParams& params,
                                       std::span<const double> gains) {
  const std::size_t n = layout.selection.n();
  if (gains.size() != n) throw std::invalid_argument("conditional_moments: gain vector has the wrong length");
  long double sum_s = 0, sq_s = 0, sq_c = 0;
  for (std::size_t mode = 1; mode <= n; ++mode) {
    const long double u = gains[mode - 1];
    if (layout.selection.contains(mode)) {
      sum_s += u;
      sq_s += u * u;
    } else {
      sq_c += u * u;
    }
  }
  const long double het = layout.selection.heterodyne().size();
  const long double counted = static_cast<long double>(n) - het;
  const long double theta = params.theta, eta = params.eta, nu = params.nu;
  const long double rho2 = theta * theta + eta * eta;
  const long double s2 = (nu + 1) / 2;
  const long double scale = layout.location_scale;
  const long double c1 = layout.count_weight, c2 = layout.square_weight, r = layout.cross_weight;

  ConditionalMoments out;
  out.mean.theta = static_cast<double>(theta * sum_s / scale);
  out.mean.eta = static_cast<double>(eta * sum_s / scale);
  out.variance.theta = out.variance.eta = static_cast<double>(het * s2 / (scale * scale));

  // Z_k | u: mean rho2 u_k^2 + nu, variance rho2 (1 + 2 nu) u_k^2 + nu + nu^2.
  // Heterodyne part is x' M x with M = (c2 + r) I - r J, x ~ N(mu, s2 I).
  out.mean.nu = static_cast<double>(c1 * (rho2 * sq_c + counted * nu) + c2 * (rho2 * sq_s + het * (nu + 1)) -
                                    r * rho2 * (sum_s * sum_s - sq_s) - layout.offset);
  const long double tr_m2 = het * c2 * c2 + het * (het - 1) * r * r;
  const long double mu_m2_mu = (c2 + r) * (c2 + r) * sq_s + (r * r * het - 2 * r * (c2 + r)) * sum_s * sum_s;
  out.variance.nu = static_cast<double>(c1 * c1 * (rho2 * (1 + 2 * nu) * sq_c + counted * (nu + nu * nu)) +
                                        4 * s2 * s2 * tr_m2 + 4 * s2 * rho2 * mu_m2_mu);
  return out;
}

MCSummary rao_blackwell_mc(const Scenario& sc) {
  sc.validate();
  const auto start = std::chrono::steady_clock::now();
  const ModelParams& p = sc.params;

  if (sc.estimator == EstimatorKind::naive) {
    // Nothing random besides the data itself: one exact conditional term per draw.
    const double nn = static_cast<double>(sc.n);
    const Estimates mean{p.theta, p.eta, p.nu};
    const Estimates var{(p.nu + 1) / (2 * nn), (p.nu + 1) / (2 * nn), (p.nu + 1) * (p.nu + 1) / (nn - 1)};
    const BlockSums sums =
        run_blocks(sc.replicates, sc.threads, [&](std::uint64_t, BlockSums& acc) { acc.add(mean, var, p); });
    return finish(sums, p, start);
  }

  const Network nominal = sc.nominal_network();
  const ConcentratedLayout layout = layout_for(sc);
  const BlockSums sums = run_blocks(sc.replicates, sc.threads, [&](std::uint64_t rep, BlockSums& acc) {
    RandomSource rng(sc.seed, rep);
    std::vector<double> gains(sc.n, 1.0);  // u = R * (1, ..., 1)
    apply_network_inplace(std::span<double>(gains), perturb(nominal, sc.noise, rng));
    const ConditionalMoments cm = conditional_moments(layout, p, gains);
    acc.add(cm.mean, cm.variance, p);
  });
  return finish(sums, p, start);
}

double crossover_asymptote(double epsilon) { return std::sqrt(1.0 / (2.0 * -std::expm1(-2.0 * epsilon * std::numbers::ln2))); }

CrossoverPoint crossover_theta(double nu, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("crossover_theta: epsilon must be > 0 (no crossover for a noiseless network)");
  }
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("crossover_theta: nu must be finite and >= 0");
  const auto gap = [&](double theta) {
    const MsePair mse = mse_n2(theta, 0.0, nu, epsilon);
    return mse.m_hat - mse.m_bar;
  };
  // gap(0) = -(nu + 1) < 0; grow the bracket until the quartic term wins.
  double lo = 0.0, hi = 1.0;
  while (gap(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) {
      throw std::runtime_error(fmt::format("crossover_theta: no sign change for theta <= 1e6 (nu={}, eps={})", nu, epsilon));
    }
  }
  const auto [a, b] = boost::math::tools::bisect(gap, lo, hi, boost::math::tools::eps_tolerance<double>(52));
  const double theta_star = 0.5 * (a + b);
  const MsePair at = mse_n2(theta_star, 0.0, nu, epsilon);
  return {nu, epsilon, theta_star, std::abs(at.m_hat - at.m_bar) / at.m_bar};
}

void GridSpec::validate() const {
  if (n_list.empty() || theta_list.empty() || nu_list.empty()) throw std::invalid_argument("grid: empty axis");
  for (const auto n : n_list) {
    if (n < 2 || !std::has_single_bit(n)) throw std::invalid_argument(fmt::format("grid: n = {} is not a power of two >= 2", n));
    depth_for(std::countr_zero(n));
  }
  for (const auto nu : nu_list) {
    if (!(nu >= 0.0)) throw std::invalid_argument("grid: nu must be >= 0");
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("grid: epsilon must be >= 0");
  if (replicates < 2) throw std::invalid_argument("grid: need at least 2 replicates per cell");
}

int GridSpec::depth_for(int m) const {
  switch (policy) {
    case DepthPolicy::half_m:
      if (m % 2 != 0) throw std::invalid_argument(fmt::format("grid: m0 = m/2 needs even m, got m = {}", m));
      return m / 2;
    case DepthPolicy::full_m: return m;
    case DepthPolicy::explicit_depth:
      if (explicit_m0 < 0 || explicit_m0 > m) {
        throw std::invalid_argument(fmt::format("grid: m0 = {} outside [0, {}]", explicit_m0, m));
      }
      return explicit_m0;
  }
  return m;
}

RelErrTable table1_grid(const GridSpec& spec) {
  spec.validate();
  RelErrTable table;
  std::uint64_t cell = 0;
  for (const auto n : spec.n_list) {
    const int m = std::countr_zero(n);
    const int m0 = spec.depth_for(m);
    for (const double theta : spec.theta_list) {
      for (const double nu : spec.nu_list) {
        const ModelParams params{theta, spec.eta, nu};
        auto run = [&](Scenario sc, std::uint64_t family) {
          sc.replicates = spec.replicates;
          sc.threads = spec.threads;
          sc.seed = mix_seed(spec.seed, cell * 8 + family);
          return run_monte_carlo(sc);
        };
        const MCSummary naive = run(Scenario::naive(params, n), 0);
        auto emit = [&](const MCSummary& s, int depth, const char* family) {
          const double ratio = s.total_mse / naive.total_mse;
          const double se = ratio * std::hypot(s.se_total_mse / s.total_mse, naive.se_total_mse / naive.total_mse);
          table.push_back({n, theta, spec.eta, nu, spec.epsilon, depth, family, 1.0 - ratio, se, s.total_mse,
                           naive.total_mse});
        };
        emit(run(Scenario::hayashi(params, m, spec.epsilon), 1), m, "hayashi");
        emit(run(Scenario::corrected(params, m, m0, spec.epsilon), 2), m0, "corrected");
        if (m0 != m) emit(run(Scenario::corrected(params, m, m, spec.epsilon), 3), m, "corrected");
        ++cell;
      }
    }
  }
  return table;
}

}  // namespace gpest
