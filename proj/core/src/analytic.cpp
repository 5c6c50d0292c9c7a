#include "gpest/analytic.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "gpest/estimators.hpp"

namespace gpest {
namespace {

// Near epsilon = 1 the displayed closed forms are 0/0; inside this window the
// equivalent geometric-sum forms are used instead.
constexpr double kUnitEpsilonWindow = 1e-4;

constexpr double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

/// E[g^r] for g ~ N(0, var).
double gauss_moment(int r, double var) {
  if (r % 2 != 0) return 0.0;
  double df = 1.0;
  for (int i = r - 1; i > 1; i -= 2) df *= i;
  return df * ipow(var, r / 2);
}

/// sum_{t<count} 2^(t (1 - eps)).
double geometric_gain(int count, double epsilon) {
  double s = 0.0;
  for (int t = 0; t < count; ++t) s += std::exp2(t * (1.0 - epsilon));
  return s;
}

void check_epsilon(double epsilon, const char* who) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument(fmt::format("{}: epsilon must be finite and >= 0", who));
  }
}

/// E[c^i s^j] with c = cos(tau), s = sin(tau), tau ~ N(pi/4, eps log 2), i + j <= 4.
struct TrigTable {
  std::array<std::array<double, 5>, 5> e{};

  explicit TrigTable(double epsilon) {
    const double var = epsilon * std::numbers::ln2;
    for (int i = 0; i <= 4; ++i) {
      for (int j = 0; i + j <= 4; ++j) e[i][j] = trig_moment(i, j, std::numbers::pi / 4.0, var);
    }
  }
  double operator()(int i, int j) const { return e[i][j]; }
};

JointMoments lift_single(const GainMoments& gain, const ModelParams& p) {
  const double noise = p.nu / 2.0;
  JointMoments out{};
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double sum = 0.0;
      for (int i = 0; i <= a; ++i) {
        for (int k = 0; k <= b; ++k) {
          sum += binom(a, i) * binom(b, k) * ipow(p.theta, i) * ipow(p.eta, k) * gain[i + k] *
                 gauss_moment(a - i, noise) * gauss_moment(b - k, noise);
        }
      }
      out[a][b] = sum;
    }
  }
  return out;
}

CrossMoments lift_cross(const GainCross& gain, const ModelParams& p) {
  const double noise = p.nu / 2.0;
  CrossMoments out{};
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b)
      for (int c = 0; c <= 2; ++c)
        for (int d = 0; c + d <= 2; ++d) {
          double sum = 0.0;
          for (int i = 0; i <= a; ++i)
            for (int k = 0; k <= b; ++k)
              for (int q = 0; q <= c; ++q)
                for (int w = 0; w <= d; ++w) {
                  sum += binom(a, i) * binom(b, k) * binom(c, q) * binom(d, w) * ipow(p.theta, i + q) *
                         ipow(p.eta, k + w) * gain[i + k][q + w] * gauss_moment(a - i, noise) *
                         gauss_moment(b - k, noise) * gauss_moment(c - q, noise) * gauss_moment(d - w, noise);
                }
          out[a][b][c][d] = sum;
        }
  return out;
}

double intensity_mean(const JointMoments& j) { return j[2][0] + j[0][2]; }
double intensity_square(const JointMoments& j) { return j[4][0] + 2.0 * j[2][2] + j[0][4]; }
double intensity_product(const CrossMoments& x) {
  return x[2][0][2][0] + x[2][0][0][2] + x[0][2][2][0] + x[0][2][0][2];
}

}  // namespace

double trig_moment(int p, int q, double mean, double variance) {
  if (p < 0 || q < 0 || p + q > 8) {
    throw std::invalid_argument(fmt::format("trig_moment: need p, q >= 0 and p + q <= 8, got ({}, {})", p, q));
  }
  if (!(variance >= 0.0)) throw std::invalid_argument("trig_moment: variance must be >= 0");
  // cos^p sin^q = (2^p (2i)^q)^-1 sum_{a,b} C(p,a) C(q,b) (-1)^(q-b) exp(i (2a - p + 2b - q) tau)
  std::complex<double> sum = 0.0;
  for (int a = 0; a <= p; ++a) {
    for (int b = 0; b <= q; ++b) {
      const int k = 2 * a - p + 2 * b - q;
      const double weight = binom(p, a) * binom(q, b) * (((q - b) % 2 == 0) ? 1.0 : -1.0);
      const double damp = std::exp(-0.5 * k * k * variance);
      sum += weight * damp * std::polar(1.0, k * mean);
    }
  }
  const std::complex<double> norm = std::exp2(-(p + q)) * std::pow(std::complex<double>(0.0, -1.0), q);
  return (sum * norm).real();
}

Theorem1Result theorem1_closed_forms(const ModelParams& params, double epsilon, int m) {
  params.validate();
  check_epsilon(epsilon, "theorem1_closed_forms");
  if (m < 1 || m > 1000) throw std::invalid_argument("theorem1_closed_forms: need m >= 1");
  const double n = std::exp2(m);
  const double e = epsilon;
  const double t2 = params.theta * params.theta;
  const double h2 = params.eta * params.eta;

  Theorem1Result r;
  r.e_theta = std::pow(n, -e / 2.0) * params.theta;
  r.e_eta = std::pow(n, -e / 2.0) * params.eta;
  const double base = (1.0 + params.nu) / (2.0 * n);

  if (e == 0.0) {
    r.v_theta = r.v_eta = base;
    r.e_nu = params.nu;
    return r;
  }

  double spread;     // coefficient of theta^2 in V(theta_hat) beyond the 1/n - n^-eps part
  double bias_coef;  // (E(nu_hat) - nu) / (theta^2 + eta^2)
  if (std::abs(e - 1.0) < kUnitEpsilonWindow) {
    const double g = geometric_gain(m, e);
    spread = std::exp2(-2.0 * e) * g / n;
    bias_coef = 1.0 - std::exp2(-2.0 * e) * g / (n - 1.0);
  } else {
    spread = -(1.0 / n - std::pow(n, -e)) / (std::exp2(1.0 + e) - std::exp2(2.0 * e));
    bias_coef = (-1.0 + std::exp2(1.0 + e) - std::exp2(1.0 + e) * n + std::exp2(2.0 * e) * n - std::pow(4.0, e) +
                 std::pow(n, 1.0 - e)) /
                (std::exp2(e) * (-2.0 + std::exp2(e)) * (-1.0 + n));
  }
  const double location = 1.0 / n - std::pow(n, -e) + spread;
  r.v_theta = base + location * t2;
  r.v_eta = base + location * h2;
  r.e_nu = params.nu + bias_coef * (t2 + h2);
  return r;
}

double MomentTables::mode_count() const { return std::exp2(m); }
double MomentTables::residual_count(int t) const { return std::exp2(m - t); }
double MomentTables::correlated_pairs(int t1, int /*t2*/) const { return std::exp2(m - t1); }

MomentTables g2_moment_engine(const ModelParams& params, double epsilon, int m, int m0) {
  params.validate();
  check_epsilon(epsilon, "g2_moment_engine");
  if (m < 0 || m > 62 || m0 < 0 || m0 > m) {
    throw std::invalid_argument(fmt::format("g2_moment_engine: need 0 <= m0 <= m <= 62, got m={} m0={}", m, m0));
  }
  const TrigTable trig(epsilon);

  MomentTables tab;
  tab.params = params;
  tab.epsilon = epsilon;
  tab.m = m;
  tab.m0 = m0;
  tab.leader_gain.assign(m0 + 1, GainMoments{});
  tab.residual_gain.assign(m0 + 1, GainMoments{});
  tab.cross_gain.assign(m0 + 1, std::vector<GainCross>(m0 + 1, GainCross{}));
  tab.leader_gain[0] = {1.0, 1.0, 1.0, 1.0, 1.0};

  // Leader:   l_t = c l + s l'     (l, l' i.i.d. leaders of stage t-1)
  // Residual: r_t = -s l + c l'
  for (int t = 1; t <= m0; ++t) {
    const auto& prev = tab.leader_gain[t - 1];
    for (int p = 0; p <= 4; ++p) {
      double lead = 0.0, resid = 0.0;
      for (int k = 0; k <= p; ++k) {
        const double pair = binom(p, k) * prev[k] * prev[p - k];
        lead += pair * trig(k, p - k);
        resid += pair * trig(p - k, k) * ((k % 2 == 0) ? 1.0 : -1.0);
      }
      tab.leader_gain[t][p] = lead;
      tab.residual_gain[t][p] = resid;
    }
  }

  // Cross moments of residuals r_t1, r_t2 (t1 < t2) that share the signal path:
  // carry the joint moments E[l^a r_t1^b] of the running leader forward from t1.
  for (int t1 = 1; t1 < m0; ++t1) {
    const auto& prev = tab.leader_gain[t1 - 1];
    std::array<std::array<double, 3>, 3> joint{};
    for (int a = 0; a <= 2; ++a) {
      for (int b = 0; b <= 2; ++b) {
        double sum = 0.0;
        for (int i = 0; i <= a; ++i) {
          for (int k = 0; k <= b; ++k) {
            // (c L)^i (s L')^(a-i) (-s L)^k (c L')^(b-k)
            sum += binom(a, i) * binom(b, k) * ((k % 2 == 0) ? 1.0 : -1.0) * trig(i + b - k, a - i + k) *
                   prev[i + k] * prev[a - i + b - k];
          }
        }
        joint[a][b] = sum;
      }
    }
    for (int t2 = t1 + 1; t2 <= m0; ++t2) {
      const auto& fresh = tab.leader_gain[t2 - 1];
      auto& out = tab.cross_gain[t1][t2];
      for (int x = 0; x <= 2; ++x) {
        for (int y = 0; y <= 2; ++y) {
          // r_t2 = -s l + c l''
          double sum = 0.0;
          for (int k = 0; k <= y; ++k) {
            sum += binom(y, k) * ((k % 2 == 0) ? 1.0 : -1.0) * trig(y - k, k) * joint[k][x] * fresh[y - k];
          }
          out[x][y] = sum;
        }
      }
      // l_t2 = c l + s l''
      std::array<std::array<double, 3>, 3> next{};
      for (int a = 0; a <= 2; ++a) {
        for (int b = 0; b <= 2; ++b) {
          double sum = 0.0;
          for (int i = 0; i <= a; ++i) sum += binom(a, i) * trig(i, a - i) * joint[i][b] * fresh[a - i];
          next[a][b] = sum;
        }
      }
      joint = next;
    }
  }

  tab.sig.resize(m0 + 1);
  tab.res.resize(m0 + 1);
  tab.cross.assign(m0 + 1, std::vector<CrossMoments>(m0 + 1, CrossMoments{}));
  for (int t = 0; t <= m0; ++t) {
    tab.sig[t] = lift_single(tab.leader_gain[t], params);
    tab.res[t] = t == 0 ? JointMoments{} : lift_single(tab.residual_gain[t], params);
  }
  for (int t1 = 1; t1 <= m0; ++t1) {
    for (int t2 = t1 + 1; t2 <= m0; ++t2) tab.cross[t1][t2] = lift_cross(tab.cross_gain[t1][t2], params);
  }
  return tab;
}

EstimatorMoments hayashi_moments(const MomentTables& tab) {
  if (tab.m0 != tab.m || tab.m < 1) {
    throw std::invalid_argument("hayashi_moments: tables must cover the full network (m0 == m >= 1)");
  }
  const double n = tab.mode_count();
  const auto& sig = tab.sig[tab.m];
  EstimatorMoments out;
  out.e_theta = sig[1][0] / std::sqrt(n);
  out.e_eta = sig[0][1] / std::sqrt(n);
  out.v_theta = (sig[2][0] + 0.5) / n - out.e_theta * out.e_theta;
  out.v_eta = (sig[0][2] + 0.5) / n - out.e_eta * out.e_eta;

  double mean_sum = 0.0;
  double var_sum = 0.0;
  for (int t = 1; t <= tab.m; ++t) {
    const double count = tab.residual_count(t);
    const double lam = intensity_mean(tab.res[t]);
    mean_sum += count * lam;
    // Var Z = E lambda + Var lambda for a Poisson mixture.
    var_sum += count * (lam + intensity_square(tab.res[t]) - lam * lam);
  }
  for (int t1 = 1; t1 <= tab.m; ++t1) {
    for (int t2 = t1 + 1; t2 <= tab.m; ++t2) {
      const double cov = intensity_product(tab.cross[t1][t2]) -
                         intensity_mean(tab.res[t1]) * intensity_mean(tab.res[t2]);
      var_sum += 2.0 * tab.correlated_pairs(t1, t2) * cov;
    }
  }
  out.e_nu = mean_sum / (n - 1.0);
  out.v_nu = var_sum / ((n - 1.0) * (n - 1.0));
  return out;
}

EstimatorMoments corrected_moments(const MomentTables& tab) {
  const ConcentratedLayout layout = corrected_layout(tab.m, tab.m0, tab.epsilon);
  const auto& g = tab.leader_gain[tab.m0];
  using ld = long double;
  const ld m1 = g[1], m2 = g[2], m3 = g[3], m4 = g[4];
  const ld n = tab.mode_count();
  const ld L = std::exp2(tab.m - tab.m0);
  const ld counted = n - L;
  const ld theta = tab.params.theta, eta = tab.params.eta, nu = tab.params.nu;
  const ld rho2 = theta * theta + eta * eta;
  const ld s2 = (nu + 1) / 2;  // conditional variance of each heterodyne quadrature
  const ld scale = layout.location_scale;
  const ld c1 = layout.count_weight, c2 = layout.square_weight, r = layout.cross_weight, c0 = layout.offset;

  EstimatorMoments out;
  out.e_theta = static_cast<double>(theta * L * m1 / scale);
  out.e_eta = static_cast<double>(eta * L * m1 / scale);
  out.v_theta = static_cast<double>(L * (s2 + theta * theta * (m2 - m1 * m1)) / (scale * scale));
  out.v_eta = static_cast<double>(L * (s2 + eta * eta * (m2 - m1 * m1)) / (scale * scale));

  // Leader gains u_1..u_L are i.i.d.; P = sum u_i^2, T = sum u_i.
  // The counted modes' gains satisfy sum u_k^2 = n - P.
  const ld pairs = L * (L - 1);
  const ld triples = pairs * (L - 2);
  const ld quads = triples * (L - 3);
  const ld e_p = L * m2;
  const ld e_t2 = L * m2 + pairs * m1 * m1;
  const ld e_p2 = L * m4 + pairs * m2 * m2;
  const ld e_t4 = L * m4 + 4 * pairs * m3 * m1 + 3 * pairs * m2 * m2 + 6 * triples * m2 * m1 * m1 +
                  quads * m1 * m1 * m1 * m1;
  const ld e_pt2 = L * m4 + pairs * (m2 * m2 + 2 * m3 * m1) + triples * m2 * m1 * m1;

  // E(nu | u) = const + rho2 * (a P + b T^2)
  const ld a = c2 - c1 + r;
  const ld b = -r;
  out.e_nu = static_cast<double>(c1 * (rho2 * (n - e_p) + counted * nu) + c2 * (rho2 * e_p + L * (nu + 1)) -
                                 r * rho2 * (e_t2 - e_p) - c0);
  const ld var_of_mean = rho2 * rho2 *
                         (a * a * (e_p2 - e_p * e_p) + b * b * (e_t4 - e_t2 * e_t2) + 2 * a * b * (e_pt2 - e_p * e_t2));

  // Heterodyne quadratic form x' M x with M = (c2 + r) I - r J on the leaders.
  const ld tr_m2 = L * c2 * c2 + pairs * r * r;
  const ld k_diag = (c2 + r) * (c2 + r);
  const ld k_ones = r * r * L - 2 * r * (c2 + r);
  const ld mean_of_var = c1 * c1 * (rho2 * (1 + 2 * nu) * (n - e_p) + counted * (nu + nu * nu)) +
                         4 * s2 * s2 * tr_m2 + 4 * s2 * rho2 * (k_diag * e_p + k_ones * e_t2);
  out.v_nu = static_cast<double>(mean_of_var + var_of_mean);
  return out;
}

Theorem1Result theorem1_from_engine(const ModelParams& params, double epsilon, int m) {
  const EstimatorMoments h = hayashi_moments(g2_moment_engine(params, epsilon, m, m));
  return {h.e_theta, h.e_eta, h.v_theta, h.v_eta, h.e_nu, h.v_nu};
}

double hayashi_nu_variance(const ModelParams& params, double epsilon, int m) {
  return hayashi_moments(g2_moment_engine(params, epsilon, m, m)).v_nu;
}

MsePair mse_n2(double theta, double eta, double nu, double epsilon) {
  ModelParams{theta, eta, nu}.validate();
  check_epsilon(epsilon, "mse_n2");
  const double x = -2.0 * epsilon * std::numbers::ln2;  // log(2^(-2 eps))
  const double rho2 = theta * theta + eta * eta;
  const double quadratic = -std::expm1(x);                            // 1 - 2^(-2 eps)
  const double quartic = (std::expm1(4.0 * x) - 4.0 * std::expm1(x)) / 2.0;  // (3 + 2^(-8 eps) - 4^(1-eps)) / 2
  MsePair out;
  out.m_bar = (nu + 1.0) * (nu + 1.0);
  out.m_hat = nu * nu + nu + (2.0 * nu + 1.0) * quadratic * rho2 + quartic * rho2 * rho2;
  return out;
}

EstimatorMoments corrected_closed_forms(const ModelParams& params, double epsilon, int m, int m0) {
  params.validate();
  check_epsilon(epsilon, "corrected_closed_forms");
  const EstimatorMoments engine = corrected_moments(g2_moment_engine(params, epsilon, m, m0));
  const double e = epsilon;
  const double base = (1.0 + params.nu) / std::exp2(1.0 + m - e * m0);
  double spread;
  if (std::abs(e - 1.0) < kUnitEpsilonWindow) {
    spread = ipow(std::exp2(e) - 1.0, 2) * std::exp2(e * m0) * geometric_gain(m0, e) / std::exp2(2.0 * e + m);
  } else {
    spread = -ipow(std::exp2(e) - 1.0, 2) * (std::exp2(m0) - std::exp2(e * m0)) /
             (std::exp2(e + m) * (std::exp2(e) - 2.0));
  }
  EstimatorMoments out;
  out.e_theta = params.theta;
  out.e_eta = params.eta;
  out.v_theta = base + spread * params.theta * params.theta;
  out.v_eta = base + spread * params.eta * params.eta;
  out.e_nu = engine.e_nu;
  out.v_nu = engine.v_nu;
  return out;
}

}  // namespace gpest
