#include "gpest/network.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace gpest {
namespace {

void check_op(const BeamSplitterOp& op, std::size_t n) {
  if (op.j < 1 || op.j > n || op.k < 1 || op.k > n) {
    throw std::out_of_range(fmt::format("beam splitter ({},{}) outside modes 1..{}", op.j, op.k, n));
  }
  if (op.j == op.k) {
    throw std::invalid_argument(fmt::format("beam splitter acts on mode {} twice", op.j));
  }
}

inline void rotate_pair(double& xj, double& xk, double c, double s) {
  const double old_j = xj;
  const double old_k = xk;
  xj = c * old_j + s * old_k;
  xk = -s * old_j + c * old_k;
}

bool is_power_of_two_exponent(int m) { return m >= 0 && m <= 62; }

}  // namespace

void Network::validate() const {
  for (const auto& op : ops) check_op(op, n);
}

double NoiseSpec::angle_variance() const { return epsilon * std::numbers::ln2; }

void NoiseSpec::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("NoiseSpec: epsilon must be finite and >= 0");
  }
}

void apply_op(AmplitudeEnsemble& ensemble, const BeamSplitterOp& op) {
  check_op(op, ensemble.size());
  const double c = std::cos(op.tau);
  const double s = std::sin(op.tau);
  rotate_pair(ensemble.a[op.j - 1], ensemble.a[op.k - 1], c, s);
  rotate_pair(ensemble.b[op.j - 1], ensemble.b[op.k - 1], c, s);
}

void apply_op(std::span<double> v, const BeamSplitterOp& op) {
  check_op(op, v.size());
  rotate_pair(v[op.j - 1], v[op.k - 1], std::cos(op.tau), std::sin(op.tau));
}

Network build_g1(std::size_t n) {
  if (n < 2) throw std::invalid_argument("build_g1: n must be >= 2");
  Network net{n, {}};
  net.ops.reserve(n - 1);
  for (std::size_t t = 1; t < n; ++t) {
    net.ops.push_back({1, t + 1, std::atan(1.0 / std::sqrt(static_cast<double>(t)))});
  }
  return net;
}

Network build_g2(int m) { return build_g2_truncated(m, m); }

Network build_g2_truncated(int m, int m0) {
  if (!is_power_of_two_exponent(m)) throw std::invalid_argument("build_g2: m must be in [0, 62]");
  if (m0 < 0 || m0 > m) {
    throw std::invalid_argument(fmt::format("build_g2_truncated: m0 = {} outside [0, {}]", m0, m));
  }
  const std::size_t n = std::size_t{1} << m;
  Network net{n, {}};
  net.ops.reserve(n - (n >> m0));
  for (int t = 1; t <= m0; ++t) {
    const std::size_t half = std::size_t{1} << (t - 1);
    for (std::size_t j = 1; j <= n; j += 2 * half) {
      net.ops.push_back({j, j + half, std::numbers::pi / 4.0});
    }
  }
  return net;
}

Network perturb(const Network& net, const NoiseSpec& noise, RandomSource& rng) {
  noise.validate();
  if (noise.epsilon == 0.0) return net;
  const double sd = std::sqrt(noise.angle_variance());
  Network out = net;
  for (auto& op : out.ops) op.tau += sd * rng.standard_normal();
  return out;
}

void apply_network_inplace(AmplitudeEnsemble& ensemble, const Network& net) {
  if (net.n != ensemble.size()) {
    throw std::invalid_argument(fmt::format("apply_network: network has {} modes, ensemble {}", net.n, ensemble.size()));
  }
  for (const auto& op : net.ops) apply_op(ensemble, op);
}

void apply_network_inplace(std::span<double> v, const Network& net) {
  if (net.n != v.size()) {
    throw std::invalid_argument(fmt::format("apply_network: network has {} modes, vector {}", net.n, v.size()));
  }
  for (const auto& op : net.ops) apply_op(v, op);
}

AmplitudeEnsemble apply_network(AmplitudeEnsemble ensemble, const Network& net) {
  apply_network_inplace(ensemble, net);
  return ensemble;
}

RotationMatrix compile_rotation(const Network& net) {
  net.validate();
  const auto n = static_cast<Eigen::Index>(net.n);
  RotationMatrix r = RotationMatrix::Identity(n, n);
  // Left-multiplying by each Givens factor in chronological order.
  for (const auto& op : net.ops) {
    const double c = std::cos(op.tau);
    const double s = std::sin(op.tau);
    const auto j = static_cast<Eigen::Index>(op.j - 1);
    const auto k = static_cast<Eigen::Index>(op.k - 1);
    const Eigen::RowVectorXd row_j = r.row(j);
    const Eigen::RowVectorXd row_k = r.row(k);
    r.row(j) = c * row_j + s * row_k;
    r.row(k) = -s * row_j + c * row_k;
  }
  return r;
}

std::string to_text(const Network& net) {
  std::string out;
  for (const auto& op : net.ops) out += fmt::format("{},{},{}\n", op.j, op.k, op.tau);
  return out;
}

Network network_from_text(std::string_view text, std::size_t n) {
  Network net{n, {}};
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw std::invalid_argument(fmt::format("network text line {}: expected j,k,tau", line_no));
    }
    BeamSplitterOp op{};
    const auto parse = [&](std::string_view field, auto& value) {
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw std::invalid_argument(fmt::format("network text line {}: bad field '{}'", line_no, field));
      }
    };
    parse(line.substr(0, c1), op.j);
    parse(line.substr(c1 + 1, c2 - c1 - 1), op.k);
    parse(line.substr(c2 + 1), op.tau);
    check_op(op, n);
    net.ops.push_back(op);
  }
  return net;
}

}  // namespace gpest
