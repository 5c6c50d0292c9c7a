#include "gpest/report.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace gpest {
namespace {

std::string csv_field(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (const char c : v) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          return quoted + '"';
        } else {
          return fmt::format("{}", v);
        }
      },
      cell);
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument(fmt::format("table: row has {} cells, header has {}", row.size(), columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_field(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& table) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::monostate>) {
              obj[table.columns[c]] = nullptr;
            } else {
              obj[table.columns[c]] = v;
            }
          },
          row[c]);
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + '\n';
}

Table summary_table(const Scenario& sc, const MCSummary& s, std::string_view method) {
  Table t{{"estimator", "network", "method", "n", "m0", "epsilon", "replicates", "seed", "component", "truth",
           "mean", "bias", "variance", "mse", "se_mean", "se_variance", "se_mse"},
          {}};
  const auto add = [&](std::string name, const ComponentSummary& c) {
    t.add_row({std::string(to_string(sc.estimator)), std::string(to_string(sc.network)), std::string(method),
               static_cast<std::int64_t>(sc.n), static_cast<std::int64_t>(sc.m0), sc.noise.epsilon,
               static_cast<std::int64_t>(s.replicates), static_cast<std::int64_t>(sc.seed), std::move(name), c.truth,
               c.mean, c.mean - c.truth, c.variance, c.mse, c.se_mean, c.se_variance, c.se_mse});
  };
  add("theta", s.theta);
  add("eta", s.eta);
  add("nu", s.nu);
  t.add_row({std::string(to_string(sc.estimator)), std::string(to_string(sc.network)), std::string(method),
             static_cast<std::int64_t>(sc.n), static_cast<std::int64_t>(sc.m0), sc.noise.epsilon,
             static_cast<std::int64_t>(s.replicates), static_cast<std::int64_t>(sc.seed), std::string("total"), Cell{},
             Cell{}, Cell{}, Cell{}, s.total_mse, Cell{}, Cell{}, s.se_total_mse});
  return t;
}

Table crossover_table(const std::vector<CrossoverPoint>& points) {
  Table t{{"nu", "epsilon", "theta_star", "residual"}, {}};
  for (const auto& p : points) t.add_row({p.nu, p.epsilon, p.theta_star, p.residual});
  return t;
}

Table table1_table(const RelErrTable& rows) {
  Table t{{"n", "theta", "eta", "nu", "epsilon", "m0", "family", "rel_err", "se", "mse", "naive_mse"}, {}};
  for (const auto& r : rows) {
    t.add_row({static_cast<std::int64_t>(r.n), r.theta, r.eta, r.nu, r.epsilon, static_cast<std::int64_t>(r.m0),
               r.family, r.rel_err, r.se, r.mse, r.naive_mse});
  }
  return t;
}

Table mse2_table(const std::vector<std::pair<ModelParams, double>>& cases) {
  Table t{{"theta", "eta", "nu", "epsilon", "mse_naive", "mse_hayashi", "difference"}, {}};
  for (const auto& [p, eps] : cases) {
    const MsePair m = mse_n2(p.theta, p.eta, p.nu, eps);
    t.add_row({p.theta, p.eta, p.nu, eps, m.m_bar, m.m_hat, m.m_hat - m.m_bar});
  }
  return t;
}

Table moments_table(const ModelParams& params, double epsilon, int m, int m0) {
  Table t{{"estimator", "m", "m0", "epsilon", "quantity", "closed_form", "engine", "rel_diff"}, {}};
  std::array<std::optional<double>, 6> closed;
  EstimatorMoments engine;
  if (m0 == m) {
    const Theorem1Result cf = theorem1_closed_forms(params, epsilon, m);
    closed = {cf.e_theta, cf.e_eta, cf.v_theta, cf.v_eta, cf.e_nu, std::nullopt};
    engine = hayashi_moments(g2_moment_engine(params, epsilon, m, m));
  } else {
    const EstimatorMoments cf = corrected_closed_forms(params, epsilon, m, m0);
    closed = {cf.e_theta, cf.e_eta, cf.v_theta, cf.v_eta, std::nullopt, std::nullopt};
    engine = corrected_moments(g2_moment_engine(params, epsilon, m, m0));
  }
  const std::array<double, 6> values{engine.e_theta, engine.e_eta, engine.v_theta,
                                     engine.v_eta,   engine.e_nu,  engine.v_nu};
  const std::array<const char*, 6> names{"e_theta", "e_eta", "v_theta", "v_eta", "e_nu", "v_nu"};
  const std::string family = m0 == m ? "hayashi" : "corrected";
  for (std::size_t i = 0; i < names.size(); ++i) {
    Cell cf, diff;
    if (closed[i]) {
      cf = *closed[i];
      const double scale = std::max(std::abs(*closed[i]), std::abs(values[i]));
      diff = scale > 0 ? std::abs(values[i] - *closed[i]) / scale : 0.0;
    }
    t.add_row({family, static_cast<std::int64_t>(m), static_cast<std::int64_t>(m0), epsilon, std::string(names[i]),
               cf, values[i], diff});
  }
  return t;
}

}  // namespace gpest
