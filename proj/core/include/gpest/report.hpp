#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gpest/analytic.hpp"
#include "gpest/experiments.hpp"

namespace gpest {

/// monostate renders as an empty CSV field and JSON null.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;

/// Column-named rows rendered as CSV or JSON with identical field names.
/// Doubles print in shortest round-trip form.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument when the row width differs from the header.
  void add_row(std::vector<Cell> row);
};

std::string to_csv(const Table& table);
/// Array of objects, one per row, keys in column order.
std::string to_json(const Table& table);

Table summary_table(const Scenario& sc, const MCSummary& s, std::string_view method);
Table crossover_table(const std::vector<CrossoverPoint>& points);
Table table1_table(const RelErrTable& rows);
Table mse2_table(const std::vector<std::pair<ModelParams, double>>& cases);

/// Closed forms next to engine values for the Hayashi (m0 == m) or corrected
/// estimators; quantities without a closed form are left empty.
Table moments_table(const ModelParams& params, double epsilon, int m, int m0);

}  // namespace gpest
