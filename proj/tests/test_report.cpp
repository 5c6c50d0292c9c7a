#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "gpest/report.hpp"

using namespace gpest;

TEST(Table, CsvAndJsonShareFields) {
  Table t{{"name", "value", "count", "missing"}, {}};
  t.add_row({std::string("a,b"), 0.1, std::int64_t{3}, Cell{}});
  t.add_row({std::string("plain"), 1e-300, std::int64_t{-1}, 2.5});
  EXPECT_EQ(to_csv(t), "name,value,count,missing\n\"a,b\",0.1,3,\nplain,1e-300,-1,2.5\n");
  const auto j = nlohmann::json::parse(to_json(t));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["name"], "a,b");
  EXPECT_EQ(j[0]["value"], 0.1);
  EXPECT_TRUE(j[0]["missing"].is_null());
  EXPECT_EQ(j[1]["count"], -1);
  EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
}

TEST(Table, DoublesRoundTrip) {
  Table t{{"x"}, {}};
  const double x = 0.1 + 0.2;
  t.add_row({x});
  const std::string csv = to_csv(t);
  EXPECT_EQ(std::stod(csv.substr(2)), x);
}

TEST(Reports, Columns) {
  EXPECT_EQ(crossover_table({{1, 0.2, 1.4, 0}}).columns, (std::vector<std::string>{"nu", "epsilon", "theta_star", "residual"}));
  const auto t1 = table1_table({{64, 2, 0, 1, 1e-4, 3, "corrected", 0.1, 0.01, 0.5, 0.6}});
  EXPECT_EQ(t1.columns[6], "family");
  EXPECT_EQ(std::get<std::string>(t1.rows[0][6]), "corrected");
  const auto mse = mse2_table({{{0, 0, 1}, 0.3}});
  EXPECT_EQ(std::get<double>(mse.rows[0][4]), 4.0);
  EXPECT_EQ(std::get<double>(mse.rows[0][5]), 2.0);
}

TEST(Reports, MomentsTable) {
  const auto t = moments_table({1, 0, 1}, 1.0, 2, 2);
  ASSERT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(std::get<std::string>(t.rows[0][4]), "e_theta");
  EXPECT_EQ(std::get<double>(t.rows[0][5]), 0.5);
  EXPECT_TRUE(std::holds_alternative<std::monostate>(t.rows[5][5]));
  const auto c = moments_table({1, 0, 1}, 0.1, 4, 2);
  EXPECT_EQ(std::get<std::string>(c.rows[0][0]), "corrected");
}
