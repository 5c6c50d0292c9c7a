#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpest/experiments.hpp"

namespace gpest::cli {

enum class Command { simulate, moments, mse2, crossover, table1 };
enum class Format { csv, json };
enum class Method { plain, rb };

struct RunConfig {
  Command command = Command::simulate;
  Format format = Format::csv;
  std::filesystem::path out_dir = ".";

  // simulate
  Scenario scenario;
  Method method = Method::plain;

  // moments, mse2, crossover: cartesian product of the lists
  std::vector<double> theta_list;
  std::vector<double> eta_list;
  std::vector<double> nu_list;
  std::vector<double> epsilon_list;
  int m = 0;
  int m0 = 0;

  // table1
  GridSpec grid;
};

/// Raised by parse_args. exit_code is 0 for --help (message holds the help
/// text) and 2 for usage errors.
class ParseExit : public std::runtime_error {
 public:
  ParseExit(const std::string& message, int exit_code) : std::runtime_error(message), code_(exit_code) {}
  int exit_code() const { return code_; }

 private:
  int code_;
};

/// args excludes the program name. GPEST_SEED, when set, replaces the
/// default seed of 0.
RunConfig parse_args(const std::vector<std::string>& args);

/// Writes the output file for the command atomically and prints a one-line
/// summary to `out`. Throws on runtime failure.
void run(const RunConfig& config, std::ostream& out);

/// parse_args + run with exit codes 0 (success), 1 (runtime error), 2 (usage).
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "lo:hi:step" with inclusive endpoints, a comma list, or a single value.
std::vector<double> parse_real_list(const std::string& text);

/// Output file name for a command, e.g. "summary.csv".
std::string output_name(Command command, Format format);

}  // namespace gpest::cli
