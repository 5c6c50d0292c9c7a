#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gpest/analytic.hpp"
#include "gpest/report.hpp"

namespace gpest::cli {
namespace {

double parse_real(const std::string& token) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size() || !std::isfinite(value)) {
    throw std::invalid_argument(fmt::format("not a finite number: '{}'", token));
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<std::size_t> to_sizes(const std::vector<double>& values, const char* flag) {
  std::vector<std::size_t> out;
  for (const double v : values) {
    if (v < 1 || v != std::floor(v) || v > 9.0e15) {
      throw ParseExit(fmt::format("{}: expected positive integers, got {}", flag, v), 2);
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("GPEST_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used == std::string_view(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseExit(fmt::format("GPEST_SEED: not an unsigned integer: '{}'", env), 2);
}

/// Raw flag values; everything is validated after CLI11 has parsed.
struct Flags {
  std::string estimator = "naive";
  std::string network;
  std::string method = "plain";
  std::string format = "csv";
  std::string out = ".";
  std::string theta = "0";
  std::string eta = "0";
  std::string nu = "1";
  std::string epsilon = "0";
  std::string n;
  std::string m0;
  int m = -1;
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_output_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--out", f.out, "Output directory (created if missing)");
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_mc_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--replicates", f.replicates, "Monte Carlo replicates (per cell for table1)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "Random seed; default from GPEST_SEED, else 0");
  sub->add_option("--threads", f.threads, "Worker threads; results do not depend on it")
      ->check(CLI::Range(1u, 1024u));
}

ModelParams single_params(const RunConfig& c) {
  auto one = [](const std::vector<double>& v, const char* flag) {
    if (v.size() != 1) throw ParseExit(fmt::format("{}: expected a single value", flag), 2);
    return v.front();
  };
  return {one(c.theta_list, "--theta"), one(c.eta_list, "--eta"), one(c.nu_list, "--nu")};
}

template <class F>
void usage_guard(F&& f) {
  try {
    f();
  } catch (const ParseExit&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseExit(e.what(), 2);
  }
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error(fmt::format("cannot open '{}' for writing", tmp.string()));
    file << content;
    file.close();
    if (!file) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error(fmt::format("write failed for '{}'", tmp.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::runtime_error(fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(), ec.message()));
  }
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw std::invalid_argument(fmt::format("range '{}' is not lo:hi:step", text));
    const double lo = parse_real(parts[0]), hi = parse_real(parts[1]), step = parse_real(parts[2]);
    if (!(step > 0) || hi < lo) throw std::invalid_argument(fmt::format("range '{}' needs step > 0 and hi >= lo", text));
    const double span = (hi - lo) / step;
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    if (count > 1000000) throw std::invalid_argument(fmt::format("range '{}' has too many points", text));
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& token : split(text, ',')) out.push_back(parse_real(token));
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

std::string output_name(Command command, Format format) {
  const char* ext = format == Format::csv ? ".csv" : ".json";
  switch (command) {
    case Command::simulate: return std::string("summary") + ext;
    case Command::moments: return std::string("moments") + ext;
    case Command::mse2: return std::string("mse2") + ext;
    case Command::crossover: return std::string("crossover") + ext;
    case Command::table1: return std::string("table1") + ext;
  }
  return "out";
}

RunConfig parse_args(const std::vector<std::string>& args) {
  Flags f;
  f.seed = default_seed();

  CLI::App app{"Parameter estimation for Gaussian P-function states through noisy beam-splitter networks", "gpest"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo summary of one estimator");
  simulate->add_option("--estimator", f.estimator, "naive | hayashi | corrected")
      ->check(CLI::IsMember({"naive", "hayashi", "corrected"}));
  simulate->add_option("--network", f.network, "g1 | g2 (hayashi only; default g2)")
      ->check(CLI::IsMember({"g1", "g2"}));
  simulate->add_option("--m", f.m, "Network depth, n = 2^m");
  simulate->add_option("--n", f.n, "Mode count (naive or g1 networks)");
  simulate->add_option("--m0", f.m0, "Stopping depth for the corrected estimator");
  simulate->add_option("--theta", f.theta, "Signal mean, real part");
  simulate->add_option("--eta", f.eta, "Signal mean, imaginary part");
  simulate->add_option("--nu", f.nu, "Thermal photon number");
  simulate->add_option("--epsilon", f.epsilon, "Transparency noise; angle variance is epsilon*ln 2");
  simulate->add_option("--method", f.method, "plain | rb (Rao-Blackwellized)")->check(CLI::IsMember({"plain", "rb"}));
  add_mc_flags(simulate, f);
  add_output_flags(simulate, f);

  auto* moments = app.add_subcommand("moments", "Closed forms and exact engine moments side by side");
  moments->add_option("--m", f.m, "Network depth, n = 2^m")->required();
  moments->add_option("--m0", f.m0, "Stopping depth (default m: Hayashi)");
  moments->add_option("--theta", f.theta, "Signal mean, real part");
  moments->add_option("--eta", f.eta, "Signal mean, imaginary part");
  moments->add_option("--nu", f.nu, "Thermal photon number");
  moments->add_option("--epsilon", f.epsilon, "Transparency noise");
  add_output_flags(moments, f);

  auto* mse2 = app.add_subcommand("mse2", "Naive and Hayashi MSE of nu at n = 2");
  mse2->add_option("--theta", f.theta, "Signal mean, real part (value, list or lo:hi:step)");
  mse2->add_option("--eta", f.eta, "Signal mean, imaginary part (value, list or lo:hi:step)");
  mse2->add_option("--nu", f.nu, "Thermal photon number (value, list or lo:hi:step)");
  mse2->add_option("--epsilon", f.epsilon, "Transparency noise (value, list or lo:hi:step)");
  add_output_flags(mse2, f);

  auto* crossover = app.add_subcommand("crossover", "theta where the n = 2 Hayashi and naive MSEs of nu meet");
  crossover->add_option("--nu", f.nu, "Thermal photon number (value, list or lo:hi:step)");
  crossover->add_option("--epsilon", f.epsilon, "Transparency noise, > 0 (value, list or lo:hi:step)")->required();
  add_output_flags(crossover, f);

  auto* table1 = app.add_subcommand("table1", "Relative summed-MSE improvement over naive on a grid");
  table1->add_option("--n", f.n, "Mode counts, powers of two (value, list or lo:hi:step)")->required();
  table1->add_option("--theta", f.theta, "Signal means (value, list or lo:hi:step)");
  table1->add_option("--nu", f.nu, "Thermal photon numbers (value, list or lo:hi:step)");
  table1->add_option("--eta", f.eta, "Imaginary signal mean");
  table1->add_option("--epsilon", f.epsilon, "Transparency noise");
  table1->add_option("--m0", f.m0, "half | full | integer stopping depth")->default_str("half");
  add_mc_flags(table1, f);
  add_output_flags(table1, f);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw ParseExit(app.help(), 0);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
      throw ParseExit(sub->help(), 0);
    }
    throw ParseExit(fmt::format("{}\nRun with --help for usage.", e.what()), 2);
  }

  RunConfig c;
  c.format = f.format == "json" ? Format::json : Format::csv;
  c.out_dir = f.out;
  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  usage_guard([&] {
    c.theta_list = parse_real_list(f.theta);
    c.eta_list = parse_real_list(f.eta);
    c.nu_list = parse_real_list(f.nu);
    c.epsilon_list = parse_real_list(f.epsilon);
  });

  if (name == "simulate") {
    c.command = Command::simulate;
    c.method = f.method == "rb" ? Method::rb : Method::plain;
    usage_guard([&] {
      const ModelParams p = single_params(c);
      if (c.epsilon_list.size() != 1) throw ParseExit("--epsilon: expected a single value", 2);
      const double eps = c.epsilon_list.front();
      const bool has_m = f.m >= 0, has_n = !f.n.empty();
      if (has_m == has_n) throw ParseExit("simulate: give exactly one of --m and --n", 2);
      if (has_m && f.m > 30) throw ParseExit("--m: at most 30", 2);
      const std::size_t n = has_m ? std::size_t{1} << f.m : to_sizes(parse_real_list(f.n), "--n").at(0);
      if (has_n && parse_real_list(f.n).size() != 1) throw ParseExit("--n: expected a single value", 2);
      if (f.estimator != "corrected" && !f.m0.empty()) throw ParseExit("--m0 applies to the corrected estimator only", 2);
      if (f.estimator != "hayashi" && !f.network.empty()) throw ParseExit("--network applies to hayashi only", 2);
      Scenario sc;
      if (f.estimator == "naive") {
        sc = Scenario::naive(p, n);
        if (eps != 0.0) throw ParseExit("--epsilon: the naive scheme has no network", 2);
      } else if (f.estimator == "hayashi" && f.network == "g1") {
        sc = Scenario::naive(p, n);
        sc.network = NetworkKind::g1;
        sc.estimator = EstimatorKind::hayashi;
        sc.noise.epsilon = eps;
      } else {
        sc.params = p;
        sc.n = n;
        const int m = sc.depth();
        if (f.estimator == "hayashi") {
          sc = Scenario::hayashi(p, m, eps);
        } else {
          if (f.m0.empty()) throw ParseExit("simulate: the corrected estimator needs --m0", 2);
          sc = Scenario::corrected(p, m, std::stoi(f.m0), eps);
        }
      }
      sc.replicates = f.replicates;
      sc.seed = f.seed;
      sc.threads = f.threads;
      sc.validate();
      c.scenario = sc;
    });
  } else if (name == "moments") {
    c.command = Command::moments;
    usage_guard([&] {
      single_params(c).validate();
      if (c.epsilon_list.size() != 1) throw ParseExit("--epsilon: expected a single value", 2);
      if (!(c.epsilon_list.front() >= 0)) throw ParseExit("--epsilon: must be >= 0", 2);
      if (f.m < 1 || f.m > 62) throw ParseExit("--m: must be in [1, 62]", 2);
      c.m = f.m;
      c.m0 = f.m0.empty() ? f.m : std::stoi(f.m0);
      if (c.m0 < 0 || c.m0 > c.m) throw ParseExit(fmt::format("--m0: must be in [0, {}]", c.m), 2);
    });
  } else if (name == "mse2" || name == "crossover") {
    c.command = name == "mse2" ? Command::mse2 : Command::crossover;
    usage_guard([&] {
      for (const double v : c.nu_list) {
        if (!(v >= 0)) throw ParseExit("--nu: must be >= 0", 2);
      }
      for (const double e : c.epsilon_list) {
        if (c.command == Command::crossover ? !(e > 0) : !(e >= 0)) {
          throw ParseExit(c.command == Command::crossover ? "--epsilon: must be > 0 (no crossover without noise)"
                                                          : "--epsilon: must be >= 0",
                          2);
        }
      }
    });
  } else {
    c.command = Command::table1;
    usage_guard([&] {
      GridSpec g;
      g.n_list = to_sizes(parse_real_list(f.n), "--n");
      g.theta_list = c.theta_list;
      g.nu_list = c.nu_list;
      if (c.eta_list.size() != 1 || c.epsilon_list.size() != 1) {
        throw ParseExit("table1: --eta and --epsilon take a single value", 2);
      }
      g.eta = c.eta_list.front();
      g.epsilon = c.epsilon_list.front();
      if (f.m0.empty() || f.m0 == "half") {
        g.policy = DepthPolicy::half_m;
      } else if (f.m0 == "full") {
        g.policy = DepthPolicy::full_m;
      } else {
        g.policy = DepthPolicy::explicit_depth;
        std::size_t used = 0;
        g.explicit_m0 = std::stoi(f.m0, &used);
        if (used != f.m0.size()) throw ParseExit("--m0: expected half, full or an integer", 2);
      }
      g.replicates = f.replicates;
      g.seed = f.seed;
      g.threads = f.threads;
      g.validate();
      c.grid = g;
    });
  }
  return c;
}

void run(const RunConfig& c, std::ostream& out) {
  Table table;
  switch (c.command) {
    case Command::simulate: {
      const MCSummary s = c.method == Method::rb ? rao_blackwell_mc(c.scenario) : run_monte_carlo(c.scenario);
      table = summary_table(c.scenario, s, c.method == Method::rb ? "rb" : "plain");
      break;
    }
    case Command::moments:
      table = moments_table(single_params(c), c.epsilon_list.front(), c.m, c.m0);
      out << to_csv(table);
      break;
    case Command::mse2: {
      std::vector<std::pair<ModelParams, double>> cases;
      for (const double theta : c.theta_list)
        for (const double eta : c.eta_list)
          for (const double nu : c.nu_list)
            for (const double eps : c.epsilon_list) cases.push_back({{theta, eta, nu}, eps});
      table = mse2_table(cases);
      break;
    }
    case Command::crossover: {
      std::vector<CrossoverPoint> points;
      for (const double nu : c.nu_list)
        for (const double eps : c.epsilon_list) points.push_back(crossover_theta(nu, eps));
      table = crossover_table(points);
      break;
    }
    case Command::table1:
      table = table1_table(table1_grid(c.grid));
      break;
  }
  const std::filesystem::path path = c.out_dir / output_name(c.command, c.format);
  write_atomically(path, c.format == Format::csv ? to_csv(table) : to_json(table));
  out << fmt::format("wrote {} ({} rows)\n", path.string(), table.rows.size());
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_args(args);
  } catch (const ParseExit& e) {
    (e.exit_code() == 0 ? out : err) << e.what() << (std::string_view(e.what()).ends_with('\n') ? "" : "\n");
    return e.exit_code();
  }
  try {
    run(config, out);
  } catch (const std::exception& e) {
    err << "gpest: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace gpest::cli
