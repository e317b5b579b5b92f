#include "commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "advseq/csv.hpp"
#include "advseq/errors.hpp"
#include "advseq/simharness.hpp"

namespace advseq::app {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file '" + path.string() + "'");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Scenario build_scenario(const RunConfig& config) {
  ScenarioConfig sc = make_scenario(config);
  try {
    return Scenario(std::move(sc));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void write_solution_csv(std::ostream& out, const GameSpec& spec, const EquilibriumSolution& sol) {
  const std::size_t m = spec.num_hypotheses();
  const std::size_t k = spec.alphabet_size();
  out << "payoff";
  for (std::size_t i = 0; i < m; ++i) out << ",exponent_" << i;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < k; ++a) out << ",q_star_" << i << '_' << a;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t j = 0; j < k; ++j) out << ",witness_" << i << '_' << l << '_' << j;
    }
  }
  out << '\n' << format_number(sol.payoff);
  for (double e : sol.exponents) out << ',' << format_number(e);
  for (const auto& q : sol.q_star) {
    for (double v : q.probs()) out << ',' << format_number(v);
  }
  for (const auto& w : sol.witnesses) {
    for (double v : w.entries()) out << ',' << format_number(v);
  }
  out << '\n';
}

std::string tuple(const Distribution& q) {
  std::string s = "(";
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (a) s += ", ";
    s += format_number(q[a]);
  }
  return s + ")";
}

}  // namespace

Distribution ingest_histogram(std::istream& in, int threshold) {
  std::uint64_t counts[2] = {0, 0};
  std::string tok;
  while (in >> tok) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || v < 0 || v > 255) {
      throw FormatError("ingest: '" + tok + "' is not an intensity in [0, 255]");
    }
    ++counts[v > threshold ? 1 : 0];
  }
  if (in.bad()) throw IoError("ingest: read failure");
  const std::uint64_t n = counts[0] + counts[1];
  if (n == 0) throw EmptyDataError("ingest: no pixel values found");
  return empirical_distribution(counts, n);
}

Distribution ingest_histogram(const std::filesystem::path& path, int threshold) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  return ingest_histogram(in, threshold);
}

void run_solve(const RunConfig& config, const std::optional<std::filesystem::path>& csv_path,
               std::ostream& out) {
  const GameSpec spec = make_game(config);
  const EquilibriumSolution sol = solve_aware_equilibrium(spec, make_solver_options(config));

  out << "hypotheses = " << spec.num_hypotheses() << ", alphabet = " << spec.alphabet_size()
      << ", measure = " << to_string(spec.measure()) << ", delta = " << format_number(spec.delta())
      << '\n';
  for (std::size_t i = 0; i < spec.num_hypotheses(); ++i) {
    out << "hypothesis " << i << ": exponent = " << format_number(sol.exponents[i])
        << " (closest rival " << sol.closest_rival[i] << "), q_star = " << tuple(sol.q_star[i])
        << '\n';
  }
  out << "payoff = " << format_number(sol.payoff) << '\n';
  if (!sol.converged) out << "warning: solver stopped at the iteration limit\n";

  if (csv_path) {
    auto f = open_output(*csv_path);
    write_solution_csv(f, spec, sol);
    finish_output(f, *csv_path);
  } else {
    out << '\n';
    write_solution_csv(out, spec, sol);
  }
}

void run_simulate(const RunConfig& config, const std::filesystem::path& csv_path) {
  if (config.alpha_grid.size() != 1) {
    throw ConfigError("config: simulate takes exactly one alpha (use sweep for a grid)");
  }
  const Scenario scenario = build_scenario(config);
  const SimulationReport report = monte_carlo(scenario);
  auto f = open_output(csv_path);
  write_report_csv(f, report.rows);
  finish_output(f, csv_path);
}

void run_sweep(const RunConfig& config, const std::filesystem::path& csv_path) {
  const Scenario scenario = build_scenario(config);
  const auto rows = alpha_sweep(scenario);
  auto f = open_output(csv_path);
  write_report_csv(f, rows);
  finish_output(f, csv_path);
}

void run_ingest(const std::filesystem::path& data, int threshold,
                const std::filesystem::path& csv_path) {
  const Distribution d = ingest_histogram(data, threshold);
  auto f = open_output(csv_path);
  f << "symbol,probability\n";
  for (std::size_t a = 0; a < d.size(); ++a) f << a << ',' << format_number(d[a]) << '\n';
  finish_output(f, csv_path);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential adversarial hypothesis testing: equilibria and simulations", "advseq"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  bool dump = false;
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_flag("--dump-config", dump, "Print the canonical configuration and exit");

  std::string config_path;
  std::string out_path;
  std::string data_path;
  int threshold = 0;

  auto* solve = app.add_subcommand("solve", "Solve the aware equilibrium");
  solve->add_option("--config", config_path, "Configuration file")->required();
  solve->add_option("--out", out_path, "Write the solution CSV here");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo at a single alpha");
  simulate->add_option("--config", config_path, "Configuration file")->required();
  simulate->add_option("--out", out_path, "Report CSV")->required();

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo over an alpha grid");
  sweep->add_option("--config", config_path, "Configuration file")->required();
  sweep->add_option("--out", out_path, "Report CSV")->required();

  auto* ingest = app.add_subcommand("ingest", "Binarized pixel histogram of a dataset");
  ingest->add_option("--data", data_path, "Whitespace-separated intensities")->required();
  ingest->add_option("--threshold", threshold, "Values above this map to symbol 1")->required();
  ingest->add_option("--out", out_path, "Distribution CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (ingest->parsed()) {
      if (dump) throw ConfigError("--dump-config does not apply to ingest");
      run_ingest(data_path, threshold, out_path);
      return kExitOk;
    }
    RunConfig config = load_run_config(config_path);
    if (seed) config.seed = *seed;
    if (dump) {
      out << dump_run_config(config);
      return kExitOk;
    }
    if (solve->parsed()) {
      run_solve(config, out_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_path), out);
    } else if (simulate->parsed()) {
      run_simulate(config, out_path);
    } else {
      run_sweep(config, out_path);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "advseq: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    err << "advseq: infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DegenerateGameError& e) {
    err << "advseq: degenerate game: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "advseq: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "advseq: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace advseq::app
