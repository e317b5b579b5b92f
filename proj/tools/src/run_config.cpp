#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

#include "advseq/errors.hpp"

namespace advseq::app {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value, const char* what) {
  throw ConfigError("config: key '" + key + "' has " + what + " value '" + std::string(value) + "'");
}

double parse_double(const std::string& key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-numeric");
  return out;
}

std::uint64_t parse_uint(const std::string& key, std::string_view v) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-integer");
  return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a non-boolean");
}

template <typename F>
auto parse_list(const std::string& key, std::string_view v, F item) {
  std::vector<decltype(item(key, v))> out;
  if (trim(v).empty()) bad_value(key, v, "an empty");
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(item(key, v.substr(start, comma == std::string_view::npos ? v.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, std::string_view v) {
  return parse_list(key, v, parse_double);
}

// Index suffix of `hypothesis_<i>` style keys.
std::optional<std::size_t> indexed(const std::string& key, std::string_view prefix) {
  if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  const std::string_view digits(key.data() + prefix.size(), key.size() - prefix.size());
  std::size_t i = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  if (digits.size() > 1 && digits.front() == '0') return std::nullopt;
  return i;
}

std::vector<std::vector<double>> dense(std::map<std::size_t, std::vector<double>> m,
                                       const char* what) {
  std::vector<std::vector<double>> out;
  for (auto& [i, v] : m) {
    if (i != out.size()) {
      throw ConfigError(std::string("config: ") + what + " indices must be 0.." +
                        std::to_string(m.size() - 1) + " without gaps");
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += f(v[i]);
  }
  return s;
}

const char* adversary_name(AdversaryMode m) {
  switch (m) {
    case AdversaryMode::Equilibrium: return "equilibrium";
    case AdversaryMode::Explicit: return "explicit";
    case AdversaryMode::Common: return "common";
  }
  return "equilibrium";
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  RunConfig c;
  std::set<std::string> seen;
  std::map<std::size_t, std::vector<double>> hyps;
  std::map<std::size_t, std::vector<double>> chans;
  int alpha_keys = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    if (const auto hash = sv.find('#'); hash != sv.npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == sv.npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(trim(sv.substr(0, eq)));
    const std::string_view value = trim(sv.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("config: key '" + key + "' given twice");

    if (auto i = indexed(key, "hypothesis_")) {
      hyps[*i] = parse_doubles(key, value);
    } else if (auto j = indexed(key, "adversary_channel_")) {
      chans[*j] = parse_doubles(key, value);
    } else if (key == "normalize") {
      c.normalize = parse_bool(key, value);
    } else if (key == "delta") {
      c.delta = parse_double(key, value);
    } else if (key == "measure") {
      try {
        c.measure = parse_measure(value);
      } catch (const DomainError&) {
        bad_value(key, value, "an unknown");
      }
    } else if (key == "lambda") {
      c.lambda = parse_doubles(key, value);
    } else if (key == "support_floor") {
      c.support_floor = parse_double(key, value);
    } else if (key == "separation") {
      c.separation = parse_double(key, value);
    } else if (key == "solver_tolerance") {
      c.solver_tolerance = parse_double(key, value);
    } else if (key == "solver_max_iterations") {
      c.solver_max_iterations = parse_uint(key, value);
    } else if (key == "alpha") {
      ++alpha_keys;
      c.alpha_grid = {parse_double(key, value)};
    } else if (key == "alpha_grid") {
      ++alpha_keys;
      c.alpha_grid = parse_doubles(key, value);
    } else if (key == "log_inv_alpha_grid") {
      ++alpha_keys;
      c.alpha_grid.clear();
      for (double l : parse_doubles(key, value)) c.alpha_grid.push_back(std::exp(-l));
    } else if (key == "replications") {
      c.replications = parse_uint(key, value);
    } else if (key == "seed") {
      c.seed = parse_uint(key, value);
    } else if (key == "cap") {
      c.cap = parse_uint(key, value);
    } else if (key == "stride") {
      c.stride = parse_uint(key, value);
    } else if (key == "zeta") {
      c.zeta = parse_double(key, value);
    } else if (key == "threads") {
      c.threads = parse_uint(key, value);
    } else if (key == "true_hypotheses") {
      for (auto h : parse_list(key, value, parse_uint)) c.true_hypotheses.push_back(h);
    } else if (key == "adversary") {
      if (value == "equilibrium") c.adversary = AdversaryMode::Equilibrium;
      else if (value == "explicit") c.adversary = AdversaryMode::Explicit;
      else if (value == "common") c.adversary = AdversaryMode::Common;
      else bad_value(key, value, "an unknown");
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (alpha_keys > 1) {
    throw ConfigError("config: give at most one of alpha, alpha_grid, log_inv_alpha_grid");
  }
  c.hypotheses = dense(std::move(hyps), "hypothesis");
  c.adversary_channels = dense(std::move(chans), "adversary_channel");
  if (c.hypotheses.size() < 2) throw ConfigError("config: at least hypothesis_0 and hypothesis_1 are required");
  if (!c.delta) throw ConfigError("config: missing required key 'delta'");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return parse_run_config(in);
}

std::string dump_run_config(const RunConfig& c) {
  std::ostringstream o;
  for (std::size_t i = 0; i < c.hypotheses.size(); ++i) {
    o << "hypothesis_" << i << " = " << join(c.hypotheses[i], fmt17) << '\n';
  }
  o << "normalize = " << (c.normalize ? "true" : "false") << '\n';
  if (c.delta) o << "delta = " << fmt17(*c.delta) << '\n';
  o << "measure = " << to_string(c.measure) << '\n';
  if (!c.lambda.empty()) o << "lambda = " << join(c.lambda, fmt17) << '\n';
  o << "support_floor = " << fmt17(c.support_floor) << '\n';
  o << "separation = " << fmt17(c.separation) << '\n';
  o << "solver_tolerance = " << fmt17(c.solver_tolerance) << '\n';
  o << "solver_max_iterations = " << c.solver_max_iterations << '\n';
  if (!c.alpha_grid.empty()) o << "alpha_grid = " << join(c.alpha_grid, fmt17) << '\n';
  o << "replications = " << c.replications << '\n';
  o << "seed = " << c.seed << '\n';
  o << "cap = " << c.cap << '\n';
  o << "stride = " << c.stride << '\n';
  o << "zeta = " << fmt17(c.zeta) << '\n';
  o << "threads = " << c.threads << '\n';
  if (!c.true_hypotheses.empty()) {
    o << "true_hypotheses = "
      << join(c.true_hypotheses, [](std::size_t h) { return std::to_string(h); }) << '\n';
  }
  o << "adversary = " << adversary_name(c.adversary) << '\n';
  for (std::size_t i = 0; i < c.adversary_channels.size(); ++i) {
    o << "adversary_channel_" << i << " = " << join(c.adversary_channels[i], fmt17) << '\n';
  }
  return o.str();
}

SolverOptions make_solver_options(const RunConfig& c) {
  SolverOptions opts;
  opts.tolerance = c.solver_tolerance;
  if (c.solver_max_iterations < 1 || c.solver_max_iterations > 100'000'000) {
    throw ConfigError("config: solver_max_iterations must be in [1, 1e8]");
  }
  opts.max_iterations = static_cast<int>(c.solver_max_iterations);
  try {
    opts.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return opts;
}

GameSpec make_game(const RunConfig& c) {
  const SolverOptions opts = make_solver_options(c);
  try {
    std::vector<Distribution> hyps;
    for (const auto& h : c.hypotheses) {
      hyps.push_back(c.normalize ? normalize(h) : Distribution(h));
    }
    std::vector<double> lambda = c.lambda;
    if (lambda.empty()) lambda.assign(hyps.size(), 1.0);
    return GameSpec::create(std::move(hyps), *c.delta, c.measure, std::move(lambda),
                            c.support_floor, c.separation, opts);
  } catch (const ConstructionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ScenarioConfig make_scenario(const RunConfig& c) {
  if (c.alpha_grid.empty()) {
    throw ConfigError("config: one of alpha, alpha_grid, log_inv_alpha_grid is required");
  }
  if (c.threads > 1024) throw ConfigError("config: threads must be at most 1024");
  ScenarioConfig s(make_game(c));
  s.true_hypotheses = c.true_hypotheses;
  s.adversary = c.adversary;
  s.alpha_grid = c.alpha_grid;
  s.replications = c.replications;
  s.seed = c.seed;
  s.cap = c.cap;
  s.stride = c.stride;
  s.zeta = c.zeta;
  s.threads = static_cast<unsigned>(c.threads);
  s.solver = make_solver_options(c);
  const std::size_t k = s.spec.alphabet_size();
  try {
    for (const auto& row_major : c.adversary_channels) {
      if (row_major.size() != k * k) {
        throw ConfigError("config: adversary channels need " + std::to_string(k * k) + " entries");
      }
      s.channels.emplace_back(k, row_major);
    }
  } catch (const ConstructionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.adversary == AdversaryMode::Equilibrium && !s.channels.empty()) {
    throw ConfigError("config: adversary_channel_<i> requires adversary = explicit or common");
  }
  return s;
}

}  // namespace advseq::app
