// SPDX-License-Identifier: Apache-2.0
//
// relaybc: joint source/relay precoding for MIMO relaying broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "relaybc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "relaybc/errors.hpp"

namespace relaybc {

std::string_view kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kConvergence:
      return "convergence";
    case ExperimentKind::kSnrSweep:
      return "snr_sweep";
    case ExperimentKind::kPositionSweep:
      return "position_sweep";
  }
  return "unknown";
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kWmmse:
      return "wmmse";
    case Scheme::kMrcMrt:
      return "mrc_mrt";
    case Scheme::kMrcRzf:
      return "mrc_rzf";
  }
  return "unknown";
}

ExperimentKind parse_kind(std::string_view text) {
  for (auto kind : {ExperimentKind::kConvergence, ExperimentKind::kSnrSweep,
                    ExperimentKind::kPositionSweep}) {
    if (kind_name(kind) == text) return kind;
  }
  throw ConfigError("unknown experiment kind '" + std::string(text) + "'");
}

Scheme parse_scheme(std::string_view text) {
  for (auto scheme : {Scheme::kWmmse, Scheme::kMrcMrt, Scheme::kMrcRzf}) {
    if (scheme_name(scheme) == text) return scheme;
  }
  throw ConfigError("unknown scheme '" + std::string(text) + "'");
}

std::vector<Scheme> parse_scheme_list(std::string_view text) {
  std::vector<Scheme> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(parse_scheme(item));
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("scheme list is empty");
  return out;
}

// ---------------------------------------------------------------------------
// Spec

std::vector<double> ExperimentSpec::sweep_values() const {
  if (kind == ExperimentKind::kConvergence) return {snr_db};
  return sweep;
}

SystemConfig ExperimentSpec::config_at(double sweep_value) const {
  SystemConfig config = system;
  const double snr = kind == ExperimentKind::kSnrSweep ? sweep_value : snr_db;
  const PowerBudgets budgets = snr_to_powers(snr);
  config.source_power = budgets.source;
  config.relay_power = budgets.relay;
  if (kind == ExperimentKind::kPositionSweep) config.geometry.relay = sweep_value;
  return config;
}

void ExperimentSpec::validate() const {
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (schemes.empty()) throw ConfigError("at least one scheme is required");
  if (!(solver.tolerance > 0.0) || solver.max_iterations < 1) {
    throw ConfigError("solver needs tolerance > 0 and max_iterations >= 1");
  }
  if (kind != ExperimentKind::kConvergence && sweep.empty()) {
    throw ConfigError("sweep values are required for " + std::string(kind_name(kind)));
  }
  for (double v : sweep_values()) {
    if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
    if (kind == ExperimentKind::kPositionSweep &&
        (v < kMinRelayPosition || v > kMaxRelayPosition)) {
      throw ConfigError("relay positions must lie in [0.1, 0.9]");
    }
    config_at(v).validate();
  }
}

namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
std::vector<T> as_list(const YAML::Node& node) {
  if (node.IsScalar()) return {node.as<T>()};
  return node.as<std::vector<T>>();
}

SystemConfig parse_system(const YAML::Node& node) {
  check_keys(node,
             {"antennas", "user_antennas", "users", "antennas_per_user", "weights",
              "path_loss_exponent", "half_duplex_rate_factor"},
             "system");
  SystemConfig config;
  config.antennas = node["antennas"].as<int>();
  if (node["user_antennas"]) {
    config.user_antennas = as_list<int>(node["user_antennas"]);
  } else if (node["users"]) {
    const int users = node["users"].as<int>();
    const int per_user = node["antennas_per_user"] ? node["antennas_per_user"].as<int>() : 1;
    if (users < 1) throw ConfigError("users must be >= 1");
    config.user_antennas.assign(static_cast<std::size_t>(users), per_user);
  } else {
    throw ConfigError("system needs user_antennas or users");
  }
  if (node["weights"]) {
    config.weights = as_list<double>(node["weights"]);
    if (config.weights.size() == 1 && config.user_antennas.size() > 1) {
      config.weights.assign(config.user_antennas.size(), config.weights.front());
    }
  }
  if (node["path_loss_exponent"]) config.path_loss_exponent = node["path_loss_exponent"].as<double>();
  if (node["half_duplex_rate_factor"]) {
    config.half_duplex_rate_factor = node["half_duplex_rate_factor"].as<bool>();
  }
  return config;
}

}  // namespace

ExperimentSpec parse_experiment(std::string_view yaml_text) {
  ExperimentSpec spec;
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    check_keys(root,
               {"name", "kind", "system", "geometry", "snr_db", "sweep", "realizations",
                "base_seed", "schemes", "solver", "parallelism", "output"},
               "experiment");
    if (root["name"]) spec.name = root["name"].as<std::string>();
    if (!root["kind"]) throw ConfigError("experiment kind is required");
    spec.kind = parse_kind(root["kind"].as<std::string>());
    if (!root["system"]) throw ConfigError("system section is required");
    spec.system = parse_system(root["system"]);
    if (const auto geo = root["geometry"]) {
      check_keys(geo, {"source", "relay", "users"}, "geometry");
      if (geo["source"]) spec.system.geometry.source = geo["source"].as<double>();
      if (geo["relay"]) spec.system.geometry.relay = geo["relay"].as<double>();
      if (geo["users"]) spec.system.geometry.users = as_list<double>(geo["users"]);
    }
    if (root["snr_db"]) spec.snr_db = root["snr_db"].as<double>();
    if (root["sweep"]) spec.sweep = as_list<double>(root["sweep"]);
    if (root["realizations"]) spec.realizations = root["realizations"].as<int>();
    if (root["base_seed"]) spec.base_seed = root["base_seed"].as<std::uint64_t>();
    if (const auto schemes = root["schemes"]) {
      spec.schemes.clear();
      for (const auto& s : as_list<std::string>(schemes)) spec.schemes.push_back(parse_scheme(s));
    }
    if (const auto solver = root["solver"]) {
      check_keys(solver, {"tolerance", "max_iterations", "bisection_tolerance", "precoder_step"},
                 "solver");
      if (solver["tolerance"]) spec.solver.tolerance = solver["tolerance"].as<double>();
      if (solver["max_iterations"]) spec.solver.max_iterations = solver["max_iterations"].as<int>();
      if (solver["bisection_tolerance"]) {
        spec.solver.search.relative_tolerance = solver["bisection_tolerance"].as<double>();
      }
      if (solver["precoder_step"]) {
        const auto step = solver["precoder_step"].as<std::string>();
        if (step == "source_only") {
          spec.solver.precoder_step = PrecoderStep::kSourceOnly;
        } else if (step == "relay_aware") {
          spec.solver.precoder_step = PrecoderStep::kRelayAware;
        } else {
          throw ConfigError("unknown precoder_step '" + step + "'");
        }
      }
    }
    if (root["parallelism"]) spec.parallelism = root["parallelism"].as<int>();
    if (root["output"]) spec.output = root["output"].as<std::string>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed experiment file: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment(buffer.str());
}

// ---------------------------------------------------------------------------
// Runner

namespace {

struct CellOutcome {
  ResultRow row;
  std::vector<IterationRecord> trace;
};

CellOutcome run_cell(const SystemConfig& config, const ChannelSet& ch, Scheme scheme,
                     const SolverOptions& solver, bool keep_trace) {
  CellOutcome out;
  const auto start = std::chrono::steady_clock::now();
  if (scheme == Scheme::kWmmse) {
    SolverResult r = run_algorithm1(config, ch, solver);
    out.row.sum_rate = r.report.sum_rate();
    out.row.weighted_sum_rate = r.report.weighted_sum_rate;
    out.row.iterations = r.iterations_used;
    out.row.converged = r.converged;
    if (keep_trace) out.trace = std::move(r.trace);
  } else {
    const RelayScheme relay =
        scheme == Scheme::kMrcMrt ? RelayScheme::kMrcMrt : RelayScheme::kMrcRzf;
    const BaselineResult r = run_baseline(config, ch, relay);
    out.row.sum_rate = r.report.sum_rate();
    out.row.weighted_sum_rate = r.report.weighted_sum_rate;
    out.row.iterations = 0;
    out.row.converged = true;
  }
  out.row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<double> values = spec.sweep_values();
  const std::size_t n_values = values.size();
  const auto n_real = static_cast<std::size_t>(spec.realizations);
  const std::size_t n_schemes = spec.schemes.size();
  const bool keep_trace = spec.kind == ExperimentKind::kConvergence;

  std::vector<CellOutcome> cells(n_values * n_real * n_schemes);
  const std::size_t n_tasks = n_values * n_real;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      const std::size_t vi = task / n_real;
      const std::size_t r = task % n_real;
      const double value = values[vi];
      const std::uint64_t seed = spec.base_seed + r;
      const SystemConfig config = spec.config_at(value);
      std::optional<ChannelSet> ch;
      std::string channel_error;
      try {
        ch = generate_channels(config, seed);
      } catch (const std::exception& e) {
        channel_error = e.what();
      }
      for (std::size_t si = 0; si < n_schemes; ++si) {
        CellOutcome& cell = cells[task * n_schemes + si];
        if (ch) {
          try {
            cell = run_cell(config, *ch, spec.schemes[si], spec.solver, keep_trace);
          } catch (const std::exception& e) {
            cell.row.failed = true;
            cell.row.error = e.what();
          }
        } else {
          cell.row.failed = true;
          cell.row.error = channel_error;
        }
        if (cell.row.failed) {
          cell.row.sum_rate = std::numeric_limits<double>::quiet_NaN();
          cell.row.weighted_sum_rate = std::numeric_limits<double>::quiet_NaN();
        }
        cell.row.kind = spec.kind;
        cell.row.sweep_value = value;
        cell.row.scheme = spec.schemes[si];
        cell.row.realization = static_cast<int>(r);
        cell.row.seed = seed;
      }
    }
  };

  const auto threads = static_cast<std::size_t>(std::max(1, spec.parallelism));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n_tasks); ++t) pool.emplace_back(worker);
  }

  ExperimentResult result;
  result.rows.reserve(cells.size());
  for (auto& cell : cells) {
    if (keep_trace && cell.row.scheme == Scheme::kWmmse) {
      for (const auto& rec : cell.trace) {
        result.traces.push_back({cell.row.sweep_value, cell.row.realization, rec});
      }
    }
    result.rows.push_back(std::move(cell.row));
  }
  return result;
}

std::vector<SummaryCell> summarize(std::span<const ResultRow> rows) {
  if (rows.empty()) throw EmptyInput("summarize: no result rows");
  // Values are sorted per cell before accumulation so the result does not
  // depend on row order.
  std::map<std::tuple<double, int>, std::pair<std::vector<double>, int>> groups;
  for (const auto& row : rows) {
    auto& [values, failures] = groups[{row.sweep_value, static_cast<int>(row.scheme)}];
    if (row.failed || !std::isfinite(row.sum_rate)) {
      ++failures;
    } else {
      values.push_back(row.sum_rate);
    }
  }
  std::vector<SummaryCell> cells;
  for (auto& [key, group] : groups) {
    auto& [values, failures] = group;
    std::sort(values.begin(), values.end());
    SummaryCell cell;
    cell.sweep_value = std::get<0>(key);
    cell.scheme = static_cast<Scheme>(std::get<1>(key));
    cell.successes = static_cast<int>(values.size());
    cell.failures = failures;
    if (values.empty()) {
      cell.mean_sum_rate = std::numeric_limits<double>::quiet_NaN();
      cell.standard_error = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sum = 0.0;
      for (double v : values) sum += v;
      const double n = static_cast<double>(values.size());
      cell.mean_sum_rate = sum / n;
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - cell.mean_sum_rate) * (v - cell.mean_sum_rate);
        cell.standard_error = std::sqrt(ss / (n - 1.0) / n);
      }
    }
    cells.push_back(cell);
  }
  return cells;
}

bool all_cells_populated(std::span<const SummaryCell> cells) {
  return std::all_of(cells.begin(), cells.end(),
                     [](const SummaryCell& c) { return c.successes > 0; });
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

void write_rows_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "experiment,sweep_value,scheme,realization,seed,sum_rate,weighted_sum_rate,"
         "iterations,converged,wall_time_s,failed,error\n";
  for (const auto& r : rows) {
    out << kind_name(r.kind) << ',' << num(r.sweep_value) << ',' << scheme_name(r.scheme)
        << ',' << r.realization << ',' << r.seed << ',' << num(r.sum_rate) << ','
        << num(r.weighted_sum_rate) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
        << ',' << num(r.wall_time_s) << ',' << (r.failed ? 1 : 0) << ','
        << (r.error.empty() ? "" : quoted(r.error)) << '\n';
  }
}

void write_summary_csv(std::ostream& out, std::span<const SummaryCell> cells) {
  out << "sweep_value,scheme,successes,failures,mean_sum_rate,standard_error\n";
  for (const auto& c : cells) {
    out << num(c.sweep_value) << ',' << scheme_name(c.scheme) << ',' << c.successes << ','
        << c.failures << ',' << num(c.mean_sum_rate) << ',' << num(c.standard_error) << '\n';
  }
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> traces) {
  out << "sweep_value,realization,iteration,objective,weighted_sum_rate,source_power,"
         "relay_power,lambda,mu\n";
  for (const auto& t : traces) {
    const auto& r = t.record;
    out << num(t.sweep_value) << ',' << t.realization << ',' << r.iteration << ','
        << num(r.objective) << ',' << num(r.weighted_sum_rate) << ',' << num(r.source_power)
        << ',' << num(r.relay_power) << ',' << num(r.lambda) << ',' << num(r.mu) << '\n';
  }
}

OutputPaths output_paths(const std::filesystem::path& rows_csv) {
  const auto dir = rows_csv.parent_path();
  const auto stem = rows_csv.stem().string();
  return {rows_csv, dir / (stem + "_summary.csv"), dir / (stem + "_trace.csv"),
          dir / (stem + "_meta.json")};
}

namespace {

void write_file(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  writer(out);
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace

OutputPaths write_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                          std::span<const SummaryCell> summary) {
  const OutputPaths paths = output_paths(spec.output);
  if (!paths.rows.parent_path().empty()) {
    std::filesystem::create_directories(paths.rows.parent_path());
  }
  write_file(paths.rows, [&](std::ostream& o) { write_rows_csv(o, result.rows); });
  write_file(paths.summary, [&](std::ostream& o) { write_summary_csv(o, summary); });
  if (spec.kind == ExperimentKind::kConvergence) {
    write_file(paths.trace, [&](std::ostream& o) { write_trace_csv(o, result.traces); });
  }

  nlohmann::json meta;
  meta["name"] = spec.name;
  meta["kind"] = kind_name(spec.kind);
  meta["antennas"] = spec.system.antennas;
  meta["user_antennas"] = spec.system.user_antennas;
  std::vector<double> w;
  for (int k = 0; k < spec.system.num_users(); ++k) w.push_back(spec.system.weight(k));
  meta["weights"] = w;
  meta["path_loss_exponent"] = spec.system.path_loss_exponent;
  meta["half_duplex_rate_factor"] = spec.system.half_duplex_rate_factor;
  meta["geometry"] = {{"source", spec.system.geometry.source},
                      {"relay", spec.system.geometry.relay},
                      {"users", spec.system.geometry.users.empty()
                                    ? std::vector<double>{1.0}
                                    : spec.system.geometry.users}};
  meta["snr_db"] = spec.snr_db;
  meta["sweep"] = spec.sweep_values();
  meta["realizations"] = spec.realizations;
  meta["base_seed"] = spec.base_seed;
  std::vector<std::string> schemes;
  for (auto s : spec.schemes) schemes.emplace_back(scheme_name(s));
  meta["schemes"] = schemes;
  meta["solver"] = {{"tolerance", spec.solver.tolerance},
                    {"max_iterations", spec.solver.max_iterations},
                    {"bisection_tolerance", spec.solver.search.relative_tolerance},
                    {"precoder_step", spec.solver.precoder_step == PrecoderStep::kRelayAware
                                          ? "relay_aware"
                                          : "source_only"}};
  meta["baseline_source_precoder"] = "scaled_identity_initializer";
  meta["rate_log_base"] = 2;
  meta["channel_seed_rule"] = "base_seed + realization";
  write_file(paths.meta, [&](std::ostream& o) { o << meta.dump(2) << '\n'; });
  return paths;
}

}  // namespace relaybc
