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

// Acceptance gate: one PASS/FAIL line per criterion. `--full` adds the
// 2000-realization preset runs to criteria 7 and 9.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "relaybc/baselines.hpp"
#include "relaybc/driver.hpp"
#include "relaybc/errors.hpp"
#include "relaybc/experiment.hpp"

using namespace relaybc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path preset(const std::string& name) { return fs::path(RELAYBC_PRESET_DIR) / (name + ".yaml"); }

double weighted_streams(const SystemConfig& c) {
  double total = 0.0;
  for (int k = 0; k < c.num_users(); ++k) total += c.weight(k) * c.user_antennas[k];
  return total;
}

// ---------------------------------------------------------------------------
// Shared batch: 100 seeded runs at M=4, K=2, N=1, 10 dB, relay halfway.

struct Batch {
  std::vector<SystemConfig> configs;
  std::vector<ChannelSet> channels;
  std::vector<SolverResult> results;
  double seconds = 0.0;
};

const Batch& batch() {
  static std::optional<Batch> cached;
  if (!cached) {
    Batch b;
    const auto t0 = std::chrono::steady_clock::now();
    const PowerBudgets pw = snr_to_powers(10.0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      b.configs.push_back(make_config(4, 2, 1, pw.source, pw.relay, 0.5));
      b.channels.push_back(generate_channels(b.configs.back(), seed));
      b.results.push_back(run_algorithm1(b.configs.back(), b.channels.back()));
    }
    b.seconds = seconds_since(t0);
    cached = std::move(b);
  }
  return *cached;
}

Outcome monotone_convergence() {
  const Batch& b = batch();
  int nonmonotone = 0, unconverged = 0;
  double worst = 0.0;
  for (const auto& r : b.results) {
    bool bad = false;
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      const double rise = r.trace[i].objective - r.trace[i - 1].objective;
      worst = std::max(worst, rise);
      if (rise > 1e-9) bad = true;
    }
    nonmonotone += bad;
    unconverged += !(r.converged && r.iterations_used <= 500);
  }
  return {nonmonotone == 0 && unconverged == 0,
          fmt("objective rose on %d/100 runs (worst +%.3g), %d/100 not converged in 500 "
              "iterations, %.1f s",
              nonmonotone, worst, unconverged, b.seconds)};
}

Outcome objective_identity() {
  const Batch& b = batch();
  double worst_gap = 0.0, worst_drop = 0.0, worst_oracle = 0.0;
  int dropping = 0;
  for (std::size_t n = 0; n < b.results.size(); ++n) {
    const auto& r = b.results[n];
    const double streams = weighted_streams(b.configs[n]);
    bool dropped = false;
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      const auto& rec = r.trace[i];
      worst_gap = std::max(worst_gap, std::abs(rec.objective - (streams - rec.weighted_sum_rate)));
      if (i > 0) {
        const double drop = r.trace[i - 1].weighted_sum_rate - rec.weighted_sum_rate;
        worst_drop = std::max(worst_drop, drop);
        if (drop > 1e-9) dropped = true;
      }
    }
    dropping += dropped;
    // Final weighted sum-rate against the interference-plus-noise form.
    double wsr = 0.0;
    for (int k = 0; k < b.configs[n].num_users(); ++k) {
      wsr += b.configs[n].weight(k) *
             oracle::interference_rate(b.channels[n], r.state.precoders, r.state.relay, k);
    }
    worst_oracle = std::max(worst_oracle, std::abs(wsr - r.report.weighted_sum_rate));
  }
  return {worst_gap <= 1e-9 && dropping == 0 && worst_oracle <= 1e-9,
          fmt("max |objective - (sum wN - WSR)| = %.3g, final WSR vs oracle %.3g, sum-rate fell "
              "on %d/100 runs (worst -%.3g)",
              worst_gap, worst_oracle, dropping, worst_drop)};
}

// ---------------------------------------------------------------------------

Outcome stationarity() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_p = 0.0, worst_f = 0.0;
  for (int i = 0; i < 25; ++i) {
    const int m = 2 + i % 3;
    const int k = 1 + i % 2;
    const int n = std::max(1, m / (2 * k));
    const double snr = 10.0 * (i % 3);
    const auto inst = oracle::random_instance(m, k, n, snr, 500 + i, true);
    const std::vector<int> widths(static_cast<std::size_t>(k), n);

    const PrecoderSolution ps = precoder_multiplier_search(
        precoder_system(inst.ch, inst.relay, inst.receivers, inst.weights, inst.user_weights),
        inst.config.source_power);
    const ComplexMatrix p = stack_precoders(ps.precoders);
    const auto gp = oracle::fd_gradient(
        [&](const ComplexMatrix& x) {
          return oracle::precoder_lagrangian(inst, oracle::split_blocks(x, widths), ps.lambda);
        },
        p);
    worst_p = std::max(worst_p, gp.norm() / (1.0 + p.norm()));

    const RelaySolution rs = relay_multiplier_search(
        relay_system(inst.ch, inst.precoders, inst.receivers, inst.weights, inst.user_weights),
        inst.config.relay_power);
    const auto gf = oracle::fd_gradient(
        [&](const ComplexMatrix& x) {
          return oracle::relay_lagrangian(inst, inst.precoders, x, rs.mu);
        },
        rs.relay);
    worst_f = std::max(worst_f, gf.norm() / (1.0 + rs.relay.norm()));
  }
  return {worst_p <= 1e-5 && worst_f <= 1e-5,
          fmt("worst scaled gradient norm: precoder %.3g, relay %.3g over 25 instances, %.1f s",
              worst_p, worst_f, seconds_since(t0))};
}

Outcome rate_forms() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int m = 2 + static_cast<int>(rng() % 5);
    const int n = 1 + static_cast<int>(rng() % 2);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(3, m / n)));
    const double snr = static_cast<double>(rng() % 31);
    const auto inst = oracle::random_instance(m, k, n, snr, 900 + i);
    for (int u = 0; u < k; ++u) {
      const double direct = user_rate(
          mse_matrix(inst.ch, inst.precoders, inst.relay, inst.receivers[u], u));
      const double other = oracle::interference_rate(inst.ch, inst.precoders, inst.relay, u);
      worst = std::max(worst, std::abs(direct - other) / std::abs(other));
    }
  }
  return {worst <= 1e-8, fmt("worst relative gap %.3g over 100 states", worst)};
}

Outcome power_feasibility() {
  const Batch& b = batch();
  double worst_over = 0.0, worst_active = 0.0;
  long active = 0, records = 0;
  auto scan = [&](const SystemConfig& c, const SolverResult& r) {
    for (const auto& rec : r.trace) {
      ++records;
      worst_over = std::max({worst_over, rec.source_power / c.source_power - 1.0,
                             rec.relay_power / c.relay_power - 1.0});
      if (rec.lambda > 0.0) {
        ++active;
        worst_active = std::max(worst_active, std::abs(rec.source_power / c.source_power - 1.0));
      }
      if (rec.mu > 0.0) {
        ++active;
        worst_active = std::max(worst_active, std::abs(rec.relay_power / c.relay_power - 1.0));
      }
    }
  };
  for (std::size_t i = 0; i < b.results.size(); ++i) scan(b.configs[i], b.results[i]);
  // A second set with multi-antenna users at higher SNR.
  const PowerBudgets pw = snr_to_powers(20.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SystemConfig c = make_config(4, 2, 2, pw.source, pw.relay, 0.3);
    SolverOptions options;
    options.max_iterations = 100;
    scan(c, run_algorithm1(c, generate_channels(c, seed), options));
  }
  return {worst_over <= 1e-6 && worst_active <= 1e-6,
          fmt("%ld iteration ends, max overshoot %.3g, %ld active constraints with max gap %.3g",
              records, std::max(worst_over, 0.0), active, worst_active)};
}

Outcome scalar_grid() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> mag(0.2, 1.5), budget(0.05, 3.0);
  std::bernoulli_distribution flip(0.5);
  auto coeff = [&] { return ComplexMatrix::Constant(1, 1, Complex(flip(rng) ? -mag(rng) : mag(rng), 0.0)); };
  double worst = 0.0;
  int active = 0;
  for (int trial = 0; trial < 20; ++trial) {
    oracle::Instance inst;
    inst.config = make_config(1, 1, 1, budget(rng), budget(rng));
    inst.ch.source_relay = coeff();
    inst.ch.source_user = {coeff()};
    inst.ch.relay_user = {coeff()};
    inst.relay = coeff();
    // Receiver and weight come from an arbitrary earlier precoder.
    const std::vector<ComplexMatrix> start{coeff()};
    inst.receivers = {mmse_receiver(inst.ch, start, inst.relay, 0)};
    inst.weights = {weight_update(mse_matrix(inst.ch, start, inst.relay, inst.receivers[0], 0))};
    inst.user_weights = {mag(rng)};

    const PrecoderSolution sol = precoder_multiplier_search(
        precoder_system(inst.ch, inst.relay, inst.receivers, inst.weights, inst.user_weights),
        inst.config.source_power);
    active += sol.lambda > 0.0;

    const double limit = std::sqrt(inst.config.source_power);
    double best_p = 0.0, best = std::numeric_limits<double>::infinity();
    const int steps = static_cast<int>(std::ceil(2.0 * limit / 1e-4));
    for (int s = 0; s <= steps; ++s) {
      const double p = std::min(-limit + s * 1e-4, limit);
      const double f = oracle::precoder_lagrangian(inst, {ComplexMatrix::Constant(1, 1, p)}, 0.0);
      if (f < best) {
        best = f;
        best_p = p;
      }
    }
    worst = std::max(worst, std::abs(sol.precoders[0](0, 0) - Complex(best_p, 0.0)));
  }
  return {worst <= 1e-3,
          fmt("worst |p_search - p_grid| = %.3g over 20 instances (%d with active budget)", worst,
              active)};
}

Outcome scheme_ordering_desk() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentSpec spec;
  spec.name = "ordering";
  spec.kind = ExperimentKind::kSnrSweep;
  spec.system = make_config(4, 2, 2, 1.0, 1.0, 0.5);
  spec.sweep = {20.0};
  spec.realizations = 200;
  spec.base_seed = 1;
  spec.validate();
  const auto cells = summarize(run_experiment(spec).rows);
  std::map<Scheme, SummaryCell> by;
  for (const auto& c : cells) by[c.scheme] = c;
  const auto& w = by.at(Scheme::kWmmse);
  bool pass = w.failures == 0;
  std::string detail = fmt("wmmse %.3f +- %.3f", w.mean_sum_rate, w.standard_error);
  for (Scheme s : {Scheme::kMrcMrt, Scheme::kMrcRzf}) {
    const auto& o = by.at(s);
    const double se = std::hypot(w.standard_error, o.standard_error);
    const double margin = (w.mean_sum_rate - o.mean_sum_rate) / se;
    pass = pass && o.failures == 0 && margin > 2.0;
    detail += fmt("; %s %.3f +- %.3f (%.1f SE below)", std::string(scheme_name(s)).c_str(),
                  o.mean_sum_rate, o.standard_error, margin);
  }
  detail += fmt("; %.1f s", seconds_since(t0));
  return {pass, detail};
}

// Full-size presets: every row succeeds; SNR-sweep means are non-decreasing.
struct FullRun {
  ExperimentSpec spec;
  ExperimentResult result;
  std::vector<SummaryCell> cells;
  double seconds = 0.0;
};

FullRun run_full_preset(const std::string& name) {
  FullRun run;
  const auto t0 = std::chrono::steady_clock::now();
  run.spec = load_experiment(preset(name));
  run.spec.output = (fs::path("acceptance_full") / (name + ".csv")).string();
  std::fprintf(stderr, "running %s ...\n", name.c_str());
  run.result = run_experiment(run.spec);
  run.cells = summarize(run.result.rows);
  write_outputs(run.spec, run.result, run.cells);
  run.seconds = seconds_since(t0);
  return run;
}

std::vector<FullRun>& full_runs() {
  static std::vector<FullRun> runs;
  if (runs.empty()) {
    runs.push_back(run_full_preset("snr_sweep"));
    runs.push_back(run_full_preset("position_sweep"));
  }
  return runs;
}

Outcome scheme_ordering_full() {
  bool pass = true;
  std::string detail;
  for (const auto& run : full_runs()) {
    long failed = 0;
    for (const auto& row : run.result.rows) failed += row.failed;
    pass = pass && failed == 0 && all_cells_populated(run.cells);
    detail += fmt("%s: %zu rows, %ld failed, %.0f s", run.spec.name.c_str(),
                  run.result.rows.size(), failed, run.seconds);
    if (run.spec.kind == ExperimentKind::kSnrSweep) {
      std::map<Scheme, std::vector<double>> curves;
      for (const auto& c : run.cells) curves[c.scheme].push_back(c.mean_sum_rate);
      int bad = 0;
      for (const auto& [scheme, means] : curves) {
        for (std::size_t i = 1; i < means.size(); ++i) bad += !(means[i] >= means[i - 1]);
      }
      pass = pass && bad == 0;
      detail += fmt(" (%d non-monotone steps)", bad);
    }
    detail += "; ";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome baseline_power() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> pos(0.1, 0.9);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int m = 2 + static_cast<int>(rng() % 7);
    const int n = 1 + static_cast<int>(rng() % 2);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::max(1, m / n)));
    const PowerBudgets pw = snr_to_powers(static_cast<double>(rng() % 31));
    const SystemConfig c = make_config(m, k, n, pw.source, pw.relay, pos(rng));
    const ChannelSet ch = generate_channels(c, 7000 + i);
    const DesignState init = algorithm1_init(c, ch);
    const ComplexMatrix p = init.stacked_precoder();
    const ComplexMatrix pi = relay_input_covariance(ch, p);
    for (const ComplexMatrix& f : {init.relay, mrc_mrt(ch, p, c.relay_power), mrc_rzf(ch, p, c.relay_power)}) {
      worst = std::max(worst, std::abs(relay_power(f, pi) - c.relay_power) / c.relay_power);
    }
  }
  return {worst <= 1e-10, fmt("worst relative relay-power error %.3g over 100 instances x 3", worst)};
}

bool same_sum_rates(const ExperimentResult& a, const ExperimentResult& b, std::size_t* compared) {
  std::map<std::tuple<double, int, int>, double> first;
  for (const auto& r : a.rows) first[{r.sweep_value, r.realization, static_cast<int>(r.scheme)}] = r.sum_rate;
  bool same = true;
  for (const auto& r : b.rows) {
    const auto it = first.find({r.sweep_value, r.realization, static_cast<int>(r.scheme)});
    if (it == first.end()) return false;
    same = same && std::bit_cast<std::uint64_t>(it->second) == std::bit_cast<std::uint64_t>(r.sum_rate);
    ++*compared;
  }
  return same;
}

// Sum-rate column of a rows CSV, as text.
std::vector<std::string> sum_rate_column(const ExperimentResult& r) {
  std::ostringstream out;
  write_rows_csv(out, r.rows);
  std::istringstream in(out.str());
  std::vector<std::string> col;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string field;
    for (int i = 0; i <= 5; ++i) std::getline(fields, field, ',');
    col.push_back(field);
  }
  return col;
}

Outcome reproducibility(bool full) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::size_t compared = 0;
  std::string names;
  for (const std::string name : {"convergence", "desk_snr_sweep", "desk_position_sweep"}) {
    const ExperimentSpec spec = load_experiment(preset(name));
    const ExperimentResult a = run_experiment(spec);
    const ExperimentResult b = run_experiment(spec);
    pass = pass && same_sum_rates(a, b, &compared) && sum_rate_column(a) == sum_rate_column(b);
    names += name + " ";
  }
  if (full) {
    // Rerun the first realizations of the large presets against the full run.
    for (const auto& run : full_runs()) {
      ExperimentSpec spec = run.spec;
      spec.realizations = 10;
      pass = pass && same_sum_rates(run.result, run_experiment(spec), &compared);
      names += run.spec.name + "(10) ";
    }
  }
  return {pass, fmt("%zu sum-rates compared bitwise across reruns of %s; %.1f s", compared,
                    names.c_str(), seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relaybc acceptance gate"};
  bool full = false;
  std::vector<int> only;
  app.add_flag("--full", full, "Include the 2000-realization preset runs");
  app.add_option("--criterion", only, "Run only these criteria (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"monotone convergence", monotone_convergence},
      {"objective equals sum wN - WSR after weight update", objective_identity},
      {"closed-form stationarity", stationarity},
      {"rate forms agree", rate_forms},
      {"power feasibility and bisection accuracy", power_feasibility},
      {"scalar brute-force grid", scalar_grid},
      {"scheme ordering", [full] {
         Outcome o = scheme_ordering_desk();
         if (full) {
           const Outcome f = scheme_ordering_full();
           o.pass = o.pass && f.pass;
           o.detail += " | full presets: " + f.detail;
         }
         return o;
       }},
      {"baseline relay power", baseline_power},
      {"reproducibility", [full] { return reproducibility(full); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s  [%s]\n", id, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
