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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relaybc/channel.hpp"
#include "relaybc/driver.hpp"

namespace relaybc {

enum class ExperimentKind { kConvergence, kSnrSweep, kPositionSweep };
enum class Scheme { kWmmse, kMrcMrt, kMrcRzf };

std::string_view kind_name(ExperimentKind kind);
std::string_view scheme_name(Scheme scheme);
ExperimentKind parse_kind(std::string_view text);
Scheme parse_scheme(std::string_view text);
/// Comma-separated list, e.g. "wmmse,mrc_rzf".
std::vector<Scheme> parse_scheme_list(std::string_view text);

// Relay positions closer than this to either end make 1/l^tau blow up.
inline constexpr double kMinRelayPosition = 0.1;
inline constexpr double kMaxRelayPosition = 0.9;

struct ExperimentSpec {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::kSnrSweep;
  SystemConfig system;         // budgets are overwritten per sweep value
  double snr_db = 28.0;        // fixed SNR for convergence and position sweeps
  std::vector<double> sweep;   // SNR values in dB, or relay positions
  int realizations = 100;
  std::uint64_t base_seed = 1;
  std::vector<Scheme> schemes{Scheme::kWmmse, Scheme::kMrcMrt, Scheme::kMrcRzf};
  SolverOptions solver;
  int parallelism = 1;
  std::string output = "results.csv";

  /// Sweep values actually iterated; a convergence run has the single SNR.
  std::vector<double> sweep_values() const;
  SystemConfig config_at(double sweep_value) const;
  void validate() const;
};

ExperimentSpec parse_experiment(std::string_view yaml_text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct ResultRow {
  ExperimentKind kind = ExperimentKind::kSnrSweep;
  double sweep_value = 0.0;
  Scheme scheme = Scheme::kWmmse;
  int realization = 0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  double weighted_sum_rate = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string error;
};

struct TraceRow {
  double sweep_value = 0.0;
  int realization = 0;
  IterationRecord record;
};

struct ExperimentResult {
  // Ordered by (sweep index, realization, scheme order of the experiment).
  std::vector<ResultRow> rows;
  // Per-iteration WMMSE records; filled for convergence experiments only.
  std::vector<TraceRow> traces;
};

/// Runs every (sweep value, realization, scheme) cell. Realization r uses
/// channels drawn with seed base_seed + r. Failures are recorded per row.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct SummaryCell {
  double sweep_value = 0.0;
  Scheme scheme = Scheme::kWmmse;
  int successes = 0;
  int failures = 0;
  double mean_sum_rate = 0.0;
  double standard_error = 0.0;
};

/// Mean and standard error of the sum-rate per (sweep value, scheme), over
/// the rows that did not fail. Throws EmptyInput for no rows.
std::vector<SummaryCell> summarize(std::span<const ResultRow> rows);

/// True when every summary cell has at least one successful realization.
bool all_cells_populated(std::span<const SummaryCell> cells);

void write_rows_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_summary_csv(std::ostream& out, std::span<const SummaryCell> cells);
void write_trace_csv(std::ostream& out, std::span<const TraceRow> traces);

struct OutputPaths {
  std::filesystem::path rows;
  std::filesystem::path summary;
  std::filesystem::path trace;
  std::filesystem::path meta;
};

/// `results/foo.csv` -> foo.csv, foo_summary.csv, foo_trace.csv, foo_meta.json.
OutputPaths output_paths(const std::filesystem::path& rows_csv);

/// Writes rows, summary, run metadata and (for convergence runs) the trace.
OutputPaths write_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                          std::span<const SummaryCell> summary);

}  // namespace relaybc
