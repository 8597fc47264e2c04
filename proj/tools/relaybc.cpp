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

// Monte-Carlo harness: runs experiment files and lists the shipped presets.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relaybc/errors.hpp"
#include "relaybc/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEmptyCell = 1;
constexpr int kExitConfig = 2;

// A spec argument is either a path or the name of a file in the preset dir.
fs::path resolve_spec(const std::string& arg, const fs::path& preset_dir) {
  if (fs::exists(arg)) return arg;
  for (const char* ext : {"", ".yaml", ".yml"}) {
    const fs::path candidate = preset_dir / (arg + ext);
    if (fs::exists(candidate)) return candidate;
  }
  throw relaybc::ConfigError("no experiment file or preset named '" + arg + "'");
}

std::vector<fs::path> list_presets(const fs::path& dir) {
  std::vector<fs::path> found;
  if (!fs::is_directory(dir)) return found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml")) found.push_back(entry.path());
  }
  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint source/relay precoding for MIMO relaying broadcast channels"};
  app.require_subcommand(1);

  std::string preset_dir = RELAYBC_PRESET_DIR;
  app.add_option("--preset-dir", preset_dir, "Directory holding preset experiment files")
      ->capture_default_str();

  auto* run = app.add_subcommand("run", "Run an experiment file or preset");
  std::string spec_arg;
  std::uint64_t seed = 0;
  int realizations = 0;
  std::string out;
  std::string schemes;
  int parallelism = 0;
  run->add_option("spec", spec_arg, "Experiment file path or preset name")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Base seed (overrides the file)");
  run->add_option("--realizations", realizations, "Realizations per sweep value")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Rows CSV path; summary/meta files go next to it");
  run->add_option("--schemes", schemes, "Comma-separated subset of wmmse,mrc_mrt,mrc_rzf");
  run->add_option("--parallelism", parallelism, "Worker threads")->check(CLI::PositiveNumber);
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Do not print the summary table");

  auto* presets = app.add_subcommand("presets", "Inspect shipped presets");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "List preset names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& p : list_presets(preset_dir)) {
        std::cout << p.stem().string() << '\t' << p.string() << '\n';
      }
      return kExitOk;
    }

    relaybc::ExperimentSpec spec = relaybc::load_experiment(resolve_spec(spec_arg, preset_dir));
    if (*seed_opt) spec.base_seed = seed;
    if (realizations > 0) spec.realizations = realizations;
    if (!out.empty()) spec.output = out;
    if (!schemes.empty()) spec.schemes = relaybc::parse_scheme_list(schemes);
    if (parallelism > 0) spec.parallelism = parallelism;
    spec.validate();

    const relaybc::ExperimentResult result = relaybc::run_experiment(spec);
    const auto summary = relaybc::summarize(result.rows);
    const auto paths = relaybc::write_outputs(spec, result, summary);

    if (!quiet) {
      relaybc::write_summary_csv(std::cout, summary);
      std::cerr << "rows: " << paths.rows.string() << "\nsummary: " << paths.summary.string()
                << '\n';
    }
    return relaybc::all_cells_populated(summary) ? kExitOk : kExitEmptyCell;
  } catch (const relaybc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
