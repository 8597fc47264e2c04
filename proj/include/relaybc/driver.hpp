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

#include <string_view>
#include <vector>

#include "relaybc/channel.hpp"
#include "relaybc/wmmse.hpp"

namespace relaybc {

enum class PrecoderStep {
  // Source budget only; the relay budget is restored by the next relay step.
  kSourceOnly,
  // Also keeps the current relay feasible, so every block step is a descent step.
  kRelayAware,
};

struct SolverOptions {
  // Stop when (f_prev - f) / max(|f_prev|, 1) < tolerance.
  double tolerance = 1e-6;
  int max_iterations = 500;
  PrecoderStep precoder_step = PrecoderStep::kSourceOnly;
  SearchOptions search;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  double objective = 0.0;
  double weighted_sum_rate = 0.0;
  double source_power = 0.0;
  double relay_power = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
};

struct SolverResult {
  DesignState state;
  MseReport report;
  std::vector<IterationRecord> trace;
  int iterations_used = 0;
  bool converged = false;
};

/// Alternating optimization: each cycle updates the source precoder, the
/// relay beamformer, the MMSE receivers and then the weights, in that order.
SolverResult run_algorithm1(const SystemConfig& config, const ChannelSet& ch,
                            const SolverOptions& options = {});

enum class RelayScheme { kMrcMrt, kMrcRzf };

std::string_view scheme_name(RelayScheme scheme);

struct BaselineResult {
  RelayScheme scheme;
  DesignState state;
  MseReport report;
};

/// Closed-form relay with the initializer's source precoder, MMSE receivers
/// and W_k = E_k^-1. No iteration.
BaselineResult run_baseline(const SystemConfig& config, const ChannelSet& ch,
                            RelayScheme scheme);

}  // namespace relaybc
