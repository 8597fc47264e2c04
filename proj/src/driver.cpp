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

#include "relaybc/driver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relaybc/baselines.hpp"
#include "relaybc/errors.hpp"

namespace relaybc {

namespace {

std::vector<double> user_weights(const SystemConfig& config) {
  std::vector<double> w;
  for (int k = 0; k < config.num_users(); ++k) w.push_back(config.weight(k));
  return w;
}

template <class E>
[[noreturn]] void rethrow_at(int iteration, const E& e) {
  throw E("iteration " + std::to_string(iteration) + ": " + e.what());
}

void refresh_receivers_and_weights(const ChannelSet& ch, DesignState& state) {
  for (int k = 0; k < ch.num_users(); ++k) {
    state.receivers[static_cast<std::size_t>(k)] =
        mmse_receiver(ch, state.precoders, state.relay, k);
  }
  for (int k = 0; k < ch.num_users(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const HpdMatrix e = mse_matrix(ch, state.precoders, state.relay, state.receivers[i], k);
    state.weights[i] = weight_update(e);
  }
}

}  // namespace

SolverResult run_algorithm1(const SystemConfig& config, const ChannelSet& ch,
                            const SolverOptions& options) {
  if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw ConfigError("solver needs tolerance > 0 and max_iterations >= 1");
  }
  const std::vector<double> w = user_weights(config);
  SolverResult result{algorithm1_init(config, ch), {}, {}, 0, false};
  DesignState& state = result.state;

  for (int it = 1; it <= options.max_iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    try {
      const PrecoderSystem psys =
          precoder_system(ch, state.relay, state.receivers, state.weights, w);
      const PrecoderSolution p =
          options.precoder_step == PrecoderStep::kRelayAware
              ? relay_aware_precoder_search(psys, ch, state.relay, config.source_power,
                                            config.relay_power, options.search)
              : precoder_multiplier_search(psys, config.source_power, options.search);
      state.precoders = p.precoders;
      rec.lambda = p.lambda;
      rec.source_power = p.power;

      const RelaySolution f = relay_multiplier_search(
          relay_system(ch, state.precoders, state.receivers, state.weights, w),
          config.relay_power, options.search);
      state.relay = f.relay;
      rec.mu = f.mu;
      rec.relay_power = f.power;

      refresh_receivers_and_weights(ch, state);
      result.report = evaluate(config, ch, state);
    } catch (const FactorizationFailure& e) {
      rethrow_at(it, e);
    } catch (const BracketFailure& e) {
      rethrow_at(it, e);
    }
    rec.objective = result.report.wmmse_objective;
    rec.weighted_sum_rate = result.report.weighted_sum_rate;
    result.trace.push_back(rec);
    result.iterations_used = it;

    if (it >= 2) {
      const double prev = result.trace[result.trace.size() - 2].objective;
      const double decrease = (prev - rec.objective) / std::max(std::abs(prev), 1.0);
      if (decrease < options.tolerance) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

std::string_view scheme_name(RelayScheme scheme) {
  switch (scheme) {
    case RelayScheme::kMrcMrt:
      return "mrc_mrt";
    case RelayScheme::kMrcRzf:
      return "mrc_rzf";
  }
  return "unknown";
}

BaselineResult run_baseline(const SystemConfig& config, const ChannelSet& ch,
                            RelayScheme scheme) {
  BaselineResult result{scheme, algorithm1_init(config, ch), {}};
  DesignState& state = result.state;
  const ComplexMatrix p = state.stacked_precoder();
  state.relay = scheme == RelayScheme::kMrcMrt ? mrc_mrt(ch, p, config.relay_power)
                                               : mrc_rzf(ch, p, config.relay_power);
  refresh_receivers_and_weights(ch, state);
  result.report = evaluate(config, ch, state);
  return result;
}

}  // namespace relaybc
