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

#include "relaybc/baselines.hpp"

#include <cmath>
#include <string>

#include "relaybc/errors.hpp"

namespace relaybc {

ComplexMatrix stacked_user_channel(const ChannelSet& ch) {
  Eigen::Index rows = 0;
  for (const auto& h : ch.relay_user) rows += h.rows();
  ComplexMatrix stacked(rows, ch.antennas());
  Eigen::Index offset = 0;
  for (const auto& h : ch.relay_user) {
    stacked.middleRows(offset, h.rows()) = h;
    offset += h.rows();
  }
  return stacked;
}

ComplexMatrix normalize_relay(const ComplexMatrix& unnormalized, const ComplexMatrix& pi,
                              double relay_budget) {
  if (!(relay_budget > 0.0)) throw ConfigError("relay budget must be positive");
  if (unnormalized.squaredNorm() == 0.0 || !unnormalized.allFinite()) {
    throw DegenerateChannel("relay beamformer direction is zero or non-finite");
  }
  const double power = relay_power(unnormalized, pi);
  return unnormalized * std::sqrt(relay_budget / power);
}

namespace {

void check_precoder(const ChannelSet& ch, const ComplexMatrix& precoder) {
  if (precoder.rows() != ch.antennas()) {
    throw DimensionMismatch("precoder has " + std::to_string(precoder.rows()) +
                            " rows, expected " + std::to_string(ch.antennas()));
  }
}

}  // namespace

ComplexMatrix mrc_mrt(const ChannelSet& ch, const ComplexMatrix& precoder, double relay_budget) {
  check_precoder(ch, precoder);
  const ComplexMatrix hur = stacked_user_channel(ch);
  if (hur.rows() != precoder.cols()) {
    throw DimensionMismatch("stacked user channel rows must equal precoder columns");
  }
  const ComplexMatrix combine = precoder.adjoint() * ch.source_relay.adjoint();
  const ComplexMatrix f = hur.adjoint() * combine;
  return normalize_relay(f, relay_input_covariance(ch, precoder), relay_budget);
}

ComplexMatrix mrc_rzf(const ChannelSet& ch, const ComplexMatrix& precoder, double relay_budget) {
  check_precoder(ch, precoder);
  if (!(relay_budget > 0.0)) throw ConfigError("relay budget must be positive");
  const ComplexMatrix hur = stacked_user_channel(ch);
  if (hur.rows() != precoder.cols()) {
    throw DimensionMismatch("stacked user channel rows must equal precoder columns");
  }
  ComplexMatrix inner = hur * hur.adjoint();
  inner.diagonal().array() += static_cast<double>(ch.antennas()) / relay_budget;
  const HpdMatrix regularized = HpdMatrix::from(hermitian_part(inner));
  const ComplexMatrix combine = precoder.adjoint() * ch.source_relay.adjoint();
  const ComplexMatrix f = hur.adjoint() * regularized.solve(combine);
  return normalize_relay(f, relay_input_covariance(ch, precoder), relay_budget);
}

DesignState algorithm1_init(const SystemConfig& config, const ChannelSet& ch) {
  config.validate();
  if (ch.antennas() != config.antennas || ch.num_users() != config.num_users()) {
    throw DimensionMismatch("channel set does not match the system configuration");
  }
  const Eigen::Index m = config.antennas;
  const double scale = std::sqrt(config.source_power / static_cast<double>(m));

  DesignState state;
  const ComplexMatrix eye = ComplexMatrix::Identity(m, m);
  Eigen::Index offset = 0;
  for (int n : config.user_antennas) {
    state.precoders.push_back(scale * eye.middleCols(offset, n));
    offset += n;
  }
  const ComplexMatrix pi = relay_input_covariance(ch, state.stacked_precoder());
  // Tr(rho^2 (Pi + I)) = Pr
  const double rho = std::sqrt(config.relay_power / (pi.trace().real() + static_cast<double>(m)));
  state.relay = rho * eye;
  for (int k = 0; k < config.num_users(); ++k) {
    state.receivers.push_back(mmse_receiver(ch, state.precoders, state.relay, k));
    const Eigen::Index n = config.user_antennas[static_cast<std::size_t>(k)];
    state.weights.push_back(HpdMatrix::from(ComplexMatrix::Identity(n, n)));
  }
  return state;
}

}  // namespace relaybc
