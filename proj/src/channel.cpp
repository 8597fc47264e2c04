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

#include "relaybc/channel.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "relaybc/errors.hpp"

namespace relaybc {

int SystemConfig::total_streams() const {
  return std::accumulate(user_antennas.begin(), user_antennas.end(), 0);
}

double SystemConfig::weight(int k) const {
  return weights.empty() ? 1.0 : weights.at(static_cast<std::size_t>(k));
}

double SystemConfig::user_position(int k) const {
  if (geometry.users.empty()) return 1.0;
  if (geometry.users.size() == 1) return geometry.users.front();
  return geometry.users.at(static_cast<std::size_t>(k));
}

double SystemConfig::source_relay_distance() const {
  return std::abs(geometry.relay - geometry.source);
}

double SystemConfig::source_user_distance(int k) const {
  return std::abs(user_position(k) - geometry.source);
}

double SystemConfig::relay_user_distance(int k) const {
  return std::abs(user_position(k) - geometry.relay);
}

void SystemConfig::validate() const {
  if (antennas < 1) throw ConfigError("antenna count must be >= 1");
  if (user_antennas.empty()) throw ConfigError("at least one user is required");
  for (int n : user_antennas) {
    if (n < 1) throw ConfigError("every user needs >= 1 antenna");
  }
  if (total_streams() > antennas) {
    throw ConfigError("sum of user antennas (" + std::to_string(total_streams()) +
                      ") exceeds source antennas (" + std::to_string(antennas) + ")");
  }
  if (!(source_power > 0.0) || !(relay_power > 0.0) ||
      !std::isfinite(source_power) || !std::isfinite(relay_power)) {
    throw ConfigError("power budgets must be finite and positive");
  }
  if (!weights.empty()) {
    if (weights.size() != user_antennas.size()) {
      throw ConfigError("weights must have one entry per user");
    }
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ConfigError("weights must be finite and non-negative");
      }
    }
  }
  if (!(path_loss_exponent > 0.0)) {
    throw ConfigError("path-loss exponent must be positive");
  }
  if (geometry.users.size() > 1 && geometry.users.size() != user_antennas.size()) {
    throw ConfigError("user positions must be a single value or one per user");
  }
  if (!(source_relay_distance() > 0.0)) {
    throw GeometryError("source-relay distance must be positive");
  }
  for (int k = 0; k < num_users(); ++k) {
    if (!(source_user_distance(k) > 0.0) || !(relay_user_distance(k) > 0.0)) {
      throw GeometryError("user " + std::to_string(k) +
                          " is co-located with the source or relay");
    }
  }
}

SystemConfig make_config(int antennas, int users, int antennas_per_user,
                         double source_power, double relay_power,
                         double relay_position) {
  SystemConfig config;
  config.antennas = antennas;
  config.user_antennas.assign(static_cast<std::size_t>(users), antennas_per_user);
  config.weights.assign(static_cast<std::size_t>(users), 1.0);
  config.source_power = source_power;
  config.relay_power = relay_power;
  config.geometry.relay = relay_position;
  return config;
}

namespace {

ComplexMatrix draw_link(std::mt19937_64& rng, Eigen::Index rows,
                        Eigen::Index cols, double distance, double tau) {
  // Real and imaginary parts each carry half the variance 1/l^tau.
  const double variance = 1.0 / std::pow(distance, tau);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  ComplexMatrix h(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      h(i, j) = Complex(re, im);
    }
  }
  return h;
}

}  // namespace

ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const double tau = config.path_loss_exponent;
  const Eigen::Index m = config.antennas;

  ChannelSet ch;
  ch.source_relay = draw_link(rng, m, m, config.source_relay_distance(), tau);
  for (int k = 0; k < config.num_users(); ++k) {
    const Eigen::Index n = config.user_antennas[static_cast<std::size_t>(k)];
    ch.source_user.push_back(draw_link(rng, n, m, config.source_user_distance(k), tau));
    ch.relay_user.push_back(draw_link(rng, n, m, config.relay_user_distance(k), tau));
  }
  return ch;
}

PowerBudgets snr_to_powers(double snr_db) {
  const double linear = std::pow(10.0, snr_db / 10.0);
  return {linear, linear};
}

}  // namespace relaybc
