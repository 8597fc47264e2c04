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
#include <vector>

#include "relaybc/numerics.hpp"

namespace relaybc {

// Node positions on the unit line. Users may be co-located (the default).
struct Geometry {
  double source = 0.0;
  double relay = 0.5;
  std::vector<double> users;  // one entry per user; empty means all at 1.0
};

struct SystemConfig {
  int antennas = 4;                   // M, at both source and relay
  std::vector<int> user_antennas;     // N_k
  double source_power = 10.0;         // Ps, linear, unit noise variance
  double relay_power = 10.0;          // Pr
  std::vector<double> weights;        // w_k; empty means all ones
  double path_loss_exponent = 3.0;    // tau
  Geometry geometry;
  bool half_duplex_rate_factor = false;

  int num_users() const { return static_cast<int>(user_antennas.size()); }
  int total_streams() const;
  double weight(int k) const;
  double user_position(int k) const;

  double source_relay_distance() const;
  double source_user_distance(int k) const;
  double relay_user_distance(int k) const;

  /// Throws ConfigError for invalid counts, budgets or weights and
  /// GeometryError for non-positive link distances.
  void validate() const;
};

/// Convenience: K users with n antennas each, unit weights, co-located.
SystemConfig make_config(int antennas, int users, int antennas_per_user,
                         double source_power, double relay_power,
                         double relay_position = 0.5);

// One realization of every channel matrix.
struct ChannelSet {
  ComplexMatrix source_relay;               // H_rb, M x M
  std::vector<ComplexMatrix> source_user;   // H_kb, N_k x M (direct links)
  std::vector<ComplexMatrix> relay_user;    // H_kr, N_k x M

  int num_users() const { return static_cast<int>(source_user.size()); }
  int antennas() const { return static_cast<int>(source_relay.rows()); }
};

/// Draws i.i.d. CN(0, 1/l^tau) entries for every link, using a generator
/// seeded only by `seed`. Draw order: H_rb, then H_kb and H_kr per user.
ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed);

struct PowerBudgets {
  double source;
  double relay;
};

/// Ps = Pr = 10^(snr_db / 10) with unit noise variance.
PowerBudgets snr_to_powers(double snr_db);

}  // namespace relaybc
