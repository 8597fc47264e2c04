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

#include <span>
#include <vector>

#include "relaybc/channel.hpp"
#include "relaybc/numerics.hpp"

namespace relaybc {

// Current iterate of the alternating optimization.
struct DesignState {
  std::vector<ComplexMatrix> precoders;  // P_k, M x N_k
  ComplexMatrix relay;                   // F, M x M
  std::vector<ComplexMatrix> receivers;  // A_k = [A_1k A_2k], N_k x 2N_k
  std::vector<HpdMatrix> weights;        // W_k, N_k x N_k

  /// P = [P_1 ... P_K], M x sum(N_k).
  ComplexMatrix stacked_precoder() const;
};

struct MseReport {
  std::vector<HpdMatrix> mse;  // E_k
  std::vector<double> rates;   // bits per channel use
  double weighted_sum_rate = 0.0;
  double wmmse_objective = 0.0;

  double sum_rate() const;
};

ComplexMatrix stack_precoders(std::span<const ComplexMatrix> blocks);

/// H_k = [H_kb ; H_kr F H_rb], 2N_k x M.
ComplexMatrix effective_channel(const ChannelSet& ch, const ComplexMatrix& relay,
                                int k);

/// G_k G_k^H = diag(I, I + H_kr F F^H H_kr^H).
HpdMatrix noise_covariance(const ChannelSet& ch, const ComplexMatrix& relay, int k);

/// MMSE filter A_k = P_k^H H_k^H (H_k P P^H H_k^H + G_k G_k^H)^-1.
ComplexMatrix mmse_receiver(const ChannelSet& ch,
                            std::span<const ComplexMatrix> precoders,
                            const ComplexMatrix& relay, int k);

/// Error covariance of A_k applied to user k's observation; any filter is
/// accepted, not only the MMSE one.
HpdMatrix mse_matrix(const ChannelSet& ch, std::span<const ComplexMatrix> precoders,
                     const ComplexMatrix& relay, const ComplexMatrix& receiver,
                     int k);

/// -log2 det(E_k), halved when the half-duplex pre-log is enabled.
double user_rate(const HpdMatrix& mse, bool half_duplex_rate_factor = false);

/// W_k = E_k^-1.
HpdMatrix weight_update(const HpdMatrix& mse);

/// Tr(P P^H).
double source_power(const ComplexMatrix& precoder);
double source_power(std::span<const ComplexMatrix> precoders);

/// Pi = H_rb P P^H H_rb^H.
ComplexMatrix relay_input_covariance(const ChannelSet& ch, const ComplexMatrix& precoder);

/// Tr(F (Pi + I) F^H).
double relay_power(const ComplexMatrix& relay, const ComplexMatrix& pi);

/// sum_k w_k (Tr(W_k E_k) - log2 det W_k).
double wmmse_objective(std::span<const HpdMatrix> mse, std::span<const HpdMatrix> weights,
                       std::span<const double> user_weights);

/// E_k, rates and both objectives at the given state. Uses the state's own
/// receivers and weights; nothing is re-optimized.
MseReport evaluate(const SystemConfig& config, const ChannelSet& ch,
                   const DesignState& state);

// ---------------------------------------------------------------------------
// Multiplier searches

struct SearchOptions {
  // Stop once |power - budget| <= relative_tolerance * budget.
  double relative_tolerance = 1e-6;
  int max_bisection_steps = 200;
  int max_bracket_doublings = 1100;
};

// Everything in the precoder closed form that does not depend on lambda:
//   P_k(lambda) = (gram + lambda I)^-1 rhs_k
// with gram = sum_j w_j Ht_j^H W_j Ht_j, rhs_k = w_k Ht_k^H W_k, Ht_j = A_j H_j.
struct PrecoderSystem {
  ComplexMatrix gram;
  std::vector<ComplexMatrix> rhs;
};

PrecoderSystem precoder_system(std::span<const ComplexMatrix> filtered_channels,
                               std::span<const HpdMatrix> weights,
                               std::span<const double> user_weights);
PrecoderSystem precoder_system(const ChannelSet& ch, const ComplexMatrix& relay,
                               std::span<const ComplexMatrix> receivers,
                               std::span<const HpdMatrix> weights,
                               std::span<const double> user_weights);

std::vector<ComplexMatrix> precoder_update(const PrecoderSystem& sys, double lambda);
std::vector<ComplexMatrix> precoder_update(const ChannelSet& ch, const ComplexMatrix& relay,
                                           std::span<const ComplexMatrix> receivers,
                                           std::span<const HpdMatrix> weights,
                                           std::span<const double> user_weights,
                                           double lambda);

struct PrecoderSolution {
  double lambda = 0.0;
  std::vector<ComplexMatrix> precoders;
  double power = 0.0;
};

/// Smallest lambda >= 0 meeting Tr(P P^H) <= Ps with complementary slackness.
PrecoderSolution precoder_multiplier_search(const PrecoderSystem& sys, double source_budget,
                                            const SearchOptions& options = {});

/// Precoder step that also keeps the relay constraint satisfied for a fixed
/// relay F, i.e. ||F H_rb P||^2 + ||F||^2 <= Pr, through a second multiplier
/// nu on the term F H_rb. With nu = 0 this is precoder_multiplier_search.
PrecoderSolution relay_aware_precoder_search(const PrecoderSystem& sys, const ChannelSet& ch,
                                             const ComplexMatrix& relay, double source_budget,
                                             double relay_budget,
                                             const SearchOptions& options = {});

// Relay closed form:
//   F(mu) = (curvature + mu I)^-1 rhs (Pi + I)^-1
// with curvature = sum_k w_k Theta_k and rhs = -sum_k w_k Delta_k.
struct RelaySystem {
  ComplexMatrix curvature;
  ComplexMatrix rhs;
  ComplexMatrix pi;
};

/// rhs (Pi + I)^-1, the multiplier-independent right factor of F(mu).
ComplexMatrix relay_right_factor(const RelaySystem& sys);

RelaySystem relay_system(const ChannelSet& ch, std::span<const ComplexMatrix> precoders,
                         std::span<const ComplexMatrix> receivers,
                         std::span<const HpdMatrix> weights,
                         std::span<const double> user_weights);

ComplexMatrix relay_update(const RelaySystem& sys, double mu);

struct RelaySolution {
  double mu = 0.0;
  ComplexMatrix relay;
  double power = 0.0;
};

RelaySolution relay_multiplier_search(const RelaySystem& sys, double relay_budget,
                                      const SearchOptions& options = {});

/// Factorizes an analytically Hermitian PSD matrix. When it is singular to
/// working precision, retries once with 1e-12 (1 + Tr/n) I added.
HpdMatrix factorize_with_jitter(const ComplexMatrix& m);

}  // namespace relaybc
