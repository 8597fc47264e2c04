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

#include "relaybc/wmmse.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "relaybc/errors.hpp"

namespace relaybc {

namespace {

constexpr double kSingularPivotRatio = 64.0 * std::numeric_limits<double>::epsilon();
constexpr double kJitter = 1e-12;

std::string shape(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_user(const ChannelSet& ch, int k) {
  if (k < 0 || k >= ch.num_users()) {
    throw DimensionMismatch("user index " + std::to_string(k) + " out of range");
  }
}

void check_relay(const ChannelSet& ch, const ComplexMatrix& relay) {
  if (relay.rows() != ch.antennas() || relay.cols() != ch.antennas()) {
    throw DimensionMismatch("relay matrix is " + shape(relay) + ", expected " +
                            shape(ch.source_relay));
  }
}

// Generic multiplier search over a power that decreases in the multiplier.
template <class Solution, class Eval>
std::pair<double, Solution> bisect_multiplier(Eval&& eval, double budget,
                                              const SearchOptions& options,
                                              const char* what) {
  if (!(budget > 0.0)) throw BracketFailure(std::string(what) + ": budget must be positive");
  auto [power0, sol0] = eval(0.0);
  if (!std::isfinite(power0)) {
    throw BracketFailure(std::string(what) + ": power at zero multiplier is not finite");
  }
  if (power0 <= budget) return {0.0, std::move(sol0)};

  const double tol = options.relative_tolerance * budget;
  double lo = 0.0;
  double hi = 1.0;
  auto [power_hi, sol_hi] = eval(hi);
  int doublings = 0;
  while (power_hi > budget) {
    if (std::abs(power_hi - budget) <= tol) return {hi, std::move(sol_hi)};
    if (++doublings > options.max_bracket_doublings || !std::isfinite(power_hi)) {
      throw BracketFailure(std::string(what) + ": could not bracket the power budget");
    }
    lo = hi;
    hi *= 2.0;
    std::tie(power_hi, sol_hi) = eval(hi);
  }
  if (std::abs(power_hi - budget) <= tol) return {hi, std::move(sol_hi)};

  for (int step = 0; step < options.max_bisection_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    auto [power_mid, sol_mid] = eval(mid);
    if (std::abs(power_mid - budget) <= tol) return {mid, std::move(sol_mid)};
    if (power_mid > budget) {
      lo = mid;
    } else {
      hi = mid;
      power_hi = power_mid;
      sol_hi = std::move(sol_mid);
    }
  }
  // Bracket exhausted; the upper end is always feasible.
  return {hi, std::move(sol_hi)};
}

}  // namespace

ComplexMatrix DesignState::stacked_precoder() const { return stack_precoders(precoders); }

double MseReport::sum_rate() const {
  return std::accumulate(rates.begin(), rates.end(), 0.0);
}

ComplexMatrix stack_precoders(std::span<const ComplexMatrix> blocks) {
  if (blocks.empty()) throw DimensionMismatch("no precoder blocks");
  const Eigen::Index rows = blocks.front().rows();
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw DimensionMismatch("precoder blocks differ in row count");
    cols += b.cols();
  }
  ComplexMatrix p(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    p.middleCols(offset, b.cols()) = b;
    offset += b.cols();
  }
  return p;
}

ComplexMatrix effective_channel(const ChannelSet& ch, const ComplexMatrix& relay, int k) {
  check_user(ch, k);
  check_relay(ch, relay);
  const auto& direct = ch.source_user[static_cast<std::size_t>(k)];
  const auto& hop = ch.relay_user[static_cast<std::size_t>(k)];
  if (direct.cols() != ch.antennas() || hop.cols() != ch.antennas() ||
      direct.rows() != hop.rows()) {
    throw DimensionMismatch("user " + std::to_string(k) + " channels are inconsistent");
  }
  const Eigen::Index n = direct.rows();
  ComplexMatrix h(2 * n, ch.antennas());
  h.topRows(n) = direct;
  h.bottomRows(n).noalias() = hop * relay * ch.source_relay;
  return h;
}

HpdMatrix noise_covariance(const ChannelSet& ch, const ComplexMatrix& relay, int k) {
  check_user(ch, k);
  check_relay(ch, relay);
  const auto& hop = ch.relay_user[static_cast<std::size_t>(k)];
  const Eigen::Index n = hop.rows();
  const ComplexMatrix amplified = hop * relay;
  ComplexMatrix g = ComplexMatrix::Identity(2 * n, 2 * n);
  g.bottomRightCorner(n, n).noalias() += amplified * amplified.adjoint();
  return HpdMatrix::from(hermitian_part(g));
}

ComplexMatrix mmse_receiver(const ChannelSet& ch, std::span<const ComplexMatrix> precoders,
                            const ComplexMatrix& relay, int k) {
  check_user(ch, k);
  const ComplexMatrix h = effective_channel(ch, relay, k);
  const ComplexMatrix p = stack_precoders(precoders);
  if (p.rows() != h.cols()) throw DimensionMismatch("precoder rows must equal M");
  const ComplexMatrix hp = h * p;
  ComplexMatrix received = hp * hp.adjoint();
  received += noise_covariance(ch, relay, k).matrix();
  const HpdMatrix cov = HpdMatrix::from(hermitian_part(received));
  const auto& pk = precoders[static_cast<std::size_t>(k)];
  // A_k^H = C^-1 H_k P_k
  return cov.solve(h * pk).adjoint();
}

HpdMatrix mse_matrix(const ChannelSet& ch, std::span<const ComplexMatrix> precoders,
                     const ComplexMatrix& relay, const ComplexMatrix& receiver, int k) {
  check_user(ch, k);
  const ComplexMatrix h = effective_channel(ch, relay, k);
  const Eigen::Index n = h.rows() / 2;
  if (receiver.rows() != n || receiver.cols() != 2 * n) {
    throw DimensionMismatch("receiver is " + shape(receiver) + ", expected " +
                            std::to_string(n) + "x" + std::to_string(2 * n));
  }
  if (static_cast<std::size_t>(k) >= precoders.size() ||
      precoders[static_cast<std::size_t>(k)].cols() != n) {
    throw DimensionMismatch("precoder block " + std::to_string(k) + " has wrong width");
  }
  const ComplexMatrix filtered = receiver * h;  // A_k H_k
  ComplexMatrix residual = ComplexMatrix::Identity(n, n);
  residual -= filtered * precoders[static_cast<std::size_t>(k)];
  ComplexMatrix e = residual * residual.adjoint();
  for (std::size_t i = 0; i < precoders.size(); ++i) {
    if (i == static_cast<std::size_t>(k)) continue;
    const ComplexMatrix leak = filtered * precoders[i];
    e.noalias() += leak * leak.adjoint();
  }
  const HpdMatrix g = noise_covariance(ch, relay, k);
  e.noalias() += receiver * g.matrix() * receiver.adjoint();
  return HpdMatrix::from(hermitian_part(e));
}

double user_rate(const HpdMatrix& mse, bool half_duplex_rate_factor) {
  const double rate = -mse.log2_det();
  return half_duplex_rate_factor ? 0.5 * rate : rate;
}

HpdMatrix weight_update(const HpdMatrix& mse) { return HpdMatrix::from(mse.inverse()); }

double source_power(const ComplexMatrix& precoder) { return gram_trace(precoder); }

double source_power(std::span<const ComplexMatrix> precoders) {
  double total = 0.0;
  for (const auto& p : precoders) total += gram_trace(p);
  return total;
}

ComplexMatrix relay_input_covariance(const ChannelSet& ch, const ComplexMatrix& precoder) {
  if (precoder.rows() != ch.antennas()) throw DimensionMismatch("precoder rows must equal M");
  const ComplexMatrix s = ch.source_relay * precoder;
  return hermitian_part(s * s.adjoint());
}

double relay_power(const ComplexMatrix& relay, const ComplexMatrix& pi) {
  if (pi.rows() != relay.cols() || pi.cols() != relay.cols()) {
    throw DimensionMismatch("relay_power: Pi is " + shape(pi) + ", F is " + shape(relay));
  }
  // Tr(F Pi F^H) + Tr(F F^H)
  return trace_product(relay * pi, relay.adjoint()).real() + gram_trace(relay);
}

double wmmse_objective(std::span<const HpdMatrix> mse, std::span<const HpdMatrix> weights,
                       std::span<const double> user_weights) {
  if (mse.size() != weights.size() || mse.size() != user_weights.size()) {
    throw DimensionMismatch("wmmse_objective: per-user lists differ in length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < mse.size(); ++k) {
    const double tr = trace_product(weights[k].matrix(), mse[k].matrix()).real();
    total += user_weights[k] * (tr - weights[k].log2_det());
  }
  return total;
}

MseReport evaluate(const SystemConfig& config, const ChannelSet& ch, const DesignState& state) {
  MseReport report;
  std::vector<double> w(static_cast<std::size_t>(ch.num_users()));
  for (int k = 0; k < ch.num_users(); ++k) {
    report.mse.push_back(mse_matrix(ch, state.precoders, state.relay,
                                    state.receivers[static_cast<std::size_t>(k)], k));
    const double rate = user_rate(report.mse.back(), config.half_duplex_rate_factor);
    report.rates.push_back(rate);
    w[static_cast<std::size_t>(k)] = config.weight(k);
    report.weighted_sum_rate += config.weight(k) * rate;
  }
  report.wmmse_objective = wmmse_objective(report.mse, state.weights, w);
  return report;
}

HpdMatrix factorize_with_jitter(const ComplexMatrix& m) {
  try {
    HpdMatrix f = HpdMatrix::from(m);
    if (f.pivot_ratio() > kSingularPivotRatio) return f;
  } catch (const FactorizationFailure&) {
  }
  const double n = static_cast<double>(m.rows());
  const double shift = kJitter * (1.0 + std::abs(m.trace().real()) / n);
  ComplexMatrix jittered = m;
  jittered.diagonal().array() += shift;
  return HpdMatrix::from(jittered);
}

// ---------------------------------------------------------------------------

PrecoderSystem precoder_system(std::span<const ComplexMatrix> filtered_channels,
                               std::span<const HpdMatrix> weights,
                               std::span<const double> user_weights) {
  if (filtered_channels.empty() || filtered_channels.size() != weights.size() ||
      filtered_channels.size() != user_weights.size()) {
    throw DimensionMismatch("precoder_system: per-user lists differ in length");
  }
  const Eigen::Index m = filtered_channels.front().cols();
  PrecoderSystem sys;
  sys.gram = ComplexMatrix::Zero(m, m);
  for (std::size_t j = 0; j < filtered_channels.size(); ++j) {
    const auto& ht = filtered_channels[j];
    if (ht.cols() != m || ht.rows() != weights[j].size()) {
      throw DimensionMismatch("precoder_system: filtered channel " + std::to_string(j) +
                              " is " + shape(ht));
    }
    const ComplexMatrix htw = ht.adjoint() * weights[j].matrix();  // Ht^H W
    sys.gram.noalias() += user_weights[j] * (htw * ht);
    sys.rhs.push_back(user_weights[j] * htw);
  }
  sys.gram = hermitian_part(sys.gram);
  return sys;
}

PrecoderSystem precoder_system(const ChannelSet& ch, const ComplexMatrix& relay,
                               std::span<const ComplexMatrix> receivers,
                               std::span<const HpdMatrix> weights,
                               std::span<const double> user_weights) {
  if (receivers.size() != static_cast<std::size_t>(ch.num_users())) {
    throw DimensionMismatch("one receiver per user is required");
  }
  std::vector<ComplexMatrix> filtered;
  for (int k = 0; k < ch.num_users(); ++k) {
    filtered.push_back(receivers[static_cast<std::size_t>(k)] * effective_channel(ch, relay, k));
  }
  return precoder_system(filtered, weights, user_weights);
}

std::vector<ComplexMatrix> precoder_update(const PrecoderSystem& sys, double lambda) {
  if (!(lambda >= 0.0)) throw BracketFailure("precoder multiplier must be >= 0");
  ComplexMatrix lhs = sys.gram;
  lhs.diagonal().array() += lambda;
  const HpdMatrix factor = factorize_with_jitter(lhs);
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(sys.rhs.size());
  for (const auto& rhs : sys.rhs) blocks.push_back(factor.solve(rhs));
  return blocks;
}

std::vector<ComplexMatrix> precoder_update(const ChannelSet& ch, const ComplexMatrix& relay,
                                           std::span<const ComplexMatrix> receivers,
                                           std::span<const HpdMatrix> weights,
                                           std::span<const double> user_weights,
                                           double lambda) {
  return precoder_update(precoder_system(ch, relay, receivers, weights, user_weights), lambda);
}

PrecoderSolution precoder_multiplier_search(const PrecoderSystem& sys, double source_budget,
                                            const SearchOptions& options) {
  auto eval = [&](double lambda) {
    auto blocks = precoder_update(sys, lambda);
    const double power = source_power(std::span<const ComplexMatrix>(blocks));
    return std::make_pair(power, std::move(blocks));
  };
  auto [lambda, blocks] = bisect_multiplier<std::vector<ComplexMatrix>>(
      eval, source_budget, options, "precoder multiplier search");
  PrecoderSolution out;
  out.lambda = lambda;
  out.power = source_power(std::span<const ComplexMatrix>(blocks));
  out.precoders = std::move(blocks);
  return out;
}

PrecoderSolution relay_aware_precoder_search(const PrecoderSystem& sys, const ChannelSet& ch,
                                             const ComplexMatrix& relay, double source_budget,
                                             double relay_budget,
                                             const SearchOptions& options) {
  check_relay(ch, relay);
  const ComplexMatrix through = relay * ch.source_relay;  // F H_rb
  const ComplexMatrix penalty = hermitian_part(through.adjoint() * through);
  const double noise_power = gram_trace(relay);
  // Relay noise alone exceeds the budget: no precoder helps.
  if (noise_power >= relay_budget) return precoder_multiplier_search(sys, source_budget, options);

  auto eval = [&](double nu) {
    PrecoderSystem shifted{sys.gram + nu * penalty, sys.rhs};
    PrecoderSolution sol = precoder_multiplier_search(shifted, source_budget, options);
    const double power = gram_trace(through * stack_precoders(sol.precoders)) + noise_power;
    return std::make_pair(power, std::move(sol));
  };
  return bisect_multiplier<PrecoderSolution>(eval, relay_budget, options,
                                             "relay-aware precoder search")
      .second;
}

RelaySystem relay_system(const ChannelSet& ch, std::span<const ComplexMatrix> precoders,
                         std::span<const ComplexMatrix> receivers,
                         std::span<const HpdMatrix> weights,
                         std::span<const double> user_weights) {
  const auto users = static_cast<std::size_t>(ch.num_users());
  if (precoders.size() != users || receivers.size() != users || weights.size() != users ||
      user_weights.size() != users) {
    throw DimensionMismatch("relay_system: per-user lists differ in length");
  }
  const Eigen::Index m = ch.antennas();
  const ComplexMatrix p = stack_precoders(precoders);
  if (p.rows() != m) throw DimensionMismatch("precoder rows must equal M");
  const ComplexMatrix s = ch.source_relay * p;  // H_rb P

  RelaySystem sys;
  sys.pi = hermitian_part(s * s.adjoint());
  sys.curvature = ComplexMatrix::Zero(m, m);
  sys.rhs = ComplexMatrix::Zero(m, m);
  for (std::size_t k = 0; k < users; ++k) {
    const Eigen::Index n = ch.relay_user[k].rows();
    const auto& a = receivers[k];
    if (a.rows() != n || a.cols() != 2 * n) {
      throw DimensionMismatch("receiver " + std::to_string(k) + " is " + shape(a));
    }
    const ComplexMatrix a1 = a.leftCols(n);
    const ComplexMatrix a2 = a.rightCols(n);
    const ComplexMatrix b = a2 * ch.relay_user[k];            // A_2k H_kr
    const ComplexMatrix bw = b.adjoint() * weights[k].matrix();  // H_kr^H A_2k^H W_k
    const ComplexMatrix theta = bw * b;
    const ComplexMatrix direct = a1 * ch.source_user[k] * p;   // A_1k H_kb P
    const ComplexMatrix delta = bw * direct * s.adjoint() -
                                bw * precoders[k].adjoint() * ch.source_relay.adjoint();
    sys.curvature.noalias() += user_weights[k] * theta;
    sys.rhs.noalias() -= user_weights[k] * delta;
  }
  sys.curvature = hermitian_part(sys.curvature);
  return sys;
}

ComplexMatrix relay_right_factor(const RelaySystem& sys) {
  ComplexMatrix right = sys.pi;
  right.diagonal().array() += 1.0;
  const HpdMatrix right_factor = HpdMatrix::from(right);
  // rhs (Pi + I)^-1 = ((Pi + I)^-1 rhs^H)^H
  return right_factor.solve(sys.rhs.adjoint()).adjoint();
}

namespace {

ComplexMatrix relay_from_right_factor(const ComplexMatrix& curvature,
                                      const ComplexMatrix& right, double mu) {
  if (!(mu >= 0.0)) throw BracketFailure("relay multiplier must be >= 0");
  ComplexMatrix left = curvature;
  left.diagonal().array() += mu;
  return factorize_with_jitter(left).solve(right);
}

}  // namespace

ComplexMatrix relay_update(const RelaySystem& sys, double mu) {
  return relay_from_right_factor(sys.curvature, relay_right_factor(sys), mu);
}

RelaySolution relay_multiplier_search(const RelaySystem& sys, double relay_budget,
                                      const SearchOptions& options) {
  const ComplexMatrix right = relay_right_factor(sys);
  auto eval = [&](double mu) {
    ComplexMatrix f = relay_from_right_factor(sys.curvature, right, mu);
    const double power = relay_power(f, sys.pi);
    return std::make_pair(power, std::move(f));
  };
  auto [mu, f] = bisect_multiplier<ComplexMatrix>(eval, relay_budget, options,
                                                  "relay multiplier search");
  RelaySolution out;
  out.mu = mu;
  out.power = relay_power(f, sys.pi);
  out.relay = std::move(f);
  return out;
}

}  // namespace relaybc
