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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "relaybc/baselines.hpp"
#include "relaybc/errors.hpp"

using namespace relaybc;

namespace {

ChannelSet unit_scalar_channels() {
  ChannelSet ch;
  ch.source_relay = ComplexMatrix::Ones(1, 1);
  ch.source_user = {ComplexMatrix::Ones(1, 1)};
  ch.relay_user = {ComplexMatrix::Ones(1, 1)};
  return ch;
}

double rel_power_error(const ChannelSet& ch, const ComplexMatrix& p, const ComplexMatrix& f,
                       double budget) {
  return std::abs(relay_power(f, relay_input_covariance(ch, p)) - budget) / budget;
}

// |<a, b>| / (|a| |b|) == 1 and the inner product is positive real.
Complex alignment(const ComplexMatrix& a, const ComplexMatrix& b) {
  return trace_product(a.adjoint(), b) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("stacked_user_channel keeps row blocks") {
  const auto inst = oracle::random_instance(5, 2, 2, 10.0, 3);
  const ComplexMatrix hur = stacked_user_channel(inst.ch);
  CHECK(hur.rows() == 4);
  CHECK(hur.topRows(2) == inst.ch.relay_user[0]);
  CHECK(hur.bottomRows(2) == inst.ch.relay_user[1]);
}

TEST_CASE("mrc_mrt") {
  const ChannelSet ch = unit_scalar_channels();
  const ComplexMatrix f = mrc_mrt(ch, ComplexMatrix::Ones(1, 1), 2.0);
  CHECK(f(0, 0).real() == doctest::Approx(1.0).epsilon(1e-14));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = oracle::random_instance(4, 2, 2, 15.0, seed);
    const ComplexMatrix p = stack_precoders(inst.precoders);
    const ComplexMatrix fm = mrc_mrt(inst.ch, p, inst.config.relay_power);
    CHECK(rel_power_error(inst.ch, p, fm, inst.config.relay_power) <= 1e-10);
    const ComplexMatrix direction =
        stacked_user_channel(inst.ch).adjoint() * p.adjoint() * inst.ch.source_relay.adjoint();
    const Complex a = alignment(direction, fm);
    CHECK(std::abs(a - 1.0) <= 1e-12);

    // Budget is met exactly whatever the precoder scale.
    const ComplexMatrix scaled = mrc_mrt(inst.ch, 3.0 * p, inst.config.relay_power);
    CHECK(rel_power_error(inst.ch, 3.0 * p, scaled, inst.config.relay_power) <= 1e-10);
  }
}

TEST_CASE("mrc_rzf") {
  const ChannelSet ch = unit_scalar_channels();
  const ComplexMatrix f = mrc_rzf(ch, ComplexMatrix::Ones(1, 1), 1.0);
  CHECK(f(0, 0).real() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = oracle::random_instance(4, 2, 2, 15.0, seed);
    const ComplexMatrix p = stack_precoders(inst.precoders);
    const ComplexMatrix fr = mrc_rzf(inst.ch, p, inst.config.relay_power);
    CHECK(rel_power_error(inst.ch, p, fr, inst.config.relay_power) <= 1e-10);
  }
}

TEST_CASE("mrc_rzf approaches zero forcing for large relay power") {
  const auto inst = oracle::random_instance(4, 2, 1, 10.0, 4);
  const ComplexMatrix p = stack_precoders(inst.precoders);
  const ComplexMatrix hur = stacked_user_channel(inst.ch);
  const ComplexMatrix zf = hur.adjoint() * oracle::gauss_inverse(hur * hur.adjoint()) *
                           p.adjoint() * inst.ch.source_relay.adjoint();
  const ComplexMatrix fr = mrc_rzf(inst.ch, p, 1e9);
  CHECK((fr / fr.norm() - zf / zf.norm()).norm() <= 1e-6);
}

TEST_CASE("degenerate relay direction") {
  auto inst = oracle::random_instance(3, 1, 1, 10.0, 2);
  for (auto& h : inst.ch.relay_user) h.setZero();
  const ComplexMatrix p = stack_precoders(inst.precoders);
  CHECK_THROWS_AS(mrc_mrt(inst.ch, p, 1.0), DegenerateChannel);
  CHECK_THROWS_AS(mrc_rzf(inst.ch, p, 1.0), DegenerateChannel);
}

TEST_CASE("algorithm1_init") {
  SUBCASE("square system saturates the source budget") {
    const SystemConfig config = make_config(2, 2, 1, 4.0, 3.0);
    const ChannelSet ch = generate_channels(config, 1);
    const DesignState s = algorithm1_init(config, ch);
    const ComplexMatrix p = s.stacked_precoder();
    CHECK((p - std::sqrt(2.0) * ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
    CHECK(source_power(p) == doctest::Approx(4.0));
  }
  SUBCASE("rectangular identity uses sum(N) Ps / M") {
    const SystemConfig config = make_config(4, 2, 1, 4.0, 3.0);
    const DesignState s = algorithm1_init(config, generate_channels(config, 1));
    CHECK(source_power(s.stacked_precoder()) == doctest::Approx(2.0));
  }
  SUBCASE("relay at full power, MMSE receivers, identity weights") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SystemConfig config = make_config(4, 2, 2, 31.6, 50.0, 0.3);
      const ChannelSet ch = generate_channels(config, seed);
      const DesignState s = algorithm1_init(config, ch);
      CHECK(rel_power_error(ch, s.stacked_precoder(), s.relay, config.relay_power) <= 1e-10);
      for (int k = 0; k < 2; ++k) {
        CHECK(s.receivers[k] == mmse_receiver(ch, s.precoders, s.relay, k));
        CHECK(s.weights[k].matrix() == ComplexMatrix::Identity(2, 2));
      }
    }
  }
}
