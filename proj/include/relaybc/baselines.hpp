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

#include "relaybc/channel.hpp"
#include "relaybc/numerics.hpp"
#include "relaybc/wmmse.hpp"

namespace relaybc {

/// H_ur = [H_1r ; ... ; H_Kr], sum(N_k) x M.
ComplexMatrix stacked_user_channel(const ChannelSet& ch);

/// Scales `unnormalized` so that Tr(F (Pi + I) F^H) equals the budget.
/// Throws DegenerateChannel when the input is the zero matrix.
ComplexMatrix normalize_relay(const ComplexMatrix& unnormalized, const ComplexMatrix& pi,
                              double relay_budget);

/// MRC at the relay input, MRT towards the users:
/// F = rho H_ur^H P^H H_rb^H.
ComplexMatrix mrc_mrt(const ChannelSet& ch, const ComplexMatrix& precoder, double relay_budget);

/// MRC at the relay input, regularized zero-forcing towards the users:
/// F = rho H_ur^H (H_ur H_ur^H + (M / Pr) I)^-1 P^H H_rb^H.
ComplexMatrix mrc_rzf(const ChannelSet& ch, const ComplexMatrix& precoder, double relay_budget);

/// Starting point of the alternating optimization: P = sqrt(Ps/M) times the
/// first sum(N_k) columns of I_M, F = rho I at full relay power, A_k the MMSE
/// filters at (P, F), and W_k = I.
DesignState algorithm1_init(const SystemConfig& config, const ChannelSet& ch);

}  // namespace relaybc
