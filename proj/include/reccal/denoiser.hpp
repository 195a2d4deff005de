// SPDX-License-Identifier: Apache-2.0
//
// reccal - reciprocity calibration of dual-antenna repeaters
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

#include "reccal/mathkit.hpp"

namespace reccal {

/// Prior on a point r e^{j theta} of a circle, theta ~ von Mises(location, concentration).
/// concentration == 0 is the circularly uniform prior.
struct CirclePrior {
    double radius = 1.0;
    double location = 0.0;
    double concentration = 0.0;
};

struct DenoiseResult {
    cplx estimate;
    double posterior_mse = 0.0;
};

/// Posterior mean and variance of x = r e^{j theta} from y = x + w, w ~ CN(0, v).
///
/// With zeta = (2r/v) y + concentration * e^{j location}, the posterior of theta
/// is again von Mises with parameter |zeta| about arg(zeta), which gives
///
///     estimate      = r * I1(|zeta|)/I0(|zeta|) * e^{j arg zeta}
///     posterior_mse = r^2 * (1 - (I1(|zeta|)/I0(|zeta|))^2)
///
/// When zeta == 0 the posterior is the uniform circle: estimate 0, mse r^2.
/// Throws DomainError for v <= 0, non-finite inputs, or an invalid prior.
DenoiseResult von_mises_denoise(cplx y, double v, const CirclePrior& prior);

/// v * d eta / dy evaluated by central finite differences, for checking the
/// derivative/variance identity of the denoiser.
///
/// The derivative is the Wirtinger one: half the divergence of eta with respect to
/// (Re y, Im y), each partial taken by a central difference with step
/// h = 1e-5 * max(1, |y|). A single real-direction partial captures only the
/// posterior spread along that direction, so both are needed to match
/// DenoiseResult::posterior_mse.
double posterior_mse_identity_check(cplx y, double v, const CirclePrior& prior);

}  // namespace reccal
