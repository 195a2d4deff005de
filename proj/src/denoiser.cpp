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


#include "reccal/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace reccal {

namespace {

void check_inputs(cplx y, double v, const CirclePrior& prior)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("von_mises_denoise: noise variance must be positive and finite");
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag()))
        throw DomainError("von_mises_denoise: observation is not finite");
    if (!(prior.radius >= 0.0) || !std::isfinite(prior.radius) || !(prior.concentration >= 0.0) ||
        !std::isfinite(prior.concentration) || !std::isfinite(prior.location))
        throw DomainError("von_mises_denoise: invalid circle prior");
}

}  // namespace

DenoiseResult von_mises_denoise(cplx y, double v, const CirclePrior& prior)
{
    check_inputs(y, v, prior);
    const double r = prior.radius;
    const cplx zeta = (2.0 * r / v) * y + std::polar(prior.concentration, prior.location);
    const double mag = std::abs(zeta);
    if (mag == 0.0 || r == 0.0)
        return {cplx(0.0, 0.0), r * r};
    if (!std::isfinite(mag))
        throw NumericalError("von_mises_denoise: posterior concentration overflowed");
    const double rho = bessel_ratio(mag);
    DenoiseResult out;
    out.estimate = (r * rho / mag) * zeta;
    out.posterior_mse = r * r * (1.0 - rho) * (1.0 + rho);
    return out;
}

double posterior_mse_identity_check(cplx y, double v, const CirclePrior& prior)
{
    check_inputs(y, v, prior);
    const double h = 1e-5 * std::max(1.0, std::abs(y));
    const cplx dx(h, 0.0);
    const cplx dy(0.0, h);
    const cplx d_re = von_mises_denoise(y + dx, v, prior).estimate - von_mises_denoise(y - dx, v, prior).estimate;
    const cplx d_im = von_mises_denoise(y + dy, v, prior).estimate - von_mises_denoise(y - dy, v, prior).estimate;
    const double divergence = d_re.real() / (2.0 * h) + d_im.imag() / (2.0 * h);
    return 0.5 * v * divergence;
}

}  // namespace reccal
