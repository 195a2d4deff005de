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

#include "reccal/estimate.hpp"

namespace reccal {

struct AonlsOptions {
    int n_iter = 100;      // inner A/B sweeps per outer pass
    int max_outer = 20;
    double rel_tol = 1e-6;  // stop once the relative objective decrease falls below this
    PowerIterationOptions power;
};

/// Alternating-optimisation NLS, initialised from nls_calibrate.
///
/// Each outer pass refines, in order: H (element-wise normal equations of
/// the stacked R1 / R3 system), the diagonals of A and B (jointly against R3
/// and gamma-weighted R4), Z = S{(R2 + conj(gamma) B^-1 R4^T A^-1) / (1 + |gamma|^2)}
/// and gamma. The trace holds the best-so-far (gamma, objective) after the
/// initial NLS pass (iteration 0) and after every outer pass, so it is
/// nonincreasing. The returned estimate is the best-so-far iterate.
CalibrationEstimate aonls_calibrate(const PreprocessedSet& pre, const AonlsOptions& opts = {});

/// Element-wise H update: H(j,i) = (R1(j,i) + conj(a_i b_j) R3(i,j)) / (1 + |a_i b_j|^2).
ComplexMatrix aonls_update_h(const PreprocessedSet& pre, const ComplexVector& a, const ComplexVector& b);

}  // namespace reccal
