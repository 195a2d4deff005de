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

#include <optional>

#include "reccal/estimate.hpp"

namespace reccal {

struct NlsOptions {
    int n_iter = 100;
    bool record_gamma = false;      // gamma estimate after every sweep
    bool record_objective = false;  // criterion value after every sweep (implies gamma)
    std::optional<ComplexVector> initial_a;  // defaults to ones
    std::optional<ComplexVector> initial_b;
    PowerIterationOptions power;
};

/// Basic stepwise NLS calibration.
///
/// H = R1, Z = S{R2}, then n_iter alternating per-coordinate least-squares
/// sweeps over the diagonals of A (from the rows of R3) and B (from its
/// columns), each sweep followed by A <- A |B|_F, B <- B / |B|_F. Finally
/// gamma = tr{(A Z^T B)^H R4} / |A Z^T B|_F^2.
///
/// A coefficient whose LS denominator is zero keeps its previous value and is
/// counted in diagnostics.skipped_updates. Throws NumericalError if A Z^T B = 0.
CalibrationEstimate nls_calibrate(const PreprocessedSet& pre, const NlsOptions& opts = {});

namespace detail {

// One LS sweep over the diagonal of A given B: R3 rows against (B H) columns.
// Extra (weight, Z, R4) term enables the joint update used by AO-NLS.
int sweep_a(const ComplexMatrix& h, const ComplexMatrix& r3t, const ComplexVector& b, ComplexVector& a,
            const ComplexMatrix* z = nullptr, const ComplexMatrix* r4t = nullptr, cplx gamma = {});
int sweep_b(const ComplexMatrix& ht, const ComplexMatrix& r3, const ComplexVector& a, ComplexVector& b,
            const ComplexMatrix* zt = nullptr, const ComplexMatrix* r4 = nullptr, cplx gamma = {});
void normalize_scale(ComplexVector& a, ComplexVector& b);

}  // namespace detail

}  // namespace reccal
