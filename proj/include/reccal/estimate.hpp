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
#include <vector>

#include "reccal/mathkit.hpp"
#include "reccal/preprocess.hpp"

namespace reccal {

struct TraceEntry {
    int iteration = 0;
    std::optional<cplx> gamma;
    std::optional<double> objective;
};

/// Non-fatal conditions met while estimating. Each counter is the number of
/// times the corresponding fallback was taken.
struct Diagnostics {
    int skipped_updates = 0;     // zero LS denominator, coefficient left unchanged
    int uninformative = 0;       // psi <= 0 or non-finite, coefficient reset to non-informative
    int clamped_inverse = 0;     // near-singular A/B entry clamped in the Z update
    bool diverged = false;       // objective increased; best-so-far iterate returned
    bool degenerate_prior = false;  // MoM radius collapsed to zero
    bool rank_one_unconverged = false;

    bool any() const
    {
        return skipped_updates > 0 || uninformative > 0 || clamped_inverse > 0 || diverged ||
               degenerate_prior || rank_one_unconverged;
    }
};

struct CalibrationEstimate {
    ComplexMatrix h_hat;   // M_B x M_A
    ComplexMatrix z_hat;   // M_B x M_A
    ComplexVector a_hat;   // diagonal of A, M_A
    ComplexVector b_hat;   // diagonal of B, M_B
    cplx gamma_hat;
    std::vector<TraceEntry> trace;
    std::optional<RealVector> mse_a;
    std::optional<RealVector> mse_b;
    std::optional<double> mse_gamma;
    Diagnostics diagnostics;
};

/// Least-squares criterion
///   |R1 - H|^2 + |R2 - Z|^2 + |R3 - A H^T B|^2 + |R4 - gamma A Z^T B|^2
/// with A, B given by their diagonals (Frobenius norms squared).
double nls_objective(const PreprocessedSet& pre, const ComplexMatrix& h, const ComplexMatrix& z,
                     const ComplexVector& a, const ComplexVector& b, cplx gamma);

double nls_objective(const PreprocessedSet& pre, const CalibrationEstimate& est);

/// diag(a) M^T diag(b) for M of shape M_B x M_A; result is M_A x M_B.
ComplexMatrix sandwich(const ComplexVector& a, const ComplexMatrix& m, const ComplexVector& b);

/// tr{D^H R4} / |D|_F^2 with D = diag(a) Z^T diag(b). Throws NumericalError when D = 0.
cplx ls_gamma(const ComplexMatrix& r4, const ComplexMatrix& z, const ComplexVector& a,
              const ComplexVector& b);

}  // namespace reccal
