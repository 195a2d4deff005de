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
#include "reccal/scenario.hpp"

namespace reccal {

enum class CovMode { full, diagonal };

/// Covariances of the preprocessed noise W1..W4 (spatial factors halved).
/// W1, W2 (M_B x M_A): spatial omega_b, temporal psi_b.
/// W3, W4 (M_A x M_B): spatial omega_a, temporal psi_a.
/// In diagonal mode only the main diagonals are consulted.
struct NoiseStatistics {
    ComplexMatrix omega_a;  // M_A x M_A
    ComplexMatrix psi_a;    // M_B x M_B
    ComplexMatrix omega_b;  // M_B x M_B
    ComplexMatrix psi_b;    // M_A x M_A
    CovMode mode = CovMode::diagonal;

    int m_a() const { return static_cast<int>(omega_a.rows()); }
    int m_b() const { return static_cast<int>(omega_b.rows()); }
};

struct PreprocessedSet {
    ComplexMatrix r1;  // H + W1
    ComplexMatrix r2;  // Z + W2
    ComplexMatrix r3;  // A H^T B + W3
    ComplexMatrix r4;  // gamma A Z^T B + W4
    NoiseStatistics noise;

    int m_a() const { return static_cast<int>(r1.cols()); }
    int m_b() const { return static_cast<int>(r1.rows()); }
};

PreprocessedSet preprocess(const MeasurementSet& meas, const RawNoise& raw, CovMode mode);

}  // namespace reccal
