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

#include <cstdint>

#include "reccal/mathkit.hpp"

namespace reccal {

enum class NoiseKind { white, kronecker };

/// Scaling of the DFT-column repeater channels g and h: unit_modulus uses the
/// unnormalised DFT column (every entry on the unit circle), unit_norm the
/// unitary one.
enum class RepeaterChannel { unit_modulus, unit_norm };

/// Measurement-noise covariance descriptors before preprocessing.
///
/// W_A (M_A x M_B) has spatial covariance omega_a (M_A x M_A) and temporal
/// covariance psi_a (M_B x M_B); W_B (M_B x M_A) has omega_b (M_B x M_B) and
/// psi_b (M_A x M_A). vec(W) ~ CN(0, psi (x) omega).
struct RawNoise {
    ComplexMatrix omega_a;
    ComplexMatrix psi_a;
    ComplexMatrix omega_b;
    ComplexMatrix psi_b;
};

struct ScenarioConfig {
    int m_a = 8;
    int m_b = 8;
    double alpha_gain_db = 10.0;  // |alpha|^2 in dB
    double beta_gain_db = 10.0;   // |beta|^2 in dB
    double snr_db = 20.0;         // 1 / sigma^2
    double amplitude_error_std = 0.0;  // sigma_eps, meant to be << 1
    NoiseKind noise_kind = NoiseKind::white;
    RepeaterChannel repeater_channel = RepeaterChannel::unit_modulus;
    // Exponential correlation rho^|i-j| used for the kronecker noise shapes.
    double spatial_corr = 0.0;
    double temporal_corr = 0.0;
    std::uint64_t master_seed = 1;

    void validate() const;
    double noise_variance() const;
};

/// Raw covariance descriptors implied by the config. White noise is
/// omega = sigma^2 I, psi = I; kronecker scales the spatial shape by sigma^2.
RawNoise raw_noise(const ScenarioConfig& cfg);

struct GroundTruth {
    ComplexMatrix g_direct;  // G, M_B x M_A
    ComplexVector g;         // repeater -> B, M_B
    ComplexVector h;         // repeater -> A, M_A
    ComplexVector t_a, r_a;  // diagonals, M_A
    ComplexVector t_b, r_b;  // diagonals, M_B
    cplx alpha;
    cplx beta;
    cplx gamma;  // beta / alpha

    /// A = T_A^-1 R_A, B = T_B R_B^-1, H = R_B G T_A, Z = alpha R_B g h^T T_A.
    ComplexVector a_diag() const;
    ComplexVector b_diag() const;
    ComplexMatrix h_matrix() const;
    ComplexMatrix z_matrix() const;
};

struct MeasurementSet {
    ComplexMatrix x_ab0;  // M_B x M_A
    ComplexMatrix x_ba0;  // M_A x M_B
    ComplexMatrix x_ab1;  // M_B x M_A
    ComplexMatrix x_ba1;  // M_A x M_B
};

GroundTruth draw_ground_truth(const ScenarioConfig& cfg, Rng& rng);

/// The four measurements in the nominal and pi-shifted repeater configurations.
MeasurementSet generate_measurements(const GroundTruth& truth, const ScenarioConfig& cfg, Rng& rng);

/// Noise-free A->B and B->A channels, R_B (G +- alpha g h^T) T_A and
/// R_A (G^T +- beta h g^T) T_B.
ComplexMatrix channel_ab(const GroundTruth& truth, bool shifted);
ComplexMatrix channel_ba(const GroundTruth& truth, bool shifted);

}  // namespace reccal
