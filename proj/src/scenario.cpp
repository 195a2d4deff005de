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


#include "reccal/scenario.hpp"

#include <cmath>
#include <numbers>

namespace reccal {

void ScenarioConfig::validate() const
{
    if (m_a < 1 || m_b < 1)
        throw DomainError("scenario: antenna counts must be >= 1");
    if (!std::isfinite(alpha_gain_db) || !std::isfinite(beta_gain_db) || !std::isfinite(snr_db))
        throw DomainError("scenario: gains and SNR must be finite");
    if (!(amplitude_error_std >= 0.0) || !std::isfinite(amplitude_error_std))
        throw DomainError("scenario: amplitude_error_std must be >= 0");
    if (noise_kind == NoiseKind::kronecker &&
        (!(std::abs(spatial_corr) < 1.0) || !(std::abs(temporal_corr) < 1.0)))
        throw DomainError("scenario: correlation coefficients must lie in (-1, 1)");
}

double ScenarioConfig::noise_variance() const
{
    return std::pow(10.0, -snr_db / 10.0);
}

namespace {

ComplexMatrix exponential_correlation(int n, double rho)
{
    ComplexMatrix c(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            c(i, j) = std::pow(rho, std::abs(i - j));
    return c;
}

cplx reciprocity_coefficient(double sigma_eps, Rng& rng)
{
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    double amplitude = 1.0;
    if (sigma_eps > 0.0) {
        std::normal_distribution<double> eps(0.0, sigma_eps);
        amplitude += eps(rng);
    }
    return std::polar(1.0, phase(rng)) * amplitude;
}

}  // namespace

RawNoise raw_noise(const ScenarioConfig& cfg)
{
    const double s2 = cfg.noise_variance();
    RawNoise n;
    if (cfg.noise_kind == NoiseKind::white) {
        n.omega_a = s2 * ComplexMatrix::Identity(cfg.m_a, cfg.m_a);
        n.psi_a = ComplexMatrix::Identity(cfg.m_b, cfg.m_b);
        n.omega_b = s2 * ComplexMatrix::Identity(cfg.m_b, cfg.m_b);
        n.psi_b = ComplexMatrix::Identity(cfg.m_a, cfg.m_a);
    } else {
        n.omega_a = s2 * exponential_correlation(cfg.m_a, cfg.spatial_corr);
        n.psi_a = exponential_correlation(cfg.m_b, cfg.temporal_corr);
        n.omega_b = s2 * exponential_correlation(cfg.m_b, cfg.spatial_corr);
        n.psi_b = exponential_correlation(cfg.m_a, cfg.temporal_corr);
    }
    return n;
}

ComplexVector GroundTruth::a_diag() const
{
    return r_a.cwiseQuotient(t_a);
}

ComplexVector GroundTruth::b_diag() const
{
    return t_b.cwiseQuotient(r_b);
}

ComplexMatrix GroundTruth::h_matrix() const
{
    return r_b.asDiagonal() * g_direct * t_a.asDiagonal();
}

ComplexMatrix GroundTruth::z_matrix() const
{
    return alpha * (r_b.cwiseProduct(g)) * (h.cwiseProduct(t_a)).transpose();
}

ComplexMatrix channel_ab(const GroundTruth& t, bool shifted)
{
    const cplx a = shifted ? -t.alpha : t.alpha;
    return t.r_b.asDiagonal() * (t.g_direct + a * t.g * t.h.transpose()) * t.t_a.asDiagonal();
}

ComplexMatrix channel_ba(const GroundTruth& t, bool shifted)
{
    const cplx b = shifted ? -t.beta : t.beta;
    return t.r_a.asDiagonal() * (ComplexMatrix(t.g_direct.transpose()) + b * t.h * t.g.transpose()) *
           t.t_b.asDiagonal();
}

GroundTruth draw_ground_truth(const ScenarioConfig& cfg, Rng& rng)
{
    cfg.validate();
    const int ma = cfg.m_a;
    const int mb = cfg.m_b;
    GroundTruth t;

    t.g_direct.resize(mb, ma);
    for (int i = 0; i < ma; ++i)
        for (int j = 0; j < mb; ++j)
            t.g_direct(j, i) = complex_normal(rng, 1.0);

    std::uniform_int_distribution<int> kh(0, ma - 1);
    std::uniform_int_distribution<int> kg(0, mb - 1);
    t.h = dft_column(ma, kh(rng));
    t.g = dft_column(mb, kg(rng));
    if (cfg.repeater_channel == RepeaterChannel::unit_modulus) {
        // Unit gain per antenna, the same per-link scale as the entries of G.
        t.h *= std::sqrt(static_cast<double>(ma));
        t.g *= std::sqrt(static_cast<double>(mb));
    }

    t.t_a.resize(ma);
    t.r_a.resize(ma);
    t.t_b.resize(mb);
    t.r_b.resize(mb);
    for (int i = 0; i < ma; ++i) {
        t.t_a(i) = reciprocity_coefficient(cfg.amplitude_error_std, rng);
        t.r_a(i) = reciprocity_coefficient(cfg.amplitude_error_std, rng);
    }
    for (int j = 0; j < mb; ++j) {
        t.t_b(j) = reciprocity_coefficient(cfg.amplitude_error_std, rng);
        t.r_b(j) = reciprocity_coefficient(cfg.amplitude_error_std, rng);
    }

    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    t.alpha = std::polar(std::pow(10.0, cfg.alpha_gain_db / 20.0), phase(rng));
    t.beta = std::polar(std::pow(10.0, cfg.beta_gain_db / 20.0), phase(rng));
    t.gamma = t.beta / t.alpha;
    return t;
}

MeasurementSet generate_measurements(const GroundTruth& truth, const ScenarioConfig& cfg, Rng& rng)
{
    cfg.validate();
    const int ma = cfg.m_a;
    const int mb = cfg.m_b;
    if (truth.g_direct.rows() != mb || truth.g_direct.cols() != ma)
        throw DomainError("generate_measurements: ground truth does not match config shape");

    MeasurementSet m;
    m.x_ab0 = channel_ab(truth, false);
    m.x_ba0 = channel_ba(truth, false);
    m.x_ab1 = channel_ab(truth, true);
    m.x_ba1 = channel_ba(truth, true);

    if (cfg.noise_kind == NoiseKind::white) {
        const double s2 = cfg.noise_variance();
        for (ComplexMatrix* x : {&m.x_ab0, &m.x_ba0, &m.x_ab1, &m.x_ba1})
            for (Eigen::Index k = 0; k < x->size(); ++k)
                x->data()[k] += complex_normal(rng, s2);
    } else {
        const RawNoise n = raw_noise(cfg);
        m.x_ab0 += sample_matrix_gaussian(mb, ma, n.omega_b, n.psi_b, rng);
        m.x_ba0 += sample_matrix_gaussian(ma, mb, n.omega_a, n.psi_a, rng);
        m.x_ab1 += sample_matrix_gaussian(mb, ma, n.omega_b, n.psi_b, rng);
        m.x_ba1 += sample_matrix_gaussian(ma, mb, n.omega_a, n.psi_a, rng);
    }
    return m;
}

}  // namespace reccal
