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


#include <catch_amalgamated.hpp>

#include <cmath>

#include "reccal/preprocess.hpp"
#include "reccal/scenario.hpp"
#include "support.hpp"

using namespace reccal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("ground truth gains and coefficients", "[scenario]")
{
    ScenarioConfig cfg = test::scenario(6, 5, 20.0);
    Rng rng(1);
    const GroundTruth t = draw_ground_truth(cfg, rng);
    CHECK_THAT(std::abs(t.alpha), WithinAbs(std::sqrt(10.0), 1e-12));
    CHECK_THAT(std::abs(t.alpha), WithinAbs(3.1623, 1e-4));
    CHECK(std::abs(t.gamma * t.alpha - t.beta) < 1e-14);
    CHECK_THAT(std::abs(t.gamma), WithinAbs(1.0, 1e-12));
    for (const ComplexVector* d : {&t.t_a, &t.r_a, &t.t_b, &t.r_b})
        for (Eigen::Index i = 0; i < d->size(); ++i)
            CHECK_THAT(std::abs((*d)(i)), WithinAbs(1.0, 1e-12));
    CHECK(t.t_a.size() == 6);
    CHECK(t.t_b.size() == 5);
    CHECK(t.g_direct.rows() == 5);
    CHECK(t.g_direct.cols() == 6);
}

TEST_CASE("repeater channel scaling", "[scenario]")
{
    ScenarioConfig cfg = test::scenario(8, 4, 20.0);
    Rng r1(2);
    const GroundTruth modulus = draw_ground_truth(cfg, r1);
    for (Eigen::Index i = 0; i < modulus.h.size(); ++i)
        CHECK_THAT(std::abs(modulus.h(i)), WithinAbs(1.0, 1e-12));
    for (Eigen::Index j = 0; j < modulus.g.size(); ++j)
        CHECK_THAT(std::abs(modulus.g(j)), WithinAbs(1.0, 1e-12));

    cfg.repeater_channel = RepeaterChannel::unit_norm;
    Rng r2(2);
    const GroundTruth norm = draw_ground_truth(cfg, r2);
    CHECK_THAT(norm.h.norm(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(norm.g.norm(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("ground truth is a function of the generator state", "[scenario]")
{
    const ScenarioConfig cfg = test::scenario(4, 3, 10.0);
    Rng a(99);
    Rng b(99);
    const GroundTruth x = draw_ground_truth(cfg, a);
    const GroundTruth y = draw_ground_truth(cfg, b);
    CHECK(x.g_direct == y.g_direct);
    CHECK(x.a_diag() == y.a_diag());
    CHECK(x.b_diag() == y.b_diag());
    CHECK(x.gamma == y.gamma);
}

TEST_CASE("amplitude errors perturb only the magnitudes", "[scenario]")
{
    ScenarioConfig cfg = test::scenario(16, 16, 20.0);
    cfg.amplitude_error_std = 0.05;
    Rng rng(8);
    const GroundTruth t = draw_ground_truth(cfg, rng);
    double spread = 0.0;
    for (Eigen::Index i = 0; i < t.t_a.size(); ++i)
        spread = std::max(spread, std::abs(std::abs(t.t_a(i)) - 1.0));
    CHECK(spread > 0.0);
    CHECK(spread < 0.5);
}

TEST_CASE("noiseless measurements isolate the two paths", "[scenario]")
{
    ScenarioConfig cfg = test::scenario(5, 4, 400.0);
    Rng rng(3);
    const GroundTruth t = draw_ground_truth(cfg, rng);
    const MeasurementSet m = generate_measurements(t, cfg, rng);
    const ComplexMatrix repeater = 2.0 * t.alpha * t.r_b.asDiagonal() * t.g * t.h.transpose() * t.t_a.asDiagonal();
    const ComplexMatrix direct = 2.0 * t.r_b.asDiagonal() * t.g_direct * t.t_a.asDiagonal();
    CHECK(test::max_abs_diff(m.x_ab0 - m.x_ab1, repeater) < 1e-12);
    CHECK(test::max_abs_diff(m.x_ab0 + m.x_ab1, direct) < 1e-12);
    CHECK(test::max_abs_diff(m.x_ba0, channel_ba(t, false)) < 1e-12);
    CHECK(test::max_abs_diff(m.x_ba1, channel_ba(t, true)) < 1e-12);
}

TEST_CASE("measurement noise power follows the SNR", "[scenario][monte-carlo]")
{
    const ScenarioConfig cfg = test::scenario(1, 1, 0.0);
    Rng rng(12);
    const int n = 10000;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const GroundTruth t = draw_ground_truth(cfg, rng);
        const MeasurementSet m = generate_measurements(t, cfg, rng);
        acc += std::norm(m.x_ab0(0, 0) - channel_ab(t, false)(0, 0));
    }
    CHECK_THAT(acc / n, WithinRel(1.0, 0.03));
}

TEST_CASE("scenario validation", "[scenario]")
{
    ScenarioConfig cfg;
    cfg.m_a = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.amplitude_error_std = -0.1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.noise_kind = NoiseKind::kronecker;
    cfg.spatial_corr = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.snr_db = NAN;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("raw noise descriptors", "[scenario]")
{
    ScenarioConfig cfg = test::scenario(3, 2, 10.0);
    RawNoise w = raw_noise(cfg);
    CHECK(test::max_abs_diff(w.omega_a, 0.1 * ComplexMatrix::Identity(3, 3)) < 1e-15);
    CHECK(w.psi_a == ComplexMatrix::Identity(2, 2));
    cfg.noise_kind = NoiseKind::kronecker;
    cfg.spatial_corr = 0.5;
    cfg.temporal_corr = -0.3;
    w = raw_noise(cfg);
    CHECK_THAT(w.omega_a(0, 2).real(), WithinAbs(0.1 * 0.25, 1e-15));
    CHECK_THAT(w.psi_b(0, 1).real(), WithinAbs(-0.3, 1e-15));
    CHECK(w.omega_b.rows() == 2);
}

TEST_CASE("preprocessing recovers the model matrices without noise", "[preprocess]")
{
    const ScenarioConfig cfg = test::scenario(4, 6, 400.0);
    Rng rng(5);
    const GroundTruth t = draw_ground_truth(cfg, rng);
    const PreprocessedSet p = preprocess(generate_measurements(t, cfg, rng), raw_noise(cfg), CovMode::full);
    CHECK(test::max_abs_diff(p.r1, t.h_matrix()) < 1e-12);
    CHECK(test::max_abs_diff(p.r2, t.z_matrix()) < 1e-12);
    CHECK(test::max_abs_diff(p.r3, sandwich(t.a_diag(), t.h_matrix(), t.b_diag())) < 1e-12);
    CHECK(test::max_abs_diff(p.r4, t.gamma * sandwich(t.a_diag(), t.z_matrix(), t.b_diag())) < 1e-12);
    CHECK(p.m_a() == 4);
    CHECK(p.m_b() == 6);
    CHECK(p.noise.mode == CovMode::full);
}

TEST_CASE("equal configurations cancel the repeater path", "[preprocess]")
{
    MeasurementSet m;
    Rng rng(1);
    m.x_ab0 = test::random_matrix(3, 2, rng);
    m.x_ab1 = m.x_ab0;
    m.x_ba0 = test::random_matrix(2, 3, rng);
    m.x_ba1 = m.x_ba0;
    const PreprocessedSet p = preprocess(m, raw_noise(test::scenario(2, 3, 0.0)), CovMode::diagonal);
    CHECK(p.r2.isZero(0.0));
    CHECK(p.r4.isZero(0.0));
}

TEST_CASE("preprocessed noise has half the raw variance", "[preprocess][monte-carlo]")
{
    const ScenarioConfig cfg = test::scenario(2, 2, 0.0);
    const RawNoise raw = raw_noise(cfg);
    Rng rng(33);
    const int n = 10000;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const GroundTruth t = draw_ground_truth(cfg, rng);
        const PreprocessedSet p = preprocess(generate_measurements(t, cfg, rng), raw, CovMode::diagonal);
        acc += (p.r1 - t.h_matrix()).squaredNorm() / 4.0;
    }
    CHECK_THAT(acc / n, WithinRel(0.5, 0.03));

    const PreprocessedSet p = preprocess(generate_measurements(draw_ground_truth(cfg, rng), cfg, rng), raw,
                                         CovMode::diagonal);
    CHECK(test::max_abs_diff(p.noise.omega_a, 0.5 * raw.omega_a) == 0.0);
    CHECK(p.noise.psi_a == raw.psi_a);
    CHECK(test::max_abs_diff(p.noise.omega_b, 0.5 * raw.omega_b) == 0.0);
    CHECK(p.noise.psi_b == raw.psi_b);
}

TEST_CASE("preprocess rejects inconsistent input", "[preprocess]")
{
    MeasurementSet m;
    Rng rng(1);
    m.x_ab0 = test::random_matrix(3, 2, rng);
    m.x_ab1 = test::random_matrix(3, 2, rng);
    m.x_ba0 = test::random_matrix(2, 3, rng);
    m.x_ba1 = test::random_matrix(3, 2, rng);
    CHECK_THROWS_AS(preprocess(m, raw_noise(test::scenario(2, 3, 0.0)), CovMode::diagonal), DomainError);
    m.x_ba1 = test::random_matrix(2, 3, rng);
    RawNoise raw = raw_noise(test::scenario(2, 3, 0.0));
    raw.omega_a(0, 1) = cplx(0.3, 0.0);
    CHECK_THROWS_AS(preprocess(m, raw, CovMode::diagonal), DomainError);
}
