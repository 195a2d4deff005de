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

#include <cmath>
#include <vector>

#include "reccal/calib_aonls.hpp"
#include "reccal/calib_mmse.hpp"
#include "reccal/calib_nls.hpp"
#include "reccal/preprocess.hpp"
#include "reccal/scenario.hpp"

namespace reccal::test {

struct Trial {
    GroundTruth truth;
    PreprocessedSet pre;
};

inline ScenarioConfig scenario(int m_a, int m_b, double snr_db)
{
    ScenarioConfig cfg;
    cfg.m_a = m_a;
    cfg.m_b = m_b;
    cfg.snr_db = snr_db;
    return cfg;
}

inline Trial draw_trial(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t index,
                        CovMode mode = CovMode::diagonal)
{
    Rng rng = make_stream_rng(seed, 0, index);
    Trial t;
    t.truth = draw_ground_truth(cfg, rng);
    t.pre = preprocess(generate_measurements(t.truth, cfg, rng), raw_noise(cfg), mode);
    return t;
}

/// Preprocessed data built straight from the truth with no noise at all.
inline PreprocessedSet noiseless_set(const GroundTruth& truth, const ScenarioConfig& cfg)
{
    ScenarioConfig clean = cfg;
    clean.snr_db = 200.0;
    PreprocessedSet pre;
    pre.r1 = truth.h_matrix();
    pre.r2 = truth.z_matrix();
    pre.r3 = sandwich(truth.a_diag(), pre.r1, truth.b_diag());
    pre.r4 = truth.gamma * sandwich(truth.a_diag(), pre.r2, truth.b_diag());
    const RawNoise raw = raw_noise(clean);
    pre.noise.omega_a = 0.5 * raw.omega_a;
    pre.noise.psi_a = raw.psi_a;
    pre.noise.omega_b = 0.5 * raw.omega_b;
    pre.noise.psi_b = raw.psi_b;
    return pre;
}

/// Random complex matrix with standard normal real and imaginary parts.
inline ComplexMatrix random_matrix(int rows, int cols, Rng& rng)
{
    std::normal_distribution<double> n;
    ComplexMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            m(i, j) = cplx(n(rng), n(rng));
    return m;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace reccal::test
