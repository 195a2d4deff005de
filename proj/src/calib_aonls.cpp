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


#include "reccal/calib_aonls.hpp"

#include <cmath>

#include "reccal/calib_nls.hpp"

namespace reccal {

namespace {

constexpr double kMinDiagonal = 1e-9;

cplx clamp_away_from_zero(cplx x, int& clamped)
{
    const double mag = std::abs(x);
    if (mag >= kMinDiagonal)
        return x;
    ++clamped;
    if (mag == 0.0)
        return {kMinDiagonal, 0.0};
    return x * (kMinDiagonal / mag);
}

}  // namespace

ComplexMatrix aonls_update_h(const PreprocessedSet& pre, const ComplexVector& a, const ComplexVector& b)
{
    const int ma = pre.m_a();
    const int mb = pre.m_b();
    ComplexMatrix h(mb, ma);
    for (int i = 0; i < ma; ++i)
        for (int j = 0; j < mb; ++j) {
            const cplx ab = a(i) * b(j);
            h(j, i) = (pre.r1(j, i) + std::conj(ab) * pre.r3(i, j)) / (1.0 + std::norm(ab));
        }
    return h;
}

CalibrationEstimate aonls_calibrate(const PreprocessedSet& pre, const AonlsOptions& opts)
{
    if (opts.n_iter < 1 || opts.max_outer < 1 || !(opts.rel_tol > 0.0))
        throw DomainError("aonls_calibrate: invalid iteration settings");
    const int ma = pre.m_a();
    const int mb = pre.m_b();

    NlsOptions init;
    init.n_iter = opts.n_iter;
    init.power = opts.power;
    CalibrationEstimate cur = nls_calibrate(pre, init);

    double f_best = nls_objective(pre, cur);
    const double data_energy =
        pre.r1.squaredNorm() + pre.r2.squaredNorm() + pre.r3.squaredNorm() + pre.r4.squaredNorm();
    CalibrationEstimate best = cur;
    best.trace.push_back({0, best.gamma_hat, f_best});

    const ComplexMatrix r3t = pre.r3.transpose();
    const ComplexMatrix r4t = pre.r4.transpose();
    Diagnostics& diag = best.diagnostics;

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        cur.h_hat = aonls_update_h(pre, cur.a_hat, cur.b_hat);
        const ComplexMatrix ht = cur.h_hat.transpose();
        const ComplexMatrix zt = cur.z_hat.transpose();

        for (int it = 0; it < opts.n_iter; ++it) {
            diag.skipped_updates +=
                detail::sweep_a(cur.h_hat, r3t, cur.b_hat, cur.a_hat, &cur.z_hat, &r4t, cur.gamma_hat);
            diag.skipped_updates +=
                detail::sweep_b(ht, pre.r3, cur.a_hat, cur.b_hat, &zt, &pre.r4, cur.gamma_hat);
            detail::normalize_scale(cur.a_hat, cur.b_hat);
        }

        ComplexVector a_inv(ma);
        ComplexVector b_inv(mb);
        for (int i = 0; i < ma; ++i)
            a_inv(i) = 1.0 / clamp_away_from_zero(cur.a_hat(i), diag.clamped_inverse);
        for (int j = 0; j < mb; ++j)
            b_inv(j) = 1.0 / clamp_away_from_zero(cur.b_hat(j), diag.clamped_inverse);
        const cplx gc = std::conj(cur.gamma_hat);
        const double scale = 1.0 / (1.0 + std::norm(cur.gamma_hat));
        ComplexMatrix combined(mb, ma);
        for (int i = 0; i < ma; ++i)
            for (int j = 0; j < mb; ++j)
                combined(j, i) = scale * (pre.r2(j, i) + gc * b_inv(j) * r4t(j, i) * a_inv(i));
        const RankOneFactors zf = rank_one_approx(combined, opts.power);
        diag.rank_one_unconverged = diag.rank_one_unconverged || !zf.converged;
        cur.z_hat = zf.reconstruct();

        cur.gamma_hat = ls_gamma(pre.r4, cur.z_hat, cur.a_hat, cur.b_hat);
        const double f = nls_objective(pre, cur);

        if (f < f_best) {
            const double rel = (f_best - f) / f_best;
            best.h_hat = cur.h_hat;
            best.z_hat = cur.z_hat;
            best.a_hat = cur.a_hat;
            best.b_hat = cur.b_hat;
            best.gamma_hat = cur.gamma_hat;
            f_best = f;
            best.trace.push_back({outer, best.gamma_hat, f_best});
            if (rel < opts.rel_tol)
                break;
        } else {
            if (f > f_best * (1.0 + 1e-9) + 1e-12 * data_energy)
                diag.diverged = true;
            best.trace.push_back({outer, best.gamma_hat, f_best});
            break;
        }
    }
    return best;
}

}  // namespace reccal
