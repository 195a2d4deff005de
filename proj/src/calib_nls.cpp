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


#include "reccal/calib_nls.hpp"

namespace reccal {

namespace detail {

int sweep_a(const ComplexMatrix& h, const ComplexMatrix& r3t, const ComplexVector& b, ComplexVector& a,
            const ComplexMatrix* z, const ComplexMatrix* r4t, cplx gamma)
{
    const Eigen::Index ma = h.cols();
    const Eigen::Index mb = h.rows();
    const double g2 = std::norm(gamma);
    const cplx gc = std::conj(gamma);
    int skipped = 0;
    for (Eigen::Index i = 0; i < ma; ++i) {
        cplx num(0.0, 0.0);
        double den = 0.0;
        if (z == nullptr) {
            for (Eigen::Index j = 0; j < mb; ++j) {
                const cplx c = b(j) * h(j, i);
                num += std::conj(c) * r3t(j, i);
                den += std::norm(c);
            }
        } else {
            cplx num_z(0.0, 0.0);
            double den_z = 0.0;
            for (Eigen::Index j = 0; j < mb; ++j) {
                const cplx c = b(j) * h(j, i);
                num += std::conj(c) * r3t(j, i);
                den += std::norm(c);
                const cplx cz = b(j) * (*z)(j, i);
                num_z += std::conj(cz) * (*r4t)(j, i);
                den_z += std::norm(cz);
            }
            num += gc * num_z;
            den += g2 * den_z;
        }
        if (den > 0.0)
            a(i) = num / den;
        else
            ++skipped;
    }
    return skipped;
}

int sweep_b(const ComplexMatrix& ht, const ComplexMatrix& r3, const ComplexVector& a, ComplexVector& b,
            const ComplexMatrix* zt, const ComplexMatrix* r4, cplx gamma)
{
    const Eigen::Index ma = ht.rows();
    const Eigen::Index mb = ht.cols();
    const double g2 = std::norm(gamma);
    const cplx gc = std::conj(gamma);
    int skipped = 0;
    for (Eigen::Index j = 0; j < mb; ++j) {
        cplx num(0.0, 0.0);
        double den = 0.0;
        if (zt == nullptr) {
            for (Eigen::Index i = 0; i < ma; ++i) {
                const cplx c = a(i) * ht(i, j);
                num += std::conj(c) * r3(i, j);
                den += std::norm(c);
            }
        } else {
            cplx num_z(0.0, 0.0);
            double den_z = 0.0;
            for (Eigen::Index i = 0; i < ma; ++i) {
                const cplx c = a(i) * ht(i, j);
                num += std::conj(c) * r3(i, j);
                den += std::norm(c);
                const cplx cz = a(i) * (*zt)(i, j);
                num_z += std::conj(cz) * (*r4)(i, j);
                den_z += std::norm(cz);
            }
            num += gc * num_z;
            den += g2 * den_z;
        }
        if (den > 0.0)
            b(j) = num / den;
        else
            ++skipped;
    }
    return skipped;
}

void normalize_scale(ComplexVector& a, ComplexVector& b)
{
    const double nb = b.norm();
    if (nb > 0.0) {
        a *= nb;
        b /= nb;
    }
}

}  // namespace detail

CalibrationEstimate nls_calibrate(const PreprocessedSet& pre, const NlsOptions& opts)
{
    if (opts.n_iter < 1)
        throw DomainError("nls_calibrate: n_iter must be >= 1");
    const int ma = pre.m_a();
    const int mb = pre.m_b();

    CalibrationEstimate est;
    est.h_hat = pre.r1;
    const RankOneFactors zf = rank_one_approx(pre.r2, opts.power);
    est.z_hat = zf.reconstruct();
    est.diagnostics.rank_one_unconverged = !zf.converged;

    est.a_hat = opts.initial_a.value_or(ComplexVector::Ones(ma));
    est.b_hat = opts.initial_b.value_or(ComplexVector::Ones(mb));
    if (est.a_hat.size() != ma || est.b_hat.size() != mb)
        throw DomainError("nls_calibrate: initial A/B have wrong size");

    const ComplexMatrix ht = est.h_hat.transpose();
    const ComplexMatrix r3t = pre.r3.transpose();
    const bool want_gamma = opts.record_gamma || opts.record_objective;
    if (want_gamma)
        est.trace.reserve(opts.n_iter);

    for (int it = 1; it <= opts.n_iter; ++it) {
        est.diagnostics.skipped_updates += detail::sweep_a(est.h_hat, r3t, est.b_hat, est.a_hat);
        est.diagnostics.skipped_updates += detail::sweep_b(ht, pre.r3, est.a_hat, est.b_hat);
        detail::normalize_scale(est.a_hat, est.b_hat);
        if (want_gamma) {
            TraceEntry e;
            e.iteration = it;
            e.gamma = ls_gamma(pre.r4, est.z_hat, est.a_hat, est.b_hat);
            if (opts.record_objective)
                e.objective = nls_objective(pre, est.h_hat, est.z_hat, est.a_hat, est.b_hat, *e.gamma);
            est.trace.push_back(e);
        }
    }

    est.gamma_hat = ls_gamma(pre.r4, est.z_hat, est.a_hat, est.b_hat);
    return est;
}

}  // namespace reccal
