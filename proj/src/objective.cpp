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


#include "reccal/estimate.hpp"

namespace reccal {

ComplexMatrix sandwich(const ComplexVector& a, const ComplexMatrix& m, const ComplexVector& b)
{
    return a.asDiagonal() * m.transpose() * b.asDiagonal();
}

double nls_objective(const PreprocessedSet& pre, const ComplexMatrix& h, const ComplexMatrix& z,
                     const ComplexVector& a, const ComplexVector& b, cplx gamma)
{
    return (pre.r1 - h).squaredNorm() + (pre.r2 - z).squaredNorm() +
           (pre.r3 - sandwich(a, h, b)).squaredNorm() +
           (pre.r4 - gamma * sandwich(a, z, b)).squaredNorm();
}

double nls_objective(const PreprocessedSet& pre, const CalibrationEstimate& est)
{
    return nls_objective(pre, est.h_hat, est.z_hat, est.a_hat, est.b_hat, est.gamma_hat);
}

cplx ls_gamma(const ComplexMatrix& r4, const ComplexMatrix& z, const ComplexVector& a,
              const ComplexVector& b)
{
    const Eigen::Index ma = a.size();
    const Eigen::Index mb = b.size();
    cplx num(0.0, 0.0);
    double den = 0.0;
    for (Eigen::Index j = 0; j < mb; ++j)
        for (Eigen::Index i = 0; i < ma; ++i) {
            const cplx d = a(i) * z(j, i) * b(j);
            num += std::conj(d) * r4(i, j);
            den += std::norm(d);
        }
    if (!(den > 0.0))
        throw NumericalError("gamma estimate undefined: A Z^T B is zero");
    return num / den;
}

}  // namespace reccal
