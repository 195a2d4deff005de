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


#include "reccal/preprocess.hpp"

namespace reccal {

namespace {

void require_shape(const ComplexMatrix& m, Eigen::Index rows, Eigen::Index cols, const char* what)
{
    if (m.rows() != rows || m.cols() != cols)
        throw DomainError(std::string("preprocess: shape mismatch in ") + what);
}

void require_hermitian(const ComplexMatrix& m, const char* what)
{
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DomainError(std::string("preprocess: covariance not Hermitian: ") + what);
}

}  // namespace

PreprocessedSet preprocess(const MeasurementSet& meas, const RawNoise& raw, CovMode mode)
{
    const Eigen::Index mb = meas.x_ab0.rows();
    const Eigen::Index ma = meas.x_ab0.cols();
    if (ma < 1 || mb < 1)
        throw DomainError("preprocess: empty measurements");
    require_shape(meas.x_ab1, mb, ma, "x_ab1");
    require_shape(meas.x_ba0, ma, mb, "x_ba0");
    require_shape(meas.x_ba1, ma, mb, "x_ba1");
    require_shape(raw.omega_a, ma, ma, "omega_a");
    require_shape(raw.psi_a, mb, mb, "psi_a");
    require_shape(raw.omega_b, mb, mb, "omega_b");
    require_shape(raw.psi_b, ma, ma, "psi_b");
    require_hermitian(raw.omega_a, "omega_a");
    require_hermitian(raw.psi_a, "psi_a");
    require_hermitian(raw.omega_b, "omega_b");
    require_hermitian(raw.psi_b, "psi_b");

    PreprocessedSet p;
    p.r1 = 0.5 * (meas.x_ab0 + meas.x_ab1);
    p.r2 = 0.5 * (meas.x_ab0 - meas.x_ab1);
    p.r3 = 0.5 * (meas.x_ba0 + meas.x_ba1);
    p.r4 = 0.5 * (meas.x_ba0 - meas.x_ba1);

    // Averaging two independent draws halves the covariance; the factor is
    // carried by the spatial term so psi (x) omega halves exactly once.
    p.noise.omega_a = 0.5 * raw.omega_a;
    p.noise.psi_a = raw.psi_a;
    p.noise.omega_b = 0.5 * raw.omega_b;
    p.noise.psi_b = raw.psi_b;
    p.noise.mode = mode;
    return p;
}

}  // namespace reccal
