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

#include <vector>

#include "reccal/denoiser.hpp"
#include "reccal/estimate.hpp"

namespace reccal {

enum class PhiGammaMode { unity, mom, known };

/// Source of phi_gamma = E|gamma|^2 (and of the prior radius for gamma).
struct PhiGamma {
    PhiGammaMode mode = PhiGammaMode::mom;
    double value = 1.0;  // used by PhiGammaMode::known
};

struct MmseConfig {
    int n_iter = 100;  // A/B sweeps
    CovMode cov_mode = CovMode::diagonal;
    PhiGamma phi_gamma;
    double damping = 1.0;  // 1 = no damping
    bool record_trace = false;  // gamma estimate after every sweep
    PowerIterationOptions power;

    void validate() const;
};

/// Completed-square AWGN observation of one unknown: mean + CN(0, variance).
struct PseudoObservation {
    cplx mean;
    double variance = 0.0;
};

struct CoefficientUpdate {
    ComplexVector estimate;
    RealVector mse;
    std::vector<PseudoObservation> pseudo;
    int uninformative = 0;
};

/// Bayesian MMSE calibration.
///
/// H = R1 (its error covariance is the W1 covariance), Z = S{R2}, then n_iter
/// passes of update_a / update_b from A = B = I with unit MSEs, and finally
/// estimate_gamma. With record_trace the gamma stage is also evaluated after
/// every pass (for convergence plots only; the A/B recursion is unaffected).
CalibrationEstimate mmse_calibrate(const PreprocessedSet& pre, const MmseConfig& cfg = {});

/// One pass over the diagonal of A from the rows of R3.
///
/// For row i the observation (R3^T)_i = (B H)_i A(i,i) + noise has the
/// Gaussian-approximated covariance
///
///   V_i = Omega_A(i,i) Psi_A + Psi_B(i,i) B Omega_B B^H
///         + diag_j((|H(j,i)|^2 + Psi_B(i,i) Omega_B(j,j)) v_B(j)),
///
/// giving psi = c^H V^-1 c with c = (B H)_i, the pseudo-observation
/// c^H V^-1 (R3^T)_i / psi with variance 1/psi, and the unit-circle
/// von Mises denoiser on top. Diagonal mode keeps only the diagonal of V.
/// A row with psi <= 0 or non-finite keeps a_prev(i) with MSE 1.
CoefficientUpdate update_a(const PreprocessedSet& pre, const ComplexMatrix& h_hat, const NoiseStatistics& noise,
                           const ComplexVector& b_hat, const RealVector& v_b, CovMode mode,
                           const ComplexVector& a_prev, double damping = 1.0,
                           const RealVector* v_a_prev = nullptr);

/// Mirror of update_a over the columns of R3:
///
///   V_j = Psi_A(j,j) Omega_A + Omega_B(j,j) A Psi_B A^H
///         + diag_i((|H(j,i)|^2 + Omega_B(j,j) Psi_B(i,i)) v_A(i)).
CoefficientUpdate update_b(const PreprocessedSet& pre, const ComplexMatrix& h_hat, const NoiseStatistics& noise,
                           const ComplexVector& a_hat, const RealVector& v_a, CovMode mode,
                           const ComplexVector& b_prev, double damping = 1.0,
                           const RealVector* v_b_prev = nullptr);

/// vec(diag(a) Z^T diag(b)), index i + j * M_A.
ComplexVector gamma_regressor(const ComplexMatrix& z_hat, const ComplexVector& a, const ComplexVector& b);

/// Diagonal of V_gamma^D: phi |Z(j,i)|^2 (v_a(i)|b_j|^2 + |a_i|^2 v_b(j) + v_a(i) v_b(j)).
RealVector gamma_error_variances(const ComplexMatrix& z_hat, const ComplexVector& a, const RealVector& v_a,
                                 const ComplexVector& b, const RealVector& v_b, double phi);

struct MomStatistics {
    cplx q;
    double u = 0.0;
    double s = 0.0;
};

/// q = d^H S^-1 vec(R4), u = d^H S^-1 d, s = d^H S^-1 V^D S^-1 d with
/// S = Psi_A (x) Omega_A, applied through its Kronecker factors (full mode)
/// or their diagonals (diagonal mode). Throws DomainError for d = 0.
MomStatistics mom_statistics(const ComplexMatrix& r4, const ComplexVector& d_hat, const NoiseStatistics& noise,
                             const RealVector& v_gamma_diag, CovMode mode);

/// Method-of-moments estimate of |gamma|^2, (|q|^2 - u) / (u^2 + s) clamped at zero.
double mom_gamma_magnitude(const ComplexMatrix& r4, const ComplexVector& d_hat, const NoiseStatistics& noise,
                           const RealVector& v_gamma_diag, CovMode mode);

struct GammaEstimate {
    cplx gamma;
    double mse = 0.0;
    PseudoObservation pseudo;
    double radius = 0.0;  // prior radius |gamma_check|
    bool degenerate = false;
};

/// MMSE estimate of gamma from R4 given the A/B posteriors.
///
/// In mom mode, |gamma_check|^2 is computed with phi = 1 inside V^D and then
/// reused as phi for the pseudo-observation; unity / known set phi directly
/// and the radius to sqrt(phi). A zero radius returns gamma = 0, mse = 0 and
/// degenerate = true.
GammaEstimate estimate_gamma(const PreprocessedSet& pre, const ComplexMatrix& z_hat, const ComplexVector& a_hat,
                             const RealVector& v_a, const ComplexVector& b_hat, const RealVector& v_b,
                             const NoiseStatistics& noise, const MmseConfig& cfg);

}  // namespace reccal
