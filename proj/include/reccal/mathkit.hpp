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

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace reccal {

using cplx = std::complex<double>;

// Column-major storage, so vec() is a plain reinterpretation of the buffer.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

using Rng = std::mt19937_64;

/// Raised for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a computation cannot produce a finite, meaningful result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dominant singular triplet of a matrix, m ~ scale * left * right^T.
/// `right` holds the complex conjugate of the right singular vector.
struct RankOneFactors {
    ComplexVector left;
    ComplexVector right;
    double scale = 0.0;
    int iterations = 0;
    bool converged = true;

    ComplexMatrix reconstruct() const;
};

/// I1(x)/I0(x) for x >= 0. Throws DomainError for negative or non-finite x.
double bessel_ratio(double x);

struct PowerIterationOptions {
    int max_iters = 200;
    double tol = 1e-10;  // relative change of the dominant eigenvalue of m^H m
};

/// Best rank-one approximation S{m} by power iteration on m^H m.
///
/// The start vector is the first canonical basis vector plus a fixed small
/// perturbation, so results are reproducible. Factors are phase-normalised so
/// the largest-magnitude entry of `left` is real and nonnegative. An all-zero
/// matrix yields scale 0 with canonical unit vectors. When the iteration budget
/// runs out (a nearly repeated top singular value) the dominant vector is taken
/// from a dense eigensolve of m^H m instead and `converged` is left false.
RankOneFactors rank_one_approx(const ComplexMatrix& m, const PowerIterationOptions& opts = {});

/// Column k of the unitary m-point DFT matrix: exp(-j 2 pi i k / m) / sqrt(m).
ComplexVector dft_column(int m, int k);

/// Draws W (rows x cols) with vec(W) ~ CN(0, col_cov (x) row_cov).
///
/// row_cov is the spatial (column-wise) covariance, rows x rows; col_cov is
/// the temporal (row-wise) covariance, cols x cols. Row i of W then has
/// covariance row_cov(i,i) * col_cov and column j has col_cov(j,j) * row_cov.
/// Throws DomainError when a descriptor is not Hermitian PSD or mis-sized.
ComplexMatrix sample_matrix_gaussian(int rows, int cols, const ComplexMatrix& row_cov,
                                     const ComplexMatrix& col_cov, Rng& rng);

/// Hermitian PSD square root factor L with L L^H = c (eigen-decomposition based,
/// so singular descriptors are accepted).
ComplexMatrix psd_factor(const ComplexMatrix& c);

/// One CN(0, variance) draw.
cplx complex_normal(Rng& rng, double variance);

ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Deterministic 64-bit mixer used to split a master seed into per-trial streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator for stream (a, b) of a master seed.
Rng make_stream_rng(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace reccal
