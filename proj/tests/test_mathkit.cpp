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
#include <numbers>

#include <Eigen/SVD>

#include "reccal/mathkit.hpp"
#include "support.hpp"

using namespace reccal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// I1(x)/I0(x) from 60 terms of the ascending series, in long double.
double series_ratio(double x)
{
    long double i0 = 0.0L;
    long double i1 = 0.0L;
    long double term = 1.0L;  // (x/2)^(2k) / (k!)^2
    const long double q = static_cast<long double>(x) * x / 4.0L;
    for (int k = 0; k < 60; ++k) {
        i0 += term;
        i1 += term * (static_cast<long double>(x) / 2.0L) / (k + 1);
        term *= q / ((k + 1.0L) * (k + 1.0L));
    }
    return static_cast<double>(i1 / i0);
}

// Dominant singular triplet from a full Jacobi SVD.
ComplexMatrix svd_truncation(const ComplexMatrix& m, double* sigma = nullptr)
{
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (sigma != nullptr)
        *sigma = svd.singularValues()(0);
    return svd.singularValues()(0) * svd.matrixU().col(0) * svd.matrixV().col(0).adjoint();
}

}  // namespace

TEST_CASE("bessel_ratio matches the ascending series", "[mathkit][bessel][oracle]")
{
    double worst = 0.0;
    for (int k = 0; k <= 3000; ++k) {
        const double x = 0.01 * k;
        worst = std::max(worst, std::abs(bessel_ratio(x) - series_ratio(x)));
    }
    CHECK(worst < 1e-14);
}

TEST_CASE("bessel_ratio reference values", "[mathkit][bessel][frozen]")
{
    CHECK(bessel_ratio(0.0) == 0.0);
    CHECK_THAT(bessel_ratio(0.01), WithinAbs(0.0049999375010416488674, 1e-16));
    CHECK_THAT(bessel_ratio(0.5), WithinAbs(0.24249961258080194535, 1e-15));
    CHECK_THAT(bessel_ratio(2.0), WithinAbs(0.69777465796400798201, 1e-15));
    CHECK_THAT(bessel_ratio(2.0), WithinAbs(0.69777, 5e-6));
    CHECK_THAT(bessel_ratio(10.0), WithinAbs(0.94859982595484595897, 1e-15));
    CHECK_THAT(bessel_ratio(63.9), WithinAbs(0.99214416950446615145, 1e-15));
    CHECK_THAT(bessel_ratio(64.0), WithinAbs(0.99215649354881119593, 1e-15));
    CHECK_THAT(bessel_ratio(100.0), WithinAbs(0.99498737300516876559, 1e-15));
}

TEST_CASE("bessel_ratio large argument asymptote", "[mathkit][bessel][oracle]")
{
    const double x = 700.0;
    CHECK_THAT(bessel_ratio(x), WithinAbs(1.0 - 1.0 / 1400.0 - 1.0 / (8.0 * x * x), 1e-9));
    CHECK_THAT(bessel_ratio(x), WithinAbs(0.99928545881842609327, 1e-15));
}

TEST_CASE("bessel_ratio range, monotonicity and domain", "[mathkit][bessel][property]")
{
    double prev = 0.0;
    for (double x = 1e-6; x < 1e6; x *= 1.01) {
        const double r = bessel_ratio(x);
        REQUIRE(r >= prev);
        REQUIRE(r < 1.0);
        // I1/I0 < x/2 and I1/I0 > x / (1 + sqrt(1 + x^2)) bound the ratio.
        REQUIRE(r <= x / 2.0);
        REQUIRE(r >= x / (1.0 + std::sqrt(1.0 + x * x)) * (1.0 - 1e-15));
        prev = r;
    }
    CHECK(bessel_ratio(1e300) < 1.0);
    CHECK_THROWS_AS(bessel_ratio(-1.0), DomainError);
    CHECK_THROWS_AS(bessel_ratio(std::nan("")), DomainError);
    CHECK_THROWS_AS(bessel_ratio(INFINITY), DomainError);
}

TEST_CASE("rank_one_approx agrees with a full SVD", "[mathkit][rank1][oracle]")
{
    Rng rng(7);
    const std::pair<int, int> shapes[] = {{1, 1}, {3, 4}, {8, 8}, {16, 5}, {5, 16}, {32, 16}};
    for (const auto& [r, c] : shapes) {
        for (int t = 0; t < 100; ++t) {
            const ComplexMatrix m = test::random_matrix(r, c, rng);
            double sigma = 0.0;
            const ComplexMatrix oracle = svd_truncation(m, &sigma);
            const RankOneFactors f = rank_one_approx(m);
            INFO("shape " << r << "x" << c << " trial " << t << " iters " << f.iterations << " converged " << f.converged);
            // Residual of the truncation, floored for matrices that are exactly rank one.
            const double best = std::max((m - oracle).norm(), 1e-12 * m.norm());
            REQUIRE((m - f.reconstruct()).norm() <= best * (1.0 + 1e-8));
            REQUIRE_THAT(f.scale, WithinRel(sigma, 1e-8));
            REQUIRE_THAT(f.left.norm(), WithinAbs(1.0, 1e-12));
            REQUIRE_THAT(f.right.norm(), WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("rank_one_approx factors converge with a tight tolerance", "[mathkit][rank1][oracle]")
{
    // The eigenvalue criterion bounds the factor error by about sqrt(tol), so
    // a tolerance near machine precision is needed for factor-level agreement.
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const ComplexMatrix m = test::random_matrix(6, 5, rng);
        const ComplexMatrix oracle = svd_truncation(m);
        const RankOneFactors f = rank_one_approx(m, {5000, 1e-15});
        CHECK((f.reconstruct() - oracle).norm() / oracle.norm() < 1e-6);
    }
}

TEST_CASE("rank_one_approx on a random 8x8 matrix", "[mathkit][rank1][oracle]")
{
    Rng rng(11);
    const ComplexMatrix m = test::random_matrix(8, 8, rng);
    double sigma = 0.0;
    svd_truncation(m, &sigma);
    const RankOneFactors f = rank_one_approx(m);
    CHECK_THAT(f.scale, WithinAbs(sigma, 1e-10));
    CHECK_THAT(f.left.norm(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(f.right.norm(), WithinAbs(1.0, 1e-12));
    CHECK(f.converged);
}

TEST_CASE("rank_one_approx fixed points and degenerate input", "[mathkit][rank1]")
{
    Rng rng(3);
    const ComplexVector a = test::random_matrix(5, 1, rng).col(0);
    const ComplexVector b = test::random_matrix(4, 1, rng).col(0);
    const ComplexMatrix m = a * b.transpose();
    const RankOneFactors f = rank_one_approx(m);
    CHECK(test::max_abs_diff(f.reconstruct(), m) < 1e-12);

    const RankOneFactors z = rank_one_approx(ComplexMatrix::Zero(3, 4));
    CHECK(z.scale == 0.0);
    CHECK(z.left == ComplexVector::Unit(3, 0));
    CHECK(z.right == ComplexVector::Unit(4, 0));
    CHECK(z.reconstruct().isZero(0.0));

    CHECK_THROWS_AS(rank_one_approx(ComplexMatrix(0, 3)), DomainError);
}

TEST_CASE("rank_one_approx phase convention", "[mathkit][rank1][property]")
{
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const ComplexMatrix m = test::random_matrix(6, 4, rng);
        const RankOneFactors f = rank_one_approx(m);
        Eigen::Index k = 0;
        f.left.cwiseAbs().maxCoeff(&k);
        CHECK(f.left(k).imag() == 0.0);
        CHECK(f.left(k).real() >= 0.0);
        // A global phase on the input leaves the normalised left factor unchanged.
        const RankOneFactors g = rank_one_approx(std::polar(1.0, 1.234) * m);
        CHECK((g.left - f.left).norm() < 1e-9);
    }
}

TEST_CASE("dft_column entries and orthogonality", "[mathkit][dft]")
{
    const ComplexVector c0 = dft_column(4, 0);
    for (Eigen::Index i = 0; i < 4; ++i)
        CHECK(std::abs(c0(i) - cplx(0.5, 0.0)) < 1e-15);
    const ComplexVector c1 = dft_column(2, 1);
    CHECK(std::abs(c1(0) - cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
    CHECK(std::abs(c1(1) - cplx(-1.0 / std::sqrt(2.0), 0.0)) < 1e-15);

    for (int m : {1, 3, 8, 17}) {
        for (int k = 0; k < m; ++k) {
            const ComplexVector ck = dft_column(m, k);
            CHECK_THAT(ck.norm(), WithinAbs(1.0, 1e-12));
            for (int kk = k + 1; kk < m; ++kk) {
                const ComplexVector c2 = dft_column(m, kk);
                cplx ip(0.0, 0.0);
                for (int i = 0; i < m; ++i)
                    ip += std::conj(ck(i)) * c2(i);
                CHECK(std::abs(ip) < 1e-12);
            }
        }
    }
    CHECK_THROWS_AS(dft_column(0, 0), DomainError);
}

TEST_CASE("sample_matrix_gaussian moments", "[mathkit][noise][monte-carlo]")
{
    Rng rng(21);
    const int n = 100000;
    double acc = 0.0;
    const ComplexMatrix one = ComplexMatrix::Identity(1, 1);
    for (int t = 0; t < n; ++t)
        acc += std::norm(sample_matrix_gaussian(1, 1, one, one, rng)(0, 0));
    CHECK_THAT(acc / n, WithinRel(1.0, 0.03));

    ComplexMatrix spatial = ComplexMatrix::Zero(2, 2);
    spatial(0, 0) = 1.0;
    spatial(1, 1) = 4.0;
    double r0 = 0.0;
    double r1 = 0.0;
    for (int t = 0; t < n; ++t) {
        const ComplexMatrix w = sample_matrix_gaussian(2, 1, spatial, one, rng);
        r0 += std::norm(w(0, 0));
        r1 += std::norm(w(1, 0));
    }
    CHECK_THAT(r1 / r0, WithinRel(4.0, 0.05));

    const ComplexMatrix zero =
        sample_matrix_gaussian(3, 2, ComplexMatrix::Zero(3, 3), ComplexMatrix::Identity(2, 2), rng);
    CHECK(zero.isZero(0.0));
}

TEST_CASE("sample_matrix_gaussian Kronecker structure", "[mathkit][noise][monte-carlo]")
{
    // Sample covariance of vec(W) against col (x) row.
    Rng rng(4);
    ComplexMatrix row(2, 2);
    row << 1.0, cplx(0.5, 0.2), cplx(0.5, -0.2), 2.0;
    ComplexMatrix col(2, 2);
    col << 1.0, 0.3, 0.3, 1.0;
    const int n = 100000;
    ComplexMatrix cov = ComplexMatrix::Zero(4, 4);
    for (int t = 0; t < n; ++t) {
        const ComplexVector v = vec(sample_matrix_gaussian(2, 2, row, col, rng));
        cov += v * v.adjoint();
    }
    cov /= n;
    CHECK(test::max_abs_diff(cov, kron(col, row)) < 0.05);

    ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(sample_matrix_gaussian(2, 2, bad, col, rng), DomainError);
    CHECK_THROWS_AS(sample_matrix_gaussian(3, 2, row, col, rng), DomainError);
}

TEST_CASE("vec, unvec and kron", "[mathkit][kron]")
{
    ComplexMatrix m(2, 2);
    m << 1.0, 3.0, 2.0, 4.0;
    const ComplexVector v = vec(m);
    for (int i = 0; i < 4; ++i)
        CHECK(v(i) == cplx(i + 1.0, 0.0));
    CHECK(unvec(v, 2, 2) == m);
    CHECK(kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)) == ComplexMatrix::Identity(6, 6));

    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        const ComplexMatrix a = test::random_matrix(2, 2, rng);
        const ComplexMatrix x = test::random_matrix(2, 3, rng);
        const ComplexMatrix b = test::random_matrix(3, 3, rng);
        const ComplexVector lhs = vec(a * x * b);
        const ComplexVector rhs = kron(b.transpose(), a) * vec(x);
        REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("stream generators are deterministic and distinct", "[mathkit][rng]")
{
    Rng a = make_stream_rng(1, 2, 3);
    Rng b = make_stream_rng(1, 2, 3);
    Rng c = make_stream_rng(1, 2, 4);
    Rng d = make_stream_rng(2, 2, 3);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    CHECK(splitmix64(0) != splitmix64(1));
}
