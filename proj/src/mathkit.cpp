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

#include "reccal/mathkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace reccal {

namespace {

// Chebyshev expansions of I1(x)/I0(x) on [lo, hi], fitted offline in 40-digit
// arithmetic; each piece is within 5e-16 of the exact ratio.
constexpr double kChebCoeffs[] = {
    0.23270679223731283, 0.22440832341325578, -0.0096506551316374294,
    -0.0012194753905144186, 0.00014048890810135968, 6.1302434976300654e-06,
    -1.6595449580593643e-06, 5.394473620852711e-09, 1.6618223970557699e-08,
    -7.2527733387358589e-10, -1.396695178773459e-10, 1.2998434903569968e-11,
    8.9649863314511348e-13, -1.6824309965071026e-13, -2.3421223559217988e-15,
    1.8210812101253675e-15, 0.58407289432881715, 0.12518417154462883,
    -0.012025878461760986, 0.00051541661161243787, 3.4885898960502679e-05,
    -7.2600322643005918e-06, 4.1500240589215549e-07, 1.7601930248230438e-08,
    -4.8472245654594051e-09, 3.1104503469308186e-10, 8.8474830620949395e-12,
    -3.2195881362322017e-12, 2.2788777431906302e-13, 3.9139186256431289e-15,
    -2.1220644390244465e-15, 0.75945982308404203, 0.055676407238226915,
    -0.0055584881485566326, 0.00042880749246321665, -2.1461968794096022e-05,
    1.1473373499780344e-07, 1.0233685844319857e-07, -1.1460112153790735e-08,
    6.5930382488931307e-10, -8.3753655050291752e-12, -2.5787066438778607e-12,
    3.1036503480768117e-13, -1.872667589222567e-14, 0.83893949658518197,
    0.026604043902360319, -0.0021749055389790562, 0.00016407556383363141,
    -1.0621904456192562e-05, 5.3936577827256507e-07, -1.6741620151270879e-08,
    -2.9011453241043839e-10, 8.9956272337418512e-11, -7.8189632759266413e-12,
    4.4472327141931004e-13, -1.5816018508326013e-14, 0.89069691821364039,
    0.024103884724830597, -0.0027207354494680376, 0.00031073774377901933,
    -3.4868997478003717e-05, 3.6950020199847711e-06, -3.5423515858339276e-07,
    2.914009170026213e-08, -1.8499603906213565e-09, 5.5102857333158744e-11,
    6.9488920582489684e-12, -1.6215042557837354e-12, 2.070522143601738e-13,
    -2.0230006462282662e-14, 1.5759362083493178e-15, 0.92467008793815386,
    0.011370540644392621, -0.00086737224251086723, 6.7129890554257779e-05,
    -5.2828705779959042e-06, 4.2139171808821396e-07, -3.3683067553564125e-08,
    2.6474059612244732e-09, -1.9990908487315937e-10, 1.4140017943949789e-11,
    -9.092121235867973e-13, 5.0693509268605815e-14, -2.1869321403955307e-15,
    0.94230511631854541, 0.0066595632161126567, -0.00038612726184376086,
    2.2523990073598892e-05, -1.3245598929928844e-06, 7.8716832663653082e-08,
    -4.7368712648626613e-09, 2.885923069977904e-10, -1.7728959614598336e-11,
    1.0885569717337758e-12, -6.5946203641369508e-14, 3.8704505655840777e-15,
    0.95319665159042755, 0.0043810915726560659, -0.00020557767593000413,
    9.6763909047094048e-06, -4.5720005751278764e-07, 2.1706589268074471e-08,
    -1.0369630322042779e-09, 4.9928597198627662e-11, -2.4269710483983169e-12,
    1.1920259154146323e-13, -5.8956782712780705e-15, 0.96061148858500778,
    0.0031026440486235894, -0.00012240151245328831, 4.8380478674179491e-06,
    -1.9165295973607299e-07, 7.6119456274982809e-09, -3.032778516004442e-10,
    1.2130014369735886e-11, -4.874951607656836e-13, 1.9709761118471201e-14,
    -8.0134967819046811e-16, 0.96599090870695881, 0.0023129976924361468,
    -7.8746819731224341e-05, 2.6844656964393064e-06, -9.1647434069020188e-08,
    3.1340483047271451e-09, -1.0737894895614873e-10, 3.6871724592601829e-12,
    -1.2694029602815911e-13, 4.3786423916836249e-15, 0.97163158743768496,
    0.0032110334251389604, -0.00018186894050512323, 1.0309475518829308e-05,
    -5.8494305426787545e-07, 3.3222274810705192e-08, -1.8889912791254761e-09,
    1.0753979629252571e-10, -6.1307126107964625e-12, 3.5005156253211176e-13,
    -2.0022665756881834e-14, 1.1438588564296027e-15, 0.9769037277160062,
    0.0021301817800495606, -9.8281521902718243e-05, 4.5368272482717596e-06,
    -2.0954342425385245e-07, 9.6840107939426285e-09, -4.4783285240391634e-10,
    2.0724232035981059e-11, -9.5977145650544098e-13, 4.4484670969142868e-14,
    -2.0592344381662559e-15, 0.98051779682805029, 0.0015164053305111022,
    -5.9034708900087372e-05, 2.2990726448832148e-06, -8.9569479359883643e-08,
    3.4909143829975193e-09, -1.3611334009539962e-10, 5.3095294603342061e-12,
    -2.0721290319878555e-13, 8.0785988685524783e-15, 0.9831513950022831,
    0.0011344793091223888, -3.8203670975490101e-05, 1.2868401086822399e-06,
    -4.3357127728494399e-08, 1.46123031194372e-09, -4.9261240852102903e-11,
    1.6612203421092786e-12, -5.6039081966579764e-14, 1.8889077416187416e-15,
    0.98592339800907747, 0.0015804638208946325, -8.8738788309759582e-05,
    4.9833049900784055e-06, -2.7989779106872893e-07, 1.5723986613136486e-08,
    -8.8350781333403702e-10, 4.9653080606382344e-11, -2.7910899204740352e-12,
    1.5692684755104081e-13, -8.8250338040471466e-15, 4.9484743273731629e-16,
    0.98852217704822476, 0.0010518212647838616, -4.8199367951611119e-05,
    2.208966740686751e-06, -1.0124812349398401e-07, 4.6412649859169549e-09,
    -2.1278401430768936e-10, 9.7565581129780719e-12, -4.4741558496281775e-13,
    2.052023937411308e-14, -9.392975406235799e-16, 0.99030846580840926,
    0.00075033632851759138, -2.9048413442981542e-05, 1.1246638025156311e-06,
    -4.3546952312113196e-08, 1.6862753271119985e-09, -6.5303406308550167e-11,
    2.5291862209408259e-12, -9.7963311891950419e-14, 3.7890945573546529e-15,
    0.99161252873511274, 0.0005621962704933823, -1.8842535176019244e-05,
    6.3156159082589907e-07, -2.1169843563324453e-08, 7.0965249052482082e-10,
    -2.379033492041693e-11, 7.9759558310214961e-13, -2.6741906999164759e-14,
    8.9565986731287654e-16,
};

struct ChebPiece {
    double lo;
    double hi;
    int offset;
    int count;
};

constexpr ChebPiece kChebPieces[] = {
    {0, 1, 0, 16},
    {1, 2, 16, 15},
    {2, 3, 31, 13},
    {3, 4, 44, 12},
    {4, 6, 56, 15},
    {6, 8, 71, 13},
    {8, 10, 84, 12},
    {10, 12, 96, 11},
    {12, 14, 107, 11},
    {14, 16, 118, 10},
    {16, 20, 128, 12},
    {20, 24, 140, 11},
    {24, 28, 151, 10},
    {28, 32, 161, 10},
    {32, 40, 171, 12},
    {40, 48, 183, 11},
    {48, 56, 194, 10},
    {56, 64, 204, 10},
};

constexpr double kChebLimit = 64.0;

// Piece covering [k, k + 1) for integer k < 64.
constexpr std::array<unsigned char, 64> make_piece_index()
{
    std::array<unsigned char, 64> idx{};
    for (int k = 0; k < 64; ++k)
        for (unsigned char p = 0; p < std::size(kChebPieces); ++p)
            if (kChebPieces[p].lo <= k && k < kChebPieces[p].hi)
                idx[static_cast<std::size_t>(k)] = p;
    return idx;
}

constexpr std::array<unsigned char, 64> kPieceIndex = make_piece_index();

constexpr int kChebTerms = 16;

struct MonomialPiece {
    double center;
    double inv_half_width;
    std::array<double, kChebTerms> a;  // sum_k a[k] u^k, u in [-1, 1]
};

// Each Chebyshev piece re-expanded in powers of u. The coefficients decay fast
// enough that the monomial form loses nothing measurable, and it can be
// evaluated with a shallow dependency chain.
constexpr auto make_monomial_pieces()
{
    // t[j][k]: coefficient of u^k in T_j(u).
    std::array<std::array<double, kChebTerms>, kChebTerms> t{};
    t[0][0] = 1.0;
    t[1][1] = 1.0;
    for (std::size_t j = 2; j < kChebTerms; ++j)
        for (std::size_t k = 0; k < kChebTerms; ++k)
            t[j][k] = (k > 0 ? 2.0 * t[j - 1][k - 1] : 0.0) - t[j - 2][k];

    std::array<MonomialPiece, std::size(kChebPieces)> out{};
    for (std::size_t p = 0; p < std::size(kChebPieces); ++p) {
        const ChebPiece& c = kChebPieces[p];
        out[p].center = 0.5 * (c.lo + c.hi);
        out[p].inv_half_width = 2.0 / (c.hi - c.lo);
        for (int j = 0; j < c.count; ++j)
            for (std::size_t k = 0; k < kChebTerms; ++k)
                out[p].a[k] += kChebCoeffs[c.offset + j] * t[static_cast<std::size_t>(j)][k];
    }
    return out;
}

constexpr auto kMonomialPieces = make_monomial_pieces();

double chebyshev_ratio(double x)
{
    const MonomialPiece& p = kMonomialPieces[kPieceIndex[static_cast<std::size_t>(x)]];
    const double u = (x - p.center) * p.inv_half_width;
    const auto& a = p.a;
    // Estrin's scheme.
    const double u2 = u * u;
    const double u4 = u2 * u2;
    const double u8 = u4 * u4;
    const double q0 = (a[0] + a[1] * u) + (a[2] + a[3] * u) * u2;
    const double q1 = (a[4] + a[5] * u) + (a[6] + a[7] * u) * u2;
    const double q2 = (a[8] + a[9] * u) + (a[10] + a[11] * u) * u2;
    const double q3 = (a[12] + a[13] * u) + (a[14] + a[15] * u) * u2;
    return (q0 + q1 * u4) + (q2 + q3 * u4) * u8;
}

// Asymptotic series of the ratio itself, sum_k c_k x^-k; the omitted terms and
// the exponentially small corrections are below 1e-17 for x >= 64.
double asymptotic_ratio(double x)
{
    static constexpr double c[] = {1.0,
                                   -0.5,
                                   -0.125,
                                   -0.125,
                                   -0.1953125,
                                   -0.40625,
                                   -1.0478515625,
                                   -3.21875,
                                   -11.466461181640625,
                                   -46.478515625,
                                   -211.27614974975586,
                                   -1064.67822265625,
                                   -5892.0457146167755};
    const double t = 1.0 / x;
    double acc = 0.0;
    for (int k = static_cast<int>(std::size(c)) - 1; k >= 0; --k)
        acc = acc * t + c[k];
    return acc;
}

}  // namespace

double bessel_ratio(double x)
{
    if (!std::isfinite(x) || x < 0.0)
        throw DomainError("bessel_ratio: argument must be finite and nonnegative");
    if (x == 0.0)
        return 0.0;
    if (x < 0.0625) {
        // Taylor series keeps full relative accuracy near zero.
        const double x2 = x * x;
        return x * (0.5 + x2 * (-0.0625 + x2 * (1.0 / 96.0 + x2 * (-11.0 / 6144.0 + x2 * (19.0 / 61440.0)))));
    }
    const double ratio = x < kChebLimit ? chebyshev_ratio(x) : asymptotic_ratio(x);
    // Keep the documented [0, 1) range once the ratio rounds to one.
    constexpr double kBelowOne = 1.0 - 0x1p-53;
    return std::min(ratio, kBelowOne);
}

ComplexMatrix RankOneFactors::reconstruct() const
{
    return scale * left * right.transpose();
}

RankOneFactors rank_one_approx(const ComplexMatrix& m, const PowerIterationOptions& opts)
{
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    if (rows < 1 || cols < 1)
        throw DomainError("rank_one_approx: empty matrix");

    RankOneFactors out;
    out.left = ComplexVector::Unit(rows, 0);
    out.right = ComplexVector::Unit(cols, 0);
    if (m.cwiseAbs2().sum() == 0.0)
        return out;

    ComplexVector v = ComplexVector::Constant(cols, cplx(1e-3, 0.0));
    v(0) += 1.0;
    v.normalize();
    if ((m * v).squaredNorm() == 0.0) {
        Eigen::Index best = 0;
        m.colwise().squaredNorm().maxCoeff(&best);
        v = ComplexVector::Unit(cols, best);
    }

    double lambda_prev = 0.0;
    out.converged = false;
    ComplexVector w(rows);
    ComplexVector x(cols);
    for (int it = 1; it <= opts.max_iters; ++it) {
        w.noalias() = m * v;
        const double lambda = w.squaredNorm();
        x.noalias() = m.adjoint() * w;
        const double nx = x.norm();
        out.iterations = it;
        if (nx == 0.0) {
            out.converged = true;
            break;
        }
        v = x / nx;
        if (std::abs(lambda - lambda_prev) <= opts.tol * lambda) {
            out.converged = true;
            break;
        }
        lambda_prev = lambda;
    }
    if (!out.converged) {
        // Nearly repeated top singular value: finish with a dense eigensolve of the Gram matrix.
        const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m.adjoint() * m);
        if (eig.info() == Eigen::Success)
            v = eig.eigenvectors().col(cols - 1);
    }

    w.noalias() = m * v;
    out.scale = w.norm();
    if (out.scale == 0.0)
        return out;
    ComplexVector u = w / out.scale;

    Eigen::Index peak = 0;
    u.cwiseAbs2().maxCoeff(&peak);
    const cplx phase = u(peak) / std::abs(u(peak));
    u *= std::conj(phase);
    v *= std::conj(phase);
    u(peak) = cplx(std::abs(u(peak)), 0.0);

    out.left = std::move(u);
    out.right = v.conjugate();
    return out;
}

ComplexVector dft_column(int m, int k)
{
    if (m < 1 || k < 0 || k >= m)
        throw DomainError("dft_column: index out of range");
    ComplexVector col(m);
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    for (int i = 0; i < m; ++i) {
        // Reduce i*k mod m first so the angle stays exact for large products.
        const long long r = (static_cast<long long>(i) * k) % m;
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(r) / m;
        col(i) = std::polar(norm, angle);
    }
    return col;
}

cplx complex_normal(Rng& rng, double variance)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * variance));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

namespace {

bool is_diagonal(const ComplexMatrix& c)
{
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            if (i != j && c(i, j) != cplx(0.0, 0.0))
                return false;
    return true;
}

void check_descriptor(const ComplexMatrix& c, int n, const char* what)
{
    if (c.rows() != n || c.cols() != n)
        throw DomainError(std::string("sample_matrix_gaussian: ") + what + " has wrong shape");
    if (!c.allFinite())
        throw DomainError(std::string("sample_matrix_gaussian: ") + what + " is not finite");
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DomainError(std::string("sample_matrix_gaussian: ") + what + " is not Hermitian");
}

}  // namespace

ComplexMatrix psd_factor(const ComplexMatrix& c)
{
    const Eigen::Index n = c.rows();
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if (is_diagonal(c)) {
        ComplexMatrix l = ComplexMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = c(i, i).real();
            if (d < -1e-10 * scale || std::abs(c(i, i).imag()) > 1e-10 * scale)
                throw DomainError("covariance descriptor is not positive semidefinite");
            l(i, i) = std::sqrt(std::max(d, 0.0));
        }
        return l;
    }
    const ComplexMatrix herm = 0.5 * (c + c.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(herm);
    if (eig.info() != Eigen::Success)
        throw NumericalError("covariance eigendecomposition failed");
    const RealVector& lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-10 * std::max(scale, lambda.cwiseAbs().maxCoeff()))
        throw DomainError("covariance descriptor is not positive semidefinite");
    const RealVector root = lambda.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.cast<cplx>().asDiagonal();
}

ComplexMatrix sample_matrix_gaussian(int rows, int cols, const ComplexMatrix& row_cov,
                                     const ComplexMatrix& col_cov, Rng& rng)
{
    if (rows < 1 || cols < 1)
        throw DomainError("sample_matrix_gaussian: empty shape");
    check_descriptor(row_cov, rows, "row covariance");
    check_descriptor(col_cov, cols, "column covariance");
    const ComplexMatrix lr = psd_factor(row_cov);
    const ComplexMatrix lc = psd_factor(col_cov);

    ComplexMatrix white(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            white(i, j) = complex_normal(rng, 1.0);
    return lr * white * lc.transpose();
}

ComplexVector vec(const ComplexMatrix& m)
{
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols)
{
    if (v.size() != rows * cols)
        throw DomainError("unvec: size mismatch");
    return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b)
{
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_stream_rng(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b)
{
    std::uint64_t s = splitmix64(master_seed);
    s = splitmix64(s ^ splitmix64(a + 0x632be59bd9b4e019ULL));
    s = splitmix64(s ^ splitmix64(b + 0x85157af5c6a1ad63ULL));
    const std::uint64_t t = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    return Rng(seq);
}

}  // namespace reccal
