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


#include "reccal/calib_mmse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reccal {

void MmseConfig::validate() const
{
    if (n_iter < 1)
        throw DomainError("mmse: n_iter must be >= 1");
    if (!(damping > 0.0) || damping > 1.0)
        throw DomainError("mmse: damping must lie in (0, 1]");
    if (phi_gamma.mode == PhiGammaMode::known && !(phi_gamma.value > 0.0 && std::isfinite(phi_gamma.value)))
        throw DomainError("mmse: known phi_gamma must be positive");
}

namespace {

// Per-problem data shared by every A/B pass: noise diagonals, |H|^2 and the
// two layouts of H and R3 that keep the inner loops contiguous.
struct Workspace {
    RealVector oa, pa, ob, pb;
    ComplexMatrix h, ht;    // H (M_B x M_A) and H^T
    ComplexMatrix r3t, r3;  // R3^T (M_B x M_A) and R3
    Eigen::MatrixXd h2, h2t;
    // conj(h) .* r split into real and imaginary parts, per side.
    Eigen::MatrixXd g_re, g_im, gt_re, gt_im;

    Workspace(const PreprocessedSet& pre, const ComplexMatrix& h_hat, const NoiseStatistics& noise)
        : oa(noise.omega_a.diagonal().real()),
          pa(noise.psi_a.diagonal().real()),
          ob(noise.omega_b.diagonal().real()),
          pb(noise.psi_b.diagonal().real()),
          h(h_hat),
          ht(h_hat.transpose()),
          r3t(pre.r3.transpose()),
          r3(pre.r3),
          h2(h_hat.cwiseAbs2()),
          h2t(h2.transpose())
    {
        const int ma = pre.m_a();
        const int mb = pre.m_b();
        if (noise.omega_a.rows() != ma || noise.psi_a.rows() != mb || noise.omega_b.rows() != mb ||
            noise.psi_b.rows() != ma)
            throw DomainError("mmse: noise statistics do not match the problem shape");
        if (h_hat.rows() != mb || h_hat.cols() != ma)
            throw DomainError("mmse: H estimate has the wrong shape");
        const ComplexMatrix g = h.conjugate().cwiseProduct(r3t);
        g_re = g.real();
        g_im = g.imag();
        gt_re = g_re.transpose();
        gt_im = g_im.transpose();
    }
};

// One side of the bilinear update in a common form. Coefficient k is observed
// through column k of `h` (length m) scaled by the other side's estimate `o`:
//
//   V_k = d1(k) E1 + d2(k) diag(o) F diag(o)^H + diag_l((h2(l,k) + d2(k) f(l)) vo(l))
//
// with f = diag(F). For A: (d1, E1, d2, F) = (Omega_A, Psi_A, Psi_B, Omega_B);
// for B: (Psi_A, Omega_A, Omega_B, Psi_B).
struct SideView {
    const ComplexMatrix& h;
    const Eigen::MatrixXd& h2;
    const ComplexMatrix& r;
    const Eigen::MatrixXd& g_re;
    const Eigen::MatrixXd& g_im;
    const RealVector& d1;
    const RealVector& e1;
    const RealVector& d2;
    const RealVector& f;
    const ComplexMatrix& e1_full;
    const ComplexMatrix& f_full;
};

struct SideScratch {
    RealVector e2;
    RealVector o_re;
    RealVector o_im;
    RealVector o_abs2;
    RealVector psi;
    ComplexVector num;
};

struct SideOutput {
    ComplexVector& estimate;
    RealVector& mse;
    std::vector<PseudoObservation>* pseudo;
    int uninformative = 0;
};

// Unit-circle denoising of the completed-square observation, written in terms
// of num = c^H V^-1 r and psi = c^H V^-1 c: zeta = 2 (num / psi) * psi = 2 num.
inline void finish_coefficient(Eigen::Index k, cplx num, double psi, bool ok, const ComplexVector& prev,
                        const RealVector* v_prev, double damping, SideOutput& out)
{
    ok = ok && psi > 0.0 && std::isfinite(psi) && std::isfinite(num.real()) && std::isfinite(num.imag());
    if (!ok) {
        const cplx keep = prev(k);
        out.estimate(k) = keep;
        out.mse(k) = 1.0;
        if (out.pseudo != nullptr)
            (*out.pseudo)[static_cast<std::size_t>(k)] = {keep, std::numeric_limits<double>::infinity()};
        ++out.uninformative;
        return;
    }
    if (out.pseudo != nullptr)
        (*out.pseudo)[static_cast<std::size_t>(k)] = {num / psi, 1.0 / psi};
    const double mag = 2.0 * std::sqrt(std::norm(num));
    cplx est(0.0, 0.0);
    double mse = 1.0;
    if (mag > 0.0) {
        const double rho = bessel_ratio(mag);
        est = (2.0 * rho / mag) * num;
        mse = (1.0 - rho) * (1.0 + rho);
    }
    if (damping < 1.0) {
        const double prev_mse = v_prev != nullptr ? (*v_prev)(k) : 1.0;
        est = damping * est + (1.0 - damping) * prev(k);
        mse = damping * mse + (1.0 - damping) * prev_mse;
    }
    out.estimate(k) = est;
    out.mse(k) = mse;
}

void side_update_diagonal(const SideView& s, const ComplexVector& o, const RealVector& vo,
                          const ComplexVector& prev, const RealVector* v_prev, double damping, SideScratch& scratch,
                          SideOutput& out)
{
    const Eigen::Index n = s.h.cols();
    const Eigen::Index m = s.h.rows();
    // Everything in V_k that does not depend on h2: d2(k) f(l) (|o(l)|^2 + vo(l)).
    scratch.e2.resize(m);
    scratch.o_re.resize(m);
    scratch.o_im.resize(m);
    scratch.o_abs2.resize(m);
    scratch.num.resize(n);
    scratch.psi.resize(n);
    for (Eigen::Index l = 0; l < m; ++l) {
        scratch.o_re(l) = o(l).real();
        scratch.o_im(l) = o(l).imag();
        scratch.o_abs2(l) = std::norm(o(l));
        scratch.e2(l) = s.f(l) * (scratch.o_abs2(l) + vo(l));
    }
    const double* e1 = s.e1.data();
    const double* e2 = scratch.e2.data();
    const double* vop = vo.data();
    const double* ore = scratch.o_re.data();
    const double* oim = scratch.o_im.data();
    const double* oa2 = scratch.o_abs2.data();
    // All sufficient statistics first, so the denoising pass below has no
    // dependency between coefficients. With c = o .* h(:,k):
    //   num = sum_l conj(o(l)) g(l,k) / var(l),  psi = sum_l |o(l)|^2 h2(l,k) / var(l)
    for (Eigen::Index k = 0; k < n; ++k) {
        const double* gr = s.g_re.col(k).data();
        const double* gi = s.g_im.col(k).data();
        const double* h2k = s.h2.col(k).data();
        const double d1 = s.d1(k);
        const double d2 = s.d2(k);
        double num_re = 0.0;
        double num_im = 0.0;
        double psi = 0.0;
        double min_var = std::numeric_limits<double>::infinity();
#pragma omp simd reduction(+ : num_re, num_im, psi) reduction(min : min_var)
        for (Eigen::Index l = 0; l < m; ++l) {
            const double var = d1 * e1[l] + d2 * e2[l] + h2k[l] * vop[l];
            min_var = std::min(min_var, var);
            const double w = 1.0 / var;
            num_re += w * (ore[l] * gr[l] + oim[l] * gi[l]);
            num_im += w * (ore[l] * gi[l] - oim[l] * gr[l]);
            psi += w * oa2[l] * h2k[l];
        }
        scratch.num(k) = cplx(num_re, num_im);
        scratch.psi(k) = min_var > 0.0 ? psi : 0.0;
    }
    for (Eigen::Index k = 0; k < n; ++k)
        finish_coefficient(k, scratch.num(k), scratch.psi(k), true, prev, v_prev, damping, out);
}

void side_update_full(const SideView& s, const ComplexVector& o, const RealVector& vo, const ComplexVector& prev,
                      const RealVector* v_prev, double damping, SideOutput& out)
{
    const Eigen::Index n = s.h.cols();
    const Eigen::Index m = s.h.rows();
    const ComplexMatrix common = o.asDiagonal() * s.f_full * o.conjugate().asDiagonal();
    ComplexMatrix v(m, m);
    ComplexVector c(m);
    Eigen::LLT<ComplexMatrix> llt(m);
    for (Eigen::Index k = 0; k < n; ++k) {
        v = s.d1(k) * s.e1_full + s.d2(k) * common;
        for (Eigen::Index l = 0; l < m; ++l) {
            v(l, l) += (s.h2(l, k) + s.d2(k) * s.f(l)) * vo(l);
            c(l) = o(l) * s.h(l, k);
        }
        llt.compute(v);
        if (llt.info() != Eigen::Success) {
            finish_coefficient(k, cplx(0.0, 0.0), 0.0, false, prev, v_prev, damping, out);
            continue;
        }
        const ComplexVector x = llt.solve(c);
        finish_coefficient(k, x.dot(s.r.col(k)), c.dot(x).real(), true, prev, v_prev, damping, out);
    }
}

SideView a_side(const Workspace& w, const NoiseStatistics& noise)
{
    return {w.h, w.h2, w.r3t, w.g_re, w.g_im, w.oa, w.pa, w.pb, w.ob, noise.psi_a, noise.omega_b};
}

SideView b_side(const Workspace& w, const NoiseStatistics& noise)
{
    return {w.ht, w.h2t, w.r3, w.gt_re, w.gt_im, w.pa, w.oa, w.ob, w.pb, noise.omega_a, noise.psi_b};
}

void side_update(const SideView& s, CovMode mode, const ComplexVector& o, const RealVector& vo,
                 const ComplexVector& prev, const RealVector* v_prev, double damping, SideScratch& scratch,
                 SideOutput& out)
{
    if (o.size() != s.h.rows() || vo.size() != s.h.rows() || prev.size() != s.h.cols())
        throw DomainError("mmse: estimate vectors have the wrong size");
    if (mode == CovMode::diagonal)
        side_update_diagonal(s, o, vo, prev, v_prev, damping, scratch, out);
    else
        side_update_full(s, o, vo, prev, v_prev, damping, out);
}

CoefficientUpdate public_update(const SideView& s, CovMode mode, const ComplexVector& o, const RealVector& vo,
                                const ComplexVector& prev, const RealVector* v_prev, double damping)
{
    const Eigen::Index n = s.h.cols();
    CoefficientUpdate res;
    res.estimate.resize(n);
    res.mse.resize(n);
    res.pseudo.resize(static_cast<std::size_t>(n));
    SideOutput out{res.estimate, res.mse, &res.pseudo};
    SideScratch scratch;
    side_update(s, mode, o, vo, prev, v_prev, damping, scratch, out);
    res.uninformative = out.uninformative;
    return res;
}

}  // namespace

CoefficientUpdate update_a(const PreprocessedSet& pre, const ComplexMatrix& h_hat, const NoiseStatistics& noise,
                           const ComplexVector& b_hat, const RealVector& v_b, CovMode mode,
                           const ComplexVector& a_prev, double damping, const RealVector* v_a_prev)
{
    const Workspace w(pre, h_hat, noise);
    return public_update(a_side(w, noise), mode, b_hat, v_b, a_prev, v_a_prev, damping);
}

CoefficientUpdate update_b(const PreprocessedSet& pre, const ComplexMatrix& h_hat, const NoiseStatistics& noise,
                           const ComplexVector& a_hat, const RealVector& v_a, CovMode mode,
                           const ComplexVector& b_prev, double damping, const RealVector* v_b_prev)
{
    const Workspace w(pre, h_hat, noise);
    return public_update(b_side(w, noise), mode, a_hat, v_a, b_prev, v_b_prev, damping);
}

ComplexVector gamma_regressor(const ComplexMatrix& z_hat, const ComplexVector& a, const ComplexVector& b)
{
    const Eigen::Index ma = a.size();
    const Eigen::Index mb = b.size();
    ComplexVector d(ma * mb);
    for (Eigen::Index j = 0; j < mb; ++j)
        for (Eigen::Index i = 0; i < ma; ++i)
            d(i + j * ma) = a(i) * z_hat(j, i) * b(j);
    return d;
}

RealVector gamma_error_variances(const ComplexMatrix& z_hat, const ComplexVector& a, const RealVector& v_a,
                                 const ComplexVector& b, const RealVector& v_b, double phi)
{
    const Eigen::Index ma = a.size();
    const Eigen::Index mb = b.size();
    RealVector vd(ma * mb);
    for (Eigen::Index j = 0; j < mb; ++j)
        for (Eigen::Index i = 0; i < ma; ++i)
            vd(i + j * ma) = phi * std::norm(z_hat(j, i)) *
                             (v_a(i) * std::norm(b(j)) + std::norm(a(i)) * v_b(j) + v_a(i) * v_b(j));
    return vd;
}

namespace {

// Applies (Psi_A (x) Omega_A)^-1 to a vectorised M_A x M_B matrix.
class NoiseWhitener {
public:
    NoiseWhitener(const NoiseStatistics& noise, CovMode mode)
        : mode_(mode), ma_(noise.m_a()), mb_(noise.psi_a.rows())
    {
        if (mode == CovMode::diagonal) {
            diag_.resize(ma_ * mb_);
            for (Eigen::Index j = 0; j < mb_; ++j)
                for (Eigen::Index i = 0; i < ma_; ++i)
                    diag_(i + j * ma_) = noise.omega_a(i, i).real() * noise.psi_a(j, j).real();
            if (!(diag_.minCoeff() > 0.0))
                throw DomainError("mmse: noise covariance Sigma_A is not positive definite");
        } else {
            omega_.compute(noise.omega_a);
            psi_.compute(noise.psi_a);
            if (omega_.info() != Eigen::Success || psi_.info() != Eigen::Success)
                throw DomainError("mmse: noise covariance Sigma_A is not positive definite");
        }
    }

    ComplexVector apply_inverse(const ComplexVector& x) const
    {
        if (mode_ == CovMode::diagonal)
            return x.cwiseQuotient(diag_.cast<cplx>());
        // (Psi (x) Omega)^-1 vec(X) = vec(Omega^-1 X Psi^-T)
        const ComplexMatrix y = omega_.solve(unvec(x, ma_, mb_));
        const ComplexMatrix z = psi_.solve(ComplexMatrix(y.transpose())).transpose();
        return vec(z);
    }

    const RealVector& diagonal() const { return diag_; }

private:
    CovMode mode_;
    Eigen::Index ma_;
    Eigen::Index mb_;
    RealVector diag_;
    Eigen::LLT<ComplexMatrix> omega_;
    Eigen::LLT<ComplexMatrix> psi_;
};

MomStatistics mom_with(const NoiseWhitener& w, const ComplexMatrix& r4, const ComplexVector& d_hat,
                       const RealVector& v_gamma_diag)
{
    if (d_hat.squaredNorm() == 0.0)
        throw DomainError("mom_gamma_magnitude: regressor A Z^T B is zero");
    const ComplexVector sd = w.apply_inverse(d_hat);
    const ComplexVector r = vec(r4);
    MomStatistics m;
    m.q = sd.dot(r);
    m.u = d_hat.dot(sd).real();
    m.s = (v_gamma_diag.array() * sd.cwiseAbs2().array()).sum();
    return m;
}

double mom_magnitude(const MomStatistics& m)
{
    return std::max(0.0, (std::norm(m.q) - m.u) / (m.u * m.u + m.s));
}

}  // namespace

MomStatistics mom_statistics(const ComplexMatrix& r4, const ComplexVector& d_hat, const NoiseStatistics& noise,
                             const RealVector& v_gamma_diag, CovMode mode)
{
    return mom_with(NoiseWhitener(noise, mode), r4, d_hat, v_gamma_diag);
}

double mom_gamma_magnitude(const ComplexMatrix& r4, const ComplexVector& d_hat, const NoiseStatistics& noise,
                           const RealVector& v_gamma_diag, CovMode mode)
{
    return mom_magnitude(mom_statistics(r4, d_hat, noise, v_gamma_diag, mode));
}

GammaEstimate estimate_gamma(const PreprocessedSet& pre, const ComplexMatrix& z_hat, const ComplexVector& a_hat,
                             const RealVector& v_a, const ComplexVector& b_hat, const RealVector& v_b,
                             const NoiseStatistics& noise, const MmseConfig& cfg)
{
    if (noise.omega_a.rows() != pre.m_a() || noise.psi_a.rows() != pre.m_b())
        throw DomainError("mmse: noise statistics do not match the problem shape");
    const ComplexVector d = gamma_regressor(z_hat, a_hat, b_hat);
    const NoiseWhitener whitener(noise, cfg.cov_mode);

    GammaEstimate g;
    double phi = 1.0;
    switch (cfg.phi_gamma.mode) {
    case PhiGammaMode::unity:
        phi = 1.0;
        g.radius = 1.0;
        break;
    case PhiGammaMode::known:
        phi = cfg.phi_gamma.value;
        g.radius = std::sqrt(phi);
        break;
    case PhiGammaMode::mom: {
        const RealVector vd1 = gamma_error_variances(z_hat, a_hat, v_a, b_hat, v_b, 1.0);
        phi = mom_magnitude(mom_with(whitener, pre.r4, d, vd1));
        g.radius = std::sqrt(phi);
        break;
    }
    }
    if (!(g.radius > 0.0)) {
        g.gamma = cplx(0.0, 0.0);
        g.mse = 0.0;
        g.degenerate = true;
        return g;
    }

    const RealVector vd = gamma_error_variances(z_hat, a_hat, v_a, b_hat, v_b, phi);
    const ComplexVector r = vec(pre.r4);
    double psi = 0.0;
    cplx weighted(0.0, 0.0);
    if (cfg.cov_mode == CovMode::diagonal) {
        const RealVector& sd = whitener.diagonal();
        for (Eigen::Index k = 0; k < d.size(); ++k) {
            const double w = 1.0 / (sd(k) + vd(k));
            psi += w * std::norm(d(k));
            weighted += w * std::conj(d(k)) * r(k);
        }
    } else {
        ComplexMatrix v = kron(noise.psi_a, noise.omega_a);
        v.diagonal() += vd.cast<cplx>();
        Eigen::LLT<ComplexMatrix> llt(v);
        if (llt.info() != Eigen::Success)
            throw NumericalError("estimate_gamma: V_gamma is not positive definite");
        const ComplexVector x = llt.solve(d);
        psi = d.dot(x).real();
        weighted = x.dot(r);
    }
    if (!(psi > 0.0) || !std::isfinite(psi))
        throw NumericalError("estimate_gamma: pseudo-observation precision is not positive");

    g.pseudo = {weighted / psi, 1.0 / psi};
    const DenoiseResult dn = von_mises_denoise(g.pseudo.mean, g.pseudo.variance, CirclePrior{g.radius, 0.0, 0.0});
    g.gamma = dn.estimate;
    g.mse = dn.posterior_mse;
    return g;
}

CalibrationEstimate mmse_calibrate(const PreprocessedSet& pre, const MmseConfig& cfg)
{
    cfg.validate();
    const int ma = pre.m_a();
    const int mb = pre.m_b();
    const NoiseStatistics& noise = pre.noise;

    CalibrationEstimate est;
    est.h_hat = pre.r1;
    const RankOneFactors zf = rank_one_approx(pre.r2, cfg.power);
    est.z_hat = zf.reconstruct();
    est.diagnostics.rank_one_unconverged = !zf.converged;

    est.a_hat = ComplexVector::Ones(ma);
    est.b_hat = ComplexVector::Ones(mb);
    RealVector v_a = RealVector::Ones(ma);
    RealVector v_b = RealVector::Ones(mb);
    if (cfg.record_trace)
        est.trace.reserve(cfg.n_iter);

    const Workspace w(pre, est.h_hat, noise);
    const SideView a_view = a_side(w, noise);
    const SideView b_view = b_side(w, noise);
    // One scratch per side so the buffers keep their size between passes.
    SideScratch a_scratch;
    SideScratch b_scratch;
    // Updates are in place: coefficient k only reads prev(k) before writing it.
    SideOutput a_out{est.a_hat, v_a, nullptr};
    SideOutput b_out{est.b_hat, v_b, nullptr};
    const bool damped = cfg.damping < 1.0;
    RealVector v_prev;
    for (int it = 1; it <= cfg.n_iter; ++it) {
        if (damped)
            v_prev = v_a;
        side_update(a_view, cfg.cov_mode, est.b_hat, v_b, est.a_hat, damped ? &v_prev : nullptr, cfg.damping,
                    a_scratch, a_out);
        if (damped)
            v_prev = v_b;
        side_update(b_view, cfg.cov_mode, est.a_hat, v_a, est.b_hat, damped ? &v_prev : nullptr, cfg.damping,
                    b_scratch, b_out);

        if (cfg.record_trace) {
            const GammaEstimate g = estimate_gamma(pre, est.z_hat, est.a_hat, v_a, est.b_hat, v_b, noise, cfg);
            est.trace.push_back({it, g.gamma, std::nullopt});
        }
    }
    est.diagnostics.uninformative = a_out.uninformative + b_out.uninformative;

    const GammaEstimate g = estimate_gamma(pre, est.z_hat, est.a_hat, v_a, est.b_hat, v_b, noise, cfg);
    est.gamma_hat = g.gamma;
    est.mse_a = v_a;
    est.mse_b = v_b;
    est.mse_gamma = g.mse;
    est.diagnostics.degenerate_prior = g.degenerate;
    return est;
}

}  // namespace reccal
