#pragma once

#include "nlwave/fermi.hpp"
#include "nlwave/riccati.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace nlwave {

/// Smooth cutoff: 1 for |t| <= 1/4, 0 for |t| >= 1/2, built from exp(-1/t).
inline double cutoff_chi(double t) {
    auto psi = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double u = 4.0 * (std::abs(t) - 0.25);  // 0 at |t| = 1/4, 1 at |t| = 1/2
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    const double a = psi(u), b = psi(1.0 - u);
    return b / (a + b);
}

/// det(Y)^(-1/2) continued along tau from the principal branch at tau0.
class SqrtDetBranch {
public:
    SqrtDetBranch() = default;
    explicit SqrtDetBranch(std::shared_ptr<const RiccatiEvolution> ric) : ric_(std::move(ric)) {
        const auto& S = ric_->samples();
        phase_.resize(S.size());
        const std::size_t i0 = ric_->nearest_index(ric_->tau0());
        phase_[i0] = std::arg(S[i0].Y.determinant());
        auto unwrap = [&](std::size_t from, std::size_t to) {
            const double a = std::arg(S[to].Y.determinant());
            phase_[to] = nearest_lift(a, phase_[from]);
            if (std::abs(phase_[to] - phase_[from]) > 0.5 * std::numbers::pi)
                throw ConvergenceError("det Y phase jumps between Riccati samples; refine the step size");
        };
        for (std::size_t i = i0 + 1; i < S.size(); ++i) unwrap(i - 1, i);
        for (std::size_t i = i0; i-- > 0;) unwrap(i + 1, i);
    }

    /// Continuous arg det Y(tau).
    double phase(double tau) const {
        const cplx d = ric_->det_Y_at(tau);
        return nearest_lift(std::arg(d), phase_[ric_->nearest_index(tau)]);
    }

    cplx inv_sqrt_det(double tau) const {
        const cplx d = ric_->det_Y_at(tau);
        if (std::abs(d) < 1e-300) throw ConvergenceError("det Y vanishes along the beam");
        const double th = nearest_lift(std::arg(d), phase_[ric_->nearest_index(tau)]);
        return std::polar(std::pow(std::abs(d), -0.5), -0.5 * th);
    }

private:
    static double nearest_lift(double a, double ref) {
        const double two_pi = 2.0 * std::numbers::pi;
        return a + two_pi * std::round((ref - a) / two_pi);
    }

    std::shared_ptr<const RiccatiEvolution> ric_;
    std::vector<double> phase_;
};

/// Leading amplitude k det(Y)^(-1/2) c^(-1/2) rho^(-1/2) along the axis.
class ModalAmplitude {
public:
    ModalAmplitude() = default;
    ModalAmplitude(std::shared_ptr<const GeodesicPath> path, std::shared_ptr<const RiccatiEvolution> ric, cplx k)
        : path_(std::move(path)), ric_(ric), branch_(std::move(ric)), k_(k) {}

    cplx operator()(double tau) const {
        const Vec3 x = path_->at(tau / std::numbers::sqrt2).x;
        const double c = path_->medium().wavespeed(x, path_->mode());
        const double rho = path_->medium().rho().value(x);
        return k_ * branch_.inv_sqrt_det(tau) / std::sqrt(c * rho);
    }

    cplx constant() const { return k_; }
    const SqrtDetBranch& branch() const { return branch_; }

private:
    std::shared_ptr<const GeodesicPath> path_;
    std::shared_ptr<const RiccatiEvolution> ric_;
    SqrtDetBranch branch_;
    cplx k_ = 1.0;
};

struct SAmplitude {
    ModalAmplitude a02;
    ModalAmplitude a03;
};

inline SAmplitude s_amplitude(std::shared_ptr<const GeodesicPath> path, std::shared_ptr<const RiccatiEvolution> ric,
                              cplx c2, cplx c3) {
    if (path->mode() != WaveMode::S) throw std::invalid_argument("s_amplitude: path is not an S ray");
    return {ModalAmplitude(path, ric, c2), ModalAmplitude(path, ric, c3)};
}

inline ModalAmplitude p_amplitude(std::shared_ptr<const GeodesicPath> path, std::shared_ptr<const RiccatiEvolution> ric,
                                  cplx c) {
    if (path->mode() != WaveMode::P) throw std::invalid_argument("p_amplitude: path is not a P ray");
    return ModalAmplitude(std::move(path), std::move(ric), c);
}

struct BeamOptions {
    CMat3 Y0 = CMat3::Identity();
    CMat3 H0 = cplx(0.0, 1.0) * CMat3::Identity();
    cplx c2 = 1.0;  // S amplitude constants along e2, e3
    cplx c3 = 0.0;
    cplx cP = 1.0;  // P amplitude constant
    double t0 = 0.0;
    double delta = 0.0;  // tube radius, 0 picks the default
    std::optional<std::pair<Vec3, Vec3>> e_init;
    TraceOptions trace;
    RiccatiOptions riccati;
};

/// Leading-order Gaussian beam u = chi(|z'|/delta) a0 exp(i varrho (r + z'^T H(tau) z')).
/// On the axis the Cartesian amplitude is (a02 e2 + a03 e3) / c^2 for S and
/// A_P v / c^2 for P, with e2, e3, v the transported frame of Euclidean length c.
class GaussianBeam {
public:
    static GaussianBeam build(const IsotropicMedium& m, WaveMode mode, const Vec3& x0, const Vec3& dir0,
                              const ConvexDomain& dom, const BeamOptions& opt = {}) {
        GaussianBeam b;
        b.mode_ = mode;
        GeodesicPath g = trace_geodesic(m, mode, x0, dir0, dom, opt.t0, opt.trace);
        ParallelFrame f = parallel_transport(g, opt.e_init);
        b.path_ = std::make_shared<const GeodesicPath>(g);
        const double a = std::numbers::sqrt2 * g.s_min(), c = std::numbers::sqrt2 * g.s_max();
        b.ric_ = std::make_shared<const RiccatiEvolution>(
            evolve_yz(build_D_along_ray(f), opt.Y0, opt.H0, a, c, 0.0, opt.riccati));
        b.chart_ = std::make_shared<const FermiChart>(std::move(g), std::move(f), opt.delta);
        if (mode == WaveMode::S) {
            b.amp_ = {ModalAmplitude(b.path_, b.ric_, opt.c2), ModalAmplitude(b.path_, b.ric_, opt.c3)};
        } else {
            b.amp_ = {ModalAmplitude(b.path_, b.ric_, opt.cP), ModalAmplitude()};
        }
        return b;
    }

    WaveMode mode() const { return mode_; }
    const FermiChart& chart() const { return *chart_; }
    const GeodesicPath& path() const { return *path_; }
    const RiccatiEvolution& riccati() const { return *ric_; }
    const ModalAmplitude& amplitude(int k = 0) const { return k == 0 ? amp_.a02 : amp_.a03; }
    double tau_min() const { return ric_->tau_min(); }
    double tau_max() const { return ric_->tau_max(); }

    /// Cartesian leading amplitude on the axis.
    CVec3 axis_amplitude(double tau) const {
        const FrameState f = chart_->frame().at(tau / std::numbers::sqrt2);
        const double c = path_->medium().wavespeed(f.x, mode_);
        if (mode_ == WaveMode::S) return (amp_.a02(tau) * f.e2.cast<cplx>() + amp_.a03(tau) * f.e3.cast<cplx>()) / (c * c);
        return amp_.a02(tau) * f.tangent(c).cast<cplx>() / (c * c);
    }

    /// Local beam data at a space-time point.
    struct Local {
        bool inside = false;
        FermiPoint q;
        RotatedPoint z;
        double chi = 0.0;
        cplx phase = 0.0;
        CVec3 grad_phase = CVec3::Zero();  // spatial gradient of r + z'^T H z'
        CVec3 amplitude = CVec3::Zero();   // Cartesian a0, transverse to grad_phase
    };

    /// Off the axis the S polarization is the transported one with its
    /// component along grad phi removed (bilinear form), and the P polarization
    /// is sqrt2 A_P grad phi, so a0 . grad phi = 0 resp. a0 || grad phi hold
    /// exactly; on the axis both reduce to axis_amplitude.
    Local locate(double t, const Vec3& x) const {
        Local L;
        const FermiChart& ch = *chart_;
        const auto& S = path_->samples();
        double dmin = std::numeric_limits<double>::infinity();
        double cmax = 0.0;
        for (const auto& q : S) {
            dmin = std::min(dmin, (q.x - x).norm());
            cmax = std::max(cmax, q.v.norm());
        }
        if (dmin > 0.75 * ch.delta() * cmax + 1e-12) return L;
        try {
            L.q = ch.inverse(t, x);
        } catch (const ConvergenceError&) {
            return L;
        }
        if (L.q.s < path_->s_min() || L.q.s > path_->s_max()) return L;
        L.z = ch.rotate(L.q);
        if (L.z.tau < tau_min() || L.z.tau > tau_max()) return L;
        const Vec3 zp(L.z.r, L.z.z2, L.z.z3);
        L.chi = cutoff_chi(zp.norm() / ch.delta());
        if (L.chi == 0.0) return L;
        L.inside = true;
        const CMat3 H = ric_->H_at(L.z.tau);
        const CVec3 zc = zp.cast<cplx>();
        const CVec3 Hz = H * zc;
        L.phase = L.z.r + (zc.transpose() * Hz)(0, 0);
        const CMat3 dH = -H * riccati_C().cast<cplx>() * H - ric_->D()(L.z.tau).cast<cplx>();
        const cplx dtau = (zc.transpose() * dH * zc)(0, 0);
        const cplx dr = 1.0 + 2.0 * Hz[0];
        const CVec3 grad_sy((dtau + dr) / std::numbers::sqrt2, 2.0 * Hz[1], 2.0 * Hz[2]);
        Mat3 J;
        const double h = 1e-6;
        for (int k = 0; k < 3; ++k) {
            Vec3 a(L.q.s, L.q.y2, L.q.y3), b = a;
            a[k] += h;
            b[k] -= h;
            J.col(k) = (ch.spatial_point(a[0], a[1], a[2]) - ch.spatial_point(b[0], b[1], b[2])) / (2 * h);
        }
        L.grad_phase = J.transpose().cast<cplx>().fullPivLu().solve(grad_sy);
        const CVec3& g = L.grad_phase;
        if (mode_ == WaveMode::S) {
            const CVec3 a = axis_amplitude(L.z.tau);
            L.amplitude = a - (a.transpose() * g)(0, 0) / (g.transpose() * g)(0, 0) * g;
        } else {
            L.amplitude = std::numbers::sqrt2 * amp_.a02(L.z.tau) * g;
        }
        return L;
    }

    /// Displacement at (t, x); zero outside the tube and the traced range.
    CVec3 evaluate(double t, const Vec3& x, double varrho) const {
        const Local L = locate(t, x);
        if (!L.inside) return CVec3::Zero();
        return L.chi * L.amplitude * std::exp(cplx(0.0, varrho) * L.phase);
    }

    /// |T a| / |a| for the transport operator
    ///   T = 2 d_tau + [k^-1 d_tau k - c^-1 d_tau c + det(Y)^-1 d_tau det(Y)],
    /// k the modal stiffness, with fourth-order central differences along the axis.
    double transport_residual(double tau, double h = 1e-3) const {
        const IsotropicMedium& m = path_->medium();
        auto d = [h](auto&& f, double t) {
            return (f(t - 2 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2 * h)) / (12.0 * h);
        };
        auto stiff = [&](double tt) { return m.modal_stiffness(path_->at(tt / std::numbers::sqrt2).x, mode_); };
        auto speed = [&](double tt) { return m.wavespeed(path_->at(tt / std::numbers::sqrt2).x, mode_); };
        auto det = [&](double tt) { return ric_->det_Y_at(tt); };
        const cplx coef = d(stiff, tau) / stiff(tau) - d(speed, tau) / speed(tau) + d(det, tau) / det(tau);
        double worst = 0.0;
        for (const ModalAmplitude* a : {&amp_.a02, &amp_.a03}) {
            if (mode_ == WaveMode::P && a == &amp_.a03) continue;
            if (std::abs(a->constant()) == 0.0) continue;
            const cplx a0 = (*a)(tau);
            worst = std::max(worst, std::abs(2.0 * d(*a, tau) + coef * a0) / std::abs(a0));
        }
        return worst;
    }

private:
    WaveMode mode_ = WaveMode::S;
    std::shared_ptr<const GeodesicPath> path_;
    std::shared_ptr<const RiccatiEvolution> ric_;
    std::shared_ptr<const FermiChart> chart_;
    SAmplitude amp_;
};

// ---------------------------------------------------------------------------
// Residual of the linear elastic operator

using DisplacementField = std::function<CVec3(double, const Vec3&)>;

struct SpaceTimePoint {
    double t = 0.0;
    Vec3 x = Vec3::Zero();
};

struct PdeResidualPoint {
    CVec3 Lu = CVec3::Zero();
    CVec3 u = CVec3::Zero();
};

/// L u = rho u_tt - div(lambda div(u) I + mu (grad u + grad u^T)) by fourth-order differences.
inline PdeResidualPoint elastic_operator_fd(const IsotropicMedium& m, const DisplacementField& u, const SpaceTimePoint& p,
                                            double h) {
    const Moduli mod = m.moduli(p.x);
    const Vec3 dlam = m.lambda().jet(p.x).g, dmu = m.mu().jet(p.x).g;
    auto U = [&](double dt, const Vec3& dx) { return u(p.t + dt, p.x + dx); };
    const double w[4] = {1.0, -8.0, 8.0, -1.0};
    const double off[4] = {-2.0, -1.0, 1.0, 2.0};
    const CVec3 u0 = U(0.0, Vec3::Zero());
    CVec3 utt = -30.0 * u0;
    for (int a = 0; a < 4; ++a) utt += (std::abs(off[a]) == 1.0 ? 16.0 : -1.0) * U(off[a] * h, Vec3::Zero());
    utt /= 12.0 * h * h;
    CMat3 grad;  // grad(i, j) = d_j u_i
    std::array<CMat3, 3> hess;  // hess[i](j, k) = d_j d_k u_i
    for (int j = 0; j < 3; ++j) {
        CVec3 d1 = CVec3::Zero(), d2 = -30.0 * u0;
        for (int a = 0; a < 4; ++a) {
            Vec3 e = Vec3::Zero();
            e[j] = off[a] * h;
            const CVec3 v = U(0.0, e);
            d1 += w[a] * v;
            d2 += (std::abs(off[a]) == 1.0 ? 16.0 : -1.0) * v;
        }
        grad.col(j) = d1 / (12.0 * h);
        d2 /= 12.0 * h * h;
        for (int i = 0; i < 3; ++i) hess[i](j, j) = d2[i];
    }
    for (int j = 0; j < 3; ++j)
        for (int k = j + 1; k < 3; ++k) {
            CVec3 acc = CVec3::Zero();
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    Vec3 e = Vec3::Zero();
                    e[j] = off[a] * h;
                    e[k] = off[b] * h;
                    acc += w[a] * w[b] * U(0.0, e);
                }
            acc /= 144.0 * h * h;
            for (int i = 0; i < 3; ++i) hess[i](j, k) = hess[i](k, j) = acc[i];
        }
    const cplx div = grad.trace();
    CVec3 out;
    for (int i = 0; i < 3; ++i) {
        cplx grad_div = 0.0, lap = 0.0, mu_term = 0.0;
        for (int j = 0; j < 3; ++j) {
            grad_div += hess[j](i, j);
            lap += hess[i](j, j);
            mu_term += dmu[j] * (grad(i, j) + grad(j, i));
        }
        const cplx divS = dlam[i] * div + mod.lambda * grad_div + mu_term + mod.mu * (lap + grad_div);
        out[i] = mod.rho * utt[i] - divS;
    }
    return {out, u0};
}

struct PdeResidualReport {
    std::vector<PdeResidualPoint> points;
    double max_residual = 0.0;
    double max_u = 0.0;
    double ratio = 0.0;  // max |L u| / (varrho max |u|)
};

/// Residual of L u over sample points, normalized by varrho max |u|.
inline PdeResidualReport pde_residual(const IsotropicMedium& m, const DisplacementField& u, double varrho,
                                      std::span<const SpaceTimePoint> points, double h = 0.0) {
    if (h <= 0.0) h = std::min(1e-3, 0.02 / varrho);
    PdeResidualReport r;
    for (const auto& p : points) {
        r.points.push_back(elastic_operator_fd(m, u, p, h));
        r.max_residual = std::max(r.max_residual, r.points.back().Lu.norm());
        r.max_u = std::max(r.max_u, r.points.back().u.norm());
    }
    r.ratio = r.max_u > 0.0 ? r.max_residual / (varrho * r.max_u) : 0.0;
    return r;
}

}  // namespace nlwave
