#pragma once

#include "nlwave/geodesics.hpp"
#include "nlwave/ode.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace nlwave {

using DFunction = std::function<Mat3(double)>;
using StateYZ = Eigen::Matrix<cplx, 18, 1>;

/// Riccati coefficient D in rotated Fermi coordinates (r, z2, z3) from the
/// wavespeed jet at an axis point. The r row and column vanish; the transverse
/// block is a quarter of the Jacobi operator R(e_a, u) u of g = c^-2 delta:
///   K_ab = c Hc(e_a, e_b) + (c Hc(u, u) - |grad c|^2) delta_ab
/// with u, e_a Euclidean unit vectors.
inline Mat3 curvature_D(const Jet& c, const Vec3& u, const Vec3& e2, const Vec3& e3) {
    const Vec3 e[2] = {e2, e3};
    const double diag = c.v * u.dot(c.h * u) - c.g.squaredNorm();
    Mat3 D = Mat3::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            D(1 + a, 1 + b) = 0.25 * (c.v * e[a].dot(c.h * e[b]) + (a == b ? diag : 0.0));
    return D;
}

/// D(tau) along the ray of a transported frame; on the axis tau = sqrt2 s.
inline DFunction build_D_along_ray(ParallelFrame frame) {
    auto fr = std::make_shared<const ParallelFrame>(std::move(frame));
    return [fr](double tau) {
        const FrameState f = fr->at(tau / std::numbers::sqrt2);
        const Jet c = fr->medium().wavespeed_jet(f.x, fr->mode());
        return curvature_D(c, f.p.normalized(), f.e2.normalized(), f.e3.normalized());
    };
}

inline const Mat3& riccati_C() {
    static const Mat3 C = Vec3(0.0, 2.0, 2.0).asDiagonal();
    return C;
}

struct YZSample {
    double tau = 0.0;
    CMat3 Y = CMat3::Identity();
    CMat3 Z = CMat3::Zero();
};

struct RiccatiOptions {
    double rtol = 1e-12;
    double atol = 1e-14;
    double h_max = 0.02;
    double positivity_tol = 1e-10;
};

struct RiccatiDiagnostics {
    double max_asymmetry = 0.0;        // max |H - H^T| / |H|
    double min_imag_eigenvalue = 0.0;  // min eigenvalue of Im H over samples
    double max_conservation_drift = 0.0;  // relative drift of det(Im H) |det Y|^2
    double max_condition_Y = 0.0;
};

inline CMat3 h_from_yz(const CMat3& Y, const CMat3& Z) {
    // H = Z Y^{-1}, computed as the transpose of Y^{-T} Z^T.
    return Y.transpose().fullPivLu().solve(Z.transpose()).transpose();
}

inline double min_imag_eigenvalue(const CMat3& H) {
    const Mat3 im = 0.5 * (H.imag() + H.imag().transpose());
    return Eigen::SelfAdjointEigenSolver<Mat3>(im, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline double riccati_invariant(const CMat3& Y, const CMat3& Z) {
    const CMat3 H = h_from_yz(Y, Z);
    const Mat3 im = 0.5 * (H.imag() + H.imag().transpose());
    return im.determinant() * std::norm(Y.determinant());
}

struct RiccatiRhs {
    const DFunction* D;
    StateYZ operator()(double tau, const StateYZ& y) const {
        Eigen::Map<const CMat3> Y(y.data()), Z(y.data() + 9);
        StateYZ d;
        Eigen::Map<CMat3> dY(d.data()), dZ(d.data() + 9);
        dY = riccati_C().cast<cplx>() * Z;
        dZ = -(*D)(tau).cast<cplx>() * Y;
        return d;
    }
};

class RiccatiEvolution {
public:
    RiccatiEvolution() = default;
    RiccatiEvolution(DFunction D, double tau0, std::vector<YZSample> samples)
        : D_(std::move(D)), tau0_(tau0), samples_(std::move(samples)) {}

    const std::vector<YZSample>& samples() const { return samples_; }
    double tau0() const { return tau0_; }
    double tau_min() const { return samples_.front().tau; }
    double tau_max() const { return samples_.back().tau; }
    const DFunction& D() const { return D_; }

    CMat3 H(std::size_t i) const { return h_from_yz(samples_[i].Y, samples_[i].Z); }

    std::size_t nearest_index(double tau) const {
        auto it = std::lower_bound(samples_.begin(), samples_.end(), tau,
                                   [](const YZSample& a, double v) { return a.tau < v; });
        if (it == samples_.end()) return samples_.size() - 1;
        std::size_t i = static_cast<std::size_t>(it - samples_.begin());
        if (i > 0 && tau - samples_[i - 1].tau < it->tau - tau) --i;
        return i;
    }

    /// (Y, Z) at arbitrary tau by one integrator step from the nearest sample.
    YZSample at(double tau) const {
        const YZSample& a = samples_[nearest_index(tau)];
        StateYZ y;
        Eigen::Map<CMat3>(y.data()) = a.Y;
        Eigen::Map<CMat3>(y.data() + 9) = a.Z;
        y = Dopri5<StateYZ>::advance(RiccatiRhs{&D_}, a.tau, y, tau - a.tau);
        return {tau, Eigen::Map<const CMat3>(y.data()), Eigen::Map<const CMat3>(y.data() + 9)};
    }

    CMat3 H_at(double tau) const {
        const YZSample s = at(tau);
        return h_from_yz(s.Y, s.Z);
    }

    cplx det_Y_at(double tau) const { return at(tau).Y.determinant(); }

    RiccatiDiagnostics diagnostics() const {
        RiccatiDiagnostics d;
        d.min_imag_eigenvalue = std::numeric_limits<double>::infinity();
        const YZSample& s0 = samples_[nearest_index(tau0_)];
        const double inv0 = riccati_invariant(s0.Y, s0.Z);
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const CMat3 H = this->H(i);
            d.max_asymmetry = std::max(d.max_asymmetry, (H - H.transpose()).norm() / std::max(1e-300, H.norm()));
            d.min_imag_eigenvalue = std::min(d.min_imag_eigenvalue, min_imag_eigenvalue(H));
            const double inv = riccati_invariant(samples_[i].Y, samples_[i].Z);
            d.max_conservation_drift = std::max(d.max_conservation_drift, std::abs(inv - inv0) / std::abs(inv0));
            Eigen::JacobiSVD<CMat3> svd(samples_[i].Y);
            const auto sv = svd.singularValues();
            d.max_condition_Y = std::max(d.max_condition_Y, sv[0] / sv[2]);
        }
        return d;
    }

private:
    DFunction D_;
    double tau0_ = 0.0;
    std::vector<YZSample> samples_;
};

/// Integrate Y' = C Z, Z' = -D Y from (Y0, H0 Y0) at tau0 over [tau_begin, tau_end].
inline RiccatiEvolution evolve_yz(DFunction D, const CMat3& Y0, const CMat3& H0, double tau_begin, double tau_end,
                                  double tau0, const RiccatiOptions& opt = {}) {
    if (!(tau_begin <= tau0 && tau0 <= tau_end)) throw std::invalid_argument("evolve_yz: tau0 outside the interval");
    if (std::abs(Y0.determinant()) <= 1e-14 * std::max(1.0, std::pow(Y0.norm(), 3)))
        throw std::invalid_argument("evolve_yz: Y0 is singular");
    if ((H0 - H0.transpose()).norm() > 1e-12 * std::max(1.0, H0.norm()))
        throw std::invalid_argument("evolve_yz: H0 is not symmetric");
    if (!(min_imag_eigenvalue(H0) > 0.0)) throw std::invalid_argument("evolve_yz: Im H0 is not positive definite");

    auto Dp = std::make_shared<DFunction>(std::move(D));
    RiccatiRhs rhs{Dp.get()};
    StateYZ y0;
    Eigen::Map<CMat3>(y0.data()) = Y0;
    Eigen::Map<CMat3>(y0.data() + 9) = H0 * Y0;
    OdeOptions o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.h_max = opt.h_max;
    o.h_init = opt.h_max;

    auto run = [&](double t_end) {
        std::vector<YZSample> out;
        if (t_end == tau0) return out;
        integrate_adaptive(rhs, tau0, y0, t_end, o, [&](double tau, StateYZ& y) {
            YZSample s{tau, Eigen::Map<const CMat3>(y.data()), Eigen::Map<const CMat3>(y.data() + 9)};
            const double lam = min_imag_eigenvalue(h_from_yz(s.Y, s.Z));
            if (lam < -opt.positivity_tol) {
                std::ostringstream os;
                os << "Im H lost positivity at tau = " << tau << " (min eigenvalue " << lam << ")";
                throw PositivityLostError(os.str());
            }
            out.push_back(s);
            return true;
        });
        return out;
    };
    std::vector<YZSample> fwd = run(tau_end);
    std::vector<YZSample> bwd = run(tau_begin);
    std::vector<YZSample> all;
    all.reserve(fwd.size() + bwd.size() + 1);
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) all.push_back(*it);
    all.push_back({tau0, Y0, H0 * Y0});
    for (auto& s : fwd) all.push_back(s);
    // The evolution keeps the coefficient alive through a shared handle.
    return RiccatiEvolution([Dp](double tau) { return (*Dp)(tau); }, tau0, std::move(all));
}

}  // namespace nlwave
