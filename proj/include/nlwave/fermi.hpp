#pragma once

#include "nlwave/geodesics.hpp"
#include "nlwave/ode.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace nlwave {

/// Fermi coordinates (t, s, y2, y3) about a null bicharacteristic.
struct FermiPoint {
    double t = 0.0;
    double s = 0.0;
    double y2 = 0.0;
    double y3 = 0.0;
};

/// Rotated coordinates tau = (t - t0 + s)/sqrt2, r = (-t + t0 + s)/sqrt2, z = y.
struct RotatedPoint {
    double tau = 0.0;
    double r = 0.0;
    double z2 = 0.0;
    double z3 = 0.0;
};

/// 10% of the smallest ray curvature radius, capped by the interior length.
inline double default_tube_radius(const GeodesicPath& path) {
    return 0.1 * std::min(path.min_curvature_radius(), path.interior_length());
}

class FermiChart {
public:
    FermiChart() = default;
    FermiChart(GeodesicPath path, ParallelFrame frame, double delta = 0.0)
        : path_(std::move(path)), frame_(std::move(frame)) {
        delta_ = delta > 0.0 ? delta : default_tube_radius(path_);
    }

    const GeodesicPath& path() const { return path_; }
    const ParallelFrame& frame() const { return frame_; }
    double t0() const { return path_.t0(); }
    double delta() const { return delta_; }

    /// Riemannian exponential map of g at base applied to the vector w.
    Vec3 exp_map(const Vec3& base, const Vec3& w) const {
        if (w.squaredNorm() == 0.0) return base;
        const IsotropicMedium& m = path_.medium();
        const WaveMode mode = path_.mode();
        if (m.is_homogeneous()) return base + w;
        const double c = m.wavespeed(base, mode);
        State6 y;
        y << base, w / (c * c);
        OdeOptions o;
        o.rtol = 1e-13;
        o.atol = 1e-15;
        o.h_init = 1.0;
        State6 out = y;
        integrate_adaptive(GeodesicRhs{&m, mode}, 0.0, y, 1.0, o, [&](double, State6& yy) {
            out = yy;
            return true;
        });
        return out.head<3>();
    }

    Vec3 spatial_point(double s, double y2, double y3) const {
        const FrameState f = frame_.at(s);
        return exp_map(f.x, y2 * f.e2 + y3 * f.e3);
    }

    std::pair<double, Vec3> forward(const FermiPoint& q) const { return {q.t, spatial_point(q.s, q.y2, q.y3)}; }

    std::pair<double, Vec3> forward(const RotatedPoint& z) const { return forward(unrotate(z)); }

    RotatedPoint rotate(const FermiPoint& q) const {
        const double a = q.t - t0();
        return {(a + q.s) / std::numbers::sqrt2, (-a + q.s) / std::numbers::sqrt2, q.y2, q.y3};
    }

    FermiPoint unrotate(const RotatedPoint& z) const {
        return {t0() + (z.tau - z.r) / std::numbers::sqrt2, (z.tau + z.r) / std::numbers::sqrt2, z.z2, z.z3};
    }

    /// Inverse chart by Newton iteration on the spatial forward map.
    FermiPoint inverse(double t, const Vec3& x, double tol = 1e-13) const {
        const auto& S = path_.samples();
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double d = (S[i].x - x).squaredNorm();
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        const IsotropicMedium& m = path_.medium();
        const WaveMode mode = path_.mode();
        Vec3 q;
        {
            const FrameState f = frame_.at(S[best].s);
            const double c = m.wavespeed(f.x, mode);
            const Vec3 d = x - f.x;
            q << f.s + d.dot(f.tangent(c)) / (c * c), d.dot(f.e2) / (c * c), d.dot(f.e3) / (c * c);
        }
        auto F = [&](const Vec3& v) { return Vec3(spatial_point(v[0], v[1], v[2]) - x); };
        Vec3 r = F(q);
        double rn = r.norm();
        const double scale = 1.0 + x.norm();
        for (int it = 0; it < 40 && rn > tol * scale; ++it) {
            Mat3 J;
            for (int k = 0; k < 3; ++k) {
                const double h = 1e-6 * (k == 0 ? 1.0 : std::max(1.0, std::abs(q[k])));
                Vec3 qp = q, qm = q;
                qp[k] += h;
                qm[k] -= h;
                J.col(k) = (F(qp) - F(qm)) / (2.0 * h);
            }
            const Vec3 step = J.fullPivLu().solve(-r);
            double lam = 1.0;
            bool improved = false;
            for (int ls = 0; ls < 20; ++ls) {
                const Vec3 qn = q + lam * step;
                const Vec3 rn_vec = F(qn);
                if (rn_vec.norm() < rn) {
                    q = qn;
                    r = rn_vec;
                    rn = r.norm();
                    improved = true;
                    break;
                }
                lam *= 0.5;
            }
            if (!improved || step.norm() < 1e-16 * scale) break;
        }
        if (!(rn <= 1e-10 * scale)) {
            std::ostringstream os;
            os << "Fermi inverse did not converge at " << format_point(x) << ": residual " << rn << ", s = " << q[0]
               << ", |y| = " << std::hypot(q[1], q[2]) << " (tube radius " << delta_ << ")";
            throw ConvergenceError(os.str());
        }
        return {t, q[0], q[1], q[2]};
    }

private:
    GeodesicPath path_;
    ParallelFrame frame_;
    double delta_ = 0.0;
};

}  // namespace nlwave
