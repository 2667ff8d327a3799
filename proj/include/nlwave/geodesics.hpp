#pragma once

#include "nlwave/domain.hpp"
#include "nlwave/medium.hpp"
#include "nlwave/ode.hpp"
#include "nlwave/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace nlwave {

using State6 = Eigen::Matrix<double, 6, 1>;
using State12 = Eigen::Matrix<double, 12, 1>;

struct PathSample {
    double s = 0.0;  // arclength in g from the anchor point
    double t = 0.0;  // t0 + s
    Vec3 x = Vec3::Zero();
    Vec3 v = Vec3::Zero();  // unit g-tangent, Euclidean length c
    Vec3 p = Vec3::Zero();  // covector, |p| = 1/c
};

struct BoundaryEvent {
    double s = 0.0;
    double t = 0.0;
    Vec3 x = Vec3::Zero();
    Vec3 direction = Vec3::Zero();  // Euclidean unit tangent in the +s direction
};

struct TraceOptions {
    double rtol = 1e-12;
    double atol = 1e-13;
    double h_max = 0.0;  // g-arclength cap; 0 picks 1% of the domain size
    double max_length = 1e3;
    double extension_fraction = 0.05;
    double boundary_tol = 1e-12;
};

/// Hamiltonian flow for H = c^2 |p|^2 / 2 in arclength parametrization.
struct GeodesicRhs {
    const IsotropicMedium* m;
    WaveMode mode;
    State6 operator()(double, const State6& y) const {
        const Vec3 x = y.head<3>(), p = y.tail<3>();
        const Jet c = m->wavespeed_jet(x, mode);
        State6 d;
        d.head<3>() = c.v * c.v * p;
        d.tail<3>() = -c.v * p.squaredNorm() * c.g;
        return d;
    }
};

inline void renormalize_covector(const IsotropicMedium& m, WaveMode mode, State6& y) {
    const double c = m.wavespeed(y.head<3>(), mode);
    y.tail<3>() *= 1.0 / (c * y.tail<3>().norm());
}

class GeodesicPath {
public:
    GeodesicPath() = default;
    GeodesicPath(IsotropicMedium m, WaveMode mode, double t0, std::vector<PathSample> samples,
                 std::optional<BoundaryEvent> entry, std::optional<BoundaryEvent> exit)
        : medium_(std::move(m)), mode_(mode), t0_(t0), samples_(std::move(samples)), entry_(entry), exit_(exit) {}

    const IsotropicMedium& medium() const { return medium_; }
    WaveMode mode() const { return mode_; }
    double t0() const { return t0_; }
    const std::vector<PathSample>& samples() const { return samples_; }
    const std::optional<BoundaryEvent>& entry() const { return entry_; }
    const std::optional<BoundaryEvent>& exit() const { return exit_; }
    double s_min() const { return samples_.front().s; }
    double s_max() const { return samples_.back().s; }

    /// g-length of the part inside the domain.
    double interior_length() const {
        const double a = entry_ ? entry_->s : s_min();
        const double b = exit_ ? exit_->s : s_max();
        return b - a;
    }

    std::size_t nearest_index(double s) const {
        auto it = std::lower_bound(samples_.begin(), samples_.end(), s,
                                   [](const PathSample& a, double v) { return a.s < v; });
        if (it == samples_.end()) return samples_.size() - 1;
        std::size_t i = static_cast<std::size_t>(it - samples_.begin());
        if (i > 0 && s - samples_[i - 1].s < it->s - s) --i;
        return i;
    }

    /// State at arbitrary s by one integrator step from the nearest stored sample.
    PathSample at(double s) const {
        const PathSample& a = samples_[nearest_index(s)];
        State6 y;
        y << a.x, a.p;
        y = Dopri5<State6>::advance(GeodesicRhs{&medium_, mode_}, a.s, y, s - a.s);
        renormalize_covector(medium_, mode_, y);
        return make_sample(s, y);
    }

    PathSample make_sample(double s, const State6& y) const {
        PathSample out;
        out.s = s;
        out.t = t0_ + s;
        out.x = y.head<3>();
        out.p = y.tail<3>();
        const double c = medium_.wavespeed(out.x, mode_);
        out.v = c * c * out.p;
        return out;
    }

    /// max | |v|_g - 1 | over stored samples.
    double max_unit_speed_error() const {
        double e = 0.0;
        for (const auto& q : samples_) {
            const double c = medium_.wavespeed(q.x, mode_);
            e = std::max(e, std::abs(q.v.norm() / c - 1.0));
        }
        return e;
    }

    /// Smallest radius of curvature of the ray, in g-units.
    double min_curvature_radius() const {
        double r = std::numeric_limits<double>::infinity();
        for (const auto& q : samples_) {
            const Jet c = medium_.wavespeed_jet(q.x, mode_);
            const Vec3 dv = 2.0 * c.v * c.g.dot(q.v) * q.p - c.v * c.v * c.v * q.p.squaredNorm() * c.g;
            const double vn = q.v.norm();
            const double kappa = q.v.cross(dv).norm() / (vn * vn * vn);
            if (kappa > 0.0) r = std::min(r, 1.0 / (kappa * c.v));
        }
        return r;
    }

private:
    IsotropicMedium medium_;
    WaveMode mode_ = WaveMode::S;
    double t0_ = 0.0;
    std::vector<PathSample> samples_;
    std::optional<BoundaryEvent> entry_, exit_;
};

namespace detail {

struct Leg {
    std::vector<std::pair<double, State6>> states;  // (lambda, state)
    bool crossed = false;
};

inline double auto_h_max(const ConvexDomain& dom, const IsotropicMedium& m, WaveMode mode, const Vec3& x0,
                         const TraceOptions& opt) {
    if (opt.h_max > 0.0) return opt.h_max;
    return 0.01 * dom.bounding_radius() / m.wavespeed(x0, mode);
}

/// Integrate from y0 until the ray leaves {b < 0}; the crossing is located by
/// Illinois root finding on b along single integrator steps.
inline Leg integrate_to_exit(const IsotropicMedium& m, WaveMode mode, const ConvexDomain& dom, const State6& y0,
                             const TraceOptions& opt, double h_max) {
    Leg leg;
    leg.states.emplace_back(0.0, y0);
    GeodesicRhs rhs{&m, mode};
    OdeOptions o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.h_max = h_max;
    o.h_init = h_max;
    double b_prev = dom.level(y0.head<3>());
    integrate_adaptive(rhs, 0.0, y0, opt.max_length, o, [&](double lam, State6& y) {
        renormalize_covector(m, mode, y);
        const double b = dom.level(y.head<3>());
        if (b_prev < 0.0 && b >= 0.0) {
            const auto& [lam0, y_prev] = leg.states.back();
            auto F = [&](double th) {
                return dom.level(Dopri5<State6>::advance(rhs, lam0, y_prev, th).head<3>());
            };
            double a = 0.0, fa = b_prev, c = lam - lam0, fc = b;
            int side = 0;
            double th = c;
            for (int it = 0; it < 200; ++it) {
                th = (a * fc - c * fa) / (fc - fa);
                const double ft = F(th);
                if (std::abs(ft) <= opt.boundary_tol || (c - a) < 1e-15) break;
                if ((ft < 0.0) == (fa < 0.0)) {
                    a = th;
                    fa = ft;
                    if (side == -1) fc *= 0.5;
                    side = -1;
                } else {
                    c = th;
                    fc = ft;
                    if (side == 1) fa *= 0.5;
                    side = 1;
                }
            }
            State6 yc = Dopri5<State6>::advance(rhs, lam0, y_prev, th);
            renormalize_covector(m, mode, yc);
            leg.states.emplace_back(lam0 + th, yc);
            leg.crossed = true;
            return false;
        }
        b_prev = b;
        leg.states.emplace_back(lam, y);
        return true;
    });
    return leg;
}

inline void extend_leg(const IsotropicMedium& m, WaveMode mode, Leg& leg, double length, const TraceOptions& opt,
                       double h_max) {
    if (length <= 0.0) return;
    GeodesicRhs rhs{&m, mode};
    OdeOptions o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.h_max = h_max;
    o.h_init = std::min(h_max, length);
    const auto [lam0, y0] = leg.states.back();
    integrate_adaptive(rhs, lam0, y0, lam0 + length, o, [&](double lam, State6& y) {
        renormalize_covector(m, mode, y);
        leg.states.emplace_back(lam, y);
        return true;
    });
}

inline State6 flip(const State6& y) {
    State6 r = y;
    r.tail<3>() = -r.tail<3>();
    return r;
}

}  // namespace detail

/// Unit-speed g-geodesic through x0 traced in both directions to the boundary,
/// then extended past each end by a fraction of the interior length.
inline GeodesicPath trace_geodesic(const IsotropicMedium& m, WaveMode mode, const Vec3& x0, const Vec3& dir0,
                                   const ConvexDomain& dom, double t0 = 0.0, const TraceOptions& opt = {}) {
    if (!dom.contains(x0)) throw std::invalid_argument("trace_geodesic: start point " + format_point(x0) + " is not inside " + dom.describe());
    if (!(dir0.norm() > 0.0)) throw std::invalid_argument("trace_geodesic: zero direction");
    const double c0 = m.wavespeed(x0, mode);
    State6 y0;
    y0 << x0, dir0.normalized() / c0;
    const double h_max = detail::auto_h_max(dom, m, mode, x0, opt);
    detail::Leg fwd = detail::integrate_to_exit(m, mode, dom, y0, opt, h_max);
    detail::Leg bwd = detail::integrate_to_exit(m, mode, dom, detail::flip(y0), opt, h_max);
    if (!fwd.crossed || !bwd.crossed)
        throw TrappingError("geodesic from " + format_point(x0) + " did not leave the domain within arclength " +
                            std::to_string(opt.max_length));
    const double lam_f = fwd.states.back().first, lam_b = bwd.states.back().first;
    const double ext = opt.extension_fraction * (lam_f + lam_b);
    const std::size_t nf = fwd.states.size(), nb = bwd.states.size();
    detail::extend_leg(m, mode, fwd, ext, opt, h_max);
    detail::extend_leg(m, mode, bwd, ext, opt, h_max);

    GeodesicPath proto(m, mode, t0, {}, std::nullopt, std::nullopt);
    std::vector<PathSample> samples;
    samples.reserve(fwd.states.size() + bwd.states.size());
    for (std::size_t i = bwd.states.size(); i-- > 1;)
        samples.push_back(proto.make_sample(-bwd.states[i].first, detail::flip(bwd.states[i].second)));
    for (const auto& [lam, y] : fwd.states) samples.push_back(proto.make_sample(lam, y));

    auto event = [&](const PathSample& q) {
        return BoundaryEvent{q.s, q.t, q.x, q.v.normalized()};
    };
    const PathSample exit_s = proto.make_sample(lam_f, fwd.states[nf - 1].second);
    const PathSample entry_s = proto.make_sample(-lam_b, detail::flip(bwd.states[nb - 1].second));
    return GeodesicPath(m, mode, t0, std::move(samples), event(entry_s), event(exit_s));
}

/// Geodesic started on the boundary heading inward, traced to its exit point.
inline GeodesicPath trace_from_boundary(const IsotropicMedium& m, WaveMode mode, const Vec3& xb, const Vec3& dir,
                                        const ConvexDomain& dom, double t0 = 0.0, const TraceOptions& opt = {},
                                        bool extend = false) {
    const double c0 = m.wavespeed(xb, mode);
    State6 y0;
    y0 << xb, dir.normalized() / c0;
    const double h_max = detail::auto_h_max(dom, m, mode, xb, opt);
    detail::Leg leg = detail::integrate_to_exit(m, mode, dom, y0, opt, h_max);
    if (!leg.crossed)
        throw TrappingError("geodesic from boundary point " + format_point(xb) + " did not leave the domain");
    const double lam_exit = leg.states.back().first;
    const State6 y_exit = leg.states.back().second;
    if (extend) detail::extend_leg(m, mode, leg, opt.extension_fraction * lam_exit, opt, h_max);
    GeodesicPath proto(m, mode, t0, {}, std::nullopt, std::nullopt);
    std::vector<PathSample> samples;
    for (const auto& [lam, y] : leg.states) samples.push_back(proto.make_sample(lam, y));
    const PathSample a = samples.front();
    const PathSample b = proto.make_sample(lam_exit, y_exit);
    return GeodesicPath(m, mode, t0, std::move(samples), BoundaryEvent{a.s, a.t, a.x, a.v.normalized()},
                        BoundaryEvent{b.s, b.t, b.x, b.v.normalized()});
}

inline double van_der_corput(unsigned long i, unsigned base = 2) {
    double q = 0.0, bk = 1.0 / base;
    while (i > 0) {
        q += static_cast<double>(i % base) * bk;
        i /= base;
        bk /= base;
    }
    return q;
}

/// Fibonacci lattice point k of n on the unit sphere.
inline Vec3 fibonacci_sphere(std::size_t k, std::size_t n) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * std::fmod(static_cast<double>(k) / golden, 1.0);
    return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

/// Any unit vector orthogonal to u, chosen deterministically.
inline Vec3 any_orthogonal(const Vec3& u) {
    Vec3 a = std::abs(u[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return (a - a.dot(u) * u).normalized();
}

struct DiameterEstimate {
    double value = 0.0;  // max sampled boundary-to-boundary g-length, a lower bound
    std::size_t n_samples = 0;
    Vec3 best_start = Vec3::Zero();
    Vec3 best_direction = Vec3::Zero();
};

/// Lower bound for the g-diameter from a quasi-random family of chords. Sample
/// i starts at Fibonacci boundary point i with a van der Corput tilt from the
/// inward normal; sample 0 points exactly along the normal.
inline DiameterEstimate estimate_diameter(const IsotropicMedium& m, WaveMode mode, const ConvexDomain& dom,
                                          std::size_t n_samples, const TraceOptions& opt = {}) {
    if (n_samples == 0) throw std::invalid_argument("estimate_diameter: need at least one sample");
    DiameterEstimate est;
    est.n_samples = n_samples;
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Vec3 xb = dom.boundary_point(fibonacci_sphere(i, n_samples));
        const Vec3 nu = dom.outward_normal(xb);
        const Vec3 t1 = any_orthogonal(nu), t2 = nu.cross(t1);
        const double u = van_der_corput(i);
        const double st = std::sqrt(u), ct = std::sqrt(1.0 - u);
        const double az = 2.0 * std::numbers::pi * std::fmod(static_cast<double>(i) * golden, 1.0);
        const Vec3 d = -ct * nu + st * (std::cos(az) * t1 + std::sin(az) * t2);
        if (d.dot(-nu) <= 1e-12) continue;
        const GeodesicPath g = trace_from_boundary(m, mode, xb, d, dom, 0.0, opt);
        const double len = g.interior_length();
        if (len > est.value) {
            est.value = len;
            est.best_start = xb;
            est.best_direction = d;
        }
    }
    return est;
}

struct ConvexityReport {
    bool convex = true;
    double min_margin = std::numeric_limits<double>::infinity();  // min II_g over unit tangents, scaled
    Vec3 worst_point = Vec3::Zero();
    std::size_t n_samples = 0;
};

/// Sample-based test of strict convexity of the boundary with respect to g.
/// For g = c^-2 delta the sign of II_g(X, X) is that of II_E(X, X) - d_nu c / c.
inline ConvexityReport check_boundary_convexity(const IsotropicMedium& m, WaveMode mode, const ConvexDomain& dom,
                                                std::size_t n_samples = 256) {
    ConvexityReport rep;
    rep.n_samples = n_samples;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Vec3 xb = dom.boundary_point(fibonacci_sphere(i, n_samples));
        const Vec3 gb = dom.gradient(xb);
        const Vec3 nu = gb.normalized();
        const Vec3 t1 = any_orthogonal(nu), t2 = nu.cross(t1);
        Eigen::Matrix<double, 3, 2> T;
        T << t1, t2;
        const Eigen::Matrix2d II = T.transpose() * dom.hessian(xb) * T / gb.norm();
        const Jet c = m.wavespeed_jet(xb, mode);
        const double margin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(II).eigenvalues().minCoeff() -
                              c.g.dot(nu) / c.v;
        if (margin < rep.min_margin) {
            rep.min_margin = margin;
            rep.worst_point = xb;
        }
    }
    rep.convex = rep.min_margin > 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Parallel transport

struct FrameState {
    double s = 0.0;
    Vec3 x = Vec3::Zero();
    Vec3 p = Vec3::Zero();
    Vec3 e2 = Vec3::Zero();
    Vec3 e3 = Vec3::Zero();

    Vec3 tangent(double c) const { return c * c * p; }
};

/// Geodesic flow together with Levi-Civita transport of two vectors.
struct FrameRhs {
    const IsotropicMedium* m;
    WaveMode mode;
    State12 operator()(double, const State12& y) const {
        const Vec3 x = y.segment<3>(0), p = y.segment<3>(3);
        const Jet c = m->wavespeed_jet(x, mode);
        const Vec3 v = c.v * c.v * p;
        const Vec3 w = c.g / c.v;  // -grad f for g = exp(2f) delta
        State12 d;
        d.segment<3>(0) = v;
        d.segment<3>(3) = -c.v * p.squaredNorm() * c.g;
        for (int k = 0; k < 2; ++k) {
            const Vec3 e = y.segment<3>(6 + 3 * k);
            d.segment<3>(6 + 3 * k) = v.dot(w) * e + e.dot(w) * v - v.dot(e) * w;
        }
        return d;
    }
};

class ParallelFrame {
public:
    ParallelFrame() = default;
    ParallelFrame(IsotropicMedium m, WaveMode mode, std::vector<FrameState> states)
        : medium_(std::move(m)), mode_(mode), states_(std::move(states)) {}

    const std::vector<FrameState>& states() const { return states_; }
    const IsotropicMedium& medium() const { return medium_; }
    WaveMode mode() const { return mode_; }

    FrameState at(double s) const {
        auto it = std::lower_bound(states_.begin(), states_.end(), s,
                                   [](const FrameState& a, double v) { return a.s < v; });
        std::size_t i = it == states_.end() ? states_.size() - 1 : static_cast<std::size_t>(it - states_.begin());
        if (i > 0 && (it == states_.end() || s - states_[i - 1].s < states_[i].s - s)) --i;
        const FrameState& a = states_[i];
        State12 y = pack(a);
        y = Dopri5<State12>::advance(FrameRhs{&medium_, mode_}, a.s, y, s - a.s);
        return unpack(s, y);
    }

    /// Largest deviation of the g-Gram matrix of (tangent, e2, e3) from the identity.
    double max_gram_error() const {
        double e = 0.0;
        for (const auto& f : states_) e = std::max(e, gram_error(f));
        return e;
    }

    double gram_error(const FrameState& f) const {
        const double c = medium_.wavespeed(f.x, mode_);
        Mat3 E;
        E << f.tangent(c), f.e2, f.e3;
        return (E.transpose() * E / (c * c) - Mat3::Identity()).cwiseAbs().maxCoeff();
    }

    static State12 pack(const FrameState& f) {
        State12 y;
        y << f.x, f.p, f.e2, f.e3;
        return y;
    }
    static FrameState unpack(double s, const State12& y) {
        return {s, y.segment<3>(0), y.segment<3>(3), y.segment<3>(6), y.segment<3>(9)};
    }

private:
    IsotropicMedium medium_;
    WaveMode mode_ = WaveMode::S;
    std::vector<FrameState> states_;
};

/// g-orthonormal pair completing the tangent v (Euclidean length c) at a point.
inline std::pair<Vec3, Vec3> default_transverse_frame(const Vec3& v, double c) {
    const Vec3 u = v.normalized();
    const Vec3 a = any_orthogonal(u);
    return {c * a, c * u.cross(a)};
}

/// Transport (e2, e3) given at s = 0 along the path. The stored path steps are
/// reused as fixed steps so frame samples line up with path samples.
inline ParallelFrame parallel_transport(const GeodesicPath& path, std::optional<std::pair<Vec3, Vec3>> e_init = {}) {
    const IsotropicMedium& m = path.medium();
    const WaveMode mode = path.mode();
    const auto& S = path.samples();
    const std::size_t i0 = path.nearest_index(0.0);
    const PathSample& a = S[i0];
    if (std::abs(a.s) > 0.0) throw std::invalid_argument("parallel_transport: path has no sample at s = 0");
    const double c = m.wavespeed(a.x, mode);
    auto [e2, e3] = e_init ? *e_init : default_transverse_frame(a.v, c);
    {
        Mat3 E;
        E << a.v, e2, e3;
        const double err = (E.transpose() * E / (c * c) - Mat3::Identity()).cwiseAbs().maxCoeff();
        if (err > 1e-10)
            throw std::invalid_argument("parallel_transport: initial frame is not g-orthonormal and orthogonal to the tangent");
    }
    FrameRhs rhs{&m, mode};
    std::vector<FrameState> out(S.size());
    out[i0] = {a.s, a.x, a.p, e2, e3};
    auto march = [&](std::size_t from, std::size_t to) {
        State12 y = ParallelFrame::pack(out[from]);
        y = Dopri5<State12>::advance(rhs, S[from].s, y, S[to].s - S[from].s);
        const double cc = m.wavespeed(y.segment<3>(0), mode);
        y.segment<3>(3) *= 1.0 / (cc * y.segment<3>(3).norm());
        out[to] = ParallelFrame::unpack(S[to].s, y);
    };
    for (std::size_t i = i0 + 1; i < S.size(); ++i) march(i - 1, i);
    for (std::size_t i = i0; i-- > 0;) march(i + 1, i);
    return ParallelFrame(m, mode, std::move(out));
}

/// Christoffel symbols Gamma[k](i, j) of the Euclidean metric c^2 g in Fermi
/// coordinates (s, y2, y3) on the axis, where g = delta and dg = 0. dc holds
/// (d_s c, d_y2 c, d_y3 c).
inline std::array<Mat3, 3> fermi_christoffel_on_axis(double c, const Vec3& dc) {
    std::array<Mat3, 3> G;
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                G[static_cast<std::size_t>(k)](i, j) =
                    ((i == k ? dc[j] : 0.0) + (j == k ? dc[i] : 0.0) - (i == j ? dc[k] : 0.0)) / c;
    return G;
}

/// Fermi-frame first derivatives of c on the axis: (d_s c, d_y2 c, d_y3 c).
inline Vec3 fermi_derivatives_of_c(const IsotropicMedium& m, WaveMode mode, const FrameState& f) {
    const Jet c = m.wavespeed_jet(f.x, mode);
    return Vec3(c.g.dot(f.tangent(c.v)), c.g.dot(f.e2), c.g.dot(f.e3));
}

}  // namespace nlwave
