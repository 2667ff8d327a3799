#pragma once

#include "nlwave/domain.hpp"
#include "nlwave/medium.hpp"
#include "nlwave/quadrature.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nlwave {

/// Displacement gradient d with d(i, j) = du_i / dx_j.
template <typename T>
using Grad3 = Eigen::Matrix<T, 3, 3>;

/// Quadratic part of the stress produced by two displacement gradients.
template <typename T>
Grad3<T> quadratic_source_G(const Grad3<T>& d1, const Grad3<T>& d2, const Moduli& m) {
    const T div1 = d1.trace(), div2 = d2.trace();
    T full = T(0), cross = T(0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            full += d1(a, b) * d2(a, b);
            cross += d1(a, b) * d2(b, a);
        }
    const T diag = (m.lambda + m.B) * full + 2.0 * m.C * div1 * div2 + m.B * cross;
    Grad3<T> G;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            T v = i == j ? diag : T(0);
            v += m.B * (div1 * d2(j, i) + div2 * d1(j, i));
            v += (m.lambda + m.B) * (div1 * d2(i, j) + div2 * d1(i, j));
            T qa = T(0), qm = T(0);
            for (int k = 0; k < 3; ++k) {
                qa += d1(j, k) * d2(k, i) + d2(j, k) * d1(k, i);
                qm += d1(k, i) * d2(k, j) + d2(k, i) * d1(k, j) + d1(i, k) * d2(j, k) + d2(i, k) * d1(j, k) +
                      d1(i, k) * d2(k, j) + d2(i, k) * d1(k, j);
            }
            v += 0.25 * m.A * qa + (m.mu + 0.25 * m.A) * qm;
            G(i, j) = v;
        }
    return G;
}

/// Trilinear density; agrees with the contraction of G(d1, d2) against d0.
template <typename T>
T interaction_density(const Grad3<T>& d1, const Grad3<T>& d2, const Grad3<T>& d0, const Moduli& m) {
    const auto colon = [](const Grad3<T>& x, const Grad3<T>& y) { return x.cwiseProduct(y).sum(); };
    const T div1 = d1.trace(), div2 = d2.trace(), div0 = d0.trace();
    const Grad3<T> sym = d1.transpose() * d2 + d2.transpose() * d1 + d1 * d2.transpose() + d2 * d1.transpose() +
                         d1 * d2 + d2 * d1;
    return (m.lambda + m.B) * colon(d1, d2) * div0 + 2.0 * m.C * div1 * div2 * div0 + m.B * (d1 * d2).trace() * div0 +
           m.B * (div1 * (d2 * d0).trace() + div2 * (d1 * d0).trace()) +
           0.25 * m.A * ((d1 * d2 * d0).trace() + (d2 * d1 * d0).trace()) +
           (m.lambda + m.B) * (div1 * colon(d2, d0) + div2 * colon(d1, d0)) + (m.mu + 0.25 * m.A) * colon(sym, d0);
}

using VectorField = std::function<Vec3(const Vec3&)>;

/// Fourth-order central difference gradient, d(i, j) = dv_i / dx_j.
inline Mat3 fd_gradient(const VectorField& v, const Vec3& x, double h = 1e-3) {
    Mat3 d;
    for (int j = 0; j < 3; ++j) {
        const Vec3 e = Vec3::Unit(j) * h;
        d.col(j) = (v(x - 2.0 * e) - 8.0 * v(x - e) + 8.0 * v(x + e) - v(x + 2.0 * e)) / (12.0 * h);
    }
    return d;
}

struct DivergenceIdentityReport {
    double volume_divergence = 0.0;  // integral of v0 . div G
    double boundary = 0.0;           // integral of v0 . G nu over the boundary
    double volume_density = 0.0;     // integral of the density
    double residual = 0.0;           // |div - boundary + density| / scale
};

/// Integration-by-parts check for G on an ellipsoidal or spherical domain.
inline DivergenceIdentityReport divergence_identity_check(const VectorField& v1, const VectorField& v2,
                                                          const VectorField& v0, const IsotropicMedium& m,
                                                          const ConvexDomain& dom, int order, double h = 1e-3) {
    const auto G_at = [&](const Vec3& x) {
        return quadratic_source_G<double>(fd_gradient(v1, x, h), fd_gradient(v2, x, h), m.moduli(x));
    };
    DivergenceIdentityReport r;
    double mag = 0.0;
    for (const auto& q : ball_quadrature(dom, order)) {
        Vec3 divG = Vec3::Zero();
        for (int j = 0; j < 3; ++j) {
            const Vec3 e = Vec3::Unit(j) * h;
            divG += (G_at(q.x - 2.0 * e) - 8.0 * G_at(q.x - e) + 8.0 * G_at(q.x + e) - G_at(q.x + 2.0 * e)).col(j) /
                    (12.0 * h);
        }
        const Vec3 u0 = v0(q.x);
        const double dv = q.w * u0.dot(divG);
        const double dd = q.w * interaction_density<double>(fd_gradient(v1, q.x, h), fd_gradient(v2, q.x, h),
                                                            fd_gradient(v0, q.x, h), m.moduli(q.x));
        r.volume_divergence += dv;
        r.volume_density += dd;
        mag += std::abs(dv) + std::abs(dd);
    }
    for (const auto& q : sphere_quadrature(dom, order)) {
        const double db = q.w * v0(q.x).dot(G_at(q.x) * q.normal);
        r.boundary += db;
        mag += std::abs(db);
    }
    r.residual = std::abs(r.volume_divergence - r.boundary + r.volume_density) / std::max(mag, 1e-300);
    return r;
}

/// Coefficient a making a zeta1 + zeta0 S-null, with tau1 = cS and tau0 = -cP.
inline double ssp_coefficient(double cos_psi, double cP, double cS) {
    if (!(cS > 0.0) || !(cP > cS)) throw std::invalid_argument("ssp_coefficient: need cP > cS > 0");
    return (cP * cP - cS * cS) / (2.0 * (cS * cS * cos_psi + cS * cP));
}

struct SspDirections {
    double a = 0.0;
    Vec3 xi2_raw;
    Vec3 xi2_unit;
    double null_residual = 0.0;
};

inline SspDirections build_ssp_directions(const Vec3& xi1, const Vec3& xi0, double cP, double cS) {
    if (std::abs(xi1.norm() - 1.0) > 1e-12 || std::abs(xi0.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("build_ssp_directions: directions must be unit vectors");
    SspDirections d;
    d.a = ssp_coefficient(xi1.dot(xi0), cP, cS);
    d.xi2_raw = d.a * xi1 + xi0;
    d.xi2_unit = d.xi2_raw.normalized();
    const double lhs = std::pow(d.a * cS - cP, 2), rhs = cS * cS * d.xi2_raw.squaredNorm();
    d.null_residual = std::abs(lhs - rhs) / std::max(lhs, rhs);
    if (d.null_residual > 1e-12) {
        std::ostringstream os;
        os << "build_ssp_directions: null condition violated by " << d.null_residual;
        throw ConvergenceError(os.str());
    }
    return d;
}

enum class ConfigKind { Perp, InPlane };

inline const char* to_string(ConfigKind k) { return k == ConfigKind::Perp ? "PERP" : "INPLANE"; }

/// Directions and polarizations of two S beams and one P beam meeting at a point.
struct InteractionConfig {
    ConfigKind kind = ConfigKind::Perp;
    double cP = 0.0, cS = 0.0;
    double psi = 0.0;    // angle between xi1 and xi0
    double alpha = 0.0;  // angle between xi1 and xi2 (in-plane only)
    double a = 0.0;
    Vec3 xi1, xi2, xi0;  // xi2 unnormalized in PERP, unit in INPLANE
    Vec3 alpha1, alpha2;

    InteractionConfig rotated(const Mat3& R) const {
        InteractionConfig c = *this;
        for (Vec3* v : {&c.xi1, &c.xi2, &c.xi0, &c.alpha1, &c.alpha2}) *v = R * *v;
        return c;
    }

    InteractionConfig swapped() const {
        InteractionConfig c = *this;
        std::swap(c.xi1, c.xi2);
        std::swap(c.alpha1, c.alpha2);
        return c;
    }
};

namespace detail {

inline Vec3 quarter_turn(const Vec3& v) { return {-v[1], v[0], 0.0}; }

}  // namespace detail

/// S-S-P geometry with a shared polarization normal to the plane of the rays.
inline InteractionConfig perp_config(double psi, double cP, double cS) {
    InteractionConfig c;
    c.kind = ConfigKind::Perp;
    c.cP = cP;
    c.cS = cS;
    c.psi = psi;
    c.xi1 = Vec3(1.0, 0.0, 0.0);
    c.xi0 = Vec3(std::cos(psi), -std::sin(psi), 0.0);
    const SspDirections d = build_ssp_directions(c.xi1, c.xi0, cP, cS);
    c.a = d.a;
    c.xi2 = d.xi2_raw;
    c.alpha = std::atan2(-d.xi2_unit[1], d.xi2_unit[0]);
    c.alpha1 = c.alpha2 = Vec3(0.0, 0.0, 1.0);
    return c;
}

/// Coplanar geometry at arbitrary (psi, alpha); polarizations are the rays turned by +90 degrees.
inline InteractionConfig inplane_config(double psi, double alpha, double cP, double cS) {
    InteractionConfig c;
    c.kind = ConfigKind::InPlane;
    c.cP = cP;
    c.cS = cS;
    c.psi = psi;
    c.alpha = alpha;
    c.a = ssp_coefficient(std::cos(psi), cP, cS);
    c.xi1 = Vec3(1.0, 0.0, 0.0);
    c.xi2 = Vec3(std::cos(alpha), -std::sin(alpha), 0.0);
    c.xi0 = Vec3(std::cos(psi), -std::sin(psi), 0.0);
    c.alpha1 = detail::quarter_turn(c.xi1);
    c.alpha2 = detail::quarter_turn(c.xi2);
    return c;
}

/// Angle between xi1 and the rescaled S-null combination at a given psi.
inline double ssp_inplane_angle(double psi, double cP, double cS) {
    return std::atan2(std::sin(psi), ssp_coefficient(std::cos(psi), cP, cS) + std::cos(psi));
}

/// Largest reachable in-plane angle over psi in [0, pi], with the psi attaining it.
inline std::pair<double, double> max_ssp_inplane_angle(double cP, double cS) {
    // unimodal in psi: golden-section search
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = std::numbers::pi;
    while (hi - lo > 1e-13) {
        const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        if (ssp_inplane_angle(x1, cP, cS) < ssp_inplane_angle(x2, cP, cS)) lo = x1;
        else hi = x2;
    }
    const double psi = 0.5 * (lo + hi);
    return {ssp_inplane_angle(psi, cP, cS), psi};
}

/// Coplanar S-null geometry with the requested angle between the two S rays.
inline InteractionConfig inplane_config_for_alpha(double alpha, double cP, double cS) {
    const auto [top, psi_top] = max_ssp_inplane_angle(cP, cS);
    if (!(alpha >= 0.0) || alpha > top) {
        std::ostringstream os;
        os << "inplane_config_for_alpha: alpha = " << alpha << " outside the reachable range [0, " << top
           << "] for cP/cS = " << cP / cS;
        throw std::invalid_argument(os.str());
    }
    double lo = 0.0, hi = psi_top;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ssp_inplane_angle(mid, cP, cS) < alpha ? lo : hi) = mid;
    }
    return inplane_config(0.5 * (lo + hi), alpha, cP, cS);
}

/// Coplanar geometry whose second ray is the unit rescaling of the S-null combination.
inline InteractionConfig inplane_ssp_config(double psi, double cP, double cS) {
    return inplane_config(psi, ssp_inplane_angle(psi, cP, cS), cP, cS);
}

/// Closed form of the scaled amplitude; PERP uses the raw second direction.
inline double closed_form_scaled(const InteractionConfig& c, const Moduli& m) {
    if (c.kind == ConfigKind::Perp) {
        const double cp = std::cos(c.psi);
        return (m.lambda + m.B) * (c.a + cp) + (2.0 * m.mu + 0.5 * m.A) * (1.0 + c.a * cp) * cp;
    }
    const double ca = std::cos(c.alpha), sa = std::sin(c.alpha);
    return (m.lambda + 2.0 * m.mu + m.B + 0.5 * m.A) * ca * ca - (m.mu + m.B + 0.5 * m.A) * sa * sa;
}

/// Throws if the polarizations do not have the shape the kind promises.
inline void check_config(const InteractionConfig& c, double tol = 1e-10) {
    const auto fail = [&](const std::string& why) {
        throw std::invalid_argument(std::string("interaction config (") + to_string(c.kind) + "): " + why);
    };
    if (std::abs(c.alpha1.norm() - 1.0) > tol || std::abs(c.alpha2.norm() - 1.0) > tol)
        fail("polarizations must be unit vectors");
    if (std::abs(c.alpha1.dot(c.xi1)) > tol || std::abs(c.alpha2.dot(c.xi2)) > tol * c.xi2.norm())
        fail("polarizations must be transverse to their rays");
    if (c.kind == ConfigKind::Perp) {
        if ((c.alpha1 - c.alpha2).norm() > tol) fail("both S beams must share one polarization");
        if (std::abs(c.alpha1.dot(c.xi0)) > tol) fail("polarization must be normal to the ray plane");
    } else {
        Vec3 n = c.xi1.cross(c.xi2);
        if (n.norm() < 1e-8) n = c.xi1.cross(c.xi0);
        if (n.norm() < 1e-8) n = c.xi1.cross(c.alpha1);
        n.normalize();
        for (const Vec3* v : {&c.xi0, &c.xi2, &c.alpha1, &c.alpha2})
            if (std::abs(n.dot(*v)) > tol * std::max(1.0, v->norm())) fail("vectors must be coplanar");
    }
}

struct AmplitudeResult {
    cplx A;                  // amplitude with beam normalizers applied
    cplx scaled;             // A times the normalizer product
    cplx observable;         // scaled without the density factor, i.e. rho^{-3/2} scaled
    double contraction = 0;  // scaled value from the rank-one contraction
    double closed = 0;       // scaled value from the closed form
};

/// Interaction amplitude for beam normalizers det Y = {S1, S2, P0}.
inline AmplitudeResult amplitude_A(const InteractionConfig& c, const Moduli& m, const std::array<cplx, 3>& detY = {1.0, 1.0, 1.0}) {
    check_config(c);
    const double cP = c.cP, cS = c.cS, rho = m.rho;
    const auto amp = [&](cplx dY, double speed) { return std::pow(dY, -0.5) * std::pow(speed, -0.5) * std::pow(rho, -0.5); };
    const Grad3<cplx> d1 = (amp(detY[0], cS) * (c.alpha1 / cS)) * (c.xi1 / cS).transpose();
    const Grad3<cplx> d2 = (amp(detY[1], cS) * (c.alpha2 / cS)) * (c.xi2 / cS).transpose();
    const Grad3<cplx> d0 = (amp(detY[2], cP) * (c.xi0 / cP)) * (c.xi0 / cP).transpose();

    AmplitudeResult r;
    r.A = interaction_density<cplx>(d1, d2, d0, m);
    const cplx norm = std::sqrt(detY[0]) * std::sqrt(detY[1]) * std::sqrt(detY[2]) * std::pow(cP, 2.5) *
                      std::pow(cS, 5.0);
    r.observable = r.A * norm;
    r.scaled = r.observable * std::pow(rho, 1.5);
    r.contraction = interaction_density<double>(c.alpha1 * c.xi1.transpose(), c.alpha2 * c.xi2.transpose(),
                                                c.xi0 * c.xi0.transpose(), m);
    r.closed = closed_form_scaled(c, m);
    if (std::abs(r.contraction - r.closed) > 1e-8 * (1.0 + std::abs(r.closed))) {
        std::ostringstream os;
        os << "amplitude_A: contraction " << r.contraction << " disagrees with closed form " << r.closed;
        throw std::logic_error(os.str());
    }
    return r;
}

}  // namespace nlwave
