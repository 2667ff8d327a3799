#pragma once

#include "nlwave/beams.hpp"
#include "nlwave/interaction.hpp"
#include "nlwave/medium_io.hpp"
#include "nlwave/recovery.hpp"
#include "nlwave/reflection.hpp"
#include "nlwave/riccati.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace nlwave {

struct CheckResult {
    std::string name;
    std::size_t cases = 0;
    double worst = 0.0;  // largest error over all cases
    double tol = 0.0;
    bool passed = false;
};

/// Runs case(rng, i) for i < n in fixed chunks, each chunk with its own generator
/// seeded from (seed, stream, chunk), and reduces the chunk maxima in chunk order.
/// The result does not depend on the number of threads.
inline double parallel_worst(std::size_t n, unsigned jobs, std::uint64_t seed, std::uint32_t stream,
                             const std::function<double(std::mt19937_64&, std::size_t)>& each,
                             std::size_t chunk = 16) {
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<double> worst(n_chunks, 0.0);
    std::vector<std::exception_ptr> errors(n_chunks);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n_chunks; k = next++) {
            try {
                std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                                 static_cast<std::uint32_t>(k)};
                std::mt19937_64 rng(sq);
                double w = 0.0;
                for (std::size_t i = k * chunk; i < std::min(n, (k + 1) * chunk); ++i) {
                    const double e = each(rng, i);
                    // NaN counts as a failure
                    w = std::isnan(e) || std::isnan(w) ? std::numeric_limits<double>::quiet_NaN() : std::max(w, e);
                }
                worst[k] = w;
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned t = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n_chunks)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < t; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    double w = 0.0;
    for (std::size_t k = 0; k < n_chunks; ++k) {
        if (errors[k]) std::rethrow_exception(errors[k]);
        w = std::isnan(worst[k]) || std::isnan(w) ? std::numeric_limits<double>::quiet_NaN() : std::max(w, worst[k]);
    }
    return w;
}

namespace detail {

inline CheckResult finish(std::string name, std::size_t n, double worst, double tol) {
    return {std::move(name), n, worst, tol, !std::isnan(worst) && worst < tol};
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Vec3 v;
    do v = Vec3(n(rng), n(rng), n(rng));
    while (v.norm() < 1e-6);
    return v.normalized();
}

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

/// Text of a smooth random medium on the unit ball: each coefficient is a mean plus a small
/// trigonometric perturbation, so lambda + mu, mu and rho stay positive.
inline std::string random_medium_text(std::mt19937_64& rng) {
    using detail::num;
    using detail::uniform;
    auto wave = [&](double amp) {
        const Vec3 k = detail::random_unit(rng) * uniform(rng, 0.5, 1.5);
        std::ostringstream os;
        os << num(amp) << "*sin(" << num(k[0]) << "*x1 + " << num(k[1]) << "*x2 + " << num(k[2]) << "*x3 + "
           << num(uniform(rng, 0.0, 6.28)) << ")";
        return os.str();
    };
    std::ostringstream os;
    const double mu = uniform(rng, 0.6, 1.5);
    os << "lambda = " << num(uniform(rng, 0.5, 3.0)) << " + " << wave(uniform(rng, 0.0, 0.3)) << "\n";
    os << "mu = " << num(mu) << " + " << wave(uniform(rng, 0.0, 0.2 * mu)) << "\n";
    os << "rho = " << num(uniform(rng, 0.7, 1.6)) << " + " << wave(uniform(rng, 0.0, 0.15)) << "\n";
    os << "A = " << num(uniform(rng, -1.0, 1.0)) << " + " << wave(uniform(rng, 0.0, 0.3)) << "\n";
    os << "B = " << num(uniform(rng, -1.0, 1.0)) << " + " << wave(uniform(rng, 0.0, 0.3)) << "\n";
    os << "C = " << num(uniform(rng, -1.0, 1.0)) << "\n";
    return os.str();
}

inline Moduli random_moduli(std::mt19937_64& rng) {
    const double mu = detail::uniform(rng, 0.3, 2.3);
    const double lambda = -0.6 * mu + detail::uniform(rng, 0.0, 3.0);
    return {lambda, mu, detail::uniform(rng, 0.5, 2.5), detail::uniform(rng, -2.0, 2.0), detail::uniform(rng, -2.0, 2.0),
            detail::uniform(rng, -2.0, 2.0)};
}

/// Relative drift of det(Im H)|det Y|^2 along rays through random media.
inline CheckResult check_riccati_conservation(std::uint64_t seed, unsigned jobs, std::size_t n = 24) {
    const auto dom = make_ball();
    const double w = parallel_worst(n, jobs, seed, 1, [&](std::mt19937_64& rng, std::size_t i) {
        const IsotropicMedium m = parse_medium_text(random_medium_text(rng));
        const WaveMode mode = i % 2 ? WaveMode::P : WaveMode::S;
        const Vec3 x0 = detail::random_unit(rng) * detail::uniform(rng, 0.0, 0.4);
        const GeodesicPath g = trace_geodesic(m, mode, x0, detail::random_unit(rng), *dom);
        ParallelFrame f = parallel_transport(g);
        const double a = std::numbers::sqrt2 * g.s_min(), b = std::numbers::sqrt2 * g.s_max();
        CMat3 H0 = cplx(0.0, 1.0) * CMat3::Identity();
        H0(1, 2) = H0(2, 1) = cplx(detail::uniform(rng, -0.5, 0.5), detail::uniform(rng, -0.2, 0.2));
        const RiccatiEvolution r = evolve_yz(build_D_along_ray(f), CMat3::Identity(), H0, a, b, 0.0);
        return r.diagnostics().max_conservation_drift;
    });
    return detail::finish("riccati conservation", n, w, 1e-8);
}

/// Reflection matrix invertibility and the reduced determinant for xi2 = 0.
inline CheckResult check_reflection_determinant(std::uint64_t seed, unsigned jobs, std::size_t n = 10000) {
    const double w = parallel_worst(n, jobs, seed, 2, [](std::mt19937_64& rng, std::size_t) {
        const Moduli m = random_moduli(rng);
        const double theta = detail::uniform(rng, 0.0, 1.55), phi = detail::uniform(rng, 0.0, 6.28);
        // generic incidence: the matrix must be well conditioned
        const Vec3 xi = Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)) / m.cP();
        const auto s = snell_reflect(xi, WaveMode::P, m.cP(), m.cS());
        const CMat4 M = assemble_MP(xi[0], xi[1], xi[2], s.xi_S3, m.lambda, m.mu, m.rho);
        double hadamard = 1.0;
        for (int r = 0; r < 4; ++r) hadamard *= M.row(r).norm();
        if (!(std::abs(M.determinant()) > 1e-8 * hadamard)) return std::numeric_limits<double>::infinity();
        // sagittal incidence: reduced 2x2 determinant
        const double x1 = std::sin(theta) / m.cP() * (phi < 3.14 ? 1.0 : -1.0), x3 = std::cos(theta) / m.cP();
        const auto s2 = snell_reflect(Vec3(x1, 0.0, x3), WaveMode::P, m.cP(), m.cS());
        const CMat4 M2 = assemble_MP(x1, 0.0, x3, s2.xi_S3, m.lambda, m.mu, m.rho);
        const double closed = reduced_determinant(x1, x3, s2.xi_S3, m.mu);
        return std::abs(reduced_block(M2, s2.xi_S3, x1, m.cS()).determinant() - closed) / std::abs(closed);
    });
    return detail::finish("reflection determinant", n, w, 1e-10);
}

/// Stress of a plane wave with slowness xi and amplitude a, contracted with e3.
inline CVec3 plane_wave_traction(const CVec3& xi, const CVec3& a, double lambda, double mu) {
    const CMat3 grad = a * xi.transpose();
    const CMat3 eps = 0.5 * (grad + grad.transpose());
    const CMat3 S = lambda * eps.trace() * CMat3::Identity() + 2.0 * mu * eps;
    return S.col(2);
}

/// Leading boundary traction of incident plus reflected waves, relative to the incident one.
inline double traction_ratio(const ReflectionCoefficients& r, const Moduli& m) {
    const CVec3 inc = plane_wave_traction(r.snell.xi_in.cast<cplx>(), r.incident_amplitude(), m.lambda, m.mu);
    const CVec3 total = inc + plane_wave_traction(r.snell.xi_P, r.reflected_P_amplitude(), m.lambda, m.mu) +
                        plane_wave_traction(r.snell.xi_S.cast<cplx>(), r.a_S_minus, m.lambda, m.mu);
    return total.norm() / inc.norm();
}

inline CheckResult check_traction_cancellation(std::uint64_t seed, unsigned jobs, std::size_t n = 1000) {
    const double w = parallel_worst(n, jobs, seed, 3, [](std::mt19937_64& rng, std::size_t i) {
        const Moduli m = random_moduli(rng);
        const double theta = detail::uniform(rng, 0.0, 1.5), phi = detail::uniform(rng, 0.0, 6.28);
        const Vec3 u(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
        const cplx c1(detail::uniform(rng, -1, 1), detail::uniform(rng, -1, 1));
        if (i % 2 == 0) return traction_ratio(solve_p_incidence(c1, u / m.cP(), m), m);
        const Vec3 xi = u / m.cS();
        const Vec3 e = any_orthogonal(u).normalized(), f = u.cross(e);
        const cplx c2(detail::uniform(rng, -1, 1), detail::uniform(rng, -1, 1));
        return traction_ratio(solve_s_incidence(c1 * e.cast<cplx>() + c2 * f.cast<cplx>(), xi, m), m);
    });
    return detail::finish("traction cancellation", n, w, 1e-10);
}

/// Random quadratic vector field a + B x + (x^T Q_i x)_i.
struct QuadraticField {
    Vec3 a;
    Mat3 B;
    std::array<Mat3, 3> Q;

    static QuadraticField random(std::mt19937_64& rng) {
        QuadraticField f;
        auto u = [&] { return detail::uniform(rng, -1.0, 1.0); };
        f.a = Vec3(u(), u(), u());
        for (int i = 0; i < 9; ++i) f.B(i / 3, i % 3) = u();
        for (auto& q : f.Q)
            for (int i = 0; i < 9; ++i) q(i / 3, i % 3) = u();
        return f;
    }
    Vec3 operator()(const Vec3& x) const {
        return a + B * x + Vec3(x.dot(Q[0] * x), x.dot(Q[1] * x), x.dot(Q[2] * x));
    }
};

/// Volume form of the interaction integral against its boundary form, polynomial fields on random ellipsoids.
inline CheckResult check_divergence_identity(std::uint64_t seed, unsigned jobs, std::size_t n = 12) {
    const double w = parallel_worst(
        n, jobs, seed, 4,
        [](std::mt19937_64& rng, std::size_t) {
            const Moduli mo = random_moduli(rng);
            const Vec3 c = detail::random_unit(rng) * detail::uniform(rng, 0.0, 0.3);
            const Vec3 ax(detail::uniform(rng, 0.5, 1.2), detail::uniform(rng, 0.5, 1.2), detail::uniform(rng, 0.5, 1.2));
            const auto dom = make_ellipsoid(c, ax);
            const QuadraticField f1 = QuadraticField::random(rng), f2 = QuadraticField::random(rng),
                                 f0 = QuadraticField::random(rng);
            return divergence_identity_check(f1, f2, f0, IsotropicMedium::constant(mo), *dom, 8).residual;
        },
        1);
    return detail::finish("divergence identity", n, w, 1e-6);
}

/// G(d1, d2) : d0 against the scalar density, real gradients.
inline CheckResult check_contraction_identity(std::uint64_t seed, unsigned jobs, std::size_t n = 1000) {
    const double w = parallel_worst(n, jobs, seed, 5, [](std::mt19937_64& rng, std::size_t) {
        const Moduli m = random_moduli(rng);
        std::array<Mat3, 3> d;
        for (auto& g : d)
            for (int i = 0; i < 9; ++i) g(i / 3, i % 3) = detail::uniform(rng, -1.0, 1.0);
        const double lhs = interaction_density<double>(d[0], d[1], d[2], m);
        const Mat3 G = quadratic_source_G<double>(d[0], d[1], m);
        const double rhs = (G.array() * d[2].array()).sum();
        double scale = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) scale += std::abs(G(i, j) * d[2](i, j));
        return std::abs(lhs - rhs) / std::max(scale, 1e-300);
    });
    return detail::finish("contraction identity", n, w, 1e-12);
}

/// General contraction against the closed forms over rotated configurations and complex normalizers.
inline CheckResult check_amplitude_closed_forms(std::uint64_t seed, unsigned jobs, std::size_t n = 1000) {
    const double w = parallel_worst(n, jobs, seed, 6, [](std::mt19937_64& rng, std::size_t i) {
        const Moduli m = random_moduli(rng);
        const double cP = m.cP(), cS = m.cS();
        InteractionConfig c;
        if (i % 2 == 0) {
            c = perp_config(detail::uniform(rng, 0.05, std::numbers::pi - 0.05), cP, cS);
        } else {
            const double top = max_ssp_inplane_angle(cP, cS).first;
            c = inplane_config_for_alpha(detail::uniform(rng, 0.02, 0.98) * top, cP, cS);
        }
        Eigen::Quaterniond q(detail::uniform(rng, -1, 1), detail::uniform(rng, -1, 1), detail::uniform(rng, -1, 1),
                             detail::uniform(rng, -1, 1));
        q.normalize();
        c = c.rotated(q.toRotationMatrix());
        std::array<cplx, 3> detY;
        for (auto& z : detY) z = std::polar(detail::uniform(rng, 0.5, 2.0), detail::uniform(rng, -1.5, 1.5));
        const AmplitudeResult a = amplitude_A(c, m, detY);
        return std::abs(a.contraction - a.closed) / std::max(std::abs(a.closed), 1e-3);
    });
    return detail::finish("closed-form amplitude", n, w, 1e-10);
}

/// Transport residual of S and P beams through random media at interior axis points.
inline CheckResult check_transport(std::uint64_t seed, unsigned jobs, std::size_t n = 12) {
    const auto dom = make_ball();
    const double w = parallel_worst(
        n, jobs, seed, 7,
        [&](std::mt19937_64& rng, std::size_t i) {
            const IsotropicMedium m = parse_medium_text(random_medium_text(rng));
            BeamOptions o;
            o.delta = 0.2;
            o.c2 = cplx(detail::uniform(rng, 0.5, 1.0), detail::uniform(rng, -0.5, 0.5));
            o.c3 = cplx(detail::uniform(rng, -0.5, 0.5), detail::uniform(rng, -0.5, 0.5));
            const Vec3 x0 = detail::random_unit(rng) * detail::uniform(rng, 0.0, 0.3);
            const auto b = GaussianBeam::build(m, i % 2 ? WaveMode::P : WaveMode::S, x0, detail::random_unit(rng), *dom, o);
            double worst = 0.0;
            for (int k = 1; k <= 5; ++k) {
                const double tau = b.tau_min() + 0.05 + (b.tau_max() - b.tau_min() - 0.1) * k / 6.0;
                worst = std::max(worst, b.transport_residual(tau));
            }
            return worst;
        },
        1);
    return detail::finish("transport residual", n, w, 1e-6);
}

/// Synthesize, fit and assemble at random points of random media.
inline CheckResult check_recovery(std::uint64_t seed, unsigned jobs, std::size_t n = 20) {
    const double w = parallel_worst(
        n, jobs, seed, 8,
        [](std::mt19937_64& rng, std::size_t) {
            const IsotropicMedium m = parse_medium_text(random_medium_text(rng));
            const Vec3 x0 = detail::random_unit(rng) * detail::uniform(rng, 0.0, 0.8);
            return end_to_end_recover(m, x0).max_rel_error;
        },
        4);
    return detail::finish("recovery round trip", n, w, 1e-9);
}

/// The suite run by the command-line `check`.
inline std::vector<CheckResult> run_invariant_suite(std::uint64_t seed, unsigned jobs) {
    return {check_riccati_conservation(seed, jobs), check_reflection_determinant(seed, jobs), check_traction_cancellation(seed, jobs),
            check_divergence_identity(seed, jobs), check_recovery(seed, jobs)};
}

}  // namespace nlwave
