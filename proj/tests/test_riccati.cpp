#include <gtest/gtest.h>

#include "nlwave/fermi.hpp"
#include "nlwave/medium_io.hpp"
#include "nlwave/riccati.hpp"
#include "oracles/geometry_oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace nlwave;

namespace {

const cplx I(0.0, 1.0);

IsotropicMedium wavy_medium() {
    return parse_medium_text("lambda = 2 + 0.3*sin(x1 + x2)\n"
                             "mu = 1 + 0.2*cos(1.3*x1 - 0.7*x3) + 0.1*x2*x2\n"
                             "rho = 1 + 0.15*sin(0.9*x2 + 0.4*x3)\n");
}

struct Ray {
    FermiChart chart;
    RiccatiEvolution ric;
};

Ray build_ray(const IsotropicMedium& m, WaveMode mode, const Vec3& x0, const Vec3& d, bool with_curvature = true) {
    auto dom = make_ball();
    GeodesicPath g = trace_geodesic(m, mode, x0, d, *dom);
    ParallelFrame f = parallel_transport(g);
    const double a = std::numbers::sqrt2 * g.s_min(), b = std::numbers::sqrt2 * g.s_max();
    DFunction D = with_curvature ? build_D_along_ray(f) : DFunction([](double) { return Mat3::Zero().eval(); });
    RiccatiEvolution r = evolve_yz(D, CMat3::Identity(), I * CMat3::Identity(), a, b, 0.0);
    return {FermiChart(std::move(g), std::move(f)), std::move(r)};
}

}  // namespace

// ============================================================================
// Closed forms and invariants
// ============================================================================

TEST(Riccati, FlatClosedForm) {
    const auto r = evolve_yz([](double) { return Mat3::Zero().eval(); }, CMat3::Identity(), I * CMat3::Identity(),
                             -1.0, 2.0, 0.0);
    for (double tau : {-0.9, 0.0, 0.37, 1.5, 2.0}) {
        const YZSample s = r.at(tau);
        CMat3 expect = CMat3::Identity();
        expect(1, 1) = expect(2, 2) = 1.0 + 2.0 * I * tau;
        EXPECT_LT((s.Y - expect).norm(), 1e-12) << tau;
        EXPECT_LT((s.Z - I * CMat3::Identity()).norm(), 1e-12);
    }
    const auto d = r.diagnostics();
    EXPECT_LT(d.max_conservation_drift, 1e-12);
    EXPECT_LT(d.max_asymmetry, 1e-14);
    EXPECT_GT(d.min_imag_eigenvalue, 0.0);
}

TEST(Riccati, InvariantsAlongCurvedRay) {
    const Ray ray = build_ray(wavy_medium(), WaveMode::S, Vec3(0.1, -0.2, 0.1), Vec3(0.6, 1, -0.2));
    const auto d = ray.ric.diagnostics();
    EXPECT_LT(d.max_conservation_drift, 1e-8);
    EXPECT_LT(d.max_asymmetry, 1e-10);
    EXPECT_GT(d.min_imag_eigenvalue, 0.0);
    EXPECT_LT(d.max_condition_Y, 1e6);
}

TEST(Riccati, RejectsBadInitialData) {
    auto D = [](double) { return Mat3::Zero().eval(); };
    EXPECT_THROW(evolve_yz(D, CMat3::Zero(), I * CMat3::Identity(), 0, 1, 0), std::invalid_argument);
    CMat3 H = I * CMat3::Identity();
    H(0, 1) = 0.3;
    EXPECT_THROW(evolve_yz(D, CMat3::Identity(), H, 0, 1, 0), std::invalid_argument);
    EXPECT_THROW(evolve_yz(D, CMat3::Identity(), -I * CMat3::Identity(), 0, 1, 0), std::invalid_argument);
}

// ============================================================================
// Curvature coefficient against the Riemann tensor built from Christoffel symbols
// ============================================================================

TEST(Riccati, CurvatureMatchesRiemannOracle) {
    const auto m = wavy_medium();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N;
    for (int trial = 0; trial < 8; ++trial) {
        const Vec3 x = 0.5 * Vec3(N(rng), N(rng), N(rng)) / 2.0;
        const Vec3 u = Vec3(N(rng), N(rng), N(rng)).normalized();
        const Vec3 e2 = any_orthogonal(u), e3 = u.cross(e2);
        for (WaveMode mode : {WaveMode::P, WaveMode::S}) {
            const Jet c = m.wavespeed_jet(x, mode);
            const Mat3 D = curvature_D(c, u, e2, e3);
            const Vec3 e[2] = {e2, e3};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const double ref = 0.25 * oracle::jacobi_operator(m, mode, x, c.v * e[a], c.v * u, c.v * e[b]);
                    EXPECT_NEAR(D(1 + a, 1 + b), ref, 1e-6);
                }
            EXPECT_EQ(D.row(0).norm(), 0.0);
            EXPECT_EQ(D.col(0).norm(), 0.0);
        }
    }
}

TEST(Riccati, StereographicSphereHasUnitCurvature) {
    // g = 4 / (1 + |x|^2)^2 delta is the round unit sphere, c = (1 + |x|^2) / 2.
    const auto m = parse_medium_text("lambda = 0\nmu = ((1 + x1^2 + x2^2 + x3^2)/2)^2\nrho = 1\n");
    for (const Vec3& x : {Vec3(0, 0, 0), Vec3(0.3, -0.2, 0.5)}) {
        const Vec3 u = Vec3(1, 2, -1).normalized();
        const Vec3 e2 = any_orthogonal(u), e3 = u.cross(e2);
        const Mat3 D = curvature_D(m.wavespeed_jet(x, WaveMode::S), u, e2, e3);
        EXPECT_NEAR(D(1, 1), 0.25, 1e-13);
        EXPECT_NEAR(D(2, 2), 0.25, 1e-13);
        EXPECT_NEAR(D(1, 2), 0.0, 1e-13);
    }
}

// ============================================================================
// The phase r + z'H z' solves the eikonal equation to third order on the axis
// ============================================================================

namespace {

// |c^2 |grad_x phi|^2 - phi_t^2| at the point with rotated coordinates (tau, z').
double eikonal_residual(const Ray& ray, const IsotropicMedium& m, WaveMode mode, double tau, const Vec3& zp) {
    const FermiChart& ch = ray.chart;
    const FermiPoint q = ch.unrotate({tau, zp[0], zp[1], zp[2]});
    const CMat3 H = ray.ric.H_at(tau);
    const Mat3 D = ray.ric.D()(tau);
    const CMat3 dH = -H * riccati_C().cast<cplx>() * H - D.cast<cplx>();
    const CVec3 z = zp.cast<cplx>();
    const CVec3 Hz = H * z;
    const cplx dphi_dtau = (z.transpose() * dH * z)(0, 0);
    const cplx dphi_dr = 1.0 + 2.0 * Hz[0];
    // phi(t, s, y) through tau = (t - t0 + s)/sqrt2 and r = (s - t + t0)/sqrt2.
    const double k = 1.0 / std::numbers::sqrt2;
    const cplx phi_t = k * (dphi_dtau - dphi_dr);
    const CVec3 grad_sy(k * (dphi_dtau + dphi_dr), 2.0 * Hz[1], 2.0 * Hz[2]);
    const double h = 1e-5;
    Mat3 J;
    for (int i = 0; i < 3; ++i) {
        Vec3 a(q.s, q.y2, q.y3), b = a;
        a[i] += h;
        b[i] -= h;
        J.col(i) = (ch.spatial_point(a[0], a[1], a[2]) - ch.spatial_point(b[0], b[1], b[2])) / (2 * h);
    }
    const CVec3 grad_x = J.transpose().cast<cplx>().fullPivLu().solve(grad_sy);
    const double c = m.wavespeed(ch.spatial_point(q.s, q.y2, q.y3), mode);
    return std::abs(c * c * grad_x.cwiseProduct(grad_x).sum() - phi_t * phi_t);
}

}  // namespace

TEST(Riccati, EikonalResidualIsThirdOrder) {
    const auto m = wavy_medium();
    const Ray ray = build_ray(m, WaveMode::S, Vec3(0.1, -0.2, 0.1), Vec3(0.6, 1, -0.2));
    const Ray flat = build_ray(m, WaveMode::S, Vec3(0.1, -0.2, 0.1), Vec3(0.6, 1, -0.2), false);
    const Vec3 dir = Vec3(0.2, 1.0, -0.7).normalized();
    for (double tau : {-0.3, 0.4}) {
        const double e1 = eikonal_residual(ray, m, WaveMode::S, tau, 0.01 * dir);
        const double e2 = eikonal_residual(ray, m, WaveMode::S, tau, 0.005 * dir);
        EXPECT_GT(std::log2(e1 / e2), 2.8) << tau;
        // Without the curvature term the residual is only second order.
        const double f1 = eikonal_residual(flat, m, WaveMode::S, tau, 0.005 * dir);
        const double f2 = eikonal_residual(flat, m, WaveMode::S, tau, 0.0025 * dir);
        EXPECT_LT(std::log2(f1 / f2), 2.4) << tau;
    }
}
