#include "nlwave/beams.hpp"
#include "nlwave/medium_io.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nlwave;

namespace {

const char* kWavy =
    "lambda = 2 + 0.3*sin(x1 + x2)\n"
    "mu = 1 + 0.2*cos(1.3*x1 - 0.7*x3) + 0.1*x2*x2\n"
    "rho = 1 + 0.15*sin(0.9*x2 + 0.4*x3)\n";

IsotropicMedium unit_medium() { return IsotropicMedium::constant({2.0, 1.0, 1.0, 0.0, 0.0, 0.0}); }

GaussianBeam beam(const IsotropicMedium& m, WaveMode mode, BeamOptions o = {}) {
    if (o.delta == 0.0) o.delta = 0.2;
    return GaussianBeam::build(m, mode, Vec3(0.1, -0.1, 0.05), Vec3(1.0, 0.3, 0.1), *make_ball(), o);
}

struct AxisProbe {
    double t;
    FrameState f;
    double c;
};

AxisProbe probe(const GaussianBeam& b, double s) {
    const FrameState f = b.chart().frame().at(s);
    return {b.chart().t0() + s, f, b.path().medium().wavespeed(f.x, b.mode())};
}

CVec3 residual_at(const IsotropicMedium& m, const GaussianBeam& b, double varrho, double t, const Vec3& x,
                  double* unorm = nullptr) {
    DisplacementField u = [&](double tt, const Vec3& xx) { return b.evaluate(tt, xx, varrho); };
    const SpaceTimePoint p{t, x};
    const auto r = pde_residual(m, u, varrho, std::span<const SpaceTimePoint>(&p, 1));
    if (unorm) *unorm = r.max_u;
    return r.points[0].Lu;
}

}  // namespace

TEST(Cutoff, PlateauSupportAndShape) {
    EXPECT_EQ(cutoff_chi(0.0), 1.0);
    EXPECT_EQ(cutoff_chi(0.25), 1.0);
    EXPECT_EQ(cutoff_chi(-0.2), 1.0);
    EXPECT_EQ(cutoff_chi(0.5), 0.0);
    EXPECT_EQ(cutoff_chi(0.9), 0.0);
    EXPECT_DOUBLE_EQ(cutoff_chi(0.375), 0.5);
    double prev = 1.0;
    for (double t = 0.25; t <= 0.5; t += 0.005) {
        const double v = cutoff_chi(t);
        EXPECT_LE(v, prev + 1e-15);
        EXPECT_DOUBLE_EQ(v, cutoff_chi(-t));
        prev = v;
    }
    // Flat to all orders at the plateau edge: the one-sided difference quotient vanishes.
    EXPECT_LT(std::abs(1.0 - cutoff_chi(0.26)) / 0.01, 1e-8);
    EXPECT_LT(cutoff_chi(0.49) / 0.01, 1e-8);
}

TEST(Amplitude, SClosedFormInConstantMedium) {
    const auto m = unit_medium();
    const auto b = beam(m, WaveMode::S);
    for (double tau : {-0.4, 0.0, 0.3, 0.9}) {
        const cplx expect = 1.0 / cplx(1.0, 2.0 * tau);
        EXPECT_LT(std::abs(b.amplitude(0)(tau) - expect), 1e-10) << tau;
        EXPECT_EQ(std::abs(b.amplitude(1)(tau)), 0.0);
    }
}

TEST(Amplitude, PClosedFormInConstantMedium) {
    const auto m = IsotropicMedium::constant({2.0, 1.0, 2.0, 0.0, 0.0, 0.0});
    BeamOptions o;
    o.cP = cplx(0.7, -0.2);
    const auto b = beam(m, WaveMode::P, o);
    const double cP = std::sqrt(2.0), rho = 2.0;
    for (double tau : {-0.3, 0.0, 0.5}) {
        const cplx expect = o.cP / cplx(1.0, 2.0 * tau) / std::sqrt(cP * rho);
        EXPECT_LT(std::abs(b.amplitude(0)(tau) - expect), 1e-10) << tau;
    }
}

TEST(Amplitude, ZeroConstantsGiveZeroField) {
    const auto m = parse_medium_text(kWavy);
    BeamOptions o;
    o.c2 = 0.0;
    o.c3 = 0.0;
    const auto b = beam(m, WaveMode::S, o);
    const AxisProbe a = probe(b, 0.2);
    EXPECT_EQ(b.axis_amplitude(0.2 * std::numbers::sqrt2).norm(), 0.0);
    EXPECT_EQ(b.evaluate(a.t, a.f.x, 50.0).norm(), 0.0);
}

TEST(Amplitude, TransportResidualInAnalyticMedia) {
    const auto m = parse_medium_text(kWavy);
    BeamOptions o;
    o.c2 = cplx(1.0, 0.5);
    o.c3 = cplx(-0.3, 0.2);
    for (WaveMode mode : {WaveMode::S, WaveMode::P}) {
        const auto b = beam(m, mode, o);
        for (double tau : {-0.5, -0.1, 0.2, 0.6, 1.0}) {
            if (tau < b.tau_min() + 0.01 || tau > b.tau_max() - 0.01) continue;
            EXPECT_LT(b.transport_residual(tau), 1e-6) << to_string(mode) << " tau " << tau;
        }
    }
}

TEST(Amplitude, SquareRootBranchFollowsTheWinding) {
    // H0 = (-1 + i) I makes arg det Y sweep past pi along the ray; the
    // continued root must stay equal to (1 + 2 tau (-1 + i))^-1 throughout.
    const auto m = unit_medium();
    BeamOptions o;
    o.H0 = cplx(-1.0, 1.0) * CMat3::Identity();
    const auto b = GaussianBeam::build(m, WaveMode::S, Vec3::Zero(), Vec3(1, 0, 0), *make_ball(), o);
    double swept = 0.0;
    for (double tau = 0.0; tau < b.tau_max(); tau += 0.01) {
        const cplx expect = 1.0 / (1.0 + 2.0 * tau * cplx(-1.0, 1.0));
        ASSERT_LT(std::abs(b.amplitude(0)(tau) - expect), 1e-9) << tau;
        swept = std::max(swept, b.amplitude(0).branch().phase(tau));
    }
    EXPECT_GT(swept, std::numbers::pi);
}

TEST(Evaluate, OnAxisEqualsAxisAmplitudeWithPolarization) {
    const auto m = parse_medium_text(kWavy);
    BeamOptions o;
    o.c2 = cplx(0.4, 0.1);
    o.c3 = cplx(0.2, -0.6);
    for (WaveMode mode : {WaveMode::S, WaveMode::P}) {
        const auto b = beam(m, mode, o);
        for (double s : {-0.2, 0.1, 0.4}) {
            const AxisProbe a = probe(b, s);
            const double tau = s * std::numbers::sqrt2;
            const CVec3 u = b.evaluate(a.t, a.f.x, 80.0);
            const CVec3 ax = b.axis_amplitude(tau);
            EXPECT_LT((u - ax).norm(), 1e-9 * ax.norm()) << to_string(mode);
            const CVec3 v = a.f.tangent(a.c).normalized().cast<cplx>();
            if (mode == WaveMode::S) {
                EXPECT_LT(std::abs(v.dot(ax)), 1e-14 * ax.norm());
                EXPECT_LT(std::abs(v.dot(u)), 1e-9 * u.norm());
            } else {
                EXPECT_LT((ax - v.dot(ax) * v).norm(), 1e-14 * ax.norm());
                EXPECT_LT((u - v.dot(u) * v).norm(), 1e-9 * u.norm());
            }
        }
    }
}

TEST(Evaluate, PhaseGradientAndPolarizationOffAxis) {
    const auto m = parse_medium_text(kWavy);
    BeamOptions o;
    o.c2 = cplx(0.4, 0.1);
    o.c3 = cplx(0.2, -0.6);
    for (WaveMode mode : {WaveMode::S, WaveMode::P}) {
        const auto b = beam(m, mode, o);
        const AxisProbe a = probe(b, 0.15);
        const Vec3 x = a.f.x + 0.02 * a.f.e2 / a.c - 0.015 * a.f.e3 / a.c;
        const double t = a.t + 0.01;
        const auto L = b.locate(t, x);
        ASSERT_TRUE(L.inside);
        const double h = 1e-5;
        CVec3 fd;
        for (int k = 0; k < 3; ++k) {
            Vec3 e = Vec3::Zero();
            e[k] = h;
            fd[k] = (b.locate(t, x + e).phase - b.locate(t, x - e).phase) / (2 * h);
        }
        EXPECT_LT((fd - L.grad_phase).norm(), 1e-7 * L.grad_phase.norm()) << to_string(mode);
        const CVec3& g = L.grad_phase;
        if (mode == WaveMode::S) {
            EXPECT_LT(std::abs((L.amplitude.transpose() * g)(0, 0)), 1e-12 * L.amplitude.norm() * g.norm());
        } else {
            const CVec3 cross(L.amplitude[1] * g[2] - L.amplitude[2] * g[1], L.amplitude[2] * g[0] - L.amplitude[0] * g[2],
                              L.amplitude[0] * g[1] - L.amplitude[1] * g[0]);
            EXPECT_LT(cross.norm(), 1e-12 * L.amplitude.norm() * g.norm());
        }
    }
}

TEST(Evaluate, OutsideTheCutoffIsZero) {
    const auto m = unit_medium();
    const auto b = beam(m, WaveMode::S);
    const AxisProbe a = probe(b, 0.1);
    const double delta = b.chart().delta();
    EXPECT_EQ(b.evaluate(a.t, a.f.x + 0.5 * delta * a.f.e2 / a.c, 10.0).norm(), 0.0);
    EXPECT_EQ(b.evaluate(a.t, a.f.x + 0.7 * delta * a.f.e3 / a.c, 10.0).norm(), 0.0);
    EXPECT_EQ(b.evaluate(a.t, Vec3(0.9, -0.9, 0.0), 10.0).norm(), 0.0);
    EXPECT_GT(b.evaluate(a.t, a.f.x + 0.2 * delta * a.f.e3 / a.c, 10.0).norm(), 0.0);
}

TEST(Evaluate, GaussianProfileWithUnitImaginaryPart) {
    // At tau = 0, H = i I, so |u| = |a0| exp(-varrho |z'|^2) chi(|z'| / delta);
    // the offset is along e3, orthogonal to the e2 polarization.
    const auto m = unit_medium();
    const auto b = beam(m, WaveMode::S);
    const AxisProbe a = probe(b, 0.0);
    const double delta = b.chart().delta(), varrho = 40.0;
    const double a0 = std::abs(b.amplitude(0)(0.0));
    for (double z : {0.0, 0.02, 0.05, 0.08, 0.11}) {
        const CVec3 u = b.evaluate(a.t, a.f.x + z * a.f.e3 / a.c, varrho);
        const double expect = a0 * std::exp(-varrho * z * z) * cutoff_chi(z / delta);
        EXPECT_NEAR(u.norm(), expect, 1e-10) << z;
    }
}

TEST(PdeResidual, PlaneWaveIsAnExactSolution) {
    const auto m = IsotropicMedium::constant({2.0, 1.5, 1.2, 0.0, 0.0, 0.0});
    const double varrho = 30.0;
    const Vec3 xi = Vec3(0.3, -0.5, 0.2);
    for (WaveMode mode : {WaveMode::S, WaveMode::P}) {
        const double c = m.wavespeed(Vec3::Zero(), mode);
        const double omega = c * xi.norm();
        const CVec3 alpha = mode == WaveMode::S ? CVec3(cplx(0.5, 0.1), cplx(0.3, 0.0), cplx(0.0, 0.0))
                                                : xi.cast<cplx>();
        const CVec3 pol = mode == WaveMode::S ? CVec3(alpha - (xi.cast<cplx>().dot(alpha) / xi.squaredNorm()) * xi.cast<cplx>())
                                              : alpha;
        DisplacementField u = [&](double t, const Vec3& x) {
            return CVec3(pol * std::exp(cplx(0.0, varrho * (x.dot(xi) - omega * t))));
        };
        const std::vector<SpaceTimePoint> pts = {{0.0, Vec3::Zero()}, {0.3, Vec3(0.1, 0.2, -0.3)}};
        const auto r = pde_residual(m, u, varrho, pts);
        EXPECT_LT(r.ratio, 1e-6) << to_string(mode);
        const auto bad = pde_residual(m, [&](double t, const Vec3& x) { return u(1.1 * t, x); }, varrho, pts);
        EXPECT_GT(bad.ratio, 1e-2);
    }
}

TEST(PdeResidual, OnAxisRatioShrinksWithVarrhoInConstantMedium) {
    const auto m = unit_medium();
    for (WaveMode mode : {WaveMode::S, WaveMode::P}) {
        const auto b = beam(m, mode);
        const AxisProbe a = probe(b, 0.2);
        double prev = 0.0;
        for (double varrho : {50.0, 100.0, 200.0}) {
            double un = 0.0;
            const double ratio = residual_at(m, b, varrho, a.t, a.f.x, &un).norm() / (varrho * un);
            if (prev > 0.0) EXPECT_LT(ratio, 0.6 * prev) << to_string(mode) << " " << varrho;
            prev = ratio;
        }
    }
}

TEST(PdeResidual, RatioApproachesItsAxisValueAtLeastLinearly) {
    const auto m = unit_medium();
    const double varrho = 200.0;
    for (WaveMode mode : {WaveMode::S, WaveMode::P}) {
        const auto b = beam(m, mode);
        const AxisProbe a = probe(b, 0.2);
        auto ratio = [&](double off) {
            double un = 0.0;
            const CVec3 Lu = residual_at(m, b, varrho, a.t, a.f.x + off * a.f.e2 / a.c, &un);
            return Lu.norm() / (varrho * un);
        };
        const double r0 = ratio(0.0);
        const double e1 = std::abs(ratio(0.02) - r0), e2 = std::abs(ratio(0.01) - r0), e3 = std::abs(ratio(0.005) - r0);
        EXPECT_GE(std::log2(e1 / e2), 1.0) << to_string(mode);
        EXPECT_GE(std::log2(e2 / e3), 1.0) << to_string(mode);
    }
}

TEST(PdeResidual, OnAxisRatioBoundedInVarrhoInVariableMedium) {
    const auto m = parse_medium_text(kWavy);
    for (WaveMode mode : {WaveMode::S, WaveMode::P}) {
        const auto b = beam(m, mode);
        const AxisProbe a = probe(b, 0.2);
        const Vec3 v = a.f.tangent(a.c).normalized();
        double prev = 0.0, prev_transport = 0.0;
        for (double varrho : {50.0, 100.0, 200.0}) {
            double un = 0.0;
            const CVec3 Lu = residual_at(m, b, varrho, a.t, a.f.x, &un);
            const double ratio = Lu.norm() / (varrho * un);
            // The transport law cancels the component along the polarization.
            const cplx along = v.cast<cplx>().dot(Lu);
            const double transport = (mode == WaveMode::P ? std::abs(along)
                                                          : (Lu - along * v.cast<cplx>()).norm()) /
                                     (varrho * un);
            if (prev > 0.0) {
                EXPECT_LT(ratio, 1.1 * prev) << to_string(mode) << " " << varrho;
                EXPECT_LT(transport, 0.6 * prev_transport) << to_string(mode) << " " << varrho;
            }
            prev = ratio;
            prev_transport = transport;
        }
    }
}
