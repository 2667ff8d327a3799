#include "nlwave/medium_io.hpp"
#include "nlwave/recovery.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nlwave;

namespace {

const Moduli kTruth{2.0, 1.0, 1.0, 0.3, 0.2, 0.0};

std::vector<SweepSample> closed_samples(ConfigKind kind, const Moduli& m, const std::vector<double>& angles) {
    std::vector<SweepSample> out;
    for (double a : angles) {
        const auto c = kind == ConfigKind::Perp ? perp_config(a, m.cP(), m.cS()) : inplane_config(0.3, a, m.cP(), m.cS());
        out.push_back({a, closed_form_scaled(c, m) * std::pow(m.rho, -1.5), kind});
    }
    return out;
}

}  // namespace

TEST(PsiFit, RecoversPinnedCoefficients) {
    const auto fit = fit_psi_sweep(synthesize_sweep(ConfigKind::Perp, kTruth, {0.3, 0.9, 1.5, 2.1}), 2.0, 1.0);
    EXPECT_NEAR(fit.k1, 2.2, 1e-10);
    EXPECT_NEAR(fit.k2, 4.3, 1e-10);
    EXPECT_LT(fit.residual, 1e-12);
    EXPECT_TRUE(std::isfinite(fit.condition));
    EXPECT_GT(fit.condition, 1.0);
}

TEST(PsiFit, LinearInData) {
    auto s = synthesize_sweep(ConfigKind::Perp, kTruth, {0.3, 0.9, 1.5, 2.1});
    for (auto& x : s) x.value *= 3.5;
    const auto fit = fit_psi_sweep(s, 2.0, 1.0);
    EXPECT_NEAR(fit.k1, 3.5 * 2.2, 1e-10);
    EXPECT_NEAR(fit.k2, 3.5 * 4.3, 1e-10);
}

TEST(PsiFit, TwoSamplesInterpolate) {
    const auto fit = fit_psi_sweep(closed_samples(ConfigKind::Perp, kTruth, {0.4, 1.8}), 2.0, 1.0);
    EXPECT_NEAR(fit.k1, 2.2, 1e-12);
    EXPECT_LT(fit.residual, 1e-13);
}

TEST(PsiFit, RejectsDegenerateDesigns) {
    EXPECT_THROW(fit_psi_sweep(closed_samples(ConfigKind::Perp, kTruth, {0.7}), 2.0, 1.0), RankDeficientError);
    EXPECT_THROW(fit_psi_sweep(closed_samples(ConfigKind::Perp, kTruth, {0.7, 0.7, 0.7}), 2.0, 1.0),
                 RankDeficientError);
    EXPECT_THROW(fit_psi_sweep(closed_samples(ConfigKind::InPlane, kTruth, {0.3, 0.9}), 2.0, 1.0),
                 std::invalid_argument);
}

TEST(AlphaFit, RecoversPinnedCoefficient) {
    const auto fit = fit_alpha_sweep(closed_samples(ConfigKind::InPlane, kTruth, {0.5, 1.0}), 2.2 + 4.3 / 2.0);
    EXPECT_NEAR(fit.k3, 2.7, 1e-10);
    EXPECT_LT(fit.residual, 1e-12);
}

TEST(AlphaFit, RightAngleReadsOffCoefficient) {
    const auto s = closed_samples(ConfigKind::InPlane, kTruth, {std::numbers::pi / 2.0});
    EXPECT_NEAR(s[0].value, -(1.0 + 0.2 + 0.15), 1e-12);
    EXPECT_NEAR(fit_alpha_sweep(s, 4.35).k3, 2.7, 1e-12);
}

TEST(AlphaFit, ZeroAngleIsUnidentifiable) {
    EXPECT_THROW(fit_alpha_sweep(closed_samples(ConfigKind::InPlane, kTruth, {0.0, 0.0}), 4.35), RankDeficientError);
}

TEST(AlphaFit, FreeRefitReproducesPinnedSum) {
    const auto s = closed_samples(ConfigKind::InPlane, kTruth, {0.2, 0.6, 1.1, 1.4});
    const auto free = fit_alpha_sweep_free(s);
    EXPECT_NEAR(free.k_sum, 4.35, 1e-10);
    EXPECT_NEAR(free.k3, 2.7, 1e-10);
}

TEST(Assemble, HandComputedRoundTrip) {
    const auto r = assemble_parameters(2.2, 4.3, 2.7, 2.0, 1.0);
    EXPECT_NEAR(r.rho, 1.0, 1e-14);
    EXPECT_NEAR(r.mu, 1.0, 1e-14);
    EXPECT_NEAR(r.lambda, 2.0, 1e-14);
    EXPECT_NEAR(r.B, 0.2, 1e-14);
    EXPECT_NEAR(r.A, 0.3, 1e-14);
}

TEST(Assemble, ExactInverseOfForwardMap) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double mu = 0.3 + 2.0 * u(rng);
        const Moduli m{mu * (0.1 + 2.0 * u(rng)), mu, 0.5 + 2.0 * u(rng), 4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0, 0.0};
        const auto k3 = true_k(m);
        EXPECT_NEAR(k3[0] + 0.5 * (k3[1] - k3[2]), std::pow(m.rho, -1.5) * (m.lambda + m.mu), 1e-12);
        const auto r = assemble_parameters(k3[0], k3[1], k3[2], m.cP(), m.cS());
        for (const auto& [got, want] : {std::pair{r.lambda, m.lambda}, {r.mu, m.mu}, {r.rho, m.rho}, {r.A, m.A}, {r.B, m.B}})
            EXPECT_NEAR(got, want, 1e-11 * (1.0 + std::abs(want)));
    }
}

TEST(Assemble, ScalingLaw) {
    const double s = 2.7;
    const Moduli scaled{s * 2.0, s * 1.0, s * 1.0, s * 0.3, s * 0.2, 0.0};
    const auto k = true_k(scaled);
    EXPECT_NEAR(k[0], 2.2 / std::sqrt(s), 1e-13);
    const auto r = assemble_parameters(k[0], k[1], k[2], 2.0, 1.0);
    EXPECT_NEAR(r.rho, s, 1e-12);
    EXPECT_NEAR(r.lambda, 2.0 * s, 1e-12);
    EXPECT_NEAR(r.A, 0.3 * s, 1e-12);
    EXPECT_NEAR(r.B, 0.2 * s, 1e-12);
}

TEST(Assemble, RejectsInconsistentInput) {
    EXPECT_THROW(assemble_parameters(1.0, 1.0, 5.0, 2.0, 1.0), InconsistentDataError);
    EXPECT_THROW(assemble_parameters(2.2, 4.3, 2.7, 1.0, 1.0), std::invalid_argument);
}

TEST(EndToEnd, ConstantMedium) {
    const auto m = IsotropicMedium::constant(kTruth);
    const auto rep = end_to_end_recover(m, Vec3::Zero());
    EXPECT_LT(rep.max_abs_error, 1e-9);
    EXPECT_NEAR(rep.recovered.k3, 2.7, 1e-10);
}

TEST(EndToEnd, VaryingMediumAtFivePoints) {
    const auto m = parse_medium_text(
        "lambda = 2 + 0.4*sin(x1 + 0.5*x2)\n"
        "mu = 1 + 0.2*cos(x2 - x3)\n"
        "rho = 1.2 + 0.3*x1*x3\n"
        "A = -0.5 + 0.3*x2\n"
        "B = 0.2 + 0.1*sin(x3)\n"
        "C = 0.05\n");
    for (const Vec3& x : {Vec3(0.0, 0.0, 0.0), Vec3(0.5, -0.3, 0.2), Vec3(-0.4, 0.6, -0.1), Vec3(0.2, 0.2, -0.7),
                          Vec3(-0.6, -0.5, 0.4)}) {
        const auto rep = end_to_end_recover(m, x);
        EXPECT_LT(rep.max_abs_error, 1e-9) << "at " << format_point(x);
        EXPECT_LT(rep.recovered.psi_residual, 1e-12);
    }
}

TEST(EndToEnd, NoiseIsDeterministicAndModest) {
    const auto m = IsotropicMedium::constant(kTruth);
    RecoveryOptions o;
    o.noise = 1e-3;
    o.seed = 42;
    const auto a = end_to_end_recover(m, Vec3::Zero(), o), b = end_to_end_recover(m, Vec3::Zero(), o);
    EXPECT_EQ(a.recovered.A, b.recovered.A);
    EXPECT_GT(a.max_abs_error, 0.0);
    EXPECT_LT(a.max_rel_error, 1.0);
}
