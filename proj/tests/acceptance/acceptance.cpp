// One PASS/FAIL line per acceptance criterion; the stationary-phase check is reported
// separately and does not affect the exit code.

#include "nlwave/invariants.hpp"
#include "nlwave/stationary_phase.hpp"
#include "oracles/traction_oracle.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

using namespace nlwave;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Line {
    bool passed;
    std::string detail;
};

Line from(const CheckResult& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: %zu cases, worst %.3e < %.0e", r.name.c_str(), r.cases, r.worst, r.tol);
    return {r.passed, buf};
}

Line both(const Line& a, const Line& b) { return {a.passed && b.passed, a.detail + "; " + b.detail}; }

unsigned jobs() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

/// Incident plus reflected traction from the stress tensor, relative to the incident traction.
double oracle_traction(const ReflectionCoefficients& r, const Moduli& m) {
    const CVec3 inc = oracle::traction(r.snell.xi_in.cast<cplx>(), r.incident_amplitude(), m.lambda, m.mu);
    const CVec3 total = inc + oracle::traction(r.snell.xi_P, r.reflected_P_amplitude(), m.lambda, m.mu) +
                        oracle::traction(r.snell.xi_S.cast<cplx>(), r.a_S_minus, m.lambda, m.mu);
    return total.norm() / inc.norm();
}

Line traction_cancellation() {
    std::size_t super = 0;
    std::size_t sub = 0;
    const double w = parallel_worst(1000, 1, kSeed, 101, [&](std::mt19937_64& rng, std::size_t i) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const auto mo = oracle::random_moduli(rng);
        const Moduli m{mo.lambda, mo.mu, mo.rho, 0.0, 0.0, 0.0};
        const double th = 1.5 * U(rng), ph = 6.28 * U(rng);
        const cplx c1(U(rng) - 0.5, U(rng) - 0.5), c2(U(rng) - 0.5, U(rng) - 0.5);
        if (i % 2 == 0) return oracle_traction(solve_p_incidence(c1, oracle::incidence(m.cP(), th, ph), m), m);
        const Vec3 xi = oracle::incidence(m.cS(), th, ph);
        const Vec3 e = any_orthogonal(xi.normalized()).normalized(), f = xi.normalized().cross(e);
        const auto r = solve_s_incidence(c1 * e.cast<cplx>() + c2 * f.cast<cplx>(), xi, m);
        (r.evanescent ? super : sub)++;
        return oracle_traction(r, m);
    });
    char buf[160];
    std::snprintf(buf, sizeof buf, "1000 incidences (%zu S sub-, %zu S super-critical), worst %.3e < 1e-10", sub, super, w);
    return {w < 1e-10 && super > 0 && sub > 0, buf};
}

Line normal_incidence() {
    double worst = 0.0;
    std::mt19937_64 rng(kSeed);
    for (int i = 0; i < 200; ++i) {
        const Moduli m = random_moduli(rng);
        const cplx A(std::uniform_real_distribution<double>(-1, 1)(rng), std::uniform_real_distribution<double>(-1, 1)(rng));
        const auto p = solve_p_incidence(A, Vec3(0, 0, 1.0 / m.cP()), m);
        worst = std::max({worst, std::abs(p.A_P_minus + A) / std::abs(A), p.a_S_minus.norm() / std::abs(A)});
        const CVec3 a(A, 0.5 * A, 0.0);
        const auto s = solve_s_incidence(a, Vec3(0, 0, 1.0 / m.cS()), m);
        worst = std::max(worst, std::abs(s.A_P_minus) / a.norm());
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "200 media, P and S: |A_P- + A_P+|, converted amplitudes, worst %.3e < 1e-12", worst);
    return {worst < 1e-12, buf};
}

Line pinned_amplitude() {
    const auto r = amplitude_A(perp_config(0.0, 2.0, 1.0), {2.0, 1.0, 1.0, 0.3, 0.2, 0.17});
    const double e = std::max(std::abs(r.contraction - 6.525), std::abs(r.scaled - 6.525));
    char buf[160];
    std::snprintf(buf, sizeof buf, "pinned perpendicular example %.15g (error %.1e)", r.contraction, e);
    return {e < 1e-10, buf};
}

Line recovery_five_points() {
    const IsotropicMedium m = parse_medium_text(
        "lambda = 2 + 0.3*sin(x1 + x2)\n"
        "mu = 1 + 0.2*cos(1.3*x1 - 0.7*x3) + 0.1*x2*x2\n"
        "rho = 1 + 0.15*sin(0.9*x2 + 0.4*x3)\n"
        "A = 0.3 - 0.2*x3 + 0.1*sin(2*x1)\n"
        "B = 0.2 + 0.1*x1*x2\n"
        "C = 0.1\n");
    double worst = 0.0;
    for (const Vec3& x : {Vec3(0, 0, 0), Vec3(0.3, -0.2, 0.1), Vec3(-0.5, 0.4, 0.2), Vec3(0.1, 0.6, -0.5),
                          Vec3(-0.2, -0.3, 0.7)})
        worst = std::max(worst, end_to_end_recover(m, x).max_rel_error);
    char buf[160];
    std::snprintf(buf, sizeof buf, "5 points of a varying medium, worst relative error %.3e < 1e-9", worst);
    return {worst < 1e-9, buf};
}

Line stationary_phase() {
    const Moduli s1{2.0, 1.0, 1.0, 0.3, 0.2, 0.1}, s2{2.0, 1.0, 1.0, -1.1, 0.7, 0.4};
    const Vec3 x0(0.1, -0.2, 0.3);
    const std::vector<double> sweep{100.0, 200.0, 400.0};
    double worst_limit = 0.0, worst_point = 0.0;
    for (const auto& cfg : {perp_config(0.9, 2.0, 1.0), perp_config(1.7, 2.0, 1.0), inplane_ssp_config(0.7, 2.0, 1.0)}) {
        const auto beams = make_ssp_beams(cfg, s1, x0);
        const auto r1 = oscillatory_interaction_integral(beams, s1, sweep);
        const auto r2 = oscillatory_interaction_integral(beams, s2, sweep);
        const double want = amplitude_A(cfg, s1).closed / amplitude_A(cfg, s2).closed;
        worst_limit = std::max(worst_limit, std::abs(r1.fitted_limit / r2.fitted_limit - want) / std::abs(want));
        for (std::size_t k = 0; k < sweep.size(); ++k)
            worst_point = std::max(worst_point, std::abs(r1.values[k] / r2.values[k] - want) / std::abs(want));
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "3 configs, varrho 100..400: extrapolated ratio off by %.2e, worst single-varrho ratio off by %.2e (< 2e-2)",
                  worst_limit, worst_point);
    return {worst_limit < 0.02 && worst_point < 0.02, buf};
}

}  // namespace

int main() {
    const unsigned j = jobs();
    const std::vector<std::pair<const char*, std::function<Line()>>> gate{
        {"riccati conservation", [&] { return from(check_riccati_conservation(kSeed, j, 24)); }},
        {"reflection matrix", [&] { return from(check_reflection_determinant(kSeed, j, 10000)); }},
        {"traction cancellation", traction_cancellation},
        {"normal incidence", normal_incidence},
        {"transport residual", [&] { return from(check_transport(kSeed, j, 24)); }},
        {"interaction identities",
         [&] { return both(from(check_contraction_identity(kSeed, j, 1000)), from(check_divergence_identity(kSeed, j, 12))); }},
        {"closed-form amplitude", [&] { return both(from(check_amplitude_closed_forms(kSeed, j, 1000)), pinned_amplitude()); }},
        {"recovery round trip", recovery_five_points},
    };
    int failed = 0;
    int id = 1;
    for (const auto& [name, f] : gate) {
        const auto t = std::chrono::steady_clock::now();
        Line l{false, ""};
        try {
            l = f();
        } catch (const std::exception& e) {
            l = {false, std::string("threw: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
        std::printf("%s %d %-24s %s [%.1fs]\n", l.passed ? "PASS" : "FAIL", id++, name, l.detail.c_str(), s);
        failed += !l.passed;
    }
    std::printf("gate: %d/%zu criteria passed\n", static_cast<int>(gate.size()) - failed, gate.size());

    const auto t = std::chrono::steady_clock::now();
    Line sp{false, ""};
    try {
        sp = stationary_phase();
    } catch (const std::exception& e) {
        sp = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    std::printf("%s 9 %-24s %s [%.1fs] (non-blocking)\n", sp.passed ? "PASS" : "FAIL", "stationary phase",
                sp.detail.c_str(), s);
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
