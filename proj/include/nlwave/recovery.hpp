#pragma once

#include "nlwave/interaction.hpp"

#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

namespace nlwave {

/// Sweep data or assembled moduli that no admissible medium could have produced.
class InconsistentDataError : public Error {
public:
    using Error::Error;
};

struct SweepSample {
    double angle = 0.0;  // psi for PERP, alpha for INPLANE
    double value = 0.0;  // rho^{-3/2} times the closed-form combination
    ConfigKind kind = ConfigKind::Perp;
};

struct PsiFit {
    double k1 = 0.0;  // rho^{-3/2} (lambda + B)
    double k2 = 0.0;  // rho^{-3/2} (4 mu + A)
    double residual = 0.0;
    double condition = 0.0;
};

struct AlphaFit {
    double k3 = 0.0;  // rho^{-3/2} (2 mu + 2 B + A)
    double residual = 0.0;
};

struct FreeAlphaFit {
    double k_sum = 0.0;  // cos^2 coefficient
    double k3 = 0.0;
    double residual = 0.0;
    double condition = 0.0;
};

namespace detail {

inline void check_samples(const std::vector<SweepSample>& s, ConfigKind kind, const char* who) {
    for (const auto& x : s) {
        if (x.kind != kind)
            throw std::invalid_argument(std::string(who) + ": expected " + to_string(kind) + " samples, got " +
                                        to_string(x.kind));
        if (!std::isfinite(x.angle) || !std::isfinite(x.value) || x.angle < 0.0 || x.angle > std::numbers::pi)
            throw std::invalid_argument(std::string(who) + ": angles must lie in [0, pi] and values be finite");
    }
}

struct LeastSquares {
    Eigen::VectorXd x;
    double residual;
    double condition;
};

inline LeastSquares solve_least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, const char* who) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond < 1e12)) {
        std::ostringstream os;
        os << who << ": design matrix is rank deficient (condition " << cond << "); spread the angles further";
        throw RankDeficientError(os.str());
    }
    LeastSquares r;
    r.x = M.colPivHouseholderQr().solve(y);
    r.residual = (M * r.x - y).norm();
    r.condition = cond;
    return r;
}

}  // namespace detail

/// Columns a(psi) + cos psi and (1 + a(psi) cos psi) cos psi.
inline std::pair<double, double> psi_basis(double psi, double cP, double cS) {
    const double c = std::cos(psi), a = ssp_coefficient(c, cP, cS);
    return {a + c, (1.0 + a * c) * c};
}

inline PsiFit fit_psi_sweep(const std::vector<SweepSample>& samples, double cP, double cS) {
    detail::check_samples(samples, ConfigKind::Perp, "fit_psi_sweep");
    if (samples.size() < 2) throw RankDeficientError("fit_psi_sweep: need at least two angles");
    Eigen::MatrixXd M(samples.size(), 2);
    Eigen::VectorXd y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [f1, f2] = psi_basis(samples[i].angle, cP, cS);
        M(i, 0) = f1;
        M(i, 1) = f2;
        y(i) = samples[i].value;
    }
    const auto ls = detail::solve_least_squares(M, y, "fit_psi_sweep");
    // the second coefficient is 2 mu + A/2, half of k2
    return {ls.x(0), 2.0 * ls.x(1), ls.residual, ls.condition};
}

/// With the cos^2 coefficient pinned, fits the sin^2 coefficient and doubles it.
inline AlphaFit fit_alpha_sweep(const std::vector<SweepSample>& samples, double k_sum) {
    detail::check_samples(samples, ConfigKind::InPlane, "fit_alpha_sweep");
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        const double c2 = std::pow(std::cos(s.angle), 2), s2 = std::pow(std::sin(s.angle), 2);
        num += s2 * (k_sum * c2 - s.value);
        den += s2 * s2;
    }
    if (!(den > 1e-24)) throw RankDeficientError("fit_alpha_sweep: every sample has sin(alpha) = 0");
    const double coef = num / den;
    double res2 = 0.0;
    for (const auto& s : samples)
        res2 += std::pow(k_sum * std::pow(std::cos(s.angle), 2) - coef * std::pow(std::sin(s.angle), 2) - s.value, 2);
    return {2.0 * coef, std::sqrt(res2)};
}

/// Fits both alpha-sweep coefficients without pinning the cos^2 term.
inline FreeAlphaFit fit_alpha_sweep_free(const std::vector<SweepSample>& samples) {
    detail::check_samples(samples, ConfigKind::InPlane, "fit_alpha_sweep_free");
    if (samples.size() < 2) throw RankDeficientError("fit_alpha_sweep_free: need at least two angles");
    Eigen::MatrixXd M(samples.size(), 2);
    Eigen::VectorXd y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        M(i, 0) = std::pow(std::cos(samples[i].angle), 2);
        M(i, 1) = -std::pow(std::sin(samples[i].angle), 2);
        y(i) = samples[i].value;
    }
    const auto ls = detail::solve_least_squares(M, y, "fit_alpha_sweep_free");
    return {ls.x(0), 2.0 * ls.x(1), ls.residual, ls.condition};
}

struct RecoveredModuli {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
    double lambda = 0.0, mu = 0.0, rho = 0.0, A = 0.0, B = 0.0;
    double psi_residual = 0.0, alpha_residual = 0.0;
    double psi_condition = 0.0;

    Moduli moduli() const { return {lambda, mu, rho, A, B, 0.0}; }
};

inline RecoveredModuli assemble_parameters(double k1, double k2, double k3, double cP, double cS) {
    if (!(cS > 0.0) || !(cP > cS)) throw std::invalid_argument("assemble_parameters: need cP > cS > 0");
    const double K = k1 + 0.5 * (k2 - k3);  // rho^{-3/2} (lambda + mu)
    if (!(K > 0.0)) {
        std::ostringstream os;
        os << "assemble_parameters: k1 + (k2 - k3)/2 = " << K << " must be positive";
        throw InconsistentDataError(os.str());
    }
    RecoveredModuli r;
    r.k1 = k1;
    r.k2 = k2;
    r.k3 = k3;
    r.rho = std::pow((cP * cP - cS * cS) / K, 2);
    r.mu = r.rho * cS * cS;
    r.lambda = r.rho * (cP * cP - 2.0 * cS * cS);
    const double r32 = std::pow(r.rho, 1.5);
    r.B = k1 * r32 - r.lambda;
    r.A = k2 * r32 - 4.0 * r.mu;
    const double back = (r.lambda + r.mu) / r32;
    if (std::abs(back - K) > 1e-10 * std::abs(K))
        throw InconsistentDataError("assemble_parameters: assembled moduli do not reproduce k1 + (k2 - k3)/2");
    return r;
}

/// Exact k-values of a medium; the forward map the fits invert.
inline std::array<double, 3> true_k(const Moduli& m) {
    const double s = std::pow(m.rho, -1.5);
    return {s * (m.lambda + m.B), s * (4.0 * m.mu + m.A), s * (2.0 * m.mu + 2.0 * m.B + m.A)};
}

/// Samples from the general contraction with unit beam normalizers.
inline std::vector<SweepSample> synthesize_sweep(ConfigKind kind, const Moduli& m, const std::vector<double>& angles) {
    const double cP = m.cP(), cS = m.cS();
    std::vector<SweepSample> out;
    out.reserve(angles.size());
    for (double ang : angles) {
        const InteractionConfig c = kind == ConfigKind::Perp ? perp_config(ang, cP, cS)
                                                             : inplane_config_for_alpha(ang, cP, cS);
        out.push_back({ang, amplitude_A(c, m).observable.real(), kind});
    }
    return out;
}

struct RecoveryOptions {
    std::vector<double> psi_grid{0.3, 0.9, 1.5, 2.1};
    std::vector<double> alpha_grid;  // empty: 0.4 and 0.8 of the largest reachable alpha
    double noise = 0.0;  // relative Gaussian perturbation of the synthetic samples
    std::uint64_t seed = 0;
};

struct RecoveryReport {
    Vec3 x0;
    Moduli truth;
    RecoveredModuli recovered;
    std::vector<SweepSample> psi_samples, alpha_samples;
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
};

/// Synthesize both sweeps at x0, fit, assemble and compare with the true moduli.
inline RecoveryReport end_to_end_recover(const IsotropicMedium& m, const Vec3& x0, const RecoveryOptions& opt = {}) {
    RecoveryReport rep;
    rep.x0 = x0;
    rep.truth = m.moduli(x0);
    const double cP = m.wavespeed(x0, WaveMode::P), cS = m.wavespeed(x0, WaveMode::S);
    rep.psi_samples = synthesize_sweep(ConfigKind::Perp, rep.truth, opt.psi_grid);
    std::vector<double> alphas = opt.alpha_grid;
    if (alphas.empty()) {
        const double top = max_ssp_inplane_angle(cP, cS).first;
        alphas = {0.4 * top, 0.8 * top};
    }
    rep.alpha_samples = synthesize_sweep(ConfigKind::InPlane, rep.truth, alphas);
    if (opt.noise > 0.0) {
        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> n;
        for (auto* v : {&rep.psi_samples, &rep.alpha_samples})
            for (auto& s : *v) s.value *= 1.0 + opt.noise * n(rng);
    }
    const PsiFit pf = fit_psi_sweep(rep.psi_samples, cP, cS);
    const AlphaFit af = fit_alpha_sweep(rep.alpha_samples, pf.k1 + 0.5 * pf.k2);
    rep.recovered = assemble_parameters(pf.k1, pf.k2, af.k3, cP, cS);
    rep.recovered.psi_residual = pf.residual;
    rep.recovered.alpha_residual = af.residual;
    rep.recovered.psi_condition = pf.condition;
    const Moduli& t = rep.truth;
    const RecoveredModuli& r = rep.recovered;
    const std::array<std::pair<double, double>, 5> pairs{
        {{r.lambda, t.lambda}, {r.mu, t.mu}, {r.rho, t.rho}, {r.A, t.A}, {r.B, t.B}}};
    const double scale = std::max({std::abs(t.lambda), t.mu, t.rho});
    for (const auto& [got, want] : pairs) {
        rep.max_abs_error = std::max(rep.max_abs_error, std::abs(got - want));
        rep.max_rel_error = std::max(rep.max_rel_error, std::abs(got - want) / std::max(std::abs(want), 1e-3 * scale));
    }
    return rep;
}

}  // namespace nlwave
