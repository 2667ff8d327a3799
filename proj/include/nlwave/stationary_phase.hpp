#pragma once

#include "nlwave/geodesics.hpp"
#include "nlwave/interaction.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace nlwave {

/// Gaussian beam along a straight ray in a constant medium, time factor dropped.
///
/// theta = d.(x - x0)/c + y^T M(l) y / 2 with l = d.(x - x0), y the transverse part and
/// M(l) = M0 (I + c l M0)^{-1}; the field is det(I + c l M0)^{-1/2} * pol * exp(i varrho freq theta),
/// conjugated when freq < 0 so the envelope still decays.
struct StraightBeam {
    Vec3 x0;
    Vec3 d;  // unit travel direction
    double c = 1.0;
    Eigen::Matrix2cd M0 = cplx(0.0, 1.0) * Eigen::Matrix2cd::Identity();
    CVec3 pol;
    double freq = 1.0;

    struct Sample {
        CVec3 u;
        Eigen::Matrix3cd grad;  // grad(i, j) = du_i / dx_j
    };

    Eigen::Matrix<double, 3, 2> transverse() const {
        const Vec3 e2 = any_orthogonal(d);
        Eigen::Matrix<double, 3, 2> E;
        E << e2, d.cross(e2);
        return E;
    }

    /// M(0) lifted to a 3x3 operator on the transverse plane, conjugated for negative frequency.
    Eigen::Matrix3cd hessian_at_center() const {
        const auto E = transverse();
        const Eigen::Matrix3cd H = E.cast<cplx>() * M0 * E.transpose().cast<cplx>();
        return freq < 0.0 ? Eigen::Matrix3cd(H.conjugate()) : H;
    }

    Sample sample(const Vec3& x, double varrho) const {
        const auto E = transverse();
        const Vec3 r = x - x0;
        const double l = d.dot(r);
        const Eigen::Vector2cd y = (E.transpose() * r).cast<cplx>();
        const Eigen::Matrix2cd Y = Eigen::Matrix2cd::Identity() + c * l * M0;
        const Eigen::Matrix2cd Yi = Y.inverse();
        const Eigen::Matrix2cd M = M0 * Yi;
        const Eigen::Matrix2cd dM = -c * M * M;
        const cplx theta = l / c + 0.5 * (y.transpose() * M * y).value();
        CVec3 grad_theta = (1.0 / c + 0.5 * (y.transpose() * dM * y).value()) * d.cast<cplx>() + E.cast<cplx>() * (M * y);
        const cplx detY = Y.determinant();
        cplx env = std::pow(detY, -0.5);
        const cplx denv = -0.5 * env * (Yi * (c * M0)).trace();  // d env / dl

        CVec3 p = pol;
        cplx th = theta;
        if (freq < 0.0) {
            env = std::conj(env);
            p = p.conjugate();
            th = std::conj(th);
            grad_theta = grad_theta.conjugate();
        }
        const cplx denv_s = freq < 0.0 ? std::conj(denv) : denv;
        const cplx phase = std::exp(cplx(0.0, varrho * freq) * th);
        Sample s;
        s.u = env * phase * p;
        s.grad = phase * (p * (denv_s * d.cast<cplx>()).transpose() +
                          cplx(0.0, varrho * freq) * env * p * grad_theta.transpose());
        return s;
    }
};

/// Three beams realizing an interaction config at x0 with a stationary total phase there.
struct SspBeams {
    std::array<StraightBeam, 3> beams;  // S1, S2, P0
    double freq_product = 0.0;
};

/// Frequencies (-a cS, -cS |a xi1 + xi0|, cP) cancel both the spatial and the temporal phase gradients.
inline SspBeams make_ssp_beams(const InteractionConfig& c, const Moduli& m, const Vec3& x0, double width = 1.0) {
    check_config(c);
    const SspDirections dirs = build_ssp_directions(c.xi1.normalized(), c.xi0.normalized(), c.cP, c.cS);
    const Vec3 xi2u = dirs.xi2_unit;
    if (c.kind == ConfigKind::InPlane && (c.xi2 - xi2u).norm() > 1e-8)
        throw std::invalid_argument("make_ssp_beams: in-plane second ray must be the rescaled S-null combination");
    const double norm_S = 1.0 / std::sqrt(c.cS * m.rho), norm_P = 1.0 / std::sqrt(c.cP * m.rho);
    const Eigen::Matrix2cd M0 = cplx(0.0, 1.0 / (width * width)) * Eigen::Matrix2cd::Identity();
    SspBeams b;
    b.beams[0] = {x0, c.xi1.normalized(), c.cS, M0, (norm_S / c.cS) * c.alpha1.cast<cplx>(), -dirs.a * c.cS};
    b.beams[1] = {x0, -xi2u, c.cS, M0, (norm_S / c.cS) * c.alpha2.cast<cplx>(), -c.cS * dirs.xi2_raw.norm()};
    b.beams[2] = {x0, -c.xi0.normalized(), c.cP, M0, (norm_P / c.cP) * c.xi0.normalized().cast<cplx>(), c.cP};
    b.freq_product = b.beams[0].freq * b.beams[1].freq * b.beams[2].freq;
    return b;
}

struct OscillatoryIntegral {
    std::vector<double> varrho;
    std::vector<cplx> values;  // varrho^{3/2} * integral / ((i varrho)^3 * freq product)
    cplx predicted;            // leading stationary-phase term
    cplx fitted_limit;         // c0 from a least-squares fit c0 + c1/varrho
    cplx fitted_slope;
};

/// Leading stationary-phase value of the normalized integral.
inline cplx stationary_phase_prediction(const SspBeams& b, const Moduli& m) {
    Eigen::Matrix3cd H = Eigen::Matrix3cd::Zero();
    std::array<Eigen::Matrix3cd, 3> lead;
    for (int j = 0; j < 3; ++j) {
        const StraightBeam& bj = b.beams[j];
        H += bj.freq * bj.hessian_at_center();
        const CVec3 pol = bj.freq < 0.0 ? CVec3(bj.pol.conjugate()) : bj.pol;
        lead[j] = pol * (bj.d / bj.c).cast<cplx>().transpose();
    }
    const Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(cplx(0.0, -1.0) * H);
    cplx inv_sqrt_det = 1.0;
    for (int k = 0; k < 3; ++k) inv_sqrt_det /= std::sqrt(es.eigenvalues()(k));
    return std::pow(2.0 * std::numbers::pi, 1.5) * inv_sqrt_det * interaction_density<cplx>(lead[0], lead[1], lead[2], m);
}

/// Oscillatory integral of the density of three beams over space near x0, for each varrho.
inline OscillatoryIntegral oscillatory_interaction_integral(const SspBeams& b, const Moduli& m,
                                                            const std::vector<double>& varrho, int nodes = 32,
                                                            double half_width = 7.0) {
    OscillatoryIntegral out;
    out.varrho = varrho;
    out.predicted = stationary_phase_prediction(b, m);
    // box aligned with the envelope axes, each side scaled to its own decay rate
    Eigen::Matrix3d imH = Eigen::Matrix3d::Zero();
    for (const auto& bj : b.beams) imH += (bj.freq * bj.hessian_at_center()).imag();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(imH);
    if (!(eig.eigenvalues()(0) > 0.0))
        throw std::invalid_argument("oscillatory_interaction_integral: envelopes do not confine x0");
    const Mat3 axes = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * half_width;
    const QuadratureRule g = gauss_legendre(nodes);
    const Vec3 x0 = b.beams[0].x0;
    for (double rho_k : varrho) {
        const Mat3 J = axes / std::sqrt(rho_k);
        cplx acc = 0.0;
        for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < nodes; ++j)
                for (int k = 0; k < nodes; ++k) {
                    const Vec3 x = x0 + J * Vec3(g.nodes[i], g.nodes[j], g.nodes[k]);
                    const auto s1 = b.beams[0].sample(x, rho_k), s2 = b.beams[1].sample(x, rho_k),
                               s0 = b.beams[2].sample(x, rho_k);
                    acc += g.weights[i] * g.weights[j] * g.weights[k] *
                           interaction_density<cplx>(s1.grad, s2.grad, s0.grad, m);
                }
        acc *= std::abs(J.determinant());
        out.values.push_back(std::pow(rho_k, 1.5) * acc / (std::pow(cplx(0.0, rho_k), 3) * b.freq_product));
    }
    if (varrho.size() >= 2) {
        Eigen::MatrixXcd A(varrho.size(), 2);
        Eigen::VectorXcd y(varrho.size());
        for (std::size_t k = 0; k < varrho.size(); ++k) {
            A(k, 0) = 1.0;
            A(k, 1) = 1.0 / varrho[k];
            y(k) = out.values[k];
        }
        const Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(y);
        out.fitted_limit = coef(0);
        out.fitted_slope = coef(1);
    } else if (!varrho.empty()) {
        out.fitted_limit = out.values.front();
    }
    return out;
}

}  // namespace nlwave
