#pragma once

// Boundary traction of plane-wave amplitudes evaluated from the stress tensor
// itself, independent of the library's reflection matrices.

#include "nlwave/types.hpp"

#include <random>

namespace oracle {

using nlwave::CMat3;
using nlwave::CVec3;
using nlwave::cplx;

/// S e3 for u = a exp(i xi . x), divided by i exp(i xi . x).
inline CVec3 traction(const CVec3& xi, const CVec3& a, double lambda, double mu) {
    CMat3 grad;  // grad(i, j) = d_j u_i / i
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) grad(i, j) = a[i] * xi[j];
    const CMat3 eps = 0.5 * (grad + grad.transpose());
    const CMat3 S = lambda * eps.trace() * CMat3::Identity() + 2.0 * mu * eps;
    return S.col(2);
}

struct RandomModuli {
    double lambda, mu, rho;
    double cP() const { return std::sqrt((lambda + 2 * mu) / rho); }
    double cS() const { return std::sqrt(mu / rho); }
};

inline RandomModuli random_moduli(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double mu = 0.3 + 2.0 * U(rng);
    const double lambda = -0.6 * mu + 3.0 * U(rng);  // 3 lambda + 2 mu > 0
    const double rho = 0.5 + 2.0 * U(rng);
    return {lambda, mu, rho};
}

/// Outward covector of length 1/c with polar angle theta from the normal.
inline nlwave::Vec3 incidence(double c, double theta, double phi) {
    return nlwave::Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)) / c;
}

}  // namespace oracle
