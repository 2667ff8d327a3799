#pragma once

#include "nlwave/domain.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nlwave {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    QuadratureRule q;
    q.nodes.resize(n);
    q.weights.resize(n);
    // returns (P_n(x), P_n'(x))
    const auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        q.nodes[i] = -x;
        q.nodes[n - 1 - i] = x;
        q.weights[i] = q.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

struct WeightedPoint {
    Vec3 x;
    double w;
};

struct SurfacePoint {
    Vec3 x;
    Vec3 normal;  // outward unit normal
    double w;     // surface weight
};

namespace detail {

inline std::pair<Vec3, Mat3> require_affine(const ConvexDomain& dom) {
    const auto ab = dom.affine_ball();
    if (!ab) throw std::invalid_argument("quadrature needs an affine image of the unit ball, got " + dom.describe());
    return *ab;
}

}  // namespace detail

/// Product rule on c + A (unit ball): Gauss in r and cos(theta), 2n-point trapezoid in phi.
inline std::vector<WeightedPoint> ball_quadrature(const ConvexDomain& dom, int order) {
    const auto [c, A] = detail::require_affine(dom);
    const double J = std::abs(A.determinant());
    const QuadratureRule g = gauss_legendre(order);
    const int nphi = 2 * order;
    std::vector<WeightedPoint> out;
    out.reserve(static_cast<std::size_t>(order * order * nphi));
    for (int i = 0; i < order; ++i) {
        const double r = 0.5 * (g.nodes[i] + 1.0), wr = 0.5 * g.weights[i] * r * r;
        for (int j = 0; j < order; ++j) {
            const double ct = g.nodes[j], st = std::sqrt(1.0 - ct * ct);
            for (int k = 0; k < nphi; ++k) {
                const double ph = 2.0 * std::numbers::pi * k / nphi;
                const Vec3 u(st * std::cos(ph), st * std::sin(ph), ct);
                out.push_back({c + A * (r * u), J * wr * g.weights[j] * (2.0 * std::numbers::pi / nphi)});
            }
        }
    }
    return out;
}

/// Rule on the boundary of c + A (unit ball) with outward normals.
inline std::vector<SurfacePoint> sphere_quadrature(const ConvexDomain& dom, int order) {
    const auto [c, A] = detail::require_affine(dom);
    const double J = std::abs(A.determinant());
    const Mat3 Ainv_T = A.inverse().transpose();
    const QuadratureRule g = gauss_legendre(order);
    const int nphi = 2 * order;
    std::vector<SurfacePoint> out;
    for (int j = 0; j < order; ++j) {
        const double ct = g.nodes[j], st = std::sqrt(1.0 - ct * ct);
        for (int k = 0; k < nphi; ++k) {
            const double ph = 2.0 * std::numbers::pi * k / nphi;
            const Vec3 u(st * std::cos(ph), st * std::sin(ph), ct);
            const Vec3 m = Ainv_T * u;
            out.push_back({c + A * u, m.normalized(), J * m.norm() * g.weights[j] * (2.0 * std::numbers::pi / nphi)});
        }
    }
    return out;
}

}  // namespace nlwave
