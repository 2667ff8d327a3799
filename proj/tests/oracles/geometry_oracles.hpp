#pragma once

// Test-only reference computations, written against the metric g = c^-2 delta
// directly and sharing no code paths with the library's integrators.

#include "nlwave/medium.hpp"

#include <array>
#include <functional>

namespace oracle {

using nlwave::Mat3;
using nlwave::Vec3;

/// w = grad c / c, so that grad f = -w for g = exp(2f) delta.
inline Vec3 log_speed_gradient(const nlwave::IsotropicMedium& m, nlwave::WaveMode mode, const Vec3& x) {
    const nlwave::Jet c = m.wavespeed_jet(x, mode);
    return c.g / c.v;
}

/// Second-order geodesic equation x'' = 2 (x'.w) x' - |x'|^2 w, fixed-step RK4.
struct GeodesicRk4 {
    const nlwave::IsotropicMedium& m;
    nlwave::WaveMode mode;

    using S = Eigen::Matrix<double, 6, 1>;

    S rhs(const S& y) const {
        const Vec3 x = y.head<3>(), v = y.tail<3>();
        const Vec3 w = log_speed_gradient(m, mode, x);
        S d;
        d.head<3>() = v;
        d.tail<3>() = 2.0 * v.dot(w) * v - v.squaredNorm() * w;
        return d;
    }

    S step(const S& y, double h) const {
        const S k1 = rhs(y), k2 = rhs(y + 0.5 * h * k1), k3 = rhs(y + 0.5 * h * k2), k4 = rhs(y + h * k3);
        return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    /// March from x0 with unit g-speed until level(x) changes sign; the crossing
    /// is refined by bisection on the RK4 step length.
    S exit_state(const Vec3& x0, const Vec3& dir, const std::function<double(const Vec3&)>& level, double h,
                 double* length = nullptr) const {
        const double c = m.wavespeed(x0, mode);
        S y;
        y << x0, c * dir.normalized();
        double s = 0.0;
        for (int i = 0; i < 10000000; ++i) {
            S yn = step(y, h);
            if (level(yn.head<3>()) >= 0.0) {
                double a = 0.0, b = h;
                for (int k = 0; k < 80; ++k) {
                    const double mid = 0.5 * (a + b);
                    if (level(step(y, mid).head<3>()) >= 0.0) b = mid;
                    else a = mid;
                }
                if (length) *length = s + 0.5 * (a + b);
                return step(y, 0.5 * (a + b));
            }
            y = yn;
            s += h;
        }
        return y;
    }
};

/// Christoffel symbols Gamma[k](i, j) of g = exp(2f) delta in Cartesian
/// coordinates, from the gradient of f = -log c.
inline std::array<Mat3, 3> cartesian_christoffel(const nlwave::IsotropicMedium& m, nlwave::WaveMode mode,
                                                 const Vec3& x) {
    const Vec3 df = -log_speed_gradient(m, mode, x);
    std::array<Mat3, 3> G;
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                G[k](i, j) = (i == k ? df[j] : 0.0) + (j == k ? df[i] : 0.0) - (i == j ? df[k] : 0.0);
    return G;
}

/// Riemann tensor (R(d_i, d_j) d_k)^l = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik,
/// with the derivatives of the symbols by central differences.
struct Riemann {
    std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3> R{};  // R[l][i][j][k]
};

inline Riemann riemann_tensor(const nlwave::IsotropicMedium& m, nlwave::WaveMode mode, const Vec3& x,
                              double h = 1e-5) {
    std::array<std::array<Mat3, 3>, 3> dG;  // dG[a][k](i, j) = d_a Gamma^k_ij
    for (int a = 0; a < 3; ++a) {
        Vec3 xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        const auto Gp = cartesian_christoffel(m, mode, xp), Gm = cartesian_christoffel(m, mode, xm);
        for (int k = 0; k < 3; ++k) dG[a][k] = (Gp[k] - Gm[k]) / (2 * h);
    }
    const auto G = cartesian_christoffel(m, mode, x);
    Riemann out;
    for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    double v = dG[i][l](j, k) - dG[j][l](i, k);
                    for (int mm = 0; mm < 3; ++mm) v += G[l](i, mm) * G[mm](j, k) - G[l](j, mm) * G[mm](i, k);
                    out.R[l][i][j][k] = v;
                }
    return out;
}

/// Jacobi operator J(a, b) = g(R(a, u) u, b) for g-unit vectors given in Cartesian components.
inline double jacobi_operator(const nlwave::IsotropicMedium& m, nlwave::WaveMode mode, const Vec3& x,
                              const Vec3& a, const Vec3& u, const Vec3& b) {
    const Riemann Rm = riemann_tensor(m, mode, x);
    const double c = m.wavespeed(x, mode);
    double acc = 0.0;
    for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) acc += Rm.R[l][i][j][k] * a[i] * u[j] * u[k] * b[l];
    return acc / (c * c);
}

}  // namespace oracle
