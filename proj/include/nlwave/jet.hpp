#pragma once

#include "nlwave/types.hpp"

#include <cmath>

namespace nlwave {

/// Second-order forward-mode jet in three variables: value, gradient, Hessian.
struct Jet {
    double v = 0.0;
    Vec3 g = Vec3::Zero();
    Mat3 h = Mat3::Zero();

    Jet() = default;
    Jet(double value) : v(value) {}  // NOLINT: implicit promotion of constants
    Jet(double value, const Vec3& grad, const Mat3& hess) : v(value), g(grad), h(hess) {}

    static Jet variable(int i, double x) {
        Jet j(x);
        j.g[i] = 1.0;
        return j;
    }

    Jet& operator+=(const Jet& o) { v += o.v; g += o.g; h += o.h; return *this; }
    Jet& operator-=(const Jet& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
};

/// Apply a scalar function with derivatives f0 = f(u), f1 = f'(u), f2 = f''(u).
inline Jet chain(const Jet& u, double f0, double f1, double f2) {
    return Jet(f0, f1 * u.g, f1 * u.h + f2 * (u.g * u.g.transpose()));
}

inline Jet operator-(const Jet& a) { return Jet(-a.v, -a.g, -a.h); }
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }

inline Jet operator*(const Jet& a, const Jet& b) {
    Mat3 cross = a.g * b.g.transpose();
    return Jet(a.v * b.v, a.v * b.g + b.v * a.g, a.v * b.h + b.v * a.h + cross + cross.transpose());
}

inline Jet reciprocal(const Jet& a) {
    const double r = 1.0 / a.v;
    return chain(a, r, -r * r, 2.0 * r * r * r);
}

inline Jet operator/(const Jet& a, const Jet& b) {
    if (b.g.isZero(0.0) && b.h.isZero(0.0)) return Jet(a.v / b.v, a.g / b.v, a.h / b.v);
    return a * reciprocal(b);
}

inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}

inline Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

inline Jet sin(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, s, c, -s);
}

inline Jet cos(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, c, -s, -c);
}

inline Jet sqrt(const Jet& a) {
    const double r = std::sqrt(a.v);
    return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}

inline Jet pow(const Jet& a, double p) {
    if (p == 0.0) return Jet(1.0);
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    const double f0 = std::pow(a.v, p);
    const double f1 = p * std::pow(a.v, p - 1.0);
    const double f2 = p * (p - 1.0) * std::pow(a.v, p - 2.0);
    return chain(a, f0, f1, f2);
}

inline Jet pow(const Jet& a, const Jet& b) {
    if (b.g.isZero(0.0) && b.h.isZero(0.0)) return pow(a, b.v);
    return exp(b * log(a));
}

}  // namespace nlwave
