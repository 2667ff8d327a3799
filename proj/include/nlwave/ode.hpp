#pragma once

#include "nlwave/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlwave {

struct OdeOptions {
    double rtol = 1e-12;
    double atol = 1e-13;
    double h_init = 1e-2;
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-14;
    long max_steps = 2000000;
};

/// Dormand-Prince 5(4) on Eigen vector states, real or complex.
template <class State>
struct Dopri5 {
    struct Step {
        State y;       // fifth-order solution at t + h
        State f_end;   // derivative at t + h, reusable as the next k1
        double err;    // scaled RMS error estimate, accept when <= 1
    };

    template <class F>
    static Step step(const F& f, double t, const State& y, const State& k1, double h, double atol, double rtol) {
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                         a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                         e6 = 22.0 / 525, e7 = -1.0 / 40;

        const State k2 = f(t + c2 * h, State(y + h * a21 * k1));
        const State k3 = f(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
        const State k4 = f(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        const State k5 = f(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const State k6 = f(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        Step out;
        out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        out.f_end = f(t + h, out.y);
        const State e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.f_end);
        double acc = 0.0;
        const auto n = y.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(out.y[i]));
            const double r = std::abs(e[i]) / sc;
            acc += r * r;
        }
        out.err = std::sqrt(acc / static_cast<double>(n));
        return out;
    }

    /// One fifth-order step of size h from (t, y); used for dense evaluation off the stored grid.
    template <class F>
    static State advance(const F& f, double t, const State& y, double h) {
        if (h == 0.0) return y;
        return step(f, t, y, f(t, y), h, 1.0, 0.0).y;
    }
};

/// Adaptive integration from t0 toward t_end (either direction). After each
/// accepted step observer(t, y) may modify y and returns false to stop.
/// Returns the final time reached.
template <class State, class F, class Obs>
double integrate_adaptive(const F& f, double t0, State y, double t_end, const OdeOptions& opt, Obs&& observer) {
    const double dir = t_end >= t0 ? 1.0 : -1.0;
    double t = t0;
    double h = std::min(opt.h_init, opt.h_max);
    State k1 = f(t, y);
    long steps = 0;
    while (dir * (t_end - t) > 0.0) {
        if (++steps > opt.max_steps) throw ConvergenceError("ODE integration exceeded the step budget");
        const double remaining = std::abs(t_end - t);
        const bool last = h >= remaining;
        const double hs = dir * std::min(h, remaining);
        auto st = Dopri5<State>::step(f, t, y, k1, hs, opt.atol, opt.rtol);
        if (!std::isfinite(st.err)) {
            h *= 0.25;
            if (h < opt.h_min) throw ConvergenceError("ODE step produced non-finite values");
            continue;
        }
        if (st.err <= 1.0) {
            t = last ? t_end : t + hs;
            y = st.y;
            const State before = y;
            const bool go_on = observer(t, y);
            k1 = (y == before) ? st.f_end : f(t, y);
            if (!go_on) return t;
        }
        const double fac = st.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(st.err, -0.2), 0.2, 5.0);
        h = std::min(opt.h_max, std::abs(hs) * fac);
        if (h < opt.h_min) throw ConvergenceError("ODE step size underflow");
    }
    return t;
}

}  // namespace nlwave
