#pragma once

#include "nlwave/expression.hpp"
#include "nlwave/jet.hpp"
#include "nlwave/types.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace nlwave {

/// Smooth scalar coefficient field on R^3 with value, gradient and Hessian.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual Jet jet(const Vec3& x) const = 0;
    virtual double value(const Vec3& x) const { return jet(x).v; }
    virtual bool is_constant() const { return false; }
    virtual std::string describe() const = 0;
};

using FieldPtr = std::shared_ptr<const ScalarField>;

class ConstantField final : public ScalarField {
public:
    explicit ConstantField(double v) : v_(v) {}
    Jet jet(const Vec3&) const override { return Jet(v_); }
    double value(const Vec3&) const override { return v_; }
    bool is_constant() const override { return true; }
    std::string describe() const override {
        std::ostringstream os;
        os.precision(17);
        os << v_;
        return os.str();
    }

private:
    double v_;
};

class ExpressionField final : public ScalarField {
public:
    explicit ExpressionField(Expression e) : e_(std::move(e)) {}
    Jet jet(const Vec3& x) const override { return e_.jet(x); }
    double value(const Vec3& x) const override { return e_.value(x); }
    bool is_constant() const override { return e_.is_constant(); }
    std::string describe() const override { return e_.text(); }

private:
    Expression e_;
};

/// Field given by a generic callable evaluated on Jet arguments.
template <class F>
class AnalyticField final : public ScalarField {
public:
    AnalyticField(F f, std::string name) : f_(std::move(f)), name_(std::move(name)) {}
    Jet jet(const Vec3& x) const override {
        return f_(Jet::variable(0, x[0]), Jet::variable(1, x[1]), Jet::variable(2, x[2]));
    }
    std::string describe() const override { return name_; }

private:
    F f_;
    std::string name_;
};

template <class F>
FieldPtr make_analytic_field(F f, std::string name = "analytic") {
    return std::make_shared<AnalyticField<F>>(std::move(f), std::move(name));
}

inline FieldPtr make_constant_field(double v) { return std::make_shared<ConstantField>(v); }

inline FieldPtr make_expression_field(const std::string& text) {
    Expression e = Expression::parse(text);
    if (e.is_constant()) return make_constant_field(e.value(Vec3::Zero()));
    return std::make_shared<ExpressionField>(std::move(e));
}

/// Regular samples on a box, row-major with x1 slowest.
struct GridData {
    std::array<int, 3> dims{0, 0, 0};
    Vec3 origin = Vec3::Zero();
    Vec3 spacing = Vec3::Ones();
    std::vector<double> values;
};

/// Tricubic natural-spline interpolant of grid samples. Twice continuously
/// differentiable, so Hessians are well defined across cell faces.
class GridField final : public ScalarField {
public:
    explicit GridField(GridData g, std::string name = "grid") : g_(std::move(g)), name_(std::move(name)) {
        for (int d = 0; d < 3; ++d) {
            if (g_.dims[d] < 2) throw ParseError("grid needs at least 2 samples along each axis");
            if (!(g_.spacing[d] > 0.0)) throw ParseError("grid spacing must be positive");
        }
        const std::size_t n = static_cast<std::size_t>(g_.dims[0]) * g_.dims[1] * g_.dims[2];
        if (g_.values.size() != n)
            throw ParseError("grid has " + std::to_string(g_.values.size()) + " values, expected " + std::to_string(n));
        build_coefficients();
    }

    Jet jet(const Vec3& x) const override {
        std::array<int, 3> cell{};
        std::array<std::array<double, 4>, 3> b{}, db{}, ddb{};
        for (int d = 0; d < 3; ++d) {
            const double u = (x[d] - g_.origin[d]) / g_.spacing[d];
            const double top = g_.dims[d] - 1;
            if (u < -1e-9 || u > top + 1e-9 || !std::isfinite(u)) {
                std::ostringstream os;
                os << "point (" << x[0] << ", " << x[1] << ", " << x[2] << ") outside grid support of " << name_;
                throw OutOfSupportError(os.str());
            }
            int i = static_cast<int>(std::floor(u));
            if (i < 0) i = 0;
            if (i > g_.dims[d] - 2) i = g_.dims[d] - 2;
            const double t = u - i;
            cell[d] = i;
            basis(t, b[d], db[d], ddb[d]);
            for (int k = 0; k < 4; ++k) {
                db[d][k] /= g_.spacing[d];
                ddb[d][k] /= g_.spacing[d] * g_.spacing[d];
            }
        }
        Jet out;
        for (int a = 0; a < 4; ++a)
            for (int bb = 0; bb < 4; ++bb)
                for (int c = 0; c < 4; ++c) {
                    const double coef = coeff(cell[0] - 1 + a, cell[1] - 1 + bb, cell[2] - 1 + c);
                    const double bx = b[0][a], by = b[1][bb], bz = b[2][c];
                    out.v += coef * bx * by * bz;
                    out.g[0] += coef * db[0][a] * by * bz;
                    out.g[1] += coef * bx * db[1][bb] * bz;
                    out.g[2] += coef * bx * by * db[2][c];
                    out.h(0, 0) += coef * ddb[0][a] * by * bz;
                    out.h(1, 1) += coef * bx * ddb[1][bb] * bz;
                    out.h(2, 2) += coef * bx * by * ddb[2][c];
                    out.h(0, 1) += coef * db[0][a] * db[1][bb] * bz;
                    out.h(0, 2) += coef * db[0][a] * by * db[2][c];
                    out.h(1, 2) += coef * bx * db[1][bb] * db[2][c];
                }
        out.h(1, 0) = out.h(0, 1);
        out.h(2, 0) = out.h(0, 2);
        out.h(2, 1) = out.h(1, 2);
        return out;
    }

    std::string describe() const override { return name_; }
    const GridData& data() const { return g_; }

private:
    static void basis(double t, std::array<double, 4>& b, std::array<double, 4>& db, std::array<double, 4>& ddb) {
        const double s = 1.0 - t;
        b = {s * s * s / 6.0, (3 * t * t * t - 6 * t * t + 4) / 6.0, (-3 * t * t * t + 3 * t * t + 3 * t + 1) / 6.0,
             t * t * t / 6.0};
        db = {-s * s / 2.0, (9 * t * t - 12 * t) / 6.0, (-9 * t * t + 6 * t + 3) / 6.0, t * t / 2.0};
        ddb = {s, 3 * t - 2, -3 * t + 1, t};
    }

    // Coefficients carry one ghost layer on each side: index -1 .. n.
    double coeff(int i, int j, int k) const {
        const int ny = g_.dims[1] + 2, nz = g_.dims[2] + 2;
        return c_[static_cast<std::size_t>(((i + 1) * ny + (j + 1)) * nz + (k + 1))];
    }

    // Natural cubic B-spline coefficients along one line: interior rows
    // c[i-1] + 4c[i] + c[i+1] = 6f[i], with c[0] = f[0], c[n-1] = f[n-1].
    static std::vector<double> spline_line(const std::vector<double>& f) {
        const int n = static_cast<int>(f.size());
        std::vector<double> c(static_cast<std::size_t>(n));
        c[0] = f[0];
        c[static_cast<std::size_t>(n - 1)] = f[static_cast<std::size_t>(n - 1)];
        const int m = n - 2;
        if (m > 0) {
            std::vector<double> diag(static_cast<std::size_t>(m), 4.0), rhs(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i) rhs[static_cast<std::size_t>(i)] = 6.0 * f[static_cast<std::size_t>(i + 1)];
            rhs[0] -= c[0];
            rhs[static_cast<std::size_t>(m - 1)] -= c[static_cast<std::size_t>(n - 1)];
            for (int i = 1; i < m; ++i) {
                const double w = 1.0 / diag[static_cast<std::size_t>(i - 1)];
                diag[static_cast<std::size_t>(i)] -= w;
                rhs[static_cast<std::size_t>(i)] -= w * rhs[static_cast<std::size_t>(i - 1)];
            }
            c[static_cast<std::size_t>(m)] = rhs[static_cast<std::size_t>(m - 1)] / diag[static_cast<std::size_t>(m - 1)];
            for (int i = m - 2; i >= 0; --i)
                c[static_cast<std::size_t>(i + 1)] =
                    (rhs[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i + 2)]) / diag[static_cast<std::size_t>(i)];
        }
        std::vector<double> out(static_cast<std::size_t>(n + 2));
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i + 1)] = c[static_cast<std::size_t>(i)];
        out[0] = n > 1 ? 2 * c[0] - c[1] : c[0];
        out[static_cast<std::size_t>(n + 1)] =
            n > 1 ? 2 * c[static_cast<std::size_t>(n - 1)] - c[static_cast<std::size_t>(n - 2)] : c[0];
        return out;
    }

    void build_coefficients() {
        const int nx = g_.dims[0], ny = g_.dims[1], nz = g_.dims[2];
        const int NX = nx + 2, NY = ny + 2, NZ = nz + 2;
        // Stage arrays: after each pass one more axis carries ghost layers.
        std::vector<double> a(static_cast<std::size_t>(NX) * ny * nz);
        auto src = [&](int i, int j, int k) { return g_.values[static_cast<std::size_t>((i * ny + j) * nz + k)]; };
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                std::vector<double> f(static_cast<std::size_t>(nx));
                for (int i = 0; i < nx; ++i) f[static_cast<std::size_t>(i)] = src(i, j, k);
                auto c = spline_line(f);
                for (int i = 0; i < NX; ++i) a[static_cast<std::size_t>((i * ny + j) * nz + k)] = c[static_cast<std::size_t>(i)];
            }
        std::vector<double> b(static_cast<std::size_t>(NX) * NY * nz);
        for (int i = 0; i < NX; ++i)
            for (int k = 0; k < nz; ++k) {
                std::vector<double> f(static_cast<std::size_t>(ny));
                for (int j = 0; j < ny; ++j) f[static_cast<std::size_t>(j)] = a[static_cast<std::size_t>((i * ny + j) * nz + k)];
                auto c = spline_line(f);
                for (int j = 0; j < NY; ++j) b[static_cast<std::size_t>((i * NY + j) * nz + k)] = c[static_cast<std::size_t>(j)];
            }
        c_.assign(static_cast<std::size_t>(NX) * NY * NZ, 0.0);
        for (int i = 0; i < NX; ++i)
            for (int j = 0; j < NY; ++j) {
                std::vector<double> f(static_cast<std::size_t>(nz));
                for (int k = 0; k < nz; ++k) f[static_cast<std::size_t>(k)] = b[static_cast<std::size_t>((i * NY + j) * nz + k)];
                auto c = spline_line(f);
                for (int k = 0; k < NZ; ++k) c_[static_cast<std::size_t>((i * NY + j) * NZ + k)] = c[static_cast<std::size_t>(k)];
            }
    }

    GridData g_;
    std::string name_;
    std::vector<double> c_;
};

}  // namespace nlwave
