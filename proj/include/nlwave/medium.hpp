#pragma once

#include "nlwave/fields.hpp"
#include "nlwave/jet.hpp"
#include "nlwave/types.hpp"

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace nlwave {

/// Pointwise values of the six coefficients.
struct Moduli {
    double lambda = 0.0;
    double mu = 0.0;
    double rho = 0.0;
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;

    double cP() const { return std::sqrt((lambda + 2.0 * mu) / rho); }
    double cS() const { return std::sqrt(mu / rho); }
};

inline std::string format_point(const Vec3& x) {
    std::ostringstream os;
    os.precision(10);
    os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ")";
    return os.str();
}

/// Isotropic elastic medium with third-order moduli A, B, C.
class IsotropicMedium {
public:
    IsotropicMedium() = default;

    IsotropicMedium(FieldPtr lambda, FieldPtr mu, FieldPtr rho, FieldPtr A, FieldPtr B, FieldPtr C)
        : lambda_(std::move(lambda)), mu_(std::move(mu)), rho_(std::move(rho)), A_(std::move(A)), B_(std::move(B)),
          C_(std::move(C)) {}

    static IsotropicMedium constant(const Moduli& m) {
        return IsotropicMedium(make_constant_field(m.lambda), make_constant_field(m.mu), make_constant_field(m.rho),
                               make_constant_field(m.A), make_constant_field(m.B), make_constant_field(m.C));
    }

    const ScalarField& lambda() const { return *lambda_; }
    const ScalarField& mu() const { return *mu_; }
    const ScalarField& rho() const { return *rho_; }
    const ScalarField& A() const { return *A_; }
    const ScalarField& B() const { return *B_; }
    const ScalarField& C() const { return *C_; }

    bool is_homogeneous() const {
        return lambda_->is_constant() && mu_->is_constant() && rho_->is_constant() && A_->is_constant() &&
               B_->is_constant() && C_->is_constant();
    }

    Moduli moduli(const Vec3& x) const {
        return {lambda_->value(x), mu_->value(x), rho_->value(x), A_->value(x), B_->value(x), C_->value(x)};
    }

    /// Wavespeed with exact gradient and Hessian. Throws on a non-positive radicand.
    Jet wavespeed_jet(const Vec3& x, WaveMode mode) const {
        const Jet mu = mu_->jet(x);
        const Jet rho = rho_->jet(x);
        const Jet num = mode == WaveMode::P ? lambda_->jet(x) + Jet(2.0) * mu : mu;
        if (!(num.v > 0.0) || !(rho.v > 0.0)) {
            std::ostringstream os;
            os << "invalid medium at " << format_point(x) << ": " << (mode == WaveMode::P ? "lambda+2mu" : "mu") << " = "
               << num.v << ", rho = " << rho.v;
            throw InvalidMediumError(os.str());
        }
        return sqrt(num / rho);
    }

    double wavespeed(const Vec3& x, WaveMode mode) const { return wavespeed_jet(x, mode).v; }

    /// Stiffness entering the transport operator: mu for S, lambda + 2 mu for P.
    double modal_stiffness(const Vec3& x, WaveMode mode) const {
        return mode == WaveMode::P ? lambda_->value(x) + 2.0 * mu_->value(x) : mu_->value(x);
    }

private:
    FieldPtr lambda_, mu_, rho_, A_, B_, C_;
};

struct Violation {
    Vec3 point;
    std::string condition;
    double value;
};

struct PointFailure {
    Vec3 point;
    std::string message;
};

struct ValidationReport {
    bool passed = true;
    std::size_t n_samples = 0;
    std::vector<Violation> violations;
    std::vector<PointFailure> failures;
};

/// Check mu > 0, 3 lambda + 2 mu > 0 and rho > 0 at each sample.
inline ValidationReport validate_medium(const IsotropicMedium& m, std::span<const Vec3> samples) {
    if (samples.empty()) throw std::invalid_argument("validate_medium: empty sample set");
    ValidationReport r;
    r.n_samples = samples.size();
    for (const Vec3& x : samples) {
        try {
            const double lam = m.lambda().value(x), mu = m.mu().value(x), rho = m.rho().value(x);
            if (!std::isfinite(lam) || !std::isfinite(mu) || !std::isfinite(rho)) {
                r.failures.push_back({x, "non-finite coefficient"});
                continue;
            }
            if (!(mu > 0.0)) r.violations.push_back({x, "mu > 0", mu});
            if (!(3.0 * lam + 2.0 * mu > 0.0)) r.violations.push_back({x, "3 lambda + 2 mu > 0", 3.0 * lam + 2.0 * mu});
            if (!(rho > 0.0)) r.violations.push_back({x, "rho > 0", rho});
        } catch (const std::exception& e) {
            r.failures.push_back({x, e.what()});
        }
    }
    r.passed = r.violations.empty() && r.failures.empty();
    return r;
}

}  // namespace nlwave
