#pragma once

#include "nlwave/types.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

namespace nlwave {

/// Bounded strictly convex domain {b < 0} with smooth defining function b.
class ConvexDomain {
public:
    virtual ~ConvexDomain() = default;
    virtual double level(const Vec3& x) const = 0;
    virtual Vec3 gradient(const Vec3& x) const = 0;
    virtual Mat3 hessian(const Vec3& x) const = 0;
    /// Boundary point parametrized by a unit direction.
    virtual Vec3 boundary_point(const Vec3& unit_dir) const = 0;
    virtual std::string describe() const = 0;
    /// Center c and matrix A with the domain equal to c + A * (unit ball), when affine.
    virtual std::optional<std::pair<Vec3, Mat3>> affine_ball() const { return std::nullopt; }
    /// Euclidean bounding radius about the origin.
    virtual double bounding_radius() const = 0;

    bool contains(const Vec3& x) const { return level(x) < 0.0; }
    Vec3 outward_normal(const Vec3& x) const { return gradient(x).normalized(); }
};

using DomainPtr = std::shared_ptr<const ConvexDomain>;

/// Ellipsoid c + diag(a) * (unit ball); a ball when all semi-axes agree.
class Ellipsoid final : public ConvexDomain {
public:
    Ellipsoid(const Vec3& center, const Vec3& semi_axes) : c_(center), a_(semi_axes) {
        for (int i = 0; i < 3; ++i)
            if (!(a_[i] > 0.0)) throw std::invalid_argument("ellipsoid semi-axes must be positive");
    }

    double level(const Vec3& x) const override {
        const Vec3 q = (x - c_).cwiseQuotient(a_);
        return 0.5 * (q.squaredNorm() - 1.0) * scale();
    }
    Vec3 gradient(const Vec3& x) const override {
        return (x - c_).cwiseQuotient(a_.cwiseProduct(a_)) * scale();
    }
    Mat3 hessian(const Vec3&) const override {
        return Vec3(a_.cwiseProduct(a_).cwiseInverse()).asDiagonal().toDenseMatrix() * scale();
    }
    Vec3 boundary_point(const Vec3& u) const override { return c_ + a_.cwiseProduct(u); }
    std::optional<std::pair<Vec3, Mat3>> affine_ball() const override {
        return std::make_pair(c_, Mat3(a_.asDiagonal()));
    }
    double bounding_radius() const override { return c_.norm() + a_.maxCoeff(); }
    std::string describe() const override {
        std::ostringstream os;
        os.precision(10);
        if (a_[0] == a_[1] && a_[1] == a_[2])
            os << "ball(center=(" << c_[0] << "," << c_[1] << "," << c_[2] << "), r=" << a_[0] << ")";
        else
            os << "ellipsoid(center=(" << c_[0] << "," << c_[1] << "," << c_[2] << "), axes=(" << a_[0] << ","
               << a_[1] << "," << a_[2] << "))";
        return os.str();
    }

    const Vec3& center() const { return c_; }
    const Vec3& semi_axes() const { return a_; }

private:
    // Keeps |grad b| near 1 on the boundary so level-set tolerances read as distances.
    double scale() const { return a_.minCoeff(); }

    Vec3 c_;
    Vec3 a_;
};

inline DomainPtr make_ball(const Vec3& center = Vec3::Zero(), double radius = 1.0) {
    return std::make_shared<Ellipsoid>(center, Vec3::Constant(radius));
}

inline DomainPtr make_ellipsoid(const Vec3& center, const Vec3& semi_axes) {
    return std::make_shared<Ellipsoid>(center, semi_axes);
}

}  // namespace nlwave
