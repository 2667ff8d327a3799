#pragma once

#include "nlwave/domain.hpp"
#include "nlwave/geodesics.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

namespace nlwave {

using CMat4 = Eigen::Matrix<cplx, 4, 4>;
using CVec4 = Eigen::Matrix<cplx, 4, 1>;

/// Square root with Im sqrt(z) > 0 off [0, +inf) and sqrt(z) >= 0 on it.
inline cplx branch_sqrt(cplx z) {
    if (z.imag() == 0.0 && z.real() >= 0.0) return std::sqrt(z.real());
    cplx w = std::sqrt(z);
    if (w.imag() < 0.0) w = -w;
    return w;
}

/// Reflected slowness data in the local frame where the boundary is x3 = 0 and
/// the interior is x3 < 0.
struct SnellResult {
    Vec3 xi_in = Vec3::Zero();
    WaveMode mode_in = WaveMode::P;
    CVec3 xi_P = CVec3::Zero();  // reflected P covector (xi1, xi2, -xi_P3)
    Vec3 xi_S = Vec3::Zero();    // reflected S covector (xi1, xi2, -xi_S3)
    cplx xi_P3 = 0.0;            // sqrt(cP^-2 - |xi_t|^2) on the branch above
    double xi_S3 = 0.0;
    bool evanescent = false;
};

inline SnellResult snell_reflect(const Vec3& xi, WaveMode mode_in, double cP, double cS, double tol = 1e-9) {
    if (!(cP > cS && cS > 0.0)) throw std::invalid_argument("snell_reflect: need cP > cS > 0");
    const double c = mode_in == WaveMode::P ? cP : cS;
    if (!(xi[2] > 0.0) || std::abs(xi.norm() * c - 1.0) > tol) {
        std::ostringstream os;
        os << "snell_reflect: incident " << to_string(mode_in) << " covector " << format_point(xi)
           << " is not propagating outward (|xi| c = " << xi.norm() * c << ", xi3 = " << xi[2] << ")";
        throw std::invalid_argument(os.str());
    }
    const double t2 = xi[0] * xi[0] + xi[1] * xi[1];
    SnellResult r;
    r.xi_in = xi;
    r.mode_in = mode_in;
    r.xi_P3 = branch_sqrt(1.0 / (cP * cP) - t2);
    r.evanescent = r.xi_P3.imag() > 0.0;
    r.xi_S3 = std::sqrt(std::max(0.0, 1.0 / (cS * cS) - t2));
    r.xi_P = CVec3(xi[0], xi[1], -r.xi_P3);
    r.xi_S = Vec3(xi[0], xi[1], -r.xi_S3);
    return r;
}

/// Leading traction map a -> nu . S(a e^{i phi}) / (i e^{i phi}) on x3 = 0 for slowness xi.
inline CMat3 traction_matrix(const CVec3& xi, double lambda, double mu) {
    CMat3 N;
    N << mu * xi[2], 0.0, mu * xi[0],
         0.0, mu * xi[2], mu * xi[1],
         lambda * xi[0], lambda * xi[1], (lambda + 2.0 * mu) * xi[2];
    return N;
}

/// Reflection matrix acting on (A_P^-, a_S1^-, a_S2^-, a_S3^-): the first three
/// rows are the traction of the reflected P and S waves, the last one is
/// transversality of the reflected S polarization. xi3 is the normal slowness
/// magnitude of the P branch, xiS3 that of the S branch.
inline CMat4 assemble_MP(double xi1, double xi2, cplx xi3, cplx xiS3, double lambda, double mu, double rho) {
    CMat4 M;
    M << -2.0 * mu * xi1 * xi3, -mu * xiS3, 0.0, mu * xi1,
         -2.0 * mu * xi2 * xi3, 0.0, -mu * xiS3, mu * xi2,
         rho - 2.0 * mu * (xi1 * xi1 + xi2 * xi2), lambda * xi1, lambda * xi2, -(lambda + 2.0 * mu) * xiS3,
         0.0, xi1, xi2, -xiS3;
    return M;
}

/// The same matrix with the incident S branch: M_S(xi) = M_P((xi1, xi2, xi_P3)).
inline CMat4 assemble_MS(const SnellResult& s, double lambda, double mu, double rho) {
    return assemble_MP(s.xi_in[0], s.xi_in[1], s.xi_P3, s.xi_in[2], lambda, mu, rho);
}

struct ReflectionCoefficients {
    WaveMode mode_in = WaveMode::P;
    SnellResult snell;
    cplx A_P_plus = 0.0;           // P incidence: incident a = A_P^+ xi^+
    CVec3 a_S_plus = CVec3::Zero();  // S incidence: incident polarization
    cplx A_P_minus = 0.0;          // reflected P: a = A_P^- xi_P^-
    CVec3 a_S_minus = CVec3::Zero();
    bool evanescent = false;
    double det_abs = 0.0;  // |det| of the reflection matrix
    double cond = 0.0;

    CVec3 incident_amplitude() const {
        return mode_in == WaveMode::P ? CVec3(A_P_plus * snell.xi_in.cast<cplx>()) : a_S_plus;
    }
    CVec3 reflected_P_amplitude() const { return A_P_minus * snell.xi_P; }
};

namespace detail {

inline ReflectionCoefficients solve_reflection(const CMat4& M, const CVec4& rhs, ReflectionCoefficients r) {
    Eigen::JacobiSVD<CMat4> svd(M);
    const auto sv = svd.singularValues();
    r.cond = sv[0] / sv[3];
    r.det_abs = std::abs(M.determinant());
    if (!(sv[3] > 1e-14 * sv[0])) {
        std::ostringstream os;
        os << "reflection matrix is singular (condition number " << r.cond << ")";
        throw RankDeficientError(os.str());
    }
    const CVec4 x = M.fullPivLu().solve(rhs);
    r.A_P_minus = x[0];
    r.a_S_minus = x.tail<3>();
    return r;
}

inline double moduli_check(const Moduli& m) {
    if (!(m.mu > 0.0 && 3.0 * m.lambda + 2.0 * m.mu > 0.0 && m.rho > 0.0))
        throw InvalidMediumError("reflection: inadmissible moduli (lambda, mu, rho) = (" + std::to_string(m.lambda) + ", " +
                                 std::to_string(m.mu) + ", " + std::to_string(m.rho) + ")");
    return m.cP();
}

}  // namespace detail

/// Reflected amplitudes for an incident P wave a^+ = A_P^+ xi^+ at a traction-free plane.
inline ReflectionCoefficients solve_p_incidence(cplx A_plus, const Vec3& xi, const Moduli& m) {
    detail::moduli_check(m);
    ReflectionCoefficients r;
    r.mode_in = WaveMode::P;
    r.snell = snell_reflect(xi, WaveMode::P, m.cP(), m.cS());
    r.A_P_plus = A_plus;
    const CMat4 M = assemble_MP(xi[0], xi[1], xi[2], r.snell.xi_S3, m.lambda, m.mu, m.rho);
    CVec4 rhs;
    rhs.head<3>() = -traction_matrix(xi.cast<cplx>(), m.lambda, m.mu) * xi.cast<cplx>() * A_plus;
    rhs[3] = 0.0;
    return detail::solve_reflection(M, rhs, r);
}

/// Reflected amplitudes for an incident S wave with polarization a^+ (transverse to xi^+).
inline ReflectionCoefficients solve_s_incidence(const CVec3& a_plus, const Vec3& xi, const Moduli& m,
                                                double tol = 1e-10) {
    detail::moduli_check(m);
    const cplx dot = (xi.cast<cplx>().transpose() * a_plus)(0, 0);
    if (std::abs(dot) > tol * std::max(1.0, a_plus.norm() * xi.norm())) {
        std::ostringstream os;
        os << "solve_s_incidence: polarization is not transverse to the slowness (a . xi = " << std::abs(dot) << ")";
        throw std::invalid_argument(os.str());
    }
    ReflectionCoefficients r;
    r.mode_in = WaveMode::S;
    r.snell = snell_reflect(xi, WaveMode::S, m.cP(), m.cS());
    r.a_S_plus = a_plus;
    r.evanescent = r.snell.evanescent;
    const CMat4 M = assemble_MS(r.snell, m.lambda, m.mu, m.rho);
    CVec4 rhs;
    rhs.head<3>() = -traction_matrix(xi.cast<cplx>(), m.lambda, m.mu) * a_plus;
    rhs[3] = 0.0;
    return detail::solve_reflection(M, rhs, r);
}

/// For xi2 = 0 the reflected S polarization splits as A_SV e_SV + A_SH e_SH with
/// e_SV = (xi_S3, 0, xi1), e_SH = (0, -1/cS, 0); the traction rows {1, 3} on
/// (A_P, A_SV) form this block.
inline Eigen::Matrix<cplx, 2, 2> reduced_block(const CMat4& M, double xiS3, double xi1, double cS) {
    Eigen::Matrix<cplx, 4, 3> B = Eigen::Matrix<cplx, 4, 3>::Zero();
    B(0, 0) = 1.0;
    B(1, 1) = xiS3;
    B(3, 1) = xi1;
    B(2, 2) = -1.0 / cS;
    const Eigen::Matrix<cplx, 4, 3> MB = M * B;
    Eigen::Matrix<cplx, 2, 2> R;
    R << MB(0, 0), MB(0, 1), MB(2, 0), MB(2, 1);
    return R;
}

/// mu^2 (4 xi1^2 xi3 xiS3 + xi1^4 - 2 xi1^2 xiS3^2 + xiS3^4).
inline double reduced_determinant(double xi1, double xi3, double xiS3, double mu) {
    const double a = xi1 * xi1, b = xiS3 * xiS3;
    return mu * mu * (4.0 * a * xi3 * xiS3 + a * a - 2.0 * a * b + b * b);
}

// ---------------------------------------------------------------------------
// Broken rays

/// Rows t1, t2, nu: maps Cartesian vectors into the frame where the boundary
/// tangent plane is x3 = 0 and the outward normal is +e3.
inline Mat3 boundary_frame(const Vec3& nu) {
    const Vec3 n = nu.normalized();
    const Vec3 t1 = any_orthogonal(n).normalized();
    const Vec3 t2 = n.cross(t1);
    Mat3 R;
    R.row(0) = t1;
    R.row(1) = t2;
    R.row(2) = n;
    return R;
}

struct RayBranch {
    WaveMode mode = WaveMode::P;
    int depth = 0;
    int parent = -1;
    GeodesicPath path;
    CVec3 amplitude = CVec3::Zero();  // leading amplitude vector at the branch start, Cartesian
    std::optional<ReflectionCoefficients> reflection;  // at the branch's exit point, local frame
    bool evanescent_P = false;  // the P child at the exit point does not propagate
};

struct ReflectionTreeOptions {
    int max_depth = 3;
    double t0 = 0.0;
    TraceOptions trace;
};

/// Ray tree of repeated reflections: every branch that reaches the boundary
/// spawns a reflected P and a reflected S branch until max_depth. Amplitudes
/// are the leading coefficients at each hit point, carried from the parent's
/// start amplitude (spreading along a branch is not applied).
inline std::vector<RayBranch> reflection_tree(const IsotropicMedium& m, WaveMode mode, const Vec3& x0, const Vec3& dir,
                                              const ConvexDomain& dom, const CVec3& amplitude,
                                              const ReflectionTreeOptions& opt = {}) {
    std::vector<RayBranch> out;
    {
        GeodesicPath g = trace_geodesic(m, mode, x0, dir, dom, opt.t0, opt.trace);
        out.push_back(RayBranch{mode, 0, -1, std::move(g), amplitude, std::nullopt, false});
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].depth >= opt.max_depth) continue;
        const GeodesicPath& g = out[i].path;
        if (!g.exit()) continue;
        const BoundaryEvent ev = *g.exit();
        const Moduli mod = m.moduli(ev.x);
        const double c = mod.cP() * (out[i].mode == WaveMode::P) + mod.cS() * (out[i].mode == WaveMode::S);
        const Mat3 R = boundary_frame(dom.outward_normal(ev.x));
        const Vec3 xi = R * ev.direction / c;
        if (!(xi[2] > 0.0)) continue;  // grazing
        const CVec3 a_loc = R.cast<cplx>() * out[i].amplitude;
        ReflectionCoefficients rc;
        if (out[i].mode == WaveMode::P) {
            const cplx A = (xi.cast<cplx>().transpose() * a_loc)(0, 0) / xi.squaredNorm();
            rc = solve_p_incidence(A, xi, mod);
        } else {
            const CVec3 a_t = a_loc - (xi.cast<cplx>().transpose() * a_loc)(0, 0) / xi.squaredNorm() * xi.cast<cplx>();
            rc = solve_s_incidence(a_t, xi, mod);
        }
        out[i].reflection = rc;
        out[i].evanescent_P = rc.snell.evanescent;
        const int depth = out[i].depth + 1;
        const double t_hit = ev.t;
        const Vec3 xb = ev.x;
        auto spawn = [&](WaveMode cm, const Vec3& xi_loc, const CVec3& a_loc_child) {
            const Vec3 d = R.transpose() * xi_loc.normalized();
            try {
                GeodesicPath child = trace_from_boundary(m, cm, xb, d, dom, t_hit, opt.trace);
                out.push_back(RayBranch{cm, depth, static_cast<int>(i), std::move(child),
                                        R.transpose().cast<cplx>() * a_loc_child, std::nullopt, false});
            } catch (const TrappingError&) {
            }
        };
        if (!rc.snell.evanescent) spawn(WaveMode::P, rc.snell.xi_P.real(), rc.reflected_P_amplitude());
        spawn(WaveMode::S, rc.snell.xi_S, rc.a_S_minus);
    }
    return out;
}

}  // namespace nlwave
