#pragma once

#include "nlwave/beams.hpp"
#include "nlwave/interaction.hpp"
#include "nlwave/invariants.hpp"
#include "nlwave/medium_io.hpp"
#include "nlwave/recovery.hpp"
#include "nlwave/reflection.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace nlwave::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2 };

/// Bad flags or input files; maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string medium;  // empty: the built-in constant medium
    std::string domain = "ball";
    std::string mode = "S";
    std::uint64_t seed = 42;
    unsigned jobs = 1;
    std::string out;  // output directory, empty for stdout
    double tol = 1e-12;

    // per-subcommand
    std::string x0 = "0,0,0";
    std::string dir = "1,0,0";
    double t0 = 0.0;
    std::string c2 = "1,0", c3 = "0,0";
    double delta = 0.0;
    int slab = 0;
    double slab_width = 0.2;
    double varrho = 50.0;
    std::string angles;
    double phi = 0.0;
    std::string pol = "sv";
    std::string kind = "perp";
    std::string points = "0,0,0";
    std::string psi_grid = "0.3,0.9,1.5,2.1";
    std::string alpha_grid;
    double noise = 0.0;
    int samples = 2000;
};

inline const char* kDefaultMedium =
    "lambda = 2\n"
    "mu = 1\n"
    "rho = 1\n"
    "A = 0.3\n"
    "B = 0.2\n";

namespace detail {

inline std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
    std::vector<double> v;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = nlwave::detail::trim(tok);
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(what + ": malformed number '" + tok + "'");
        }
    }
    return v;
}

inline Vec3 parse_vec3(const std::string& text, const std::string& what) {
    const auto v = parse_numbers(text, what);
    if (v.size() != 3) throw ConfigError(what + ": expected three comma-separated numbers, got '" + text + "'");
    return {v[0], v[1], v[2]};
}

inline cplx parse_complex(const std::string& text, const std::string& what) {
    const auto v = parse_numbers(text, what);
    if (v.size() != 2) throw ConfigError(what + ": expected 're,im', got '" + text + "'");
    return {v[0], v[1]};
}

/// "a,b,c" or "start:stop:count" (count points, endpoints included).
inline std::vector<double> parse_grid(const std::string& text, const std::string& what) {
    if (text.find(':') == std::string::npos) return parse_numbers(text, what);
    std::vector<double> parts;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ':')) {
        const auto v = parse_numbers(tok, what);
        if (v.size() != 1) throw ConfigError(what + ": malformed range '" + text + "'");
        parts.push_back(v[0]);
    }
    if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2]))
        throw ConfigError(what + ": range must be start:stop:count, got '" + text + "'");
    const int n = static_cast<int>(parts[2]);
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * i / (n - 1));
    return g;
}

inline std::vector<Vec3> parse_points(const std::string& text) {
    std::vector<Vec3> pts;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ';'))
        if (!nlwave::detail::trim(tok).empty()) pts.push_back(parse_vec3(tok, "--points"));
    if (pts.empty()) throw ConfigError("--points: no points given");
    return pts;
}

inline WaveMode parse_mode(const std::string& s) {
    if (s == "S" || s == "s") return WaveMode::S;
    if (s == "P" || s == "p") return WaveMode::P;
    throw ConfigError("--mode must be P or S, got '" + s + "'");
}

inline IsotropicMedium load(const RunConfig& c) {
    return c.medium.empty() ? parse_medium_text(kDefaultMedium) : load_medium(c.medium);
}

inline std::string g17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string sci(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits, v);
    return buf;
}

/// Output sink: a file under the output directory, or the given stream.
class Sink {
public:
    Sink(const RunConfig& c, const std::string& name, std::ostream& fallback) : os_(&fallback) {
        if (c.out.empty()) return;
        std::filesystem::create_directories(c.out);
        file_.open(std::filesystem::path(c.out) / name);
        if (!file_) throw ConfigError("cannot write " + (std::filesystem::path(c.out) / name).string());
        os_ = &file_;
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

inline void put_cplx(std::ostream& os, cplx z) { os << ',' << g17(z.real()) << ',' << g17(z.imag()); }

inline std::string cplx_header(const std::string& name) { return "," + name + "_re," + name + "_im"; }

inline TraceOptions trace_options(const RunConfig& c) {
    TraceOptions o;
    o.rtol = c.tol;
    return o;
}

}  // namespace detail

inline int cmd_validate(const RunConfig& c, std::ostream& out) {
    const IsotropicMedium m = detail::load(c);
    const DomainPtr dom = parse_domain(c.domain);
    if (c.samples < 1) throw ConfigError("--samples must be positive");
    const auto ab = dom->affine_ball();
    std::vector<Vec3> pts;
    const std::size_t n = static_cast<std::size_t>(c.samples);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 u = fibonacci_sphere(i, n) * std::cbrt(van_der_corput(i + 1, 3));
        pts.push_back(ab ? Vec3(ab->first + ab->second * u) : Vec3(u * dom->bounding_radius()));
    }
    if (!ab) std::erase_if(pts, [&](const Vec3& x) { return !dom->contains(x); });
    if (pts.empty()) throw ConfigError("validate: no sample fell inside the domain");

    const ValidationReport rep = validate_medium(m, pts);
    nlohmann::json j;
    j["medium"] = c.medium.empty() ? "built-in constant" : c.medium;
    j["domain"] = dom->describe();
    j["samples"] = pts.size();
    std::vector<std::string> problems;
    for (const auto& v : rep.violations)
        problems.push_back("violated " + v.condition + " at " + format_point(v.point) + " (value " + detail::g17(v.value) + ")");
    for (const auto& f : rep.failures) problems.push_back("failed at " + format_point(f.point) + ": " + f.message);

    // cP^2 - cS^2 = (lambda + mu)/rho > 0
    double worst_identity = 0.0;
    if (rep.passed) {
        for (const Vec3& x : pts) {
            const Moduli mo = m.moduli(x);
            const double cP = m.wavespeed(x, WaveMode::P), cS = m.wavespeed(x, WaveMode::S);
            const double lhs = cP * cP - cS * cS, rhs = (mo.lambda + mo.mu) / mo.rho;
            worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / std::abs(rhs));
            if (!(rhs > 0.0)) problems.push_back("violated lambda + mu > 0 at " + format_point(x));
        }
        if (worst_identity > 1e-12) problems.push_back("wavespeed identity off by " + detail::sci(worst_identity));
        for (WaveMode mode : {WaveMode::P, WaveMode::S}) {
            const ConvexityReport cr = check_boundary_convexity(m, mode, *dom);
            j["convexity_margin"][to_string(mode)] = cr.min_margin;
            if (!cr.convex)
                problems.push_back(std::string("boundary not strictly convex for ") + to_string(mode) + " at " +
                                   format_point(cr.worst_point) + " (margin " + detail::sci(cr.min_margin) + ")");
        }
    }
    j["identity_error"] = worst_identity;
    j["problems"] = problems;
    j["passed"] = problems.empty();
    if (!c.out.empty()) *detail::Sink(c, "validate.json", out) << j.dump(2) << '\n';
    for (const auto& p : problems) out << p << '\n';
    out << (problems.empty() ? "all invariants hold" : std::to_string(problems.size()) + " problem(s) found") << '\n';
    return problems.empty() ? kOk : kCheckFailed;
}

inline int cmd_trace(const RunConfig& c, std::ostream& out) {
    const IsotropicMedium m = detail::load(c);
    const DomainPtr dom = parse_domain(c.domain);
    const GeodesicPath g = trace_geodesic(m, detail::parse_mode(c.mode), detail::parse_vec3(c.x0, "--x0"),
                                          detail::parse_vec3(c.dir, "--dir"), *dom, c.t0, detail::trace_options(c));
    detail::Sink sink(c, "trace.csv", out);
    std::ostream& os = *sink;
    os << "kind,s,t,x1,x2,x3,v1,v2,v3\n";
    auto row = [&](const char* kind, double s, double t, const Vec3& x, const Vec3& v) {
        os << kind << ',' << detail::g17(s) << ',' << detail::g17(t);
        for (int i = 0; i < 3; ++i) os << ',' << detail::g17(x[i]);
        for (int i = 0; i < 3; ++i) os << ',' << detail::g17(v[i]);
        os << '\n';
    };
    for (const auto& p : g.samples()) row("sample", p.s, p.t, p.x, p.v);
    if (g.entry()) row("entry", g.entry()->s, g.entry()->t, g.entry()->x, g.entry()->direction);
    if (g.exit()) row("exit", g.exit()->s, g.exit()->t, g.exit()->x, g.exit()->direction);
    return kOk;
}

inline int cmd_beam(const RunConfig& c, std::ostream& out) {
    const IsotropicMedium m = detail::load(c);
    const DomainPtr dom = parse_domain(c.domain);
    const WaveMode mode = detail::parse_mode(c.mode);
    BeamOptions o;
    o.c2 = detail::parse_complex(c.c2, "--c2");
    o.c3 = detail::parse_complex(c.c3, "--c3");
    o.cP = o.c2;
    o.t0 = c.t0;
    o.delta = c.delta;
    o.trace = detail::trace_options(c);
    if (c.delta < 0.0) throw ConfigError("--delta must be non-negative");
    if (c.slab < 0) throw ConfigError("--slab must be non-negative");
    if (c.slab > 0 && c.out.empty()) throw ConfigError("--slab needs --out");
    const auto b = GaussianBeam::build(m, mode, detail::parse_vec3(c.x0, "--x0"), detail::parse_vec3(c.dir, "--dir"),
                                       *dom, o);
    {
        detail::Sink sink(c, "beam.csv", out);
        std::ostream& os = *sink;
        os << "tau,x1,x2,x3";
        for (const char* M : {"Y", "Z", "H"})
            for (int i = 1; i <= 3; ++i)
                for (int k = 1; k <= 3; ++k) os << detail::cplx_header(M + std::to_string(i) + std::to_string(k));
        for (int i = 1; i <= 3; ++i) os << detail::cplx_header("a" + std::to_string(i));
        os << '\n';
        for (const YZSample& s : b.riccati().samples()) {
            const Vec3 x = b.path().at(s.tau / std::numbers::sqrt2).x;
            os << detail::g17(s.tau);
            for (int i = 0; i < 3; ++i) os << ',' << detail::g17(x[i]);
            const CMat3 H = h_from_yz(s.Y, s.Z);
            for (const CMat3* M : {&s.Y, &s.Z, &H})
                for (int i = 0; i < 3; ++i)
                    for (int k = 0; k < 3; ++k) detail::put_cplx(os, (*M)(i, k));
            const CVec3 a = b.axis_amplitude(s.tau);
            for (int i = 0; i < 3; ++i) detail::put_cplx(os, a[i]);
            os << '\n';
        }
    }
    if (c.slab > 0) {
        // field on axis-aligned slabs: arclength along the ray, two transverse offsets
        detail::Sink sink(c, "beam_slab.csv", out);
        std::ostream& os = *sink;
        os << "t,x1,x2,x3" << detail::cplx_header("u1") << detail::cplx_header("u2") << detail::cplx_header("u3") << '\n';
        const double s_lo = b.tau_min() / std::numbers::sqrt2, s_hi = b.tau_max() / std::numbers::sqrt2;
        const int n = c.slab;
        for (int i = 0; i < n; ++i) {
            const double s = n == 1 ? 0.5 * (s_lo + s_hi) : s_lo + (s_hi - s_lo) * i / (n - 1);
            const FrameState f = b.chart().frame().at(s);
            const Vec3 e2 = f.e2.normalized(), e3 = f.e3.normalized();
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double a2 = n == 1 ? 0.0 : c.slab_width * (2.0 * j / (n - 1) - 1.0);
                    const double a3 = n == 1 ? 0.0 : c.slab_width * (2.0 * k / (n - 1) - 1.0);
                    const Vec3 x = f.x + a2 * e2 + a3 * e3;
                    const double t = b.chart().t0() + s;
                    const CVec3 u = b.evaluate(t, x, c.varrho);
                    os << detail::g17(t);
                    for (int q = 0; q < 3; ++q) os << ',' << detail::g17(x[q]);
                    for (int q = 0; q < 3; ++q) detail::put_cplx(os, u[q]);
                    os << '\n';
                }
        }
    }
    return kOk;
}

inline int cmd_reflect(const RunConfig& c, std::ostream& out) {
    const IsotropicMedium m = detail::load(c);
    const Moduli mo = m.moduli(detail::parse_vec3(c.x0, "--x0"));
    const WaveMode mode = detail::parse_mode(c.mode);
    if (c.pol != "sv" && c.pol != "sh") throw ConfigError("--pol must be sv or sh, got '" + c.pol + "'");
    const std::vector<double> angles =
        detail::parse_grid(c.angles.empty() ? "0:1.5:16" : c.angles, "--angles");
    detail::Sink sink(c, "reflect.csv", out);
    std::ostream& os = *sink;
    os << "angle,A_P_re,A_P_im,abs_A_P,abs_a_S,evanescent,traction_residual\n";
    for (double th : angles) {
        if (!(th >= 0.0 && th < std::numbers::pi / 2)) throw ConfigError("--angles: incidence angles lie in [0, pi/2)");
        const Vec3 u(std::sin(th) * std::cos(c.phi), std::sin(th) * std::sin(c.phi), std::cos(th));
        ReflectionCoefficients r;
        if (mode == WaveMode::P) {
            r = solve_p_incidence(1.0, u / mo.cP(), mo);
        } else {
            const Vec3 sv(std::cos(th) * std::cos(c.phi), std::cos(th) * std::sin(c.phi), -std::sin(th));
            const Vec3 sh(-std::sin(c.phi), std::cos(c.phi), 0.0);
            r = solve_s_incidence((c.pol == "sv" ? sv : sh).cast<cplx>(), u / mo.cS(), mo);
        }
        os << detail::g17(th);
        detail::put_cplx(os, r.A_P_minus);
        os << ',' << detail::g17(std::abs(r.A_P_minus)) << ',' << detail::g17(r.a_S_minus.norm()) << ','
           << (r.snell.evanescent ? 1 : 0) << ',' << detail::sci(traction_ratio(r, mo)) << '\n';
    }
    return kOk;
}

inline int cmd_interact(const RunConfig& c, std::ostream& out) {
    const IsotropicMedium m = detail::load(c);
    const Vec3 x0 = detail::parse_vec3(c.x0, "--x0");
    const Moduli mo = m.moduli(x0);
    const double cP = m.wavespeed(x0, WaveMode::P), cS = m.wavespeed(x0, WaveMode::S);
    ConfigKind kind;
    if (c.kind == "perp") kind = ConfigKind::Perp;
    else if (c.kind == "inplane") kind = ConfigKind::InPlane;
    else throw ConfigError("--kind must be perp or inplane, got '" + c.kind + "'");
    std::string grid = c.angles;
    if (grid.empty()) {
        const double top = kind == ConfigKind::Perp ? std::numbers::pi - 0.1 : 0.95 * max_ssp_inplane_angle(cP, cS).first;
        grid = "0.1:" + detail::g17(top) + ":12";
    }
    const std::vector<double> angles = detail::parse_grid(grid, "--angles");
    detail::Sink sink(c, "interact.csv", out);
    std::ostream& os = *sink;
    os << "angle,scaled\n";
    for (double a : angles) {
        const InteractionConfig cfg = kind == ConfigKind::Perp ? perp_config(a, cP, cS) : inplane_config_for_alpha(a, cP, cS);
        os << detail::g17(a) << ',' << detail::g17(amplitude_A(cfg, mo).scaled.real()) << '\n';
    }
    return kOk;
}

inline int cmd_recover(const RunConfig& c, std::ostream& out) {
    const IsotropicMedium m = detail::load(c);
    RecoveryOptions opt;
    opt.psi_grid = detail::parse_grid(c.psi_grid, "--psi");
    if (!c.alpha_grid.empty()) opt.alpha_grid = detail::parse_grid(c.alpha_grid, "--alpha");
    if (c.noise < 0.0) throw ConfigError("--noise must be non-negative");
    opt.noise = c.noise;
    opt.seed = c.seed;
    nlohmann::json report;
    report["C"] = nullptr;
    report["C_note"] = "C does not enter the sweeps and is not determined";
    std::ostringstream sweeps;
    sweeps << "point,kind,angle,value\n";
    const auto pts = detail::parse_points(c.points);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const RecoveryReport r = end_to_end_recover(m, pts[i], opt);
        const RecoveredModuli& q = r.recovered;
        nlohmann::json p;
        p["x0"] = {pts[i][0], pts[i][1], pts[i][2]};
        p["k1"] = q.k1;
        p["k2"] = q.k2;
        p["k3"] = q.k3;
        p["lambda"] = q.lambda;
        p["mu"] = q.mu;
        p["rho"] = q.rho;
        p["A"] = q.A;
        p["B"] = q.B;
        p["residuals"] = {{"psi", q.psi_residual}, {"alpha", q.alpha_residual}};
        p["conditioning"] = {{"psi", q.psi_condition}};
        p["truth"] = {{"lambda", r.truth.lambda}, {"mu", r.truth.mu}, {"rho", r.truth.rho}, {"A", r.truth.A},
                      {"B", r.truth.B}};
        p["max_rel_error"] = r.max_rel_error;
        report["points"].push_back(p);
        for (const auto* v : {&r.psi_samples, &r.alpha_samples})
            for (const auto& s : *v)
                sweeps << i << ',' << to_string(s.kind) << ',' << detail::g17(s.angle) << ',' << detail::g17(s.value)
                       << '\n';
    }
    *detail::Sink(c, "recover.json", out) << report.dump(2) << '\n';
    if (!c.out.empty()) *detail::Sink(c, "recover_sweeps.csv", out) << sweeps.str();
    return kOk;
}

inline int cmd_check(const RunConfig& c, std::ostream& out) {
    if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");
    const std::vector<CheckResult> res = run_invariant_suite(c.seed, c.jobs);
    std::ostringstream os;
    char line[160];
    os << "invariant suite, seed " << c.seed << '\n';
    std::snprintf(line, sizeof line, "%-24s %7s %11s %9s  %s\n", "check", "cases", "worst", "tol", "result");
    os << line;
    int passed = 0;
    nlohmann::json j;
    j["seed"] = c.seed;
    for (const auto& r : res) {
        std::snprintf(line, sizeof line, "%-24s %7zu %11.3e %9.0e  %s\n", r.name.c_str(), r.cases, r.worst, r.tol,
                      r.passed ? "PASS" : "FAIL");
        os << line;
        passed += r.passed;
        j["checks"].push_back({{"name", r.name}, {"cases", r.cases}, {"worst", r.worst}, {"tol", r.tol}, {"passed", r.passed}});
    }
    os << passed << '/' << res.size() << " checks passed\n";
    j["passed"] = passed == static_cast<int>(res.size());
    out << os.str();
    if (!c.out.empty()) {
        *detail::Sink(c, "check.txt", out) << os.str();
        *detail::Sink(c, "check.json", out) << j.dump(2) << '\n';
    }
    return passed == static_cast<int>(res.size()) ? kOk : kCheckFailed;
}

/// Parses argv, runs one subcommand and returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Gaussian beams, free-surface reflection and nonlinear interaction in isotropic elastic media"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    auto common = [&](CLI::App* s) {
        s->add_option("--medium", c.medium, "medium file (lines 'lambda = expr' etc.); default constant medium");
        s->add_option("--domain", c.domain, "ball, ball:r, ball:cx,cy,cz,r, ellipsoid:a,b,c or ellipsoid:cx,cy,cz,a,b,c");
        s->add_option("--mode", c.mode, "wave mode, P or S");
        s->add_option("--seed", c.seed, "seed for every random choice");
        s->add_option("--jobs", c.jobs, "worker threads");
        s->add_option("--out", c.out, "output directory; stdout when absent");
        s->add_option("--tol", c.tol, "integrator relative tolerance")->check(CLI::PositiveNumber);
    };
    auto ray = [&](CLI::App* s) {
        s->add_option("--x0", c.x0, "start point x,y,z");
        s->add_option("--dir", c.dir, "initial direction x,y,z");
        s->add_option("--t0", c.t0, "time at x0");
    };

    CLI::App* validate = app.add_subcommand("validate", "check admissibility, wavespeed identity and boundary convexity");
    common(validate);
    validate->add_option("--samples", c.samples, "number of interior sample points");

    CLI::App* trace = app.add_subcommand("trace", "trace a ray; CSV of samples and boundary events");
    common(trace);
    ray(trace);

    CLI::App* beam = app.add_subcommand("beam", "build a Gaussian beam; CSV of Y, Z, H and the axis amplitude");
    common(beam);
    ray(beam);
    beam->add_option("--c2", c.c2, "amplitude constant along e2 (P: the P constant), as re,im");
    beam->add_option("--c3", c.c3, "amplitude constant along e3, as re,im");
    beam->add_option("--delta", c.delta, "tube radius, 0 for the default");
    beam->add_option("--slab", c.slab, "grid points per side of a sampled field slab, written to beam_slab.csv");
    beam->add_option("--slab-width", c.slab_width, "transverse half-width of the slab");
    beam->add_option("--varrho", c.varrho, "frequency for the slab");

    CLI::App* reflect = app.add_subcommand("reflect", "free-surface reflection over incidence angles");
    common(reflect);
    reflect->add_option("--x0", c.x0, "point where the moduli are taken");
    reflect->add_option("--angles", c.angles, "incidence angles from the normal: list or start:stop:count");
    reflect->add_option("--phi", c.phi, "azimuth of the incidence plane");
    reflect->add_option("--pol", c.pol, "S polarization, sv or sh");

    CLI::App* interact = app.add_subcommand("interact", "interaction amplitude over an angle sweep");
    common(interact);
    interact->add_option("--x0", c.x0, "interaction point");
    interact->add_option("--kind", c.kind, "perp (sweep psi) or inplane (sweep alpha)");
    interact->add_option("--angles", c.angles, "angles: list or start:stop:count");

    CLI::App* recover = app.add_subcommand("recover", "recover moduli from synthetic sweeps; JSON report");
    common(recover);
    recover->add_option("--points", c.points, "points x,y,z separated by ';'");
    recover->add_option("--psi", c.psi_grid, "psi grid of the perpendicular sweep");
    recover->add_option("--alpha", c.alpha_grid, "alpha grid of the in-plane sweep; default 0.4 and 0.8 of the reachable maximum");
    recover->add_option("--noise", c.noise, "relative Gaussian noise on the samples");

    CLI::App* check = app.add_subcommand("check", "run the invariant suite and print a pass/fail table");
    common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");
        if (*validate) return cmd_validate(c, out);
        if (*trace) return cmd_trace(c, out);
        if (*beam) return cmd_beam(c, out);
        if (*reflect) return cmd_reflect(c, out);
        if (*interact) return cmd_interact(c, out);
        if (*recover) return cmd_recover(c, out);
        return cmd_check(c, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidMediumError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kCheckFailed;
    }
}

}  // namespace nlwave::cli
