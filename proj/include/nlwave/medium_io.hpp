#pragma once

#include "nlwave/domain.hpp"
#include "nlwave/fields.hpp"
#include "nlwave/medium.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace nlwave {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ParseError("cannot open '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace detail

/// Grid file: "dims nx ny nz", "origin ox oy oz", "spacing hx hy hz", then
/// "values" followed by nx*ny*nz numbers, row-major with x1 slowest.
inline GridData parse_grid_text(const std::string& text, const std::string& name = "grid") {
    GridData g;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_dims = false, have_origin = false, have_spacing = false, in_values = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (in_values) {
            double v;
            while (ls >> v) g.values.push_back(v);
            if (!ls.eof()) throw ParseError(name + ": malformed value", lineno);
            continue;
        }
        std::string key;
        ls >> key;
        if (key == "dims") {
            ls >> g.dims[0] >> g.dims[1] >> g.dims[2];
            have_dims = static_cast<bool>(ls);
        } else if (key == "origin") {
            ls >> g.origin[0] >> g.origin[1] >> g.origin[2];
            have_origin = static_cast<bool>(ls);
        } else if (key == "spacing") {
            ls >> g.spacing[0] >> g.spacing[1] >> g.spacing[2];
            have_spacing = static_cast<bool>(ls);
        } else if (key == "values") {
            in_values = true;
            double v;
            while (ls >> v) g.values.push_back(v);
            continue;
        } else {
            throw ParseError(name + ": unknown grid key '" + key + "'", lineno);
        }
        if (!ls) throw ParseError(name + ": malformed '" + key + "' line", lineno);
    }
    if (!have_dims || !have_origin || !have_spacing || !in_values)
        throw ParseError(name + ": grid file needs dims, origin, spacing and values");
    return g;
}

/// Coefficient value: a number, an expression in x1 x2 x3, or "grid <file>".
inline FieldPtr parse_coefficient(const std::string& rhs, const std::filesystem::path& base_dir, int lineno) {
    std::istringstream ls(rhs);
    std::string head;
    ls >> head;
    if (head == "grid") {
        std::string file;
        std::getline(ls, file);
        file = detail::trim(file);
        if (file.size() >= 2 && (file.front() == '"' || file.front() == '\'')) file = file.substr(1, file.size() - 2);
        if (file.empty()) throw ParseError("grid needs a file name", lineno);
        std::filesystem::path p(file);
        if (p.is_relative()) p = base_dir / p;
        try {
            return std::make_shared<GridField>(parse_grid_text(detail::read_file(p), p.filename().string()),
                                               p.filename().string());
        } catch (const ParseError& e) {
            throw ParseError(std::string("in grid referenced here: ") + e.what(), lineno);
        }
    }
    try {
        Expression e = Expression::parse(rhs, lineno);
        if (e.is_constant()) return make_constant_field(e.value(Vec3::Zero()));
        return std::make_shared<ExpressionField>(std::move(e));
    } catch (const ParseError&) {
        throw;
    }
}

/// Medium definition: lines "key = value" with keys lambda, mu, rho, A, B, C.
/// The third-order moduli default to zero.
inline IsotropicMedium parse_medium_text(const std::string& text, const std::filesystem::path& base_dir = ".") {
    std::map<std::string, FieldPtr> f;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string rhs = detail::trim(line.substr(eq + 1));
        if (key != "lambda" && key != "mu" && key != "rho" && key != "A" && key != "B" && key != "C")
            throw ParseError("unknown coefficient '" + key + "'", lineno);
        if (f.count(key)) throw ParseError("duplicate coefficient '" + key + "'", lineno);
        if (rhs.empty()) throw ParseError("missing value for '" + key + "'", lineno);
        f[key] = parse_coefficient(rhs, base_dir, lineno);
    }
    for (const char* k : {"lambda", "mu", "rho"})
        if (!f.count(k)) throw ParseError(std::string("medium definition lacks '") + k + "'");
    for (const char* k : {"A", "B", "C"})
        if (!f.count(k)) f[k] = make_constant_field(0.0);
    return IsotropicMedium(f["lambda"], f["mu"], f["rho"], f["A"], f["B"], f["C"]);
}

inline IsotropicMedium load_medium(const std::filesystem::path& p) {
    const std::string text = detail::read_file(p);
    try {
        return parse_medium_text(text, p.parent_path().empty() ? std::filesystem::path(".") : p.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

/// "ball", "ball:r", "ball:cx,cy,cz,r", "ellipsoid:a,b,c" or "ellipsoid:cx,cy,cz,a,b,c".
inline DomainPtr parse_domain(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    std::vector<double> v;
    if (colon != std::string::npos) {
        std::istringstream ls(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ls, tok, ',')) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (detail::trim(tok.substr(used)).size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError("domain '" + spec + "': malformed number '" + tok + "'");
            }
        }
    }
    try {
        if (kind == "ball") {
            if (v.empty()) return make_ball();
            if (v.size() == 1) return make_ball(Vec3::Zero(), v[0]);
            if (v.size() == 4) return make_ball(Vec3(v[0], v[1], v[2]), v[3]);
        } else if (kind == "ellipsoid") {
            if (v.size() == 3) return make_ellipsoid(Vec3::Zero(), Vec3(v[0], v[1], v[2]));
            if (v.size() == 6) return make_ellipsoid(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]));
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError("domain '" + spec + "': " + e.what());
    }
    throw ParseError("domain '" + spec + "' not understood (use ball[:r | :cx,cy,cz,r] or ellipsoid:[cx,cy,cz,]a,b,c)");
}

}  // namespace nlwave
