#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nlwave {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;

enum class WaveMode { P, S };

inline const char* to_string(WaveMode m) { return m == WaveMode::P ? "P" : "S"; }

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lamé radicand or density not positive where a wavespeed was requested.
class InvalidMediumError : public Error {
public:
    using Error::Error;
};

/// Grid-backed field queried outside its sampled box.
class OutOfSupportError : public Error {
public:
    using Error::Error;
};

/// Geodesic failed to leave the domain within the arclength budget.
class TrappingError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class PositivityLostError : public Error {
public:
    using Error::Error;
};

class RankDeficientError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0, int column = 0)
        : Error(format(msg, line, column)), line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line <= 0) return msg;
        std::string s = "line " + std::to_string(line);
        if (column > 0) s += ", column " + std::to_string(column);
        return s + ": " + msg;
    }
    int line_;
    int column_;
};

inline WaveMode parse_mode(std::string_view s) {
    if (s == "P" || s == "p") return WaveMode::P;
    if (s == "S" || s == "s") return WaveMode::S;
    throw ParseError("unknown wave mode '" + std::string(s) + "' (expected P or S)");
}

}  // namespace nlwave
