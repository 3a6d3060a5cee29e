#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace doa {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VectorX<double>;
using Mat = MatrixX<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    DimensionError(const std::string& what, std::size_t expected, std::size_t got)
        : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
                std::to_string(got)),
          expected_(expected), got_(got) {}

    std::size_t expected() const { return expected_; }
    std::size_t got() const { return got_; }

private:
    std::size_t expected_;
    std::size_t got_;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& msg)
        : Error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline void require_dim(const std::string& what, Eigen::Index expected, Eigen::Index got) {
    if (expected != got)
        throw DimensionError(what, static_cast<std::size_t>(expected), static_cast<std::size_t>(got));
}

/// Axis-aligned box in state space.
struct Region {
    Vec lower;
    Vec upper;

    Region() = default;
    Region(Vec lo, Vec hi);

    /// Same interval [lo, hi] on every coordinate.
    static Region cube(Eigen::Index dim, double lo, double hi);

    Eigen::Index dim() const { return lower.size(); }
    bool contains(const Vec& x) const;
};

}  // namespace doa
