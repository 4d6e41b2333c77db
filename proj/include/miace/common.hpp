#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace miace {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries the offending line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix length does not match the dataset dimensionality.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Violated invariant, precondition, or configuration contract.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: degenerate update, estimation breakdown, underflow.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Deterministic random source. All sampling transforms are written out
/// here so a seed pins the exact stream independent of the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; caches the second deviate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Shortest decimal form that round-trips a double exactly through parse_double.
std::string format_double(double v);

/// Strict double parse of a whole token; throws ParseError on trailing junk.
double parse_double(std::string_view token, std::size_t line_no);

/// Strict integer parse of a whole token.
long parse_long(std::string_view token, std::size_t line_no);

} // namespace miace
