#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace naggs {

using Vector = std::vector<double>;

/// Raised when a configuration violates a documented range or domain constraint.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when two vectors that must share a dimension do not.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base class for runtime numerical failures (non-convergence, singular systems, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The discrete Lyapunov equation has no PSD solution because rho(E) >= 1.
class NonStationaryError : public NumericalError {
public:
    explicit NonStationaryError(double rho)
        : NumericalError("iteration is not stationary: spectral radius " + std::to_string(rho) +
                         " >= 1"),
          spectral_radius(rho) {}
    double spectral_radius;
};

/// Newton-Raphson did not reach the requested tolerance.
class NewtonError : public NumericalError {
public:
    NewtonError(const std::string& what, double residual_norm, int iterations)
        : NumericalError(what), residual(residual_norm), iterations(iterations) {}
    double residual;
    int iterations;
};

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
bool all_finite(std::span<const double> a);

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double x);

}  // namespace naggs
