#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "naggs/common.hpp"

namespace naggs {

/// Matrix-free symmetric operator, typically a Hessian-vector product.
struct LinearOperator {
    std::size_t dim = 0;
    std::function<Vector(const Vector&)> apply;
};

struct EigenEstimate {
    double value = 0.0;
    /// Unit norm.
    Vector vector;
    /// ||H v - value v||.
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Largest-magnitude eigenpair. Converged when the residual drops below tol*|value|
/// (this also bounds the change of the Rayleigh quotient). The signed value is the
/// Rayleigh quotient of the final vector.
EigenEstimate power_iteration(const LinearOperator& op, double tol, int max_iter,
                              std::uint64_t seed);

enum class RayleighTarget { largest, smallest };

/// Local optimization of the Rayleigh quotient from v0 by gradient steps with exact line
/// search in span{v, grad} followed by normalization. Ascends for `largest` and descends
/// for `smallest`. Stops when the residual is below tol*|value| or progress stalls.
EigenEstimate rayleigh_refine(const LinearOperator& op, const Vector& v0, double tol, int max_iter,
                              RayleighTarget target = RayleighTarget::largest);

struct ExtremeEigenvalues {
    EigenEstimate lambda_min;
    EigenEstimate lambda_max;
};

/// Both ends of the spectrum. Power iteration on H finds one end; the spectral shift
/// v -> H v - s v (s the first estimate) turns the other end into the dominant one.
/// Each estimate is then refined on the Rayleigh quotient, initialized with the power
/// iteration's eigenvector.
ExtremeEigenvalues extreme_eigenvalues(const LinearOperator& op, double tol, int max_iter,
                                       std::uint64_t seed);

/// Probabilistic checks of the operator contract on `n_probes` random probe pairs.
/// Return the largest relative violation observed.
double probe_linearity(const LinearOperator& op, int n_probes, std::uint64_t seed);
double probe_symmetry(const LinearOperator& op, int n_probes, std::uint64_t seed);

}  // namespace naggs
