#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace naggs {

/// Two-mode quadratic f(x) = 0.5*(mu*x1^2 + L*x2^2) together with the NAG-GS
/// parameters (gamma held fixed) and the noise level.
struct SpectrumConfig {
    double mu = 1.0;
    double L = 1.0;
    double gamma = 1.0;
    double alpha = 1.0;
    double sigma = 0.0;

    /// Throws ConfigError unless 0 < mu <= L < inf, gamma > 0, alpha > 0, sigma >= 0.
    void validate() const;
};

/// State ordering is (x1, x2, v1, v2).
using IterationMatrix = Eigen::Matrix4d;
using Eigenvalues4 = std::array<std::complex<double>, 4>;

/// Closed-form iteration matrix of NAG-GS on a two-mode quadratic.
IterationMatrix build_iteration_matrix(const SpectrumConfig& cfg);

/// 2x2 block of one Hessian mode `lambda` when NAG-GS runs with parameter `mu`:
/// acts on (x_i, v_i).
Eigen::Matrix2d mode_iteration_block(double lambda, double mu, double gamma, double alpha);

/// The two eigenvalues of mode_iteration_block. For lambda == mu they are
/// {1/(1+alpha), gamma/(gamma+alpha*mu)}.
std::array<std::complex<double>, 2> mode_eigenvalues(double lambda, double mu, double gamma,
                                                     double alpha);

/// lambda_1 = gamma/(gamma+alpha*mu), lambda_2 = 1/(1+alpha), lambda_3,4 from the radical
/// formulas (the latter two are the nontrivial pair of the L-mode).
Eigenvalues4 iteration_eigenvalues(const SpectrumConfig& cfg);

struct StabilityReport {
    Eigenvalues4 eigenvalues{};
    double spectral_radius = 0.0;
    double alpha_star = 0.0;
    std::optional<double> alpha_crit;
    bool stable = false;
};

StabilityReport stability_report(const SpectrumConfig& cfg);

/// Rate-optimal constant step. +infinity when L == mu. Requires gamma >= mu.
double optimal_alpha(double mu, double L, double gamma);

/// Step at which the spectral radius reaches 1, present only when mu < L/2.
std::optional<double> critical_alpha(double mu, double L, double gamma);

/// Coefficients (c3, c2, c1, c0) of the cubic whose positive root is alpha_crit.
std::array<double, 4> covariance_denominator_cubic(double mu, double L, double gamma);

struct SpectralCurvePoint {
    double alpha = 0.0;
    std::array<double, 4> lambda_abs{};
    double rho = 0.0;
    bool stable = false;
};

/// rho(E(alpha)) for each alpha (mu, L, gamma taken from `base`).
std::vector<SpectralCurvePoint> spectral_radius_curve(const SpectrumConfig& base,
                                                      const std::vector<double>& alphas);

/// Solves X = A X A^T + Q through the vectorized system (I - A kron A) vec X = vec Q.
/// `condition` receives an estimate of the system's condition number.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                        double* condition = nullptr);

struct StationaryCovariance {
    Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
    /// Ascending.
    std::array<double, 4> eigenvalues{};
    double condition = 1.0;
    /// Non-empty when the Kronecker system is badly conditioned (condition > 1e12).
    std::string warning;
};

/// Q = blockdiag(0, alpha*sigma^2/(1+tau)^2 * I2), tau = alpha*mu/gamma.
Eigen::Matrix4d noise_covariance(const SpectrumConfig& cfg);

/// Throws NonStationaryError when rho(E) >= 1.
StationaryCovariance stationary_covariance(const SpectrumConfig& cfg);

/// Per-mode view of an n-dimensional diagonal quadratic. Modes are paired in order
/// into 2-D blocks; for odd n the last eigenvalue is paired with itself.
struct BlockStability {
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    double spectral_radius = 0.0;
};

struct NdStabilityReport {
    std::vector<BlockStability> blocks;
    double spectral_radius = 0.0;
    bool stable = false;
};

NdStabilityReport nd_stability(const std::vector<double>& hessian_eigenvalues, double mu,
                               double gamma, double alpha);

/// Dense 2n x 2n iteration matrix for diagonal Hessian `lambdas`, ordering (x_1..x_n, v_1..v_n).
Eigen::MatrixXd build_iteration_matrix_nd(const std::vector<double>& lambdas, double mu,
                                          double gamma, double alpha);

struct MonteCarloCovariance {
    /// Empirical E[y y^T] over trajectories that did not diverge.
    Eigen::Matrix4d second_moment = Eigen::Matrix4d::Zero();
    /// Standard error of each entry of second_moment.
    Eigen::Matrix4d standard_error = Eigen::Matrix4d::Zero();
    std::size_t n_used = 0;
    std::size_t n_diverged = 0;
};

/// Runs n_traj NAG-GS trajectories (gamma fixed, y_0 = 0) on the two-mode quadratic
/// and returns the second moment of y at step n_steps.
MonteCarloCovariance montecarlo_covariance_check(const SpectrumConfig& cfg, std::size_t n_traj,
                                                 std::size_t n_steps, std::uint64_t seed);

}  // namespace naggs
