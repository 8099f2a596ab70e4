#include "naggs/quadratic_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "naggs/common.hpp"
#include "naggs/ensemble_kernels.hpp"

namespace naggs {

namespace {

using cplx = std::complex<double>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void SpectrumConfig::validate() const {
    if (!positive_finite(mu)) throw ConfigError("mu must be positive");
    if (!positive_finite(L) || L < mu) throw ConfigError("L must be finite and >= mu");
    if (!positive_finite(gamma)) throw ConfigError("gamma must be positive");
    if (!positive_finite(alpha)) throw ConfigError("alpha must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
}

Eigen::Matrix2d mode_iteration_block(double lambda, double mu, double gamma, double alpha) {
    const double tau = alpha * mu / gamma;
    const double c = alpha * (mu - lambda) / (gamma * (1.0 + tau) * (1.0 + alpha));
    Eigen::Matrix2d B;
    B << 1.0 / (1.0 + alpha), alpha / (1.0 + alpha), c, alpha * c + 1.0 / (1.0 + tau);
    return B;
}

IterationMatrix build_iteration_matrix(const SpectrumConfig& cfg) {
    cfg.validate();
    IterationMatrix E = IterationMatrix::Zero();
    const double lambdas[2] = {cfg.mu, cfg.L};
    for (int i = 0; i < 2; ++i) {
        const Eigen::Matrix2d B = mode_iteration_block(lambdas[i], cfg.mu, cfg.gamma, cfg.alpha);
        E(i, i) = B(0, 0);
        E(i, i + 2) = B(0, 1);
        E(i + 2, i) = B(1, 0);
        E(i + 2, i + 2) = B(1, 1);
    }
    return E;
}

std::array<std::complex<double>, 2> mode_eigenvalues(double lambda, double mu, double gamma,
                                                     double alpha) {
    const double a = alpha;
    const double a2 = a * a;
    const double P = 2.0 * gamma + a * gamma + a * mu - lambda * a2 + a2 * mu;
    const double Q = gamma + a * gamma + a * mu + a2 * mu;
    const double D = lambda * lambda * a2 - 2.0 * lambda * a2 * mu - 2.0 * lambda * a * mu -
                     2.0 * gamma * lambda * a - 4.0 * gamma * lambda + a2 * mu * mu +
                     2.0 * a * mu * mu + 2.0 * gamma * a * mu + mu * mu + 2.0 * gamma * mu +
                     gamma * gamma;
    const cplx root = std::sqrt(cplx(D, 0.0));
    return {(P + a * root) / (2.0 * Q), (P - a * root) / (2.0 * Q)};
}

Eigenvalues4 iteration_eigenvalues(const SpectrumConfig& cfg) {
    cfg.validate();
    const auto pair = mode_eigenvalues(cfg.L, cfg.mu, cfg.gamma, cfg.alpha);
    return {cplx(1.0 / (1.0 + cfg.alpha * cfg.mu / cfg.gamma), 0.0),
            cplx(1.0 / (1.0 + cfg.alpha), 0.0), pair[0], pair[1]};
}

double optimal_alpha(double mu, double L, double gamma) {
    if (!positive_finite(mu) || !positive_finite(L) || L < mu) {
        throw ConfigError("optimal_alpha needs 0 < mu <= L");
    }
    if (!positive_finite(gamma) || gamma < mu) {
        throw ConfigError("optimal_alpha needs gamma >= mu");
    }
    if (L == mu) return std::numeric_limits<double>::infinity();
    if (gamma == mu) return (2.0 * mu + 2.0 * std::sqrt(mu * L)) / (L - mu);
    const double d = mu - gamma;
    return (mu + gamma + std::sqrt(d * d + 4.0 * gamma * L)) / (L - mu);
}

std::optional<double> critical_alpha(double mu, double L, double gamma) {
    if (!positive_finite(mu) || !positive_finite(L) || L < mu) {
        throw ConfigError("critical_alpha needs 0 < mu <= L");
    }
    if (!positive_finite(gamma)) throw ConfigError("critical_alpha needs gamma > 0");
    if (!(2.0 * mu < L)) return std::nullopt;
    const double disc = gamma * gamma - 6.0 * gamma * mu + mu * mu + 4.0 * gamma * L;
    return (mu + gamma + std::sqrt(disc)) / (L - 2.0 * mu);
}

std::array<double, 4> covariance_denominator_cubic(double mu, double L, double gamma) {
    return {mu * (2.0 * mu - L), (mu + gamma) * (4.0 * mu - L),
            2.0 * mu * mu + 8.0 * gamma * mu + 2.0 * gamma * gamma, 4.0 * gamma * (mu + gamma)};
}

StabilityReport stability_report(const SpectrumConfig& cfg) {
    StabilityReport rep;
    rep.eigenvalues = iteration_eigenvalues(cfg);
    for (const auto& l : rep.eigenvalues) rep.spectral_radius = std::max(rep.spectral_radius, std::abs(l));
    rep.stable = rep.spectral_radius < 1.0;
    rep.alpha_star = cfg.gamma >= cfg.mu ? optimal_alpha(cfg.mu, cfg.L, cfg.gamma)
                                         : std::numeric_limits<double>::quiet_NaN();
    rep.alpha_crit = critical_alpha(cfg.mu, cfg.L, cfg.gamma);
    return rep;
}

std::vector<SpectralCurvePoint> spectral_radius_curve(const SpectrumConfig& base,
                                                      const std::vector<double>& alphas) {
    std::vector<SpectralCurvePoint> out;
    out.reserve(alphas.size());
    for (double a : alphas) {
        SpectrumConfig cfg = base;
        cfg.alpha = a;
        const auto lam = iteration_eigenvalues(cfg);
        SpectralCurvePoint p;
        p.alpha = a;
        for (int i = 0; i < 4; ++i) {
            p.lambda_abs[static_cast<std::size_t>(i)] = std::abs(lam[static_cast<std::size_t>(i)]);
            p.rho = std::max(p.rho, p.lambda_abs[static_cast<std::size_t>(i)]);
        }
        p.stable = p.rho < 1.0;
        out.push_back(p);
    }
    return out;
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                        double* condition) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
        throw DimensionError("solve_discrete_lyapunov: shape mismatch");
    }
    // Column-major vec: vec(A X A^T) = (A kron A) vec X.
    const Eigen::Index m = n * n;
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index i1 = 0; i1 < n; ++i1) {
        for (Eigen::Index j1 = 0; j1 < n; ++j1) {
            const double a = A(i1, j1);
            if (a == 0.0) continue;
            for (Eigen::Index i2 = 0; i2 < n; ++i2) {
                for (Eigen::Index j2 = 0; j2 < n; ++j2) {
                    K(i1 * n + i2, j1 * n + j2) -= a * A(i2, j2);
                }
            }
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    if (condition != nullptr) {
        const double rc = lu.rcond();
        *condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd vecQ = Eigen::Map<const Eigen::VectorXd>(Q.data(), m);
    const Eigen::VectorXd vecX = lu.solve(vecQ);
    Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(vecX.data(), n, n);
    return 0.5 * (X + X.transpose());
}

Eigen::Matrix4d noise_covariance(const SpectrumConfig& cfg) {
    const double tau = cfg.alpha * cfg.mu / cfg.gamma;
    const double q = cfg.alpha * cfg.sigma * cfg.sigma / ((1.0 + tau) * (1.0 + tau));
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(2, 2) = q;
    Q(3, 3) = q;
    return Q;
}

StationaryCovariance stationary_covariance(const SpectrumConfig& cfg) {
    const IterationMatrix E = build_iteration_matrix(cfg);
    const Eigen::Vector4cd ev = E.eigenvalues();
    const double rho = ev.cwiseAbs().maxCoeff();
    if (!(rho < 1.0)) throw NonStationaryError(rho);

    StationaryCovariance out;
    out.C = solve_discrete_lyapunov(E, noise_covariance(cfg), &out.condition);
    if (out.condition > 1e12) {
        out.warning = "Lyapunov system is ill-conditioned (condition " +
                      std::to_string(out.condition) + ")";
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(out.C, Eigen::EigenvaluesOnly);
    for (int i = 0; i < 4; ++i) out.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    return out;
}

NdStabilityReport nd_stability(const std::vector<double>& hessian_eigenvalues, double mu,
                               double gamma, double alpha) {
    if (hessian_eigenvalues.empty()) throw ConfigError("nd_stability: empty spectrum");
    if (!positive_finite(gamma) || !positive_finite(alpha)) {
        throw ConfigError("nd_stability: gamma and alpha must be positive");
    }
    NdStabilityReport rep;
    const std::size_t n = hessian_eigenvalues.size();
    for (std::size_t i = 0; i < n; i += 2) {
        BlockStability blk;
        blk.lambda_a = hessian_eigenvalues[i];
        blk.lambda_b = i + 1 < n ? hessian_eigenvalues[i + 1] : hessian_eigenvalues[i];
        for (double lam : {blk.lambda_a, blk.lambda_b}) {
            for (const auto& z : mode_eigenvalues(lam, mu, gamma, alpha)) {
                blk.spectral_radius = std::max(blk.spectral_radius, std::abs(z));
            }
        }
        rep.spectral_radius = std::max(rep.spectral_radius, blk.spectral_radius);
        rep.blocks.push_back(blk);
    }
    rep.stable = rep.spectral_radius < 1.0;
    return rep;
}

Eigen::MatrixXd build_iteration_matrix_nd(const std::vector<double>& lambdas, double mu,
                                          double gamma, double alpha) {
    const auto n = static_cast<Eigen::Index>(lambdas.size());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Matrix2d B =
            mode_iteration_block(lambdas[static_cast<std::size_t>(i)], mu, gamma, alpha);
        E(i, i) = B(0, 0);
        E(i, n + i) = B(0, 1);
        E(n + i, i) = B(1, 0);
        E(n + i, n + i) = B(1, 1);
    }
    return E;
}

MonteCarloCovariance montecarlo_covariance_check(const SpectrumConfig& cfg, std::size_t n_traj,
                                                 std::size_t n_steps, std::uint64_t seed) {
    cfg.validate();
    if (n_traj < 2) throw ConfigError("montecarlo_covariance_check needs at least 2 trajectories");

    QuadraticEnsembleSpec spec;
    spec.A = Eigen::Vector2d(cfg.mu, cfg.L).asDiagonal();
    spec.x_star = {0.0, 0.0};
    spec.method = EnsembleMethod::nag_gs;
    spec.alpha = cfg.alpha;
    spec.mu = cfg.mu;
    spec.gamma0 = cfg.gamma;
    spec.sigma = cfg.sigma;
    spec.update_gamma = false;
    spec.n_traj = n_traj;
    spec.n_steps = n_steps;
    spec.init = QuadraticEnsembleSpec::Init::zero;
    spec.seed = seed;
    const QuadraticEnsembleResult res = simulate_quadratic_ensemble(spec);

    MonteCarloCovariance out;
    Eigen::Matrix4d s1 = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d s2 = Eigen::Matrix4d::Zero();
    for (std::size_t t = 0; t < n_traj; ++t) {
        if (res.diverged[t]) {
            ++out.n_diverged;
            continue;
        }
        const Eigen::Vector4d y(res.final_x[2 * t], res.final_x[2 * t + 1], res.final_v[2 * t],
                                res.final_v[2 * t + 1]);
        const Eigen::Matrix4d yy = y * y.transpose();
        s1 += yy;
        s2 += yy.cwiseProduct(yy);
        ++out.n_used;
    }
    if (out.n_used < 2) return out;
    const double n = static_cast<double>(out.n_used);
    out.second_moment = s1 / n;
    const Eigen::Matrix4d var = (s2 / n - out.second_moment.cwiseProduct(out.second_moment)) * (n / (n - 1.0));
    out.standard_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
    return out;
}

}  // namespace naggs
