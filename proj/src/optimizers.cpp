#include "naggs/optimizers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace naggs {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

double gs_next_gamma(double gamma, const NagGsConfig& cfg) {
    if (!cfg.update_gamma) return gamma;
    const double a = cfg.alpha / (1.0 + cfg.alpha);
    return cfg.mu + (1.0 - a) * (gamma - cfg.mu);
}

}  // namespace

OptimizerState make_state(Vector x0, double gamma0) {
    Vector v0 = x0;
    return make_state(std::move(x0), std::move(v0), gamma0);
}

OptimizerState make_state(Vector x0, Vector v0, double gamma0) {
    require_same_dim(x0.size(), v0.size(), "make_state");
    if (!positive_finite(gamma0)) throw ConfigError("gamma0 must be positive and finite");
    OptimizerState s;
    s.x = std::move(x0);
    s.v = std::move(v0);
    s.gamma = gamma0;
    return s;
}

void NagGsConfig::validate() const {
    if (!positive_finite(alpha)) throw ConfigError("alpha must be positive and finite");
    if (!positive_finite(gamma0)) throw ConfigError("gamma0 must be positive and finite");
    if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
    if (update_gamma && mu < 0.0) {
        throw ConfigError("update_gamma requires mu >= 0 (gamma contracts towards mu)");
    }
    const double g1 = gs_next_gamma(gamma0, *this);
    if (!(alpha * mu + g1 > 0.0)) {
        throw ConfigError("alpha*mu + gamma must be positive (got " +
                          std::to_string(alpha * mu + g1) + ")");
    }
}

void NagFiConfig::validate() const {
    if (!positive_finite(alpha)) throw ConfigError("alpha must be positive and finite");
    if (!positive_finite(gamma0)) throw ConfigError("gamma0 must be positive and finite");
    if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
    if (!positive_finite(newton_tol)) throw ConfigError("newton_tol must be positive");
    if (newton_max_iter <= 0) throw ConfigError("newton_max_iter must be positive");
    const double g1 = (gamma0 + alpha * mu) / (1.0 + alpha);
    if (!(g1 > 0.0)) throw ConfigError("gamma0 + alpha*mu must be positive");
    if (!(1.0 + 1.0 / alpha + mu / g1 > 0.0)) throw ConfigError("1 + tau must be positive");
}

double nesterov_alpha(double gamma, double mu, double L) {
    if (!positive_finite(L)) throw ConfigError("Nesterov schedule needs L > 0");
    const double b = gamma - mu;
    const double disc = b * b + 4.0 * L * gamma;
    // Positive root written to avoid cancellation when b > 0.
    if (b > 0.0) return 2.0 * gamma / (b + std::sqrt(disc));
    return (-b + std::sqrt(disc)) / (2.0 * L);
}

double scheduled_alpha(const StepSchedule& schedule, const NagGsConfig& cfg, double gamma) {
    switch (schedule.kind) {
        case StepSchedule::Kind::constant:
            return cfg.alpha;
        case StepSchedule::Kind::nesterov:
            return nesterov_alpha(gamma, cfg.mu, schedule.L);
    }
    return cfg.alpha;
}

void nag_gs_propose_into(const OptimizerState& state, const NagGsConfig& cfg,
                         std::span<double> out) {
    require_same_dim(state.x.size(), out.size(), "nag_gs_propose");
    const double a = cfg.alpha / (1.0 + cfg.alpha);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (1.0 - a) * state.x[i] + a * state.v[i];
    }
}

Vector nag_gs_propose(const OptimizerState& state, const NagGsConfig& cfg) {
    Vector out(state.x.size());
    nag_gs_propose_into(state, cfg, out);
    return out;
}

bool nag_gs_step_inplace(OptimizerState& state, std::span<const double> grad,
                         const NagGsConfig& cfg, std::span<const double> noise) {
    const std::size_t n = state.x.size();
    require_same_dim(n, state.v.size(), "nag_gs_step (v)");
    require_same_dim(n, grad.size(), "nag_gs_step (grad)");
    if (!noise.empty()) require_same_dim(n, noise.size(), "nag_gs_step (noise)");
    if (state.diverged) return false;
    if (!all_finite(grad)) {
        state.diverged = true;
        return false;
    }

    const double alpha = cfg.alpha;
    const double a = alpha / (1.0 + alpha);
    const double gamma1 = gs_next_gamma(state.gamma, cfg);
    const double denom = alpha * cfg.mu + gamma1;
    if (!(gamma1 > 0.0) || !(denom > 0.0)) {
        state.diverged = true;
        return false;
    }
    const double b = alpha * cfg.mu / denom;
    const double gcoef = alpha / denom;
    const double ncoef = noise.empty() ? 0.0 : cfg.sigma * std::sqrt(alpha) * gamma1 / denom;

    // First pass only checks, so a state that would overflow keeps its last finite values.
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = (1.0 - a) * state.x[i] + a * state.v[i];
        double v1 = (1.0 - b) * state.v[i] + b * x1 - gcoef * grad[i];
        if (!noise.empty()) v1 += ncoef * noise[i];
        if (!std::isfinite(x1) || !std::isfinite(v1)) {
            state.diverged = true;
            return false;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = (1.0 - a) * state.x[i] + a * state.v[i];
        double v1 = (1.0 - b) * state.v[i] + b * x1 - gcoef * grad[i];
        if (!noise.empty()) v1 += ncoef * noise[i];
        state.x[i] = x1;
        state.v[i] = v1;
    }
    state.gamma = gamma1;
    ++state.step_count;
    return true;
}

OptimizerState nag_gs_step(OptimizerState state, std::span<const double> grad,
                           const NagGsConfig& cfg, std::span<const double> noise) {
    nag_gs_step_inplace(state, grad, cfg, noise);
    return state;
}

OptimizerState nag_fi_step(OptimizerState state, const GradientOracle& oracle,
                           const NagFiConfig& cfg, std::span<const double> noise,
                           NewtonStats* stats) {
    const std::size_t n = state.x.size();
    require_same_dim(n, state.v.size(), "nag_fi_step (v)");
    require_same_dim(n, oracle.dim, "nag_fi_step (oracle)");
    if (!noise.empty()) require_same_dim(n, noise.size(), "nag_fi_step (noise)");
    if (!oracle.eval_grad || !oracle.eval_hessian_apply) {
        throw ConfigError("NAG-FI needs an oracle with gradient and Hessian-vector product");
    }
    if (state.diverged) return state;

    const double alpha = cfg.alpha;
    const double gamma1 = cfg.mu + (state.gamma - cfg.mu) / (1.0 + alpha);
    const double tau = 1.0 / alpha + cfg.mu / gamma1;
    if (!(gamma1 > 0.0) || !(1.0 + tau > 0.0)) {
        state.diverged = true;
        return state;
    }
    const double inv = 1.0 / (1.0 + tau);
    const double gcoef = alpha / gamma1;
    const double jcoef = gcoef * inv;
    const double nscale = noise.empty() ? 0.0 : cfg.sigma * std::sqrt(alpha);

    // Constant part of the fixed-point map: (v + tau*x + sigma*sqrt(alpha)*eta)/(1 + tau).
    Eigen::VectorXd rhs0(n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs0[i] = (state.v[i] + tau * state.x[i] + (noise.empty() ? 0.0 : nscale * noise[i])) * inv;
    }

    Vector u = state.x;
    auto residual = [&](const Vector& point, Eigen::VectorXd& g) {
        const Vector grad = oracle.eval_grad(point);
        require_same_dim(n, grad.size(), "nag_fi_step (grad)");
        for (std::size_t i = 0; i < n; ++i) g[i] = point[i] - rhs0[i] + jcoef * grad[i];
    };

    Eigen::VectorXd g(n);
    residual(u, g);
    int it = 0;
    double res = g.norm();
    Eigen::MatrixXd J(n, n);
    Vector e(n, 0.0);
    // Besides the residual test, a Newton step that no longer moves u counts as converged:
    // for large alpha the residual is floored by alpha/gamma times the rounding error of grad.
    bool step_converged = false;
    while (std::isfinite(res) && res > cfg.newton_tol && !step_converged &&
           it < cfg.newton_max_iter) {
        for (std::size_t j = 0; j < n; ++j) {
            e[j] = 1.0;
            const Vector col = oracle.eval_hessian_apply(u, e);
            e[j] = 0.0;
            for (std::size_t i = 0; i < n; ++i) J(i, j) = jcoef * col[i];
            J(j, j) += 1.0;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible()) {
            throw NewtonError("NAG-FI: singular Newton Jacobian", res, it);
        }
        const Eigen::VectorXd du = lu.solve(g);
        for (std::size_t i = 0; i < n; ++i) u[i] -= du[i];
        step_converged = du.norm() <= cfg.newton_tol * std::max(1.0, norm2(u));
        residual(u, g);
        res = g.norm();
        ++it;
    }
    if (stats != nullptr) {
        stats->iterations = it;
        stats->residual = res;
    }
    if (!std::isfinite(res)) {
        state.diverged = true;
        return state;
    }
    if (res > cfg.newton_tol && !step_converged) {
        throw NewtonError("NAG-FI: Newton-Raphson did not converge (residual " +
                              std::to_string(res) + ")",
                          res, it);
    }

    Vector v1(n);
    for (std::size_t i = 0; i < n; ++i) v1[i] = (u[i] - state.x[i]) / alpha + u[i];
    if (!all_finite(u) || !all_finite(v1)) {
        state.diverged = true;
        return state;
    }
    state.x = std::move(u);
    state.v = std::move(v1);
    state.gamma = gamma1;
    ++state.step_count;
    return state;
}

OptimizerState sgd_momentum_step(OptimizerState state, std::span<const double> grad, double lr,
                                 double momentum, double weight_decay) {
    const std::size_t n = state.x.size();
    require_same_dim(n, grad.size(), "sgd_momentum_step (grad)");
    if (state.v.size() != n) state.v.assign(n, 0.0);
    if (state.diverged) return state;
    for (std::size_t i = 0; i < n; ++i) {
        state.v[i] = momentum * state.v[i] + grad[i];
        state.x[i] = state.x[i] * (1.0 - lr * weight_decay) - lr * state.v[i];
    }
    if (!all_finite(state.x) || !all_finite(state.v)) state.diverged = true;
    ++state.step_count;
    return state;
}

AdamWState make_adamw_state(Vector x0) {
    AdamWState s;
    const std::size_t n = x0.size();
    s.base.x = std::move(x0);
    s.base.v.assign(n, 0.0);
    s.m.assign(n, 0.0);
    s.s.assign(n, 0.0);
    return s;
}

AdamWState adamw_step(AdamWState state, std::span<const double> grad, double lr, double beta1,
                      double beta2, double eps, double weight_decay) {
    const std::size_t n = state.base.x.size();
    require_same_dim(n, grad.size(), "adamw_step (grad)");
    if (state.m.size() != n) state.m.assign(n, 0.0);
    if (state.s.size() != n) state.s.assign(n, 0.0);
    if (state.base.diverged) return state;
    const auto t = static_cast<double>(state.base.step_count + 1);
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < n; ++i) {
        state.base.x[i] *= 1.0 - lr * weight_decay;
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.s[i] = beta2 * state.s[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / c1;
        const double shat = state.s[i] / c2;
        state.base.x[i] -= lr * mhat / (std::sqrt(shat) + eps);
    }
    if (!all_finite(state.base.x)) state.base.diverged = true;
    ++state.base.step_count;
    return state;
}

}  // namespace naggs
