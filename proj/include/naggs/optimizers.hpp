#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "naggs/common.hpp"

namespace naggs {

/// Live state of a two-sequence method: iterate x, auxiliary iterate v and scaling factor gamma.
/// SGD with momentum reuses `v` as its momentum buffer.
struct OptimizerState {
    Vector x;
    Vector v;
    double gamma = 1.0;
    std::size_t step_count = 0;
    /// Set once a non-finite value or an invalid denominator is met. Steppers leave a
    /// diverged state untouched.
    bool diverged = false;
};

/// State with v = x.
OptimizerState make_state(Vector x0, double gamma0);
OptimizerState make_state(Vector x0, Vector v0, double gamma0);

struct NagGsConfig {
    double alpha = 0.1;
    double mu = 1.0;
    double gamma0 = 1.0;
    double sigma = 0.0;
    bool update_gamma = false;

    /// Throws ConfigError when alpha <= 0, gamma0 <= 0, sigma < 0, when the first step
    /// would have alpha*mu + gamma' <= 0, or when update_gamma is combined with mu < 0
    /// (gamma would be driven towards a negative value).
    void validate() const;
};

struct NagFiConfig {
    double alpha = 0.1;
    double mu = 1.0;
    double gamma0 = 1.0;
    double sigma = 0.0;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;

    void validate() const;
};

/// Gradient and (optionally) Hessian-vector product of an objective.
struct GradientOracle {
    std::size_t dim = 0;
    std::function<Vector(const Vector&)> eval_grad;
    /// (point, direction) -> Hessian(point) * direction. Required by NAG-FI.
    std::function<Vector(const Vector&, const Vector&)> eval_hessian_apply;
};

/// Constant step or Nesterov's rule L*alpha_k^2 = (1 - alpha_k)*gamma_k + alpha_k*mu.
struct StepSchedule {
    enum class Kind { constant, nesterov };
    Kind kind = Kind::constant;
    double L = 0.0;
};

/// Positive root of L*a^2 + (gamma - mu)*a - gamma = 0.
double nesterov_alpha(double gamma, double mu, double L);

/// Step size that `schedule` prescribes for the next step from a state with scaling `gamma`.
double scheduled_alpha(const StepSchedule& schedule, const NagGsConfig& cfg, double gamma);

/// x_{k+1} = (1 - a) x_k + a v_k with a = alpha/(1 + alpha). The gradient passed to
/// nag_gs_step must be evaluated at this point.
Vector nag_gs_propose(const OptimizerState& state, const NagGsConfig& cfg);
void nag_gs_propose_into(const OptimizerState& state, const NagGsConfig& cfg, std::span<double> out);

/// One NAG-GS step given grad f(x_{k+1}). When `noise` is non-empty the SDE term
/// sigma*sqrt(alpha)*noise/(1 + alpha*mu/gamma') is added to v.
OptimizerState nag_gs_step(OptimizerState state, std::span<const double> grad,
                           const NagGsConfig& cfg, std::span<const double> noise = {});

/// In-place variant of nag_gs_step. Returns false (and marks the state diverged, keeping
/// its last finite values) when the gradient or the result is not finite.
bool nag_gs_step_inplace(OptimizerState& state, std::span<const double> grad,
                         const NagGsConfig& cfg, std::span<const double> noise = {});

struct NewtonStats {
    int iterations = 0;
    double residual = 0.0;
};

/// One fully implicit step. Solves the x fixed point with Newton-Raphson from u0 = x_k.
/// Throws NewtonError when the tolerance is not met within newton_max_iter iterations
/// or the Jacobian is singular.
OptimizerState nag_fi_step(OptimizerState state, const GradientOracle& oracle,
                           const NagFiConfig& cfg, std::span<const double> noise = {},
                           NewtonStats* stats = nullptr);

/// Heavy ball with decoupled weight decay:
///   buf' = momentum*buf + grad,  x' = x*(1 - lr*wd) - lr*buf'.
OptimizerState sgd_momentum_step(OptimizerState state, std::span<const double> grad, double lr,
                                 double momentum, double weight_decay);

struct AdamWState {
    OptimizerState base;
    Vector m;
    Vector s;
};

AdamWState make_adamw_state(Vector x0);

AdamWState adamw_step(AdamWState state, std::span<const double> grad, double lr, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0);

}  // namespace naggs
