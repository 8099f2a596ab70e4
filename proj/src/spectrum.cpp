#include "naggs/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "naggs/rng.hpp"

namespace naggs {

namespace {

Vector apply_checked(const LinearOperator& op, const Vector& v) {
    Vector w = op.apply(v);
    require_same_dim(w.size(), op.dim, "LinearOperator::apply");
    return w;
}

void scale_inplace(Vector& v, double s) {
    for (double& x : v) x *= s;
}

Vector random_unit(std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    double nv = 0.0;
    while (nv == 0.0) {
        for (double& x : v) x = normal(rng);
        nv = norm2(v);
    }
    scale_inplace(v, 1.0 / nv);
    return v;
}

double residual_of(const Vector& w, const Vector& v, double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = w[i] - lambda * v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

bool small_residual(double res, double value, double tol) {
    return res <= tol * std::abs(value) || res == 0.0;
}

void validate(const LinearOperator& op, double tol, int max_iter) {
    if (op.dim == 0 || !op.apply) throw ConfigError("LinearOperator: empty operator");
    if (!(tol > 0.0)) throw ConfigError("eigen solver: tol must be positive");
    if (max_iter < 1) throw ConfigError("eigen solver: max_iter must be >= 1");
}

}  // namespace

EigenEstimate power_iteration(const LinearOperator& op, double tol, int max_iter,
                              std::uint64_t seed) {
    validate(op, tol, max_iter);
    Rng rng = make_stream(seed, 0);
    EigenEstimate est;
    est.vector = random_unit(op.dim, rng);
    for (int it = 1; it <= max_iter; ++it) {
        Vector w = apply_checked(op, est.vector);
        est.value = dot(est.vector, w);
        est.residual = residual_of(w, est.vector, est.value);
        est.iterations = it;
        if (small_residual(est.residual, est.value, tol)) {
            est.converged = true;
            return est;
        }
        const double nw = norm2(w);
        if (!(nw > 0.0) || !std::isfinite(nw)) return est;
        scale_inplace(w, 1.0 / nw);
        est.vector = std::move(w);
    }
    // Report the pair for the final vector.
    const Vector w = apply_checked(op, est.vector);
    est.value = dot(est.vector, w);
    est.residual = residual_of(w, est.vector, est.value);
    est.converged = small_residual(est.residual, est.value, tol);
    return est;
}

EigenEstimate rayleigh_refine(const LinearOperator& op, const Vector& v0, double tol, int max_iter,
                              RayleighTarget target) {
    validate(op, tol, max_iter);
    require_same_dim(v0.size(), op.dim, "rayleigh_refine");
    const double n0 = norm2(v0);
    if (!(n0 > 0.0)) throw ConfigError("rayleigh_refine: v0 must be nonzero");

    EigenEstimate est;
    est.vector = v0;
    scale_inplace(est.vector, 1.0 / n0);
    Vector w = apply_checked(op, est.vector);
    est.value = dot(est.vector, w);
    est.residual = residual_of(w, est.vector, est.value);
    const double sign = target == RayleighTarget::largest ? 1.0 : -1.0;
    int stalled = 0;

    for (int it = 0; it < max_iter; ++it) {
        if (small_residual(est.residual, est.value, tol)) {
            est.converged = true;
            return est;
        }
        // Search direction: the quotient's gradient, orthogonal to v.
        Vector p(op.dim);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = w[i] - est.value * est.vector[i];
        const double b = norm2(p);
        scale_inplace(p, 1.0 / b);
        const Vector hp = apply_checked(op, p);
        const double c = dot(p, hp);
        // Rayleigh-Ritz on span{v, p}: [[r, b], [b, c]]. The Ritz vector is (b, theta - r);
        // theta - r = sign*b^2/(h + sign*d) avoids the cancellation of theta - r once b is
        // far below rounding of r.
        const double d = 0.5 * (est.value - c);
        const double h = std::hypot(d, b);
        const double cv = b;
        const double cp = sign * d >= 0.0 ? sign * b * b / (h + sign * d) : sign * (h - sign * d);
        const double nrm = std::hypot(cv, cp);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) break;

        Vector v1(op.dim);
        for (std::size_t i = 0; i < v1.size(); ++i) v1[i] = (cv * est.vector[i] + cp * p[i]) / nrm;
        scale_inplace(v1, 1.0 / norm2(v1));
        Vector w1 = apply_checked(op, v1);
        const double r1 = dot(v1, w1);
        const double res1 = residual_of(w1, v1, r1);

        const double gain = sign * (r1 - est.value);
        // Near convergence the quotient is already exact to rounding while the residual
        // still shrinks linearly, so any steady residual decrease counts as progress.
        const bool progress = gain > 4.0 * 2.2e-16 * std::max(1.0, std::abs(est.value)) ||
                              res1 < (1.0 - 1e-6) * est.residual;
        est.vector = std::move(v1);
        w = std::move(w1);
        est.value = r1;
        est.residual = res1;
        est.iterations = it + 1;
        stalled = progress ? 0 : stalled + 1;
        if (stalled >= 10) break;
    }
    est.converged = small_residual(est.residual, est.value, tol);
    return est;
}

ExtremeEigenvalues extreme_eigenvalues(const LinearOperator& op, double tol, int max_iter,
                                       std::uint64_t seed) {
    validate(op, tol, max_iter);
    const EigenEstimate first = power_iteration(op, tol, max_iter, seed);
    const double s = first.value;
    LinearOperator shifted{op.dim, [&op, s](const Vector& v) {
                               Vector w = op.apply(v);
                               for (std::size_t i = 0; i < w.size(); ++i) w[i] -= s * v[i];
                               return w;
                           }};
    EigenEstimate second = power_iteration(shifted, tol, max_iter, splitmix64(seed));
    second.value += s;

    const bool first_is_top = first.value >= second.value;
    const EigenEstimate& top = first_is_top ? first : second;
    const EigenEstimate& bottom = first_is_top ? second : first;

    ExtremeEigenvalues out;
    out.lambda_max = rayleigh_refine(op, top.vector, tol, max_iter, RayleighTarget::largest);
    out.lambda_min = rayleigh_refine(op, bottom.vector, tol, max_iter, RayleighTarget::smallest);
    out.lambda_max.iterations += top.iterations;
    out.lambda_min.iterations += bottom.iterations;
    return out;
}

double probe_linearity(const LinearOperator& op, int n_probes, std::uint64_t seed) {
    Rng rng = make_stream(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < n_probes; ++k) {
        const Vector u = random_unit(op.dim, rng);
        const Vector v = random_unit(op.dim, rng);
        const double a = normal(rng);
        const double b = normal(rng);
        Vector comb(op.dim);
        for (std::size_t i = 0; i < op.dim; ++i) comb[i] = a * u[i] + b * v[i];
        const Vector hc = apply_checked(op, comb);
        const Vector hu = apply_checked(op, u);
        const Vector hv = apply_checked(op, v);
        double err = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < op.dim; ++i) {
            const double d = hc[i] - a * hu[i] - b * hv[i];
            err += d * d;
            scale += (a * hu[i]) * (a * hu[i]) + (b * hv[i]) * (b * hv[i]);
        }
        if (scale > 0.0) worst = std::max(worst, std::sqrt(err / scale));
    }
    return worst;
}

double probe_symmetry(const LinearOperator& op, int n_probes, std::uint64_t seed) {
    Rng rng = make_stream(seed, 1);
    double worst = 0.0;
    for (int k = 0; k < n_probes; ++k) {
        const Vector u = random_unit(op.dim, rng);
        const Vector v = random_unit(op.dim, rng);
        const Vector hu = apply_checked(op, u);
        const Vector hv = apply_checked(op, v);
        const double scale = norm2(hu) + norm2(hv);
        if (scale > 0.0) worst = std::max(worst, std::abs(dot(u, hv) - dot(hu, v)) / scale);
    }
    return worst;
}

}  // namespace naggs
