#include "naggs/ensemble_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "naggs/optimizers.hpp"
#include "naggs/rng.hpp"

namespace naggs {

const char* method_name(EnsembleMethod m) {
    switch (m) {
        case EnsembleMethod::nag_gs:
            return "nag_gs";
        case EnsembleMethod::nag_fi:
            return "nag_fi";
        case EnsembleMethod::gf_euler:
            return "gf_euler";
    }
    return "unknown";
}

std::size_t QuadraticEnsembleResult::n_diverged() const {
    return static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), 1));
}

namespace {

void check_record_steps(const std::vector<std::size_t>& steps, std::size_t n_steps) {
    for (std::size_t r = 0; r < steps.size(); ++r) {
        if (steps[r] > n_steps) throw ConfigError("record step beyond n_steps");
        if (r > 0 && steps[r] <= steps[r - 1]) {
            throw ConfigError("record steps must be strictly increasing");
        }
    }
}

bool escaped(std::span<const double> a, double threshold) {
    for (double x : a) {
        if (!std::isfinite(x) || std::abs(x) > threshold) return true;
    }
    return false;
}

// Per-block partial results, reduced in block order after the parallel section.
struct QuadraticBlock {
    std::vector<std::size_t> alive;
    std::vector<double> sums;
};

}  // namespace

QuadraticEnsembleResult simulate_quadratic_ensemble(const QuadraticEnsembleSpec& spec,
                                                    Backend backend) {
    const std::size_t dim = spec.x_star.size();
    if (dim == 0) throw ConfigError("empty problem");
    if (static_cast<std::size_t>(spec.A.rows()) != dim ||
        static_cast<std::size_t>(spec.A.cols()) != dim) {
        throw DimensionError("ensemble: A does not match x_star");
    }
    if (spec.block_size == 0) throw ConfigError("block_size must be positive");
    check_record_steps(spec.record_steps, spec.n_steps);

    NagGsConfig gs{spec.alpha, spec.mu, spec.gamma0, spec.sigma, spec.update_gamma};
    NagFiConfig fi{spec.alpha, spec.mu, spec.gamma0, spec.sigma, spec.newton_tol,
                   spec.newton_max_iter};
    switch (spec.method) {
        case EnsembleMethod::nag_gs:
            gs.validate();
            break;
        case EnsembleMethod::nag_fi:
            fi.validate();
            break;
        case EnsembleMethod::gf_euler:
            if (!(spec.alpha > 0.0)) throw ConfigError("alpha must be positive");
            break;
    }

    const std::size_t n_rec = spec.record_steps.size();
    const std::size_t n_blocks = (spec.n_traj + spec.block_size - 1) / spec.block_size;
    std::vector<QuadraticBlock> blocks(n_blocks);

    QuadraticEnsembleResult out;
    out.dim = dim;
    out.final_x.assign(spec.n_traj * dim, 0.0);
    out.final_v.assign(spec.n_traj * dim, 0.0);
    out.diverged.assign(spec.n_traj, 0);
    out.diverged_at.assign(spec.n_traj, spec.n_steps + 1);

    // Row-major copy for cache-friendly small mat-vecs.
    std::vector<double> A(dim * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) A[i * dim + j] = spec.A(static_cast<Eigen::Index>(i),
                                                                       static_cast<Eigen::Index>(j));
    }
    const auto apply_A_shifted = [&](std::span<const double> x, std::span<double> out_g) {
        for (std::size_t i = 0; i < dim; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j) s += A[i * dim + j] * (x[j] - spec.x_star[j]);
            out_g[i] = s;
        }
    };

    GradientOracle oracle;
    oracle.dim = dim;
    oracle.eval_grad = [&](const Vector& u) {
        Vector g(dim);
        apply_A_shifted(u, g);
        return g;
    };
    oracle.eval_hessian_apply = [&](const Vector&, const Vector& d) {
        Vector h(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) h[i] += A[i * dim + j] * d[j];
        }
        return h;
    };

    const double sqrt_alpha = std::sqrt(spec.alpha);

    for_each_block(n_blocks, backend, [&](std::size_t b) {
        QuadraticBlock& blk = blocks[b];
        blk.alive.assign(n_rec, 0);
        blk.sums.assign(n_rec * dim * 4, 0.0);

        const std::size_t begin = b * spec.block_size;
        const std::size_t end = std::min(spec.n_traj, begin + spec.block_size);
        Vector xprop(dim), grad(dim), noise(dim, 0.0);

        for (std::size_t t = begin; t < end; ++t) {
            Rng rng = make_stream(spec.seed, t);
            std::normal_distribution<double> normal(0.0, 1.0);

            Vector x0(dim, 0.0);
            if (spec.init == QuadraticEnsembleSpec::Init::gaussian) {
                for (auto& xi : x0) xi = spec.init_scale * normal(rng);
            }
            OptimizerState st = make_state(x0, spec.gamma0);

            std::size_t r = 0;
            auto record = [&](std::size_t step) {
                while (r < n_rec && spec.record_steps[r] < step) ++r;
                if (r < n_rec && spec.record_steps[r] == step) {
                    ++blk.alive[r];
                    double* s = &blk.sums[r * dim * 4];
                    for (std::size_t c = 0; c < dim; ++c) {
                        const double d = st.x[c] - spec.x_star[c];
                        const double d2 = d * d;
                        s[4 * c + 0] += d;
                        s[4 * c + 1] += d2;
                        s[4 * c + 2] += d2 * d;
                        s[4 * c + 3] += d2 * d2;
                    }
                    ++r;
                }
            };
            record(0);

            for (std::size_t k = 1; k <= spec.n_steps; ++k) {
                const bool noisy = spec.sigma > 0.0;
                if (noisy) {
                    for (auto& e : noise) e = normal(rng);
                }
                bool ok = true;
                switch (spec.method) {
                    case EnsembleMethod::nag_gs: {
                        nag_gs_propose_into(st, gs, xprop);
                        apply_A_shifted(xprop, grad);
                        ok = nag_gs_step_inplace(st, grad, gs,
                                                 noisy ? std::span<const double>(noise)
                                                       : std::span<const double>());
                        break;
                    }
                    case EnsembleMethod::nag_fi: {
                        st = nag_fi_step(std::move(st), oracle, fi,
                                         noisy ? std::span<const double>(noise)
                                               : std::span<const double>());
                        ok = !st.diverged;
                        break;
                    }
                    case EnsembleMethod::gf_euler: {
                        apply_A_shifted(st.x, grad);
                        Vector next(dim);
                        for (std::size_t c = 0; c < dim; ++c) {
                            next[c] = st.x[c] - spec.alpha * grad[c] +
                                      (noisy ? spec.sigma * sqrt_alpha * noise[c] : 0.0);
                        }
                        if (all_finite(next)) {
                            st.x = next;
                            st.v = std::move(next);
                            ++st.step_count;
                        } else {
                            ok = false;
                        }
                        break;
                    }
                }
                if (!ok || escaped(st.x, spec.divergence_threshold) ||
                    escaped(st.v, spec.divergence_threshold)) {
                    out.diverged[t] = 1;
                    out.diverged_at[t] = k;
                    break;
                }
                record(k);
            }
            std::copy(st.x.begin(), st.x.end(), out.final_x.begin() + static_cast<long>(t * dim));
            std::copy(st.v.begin(), st.v.end(), out.final_v.begin() + static_cast<long>(t * dim));
        }
    });

    out.records.resize(n_rec);
    for (std::size_t r = 0; r < n_rec; ++r) {
        out.records[r].step = spec.record_steps[r];
        out.records[r].sums.assign(dim * 4, 0.0);
    }
    for (const auto& blk : blocks) {
        for (std::size_t r = 0; r < n_rec; ++r) {
            out.records[r].alive += blk.alive[r];
            for (std::size_t j = 0; j < dim * 4; ++j) {
                out.records[r].sums[j] += blk.sums[r * dim * 4 + j];
            }
        }
    }
    return out;
}

ScalarEnsembleResult simulate_scalar_ensemble(const ScalarEnsembleSpec& spec, Backend backend) {
    if (!spec.grad) throw ConfigError("scalar ensemble needs a derivative");
    if (!(spec.alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(spec.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (spec.block_size == 0) throw ConfigError("block_size must be positive");
    if (spec.method == EnsembleMethod::nag_fi) {
        throw ConfigError("scalar ensembles support gf_euler and nag_gs");
    }
    check_record_steps(spec.record_steps, spec.n_steps);
    NagGsConfig gs{spec.alpha, spec.mu, spec.gamma0, spec.sigma, spec.update_gamma};
    if (spec.method == EnsembleMethod::nag_gs) gs.validate();

    const std::size_t n = spec.x0.size();
    const std::size_t n_rec = spec.record_steps.size();
    ScalarEnsembleResult out;
    out.snapshots.assign(n_rec, std::vector<double>(n, std::nan("")));
    out.final_x.assign(n, 0.0);
    out.diverged.assign(n, 0);

    const double noise_scale = spec.sigma * std::sqrt(spec.alpha);
    const std::size_t n_blocks = (n + spec.block_size - 1) / spec.block_size;

    for_each_block(n_blocks, backend, [&](std::size_t b) {
        const std::size_t begin = b * spec.block_size;
        const std::size_t end = std::min(n, begin + spec.block_size);
        for (std::size_t t = begin; t < end; ++t) {
            Rng rng = make_stream(spec.seed, t);
            std::normal_distribution<double> normal(0.0, 1.0);
            OptimizerState st = make_state(Vector{spec.x0[t]}, spec.gamma0);
            double xprop = 0.0;
            double g = 0.0;
            double eta = 0.0;

            std::size_t r = 0;
            auto record = [&](std::size_t step) {
                if (r < n_rec && spec.record_steps[r] == step) {
                    out.snapshots[r][t] = st.x[0];
                    ++r;
                }
            };
            record(0);
            for (std::size_t k = 1; k <= spec.n_steps; ++k) {
                bool ok = true;
                if (spec.sigma > 0.0) eta = normal(rng);
                if (spec.method == EnsembleMethod::gf_euler) {
                    const double next = st.x[0] - spec.alpha * spec.grad(st.x[0]) + noise_scale * eta;
                    if (std::isfinite(next)) {
                        st.x[0] = next;
                    } else {
                        ok = false;
                    }
                } else {
                    nag_gs_propose_into(st, gs, std::span<double>(&xprop, 1));
                    g = spec.grad(xprop);
                    ok = nag_gs_step_inplace(st, std::span<const double>(&g, 1), gs,
                                             spec.sigma > 0.0 ? std::span<const double>(&eta, 1)
                                                              : std::span<const double>());
                }
                if (!ok || !std::isfinite(st.x[0]) ||
                    std::abs(st.x[0]) > spec.divergence_threshold ||
                    std::abs(st.v[0]) > spec.divergence_threshold) {
                    out.diverged[t] = 1;
                    break;
                }
                record(k);
            }
            out.final_x[t] = st.x[0];
        }
    });
    return out;
}

}  // namespace naggs
