#include "naggs/sde_lab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "naggs/rng.hpp"

namespace naggs {

// ---------------------------------------------------------------- MetricSeries

void MetricSeries::add(std::size_t iteration, std::string metric, std::string method, double value) {
    rows.push_back(MetricRow{iteration, std::move(metric), std::move(method), value});
}

std::vector<std::pair<std::size_t, double>> MetricSeries::select(const std::string& metric,
                                                                 const std::string& method) const {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& r : rows) {
        if (r.metric == metric && r.method == method) out.emplace_back(r.iteration, r.value);
    }
    return out;
}

bool MetricSeries::iterations_increasing() const {
    std::map<std::pair<std::string, std::string>, std::size_t> last;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.metric, r.method);
        const auto it = last.find(key);
        if (it != last.end() && r.iteration <= it->second) return false;
        last[key] = r.iteration;
    }
    return true;
}

// ---------------------------------------------------------------- Ensemble

std::size_t Ensemble::n_diverged() const {
    return static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), 1));
}

std::vector<double> Ensemble::alive() const {
    std::vector<double> out;
    out.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!diverged[i] && std::isfinite(positions[i])) out.push_back(positions[i]);
    }
    return out;
}

Ensemble euler_maruyama_gf(const std::function<double(double)>& f_grad,
                           const std::vector<double>& x0_samples, double alpha, double sigma,
                           std::size_t n_steps, std::uint64_t seed, Backend backend) {
    ScalarEnsembleSpec spec;
    spec.method = EnsembleMethod::gf_euler;
    spec.grad = f_grad;
    spec.alpha = alpha;
    spec.sigma = sigma;
    spec.x0 = x0_samples;
    spec.n_steps = n_steps;
    spec.seed = seed;
    ScalarEnsembleResult res = simulate_scalar_ensemble(spec, backend);
    Ensemble e;
    e.positions = std::move(res.final_x);
    e.diverged = std::move(res.diverged);
    e.seed = seed;
    return e;
}

std::vector<std::size_t> recording_schedule(std::size_t n_steps, std::size_t record_every) {
    const std::size_t c = record_every > 0 ? record_every : std::max<std::size_t>(1, (n_steps + 199) / 200);
    std::vector<std::size_t> steps;
    for (std::size_t k = 0; k < n_steps; k += c) steps.push_back(k);
    steps.push_back(n_steps);
    return steps;
}

// ---------------------------------------------------------------- quadratic ensembles

void QuadraticExperiment::validate() const {
    if (dim < 2) throw ConfigError("dim must be >= 2");
    if (!(mu > 0.0) || !(L >= mu) || !std::isfinite(L)) throw ConfigError("need 0 < mu <= L");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
    if (alphas.empty()) throw ConfigError("at least one alpha is required");
    for (double a : alphas) {
        if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("alphas must be positive and finite");
    }
    if (n_points == 0) throw ConfigError("n_points must be positive");
}

std::vector<EpochStats> epoch_stats(const QuadraticEnsembleResult& res) {
    const std::size_t dim = res.dim;
    std::vector<EpochStats> out;
    out.reserve(res.records.size());
    for (const auto& rec : res.records) {
        EpochStats s;
        s.step = rec.step;
        s.alive = rec.alive;
        s.skewness.assign(dim, std::nan(""));
        s.excess_kurtosis.assign(dim, std::nan(""));
        if (rec.alive == 0) {
            s.dist_to_min = std::nan("");
            s.scatter_trace = std::nan("");
            out.push_back(std::move(s));
            continue;
        }
        const double n = static_cast<double>(rec.alive);
        double d2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double m1 = rec.sums[4 * c] / n;
            const double r2 = rec.sums[4 * c + 1] / n;
            const double r3 = rec.sums[4 * c + 2] / n;
            const double r4 = rec.sums[4 * c + 3] / n;
            const double var = r2 - m1 * m1;
            const double m3 = r3 - 3.0 * m1 * r2 + 2.0 * m1 * m1 * m1;
            const double m4 = r4 - 4.0 * m1 * r3 + 6.0 * m1 * m1 * r2 - 3.0 * m1 * m1 * m1 * m1;
            d2 += m1 * m1;
            s.scatter_trace += var;
            if (var > 0.0) {
                s.skewness[c] = m3 / std::pow(var, 1.5);
                s.excess_kurtosis[c] = m4 / (var * var) - 3.0;
            }
        }
        s.dist_to_min = std::sqrt(d2);
        out.push_back(std::move(s));
    }
    return out;
}

QuadraticExperimentResult run_quadratic_ensemble(const QuadraticExperiment& exp,
                                                 EnsembleMethod method, Backend backend) {
    exp.validate();
    QuadraticExperimentResult out;
    out.problem = make_test_matrix(exp.mu, exp.L, exp.dim, exp.matrix_seed, exp.c);

    for (double alpha : exp.alphas) {
        QuadraticEnsembleSpec spec;
        spec.A = out.problem.A;
        spec.x_star = out.problem.minimizer();
        spec.method = method;
        spec.alpha = alpha;
        spec.mu = exp.mu;
        spec.gamma0 = exp.gamma0;
        spec.sigma = exp.sigma;
        spec.newton_tol = exp.newton_tol;
        spec.newton_max_iter = exp.newton_max_iter;
        spec.n_traj = exp.n_points;
        spec.n_steps = exp.n_steps;
        spec.record_steps = recording_schedule(exp.n_steps, exp.record_every);
        spec.seed = exp.seed;
        const QuadraticEnsembleResult res = simulate_quadratic_ensemble(spec, backend);

        QuadraticRun run;
        run.alpha = alpha;
        run.stats = epoch_stats(res);
        run.diverged_fraction =
            static_cast<double>(res.n_diverged()) / static_cast<double>(exp.n_points);
        const std::string name = method_name(method);
        for (const auto& s : run.stats) {
            run.series.add(s.step, "dist_to_min", name, s.dist_to_min);
            run.series.add(s.step, "scatter_trace", name, s.scatter_trace);
            run.series.add(s.step, "alive_fraction", name,
                           static_cast<double>(s.alive) / static_cast<double>(exp.n_points));
        }
        run.series.metadata = {{"method", name},
                               {"alpha", format_double(alpha)},
                               {"dim", std::to_string(exp.dim)},
                               {"mu", format_double(exp.mu)},
                               {"L", format_double(exp.L)},
                               {"c", format_double(exp.c)},
                               {"sigma", format_double(exp.sigma)},
                               {"gamma0", format_double(exp.gamma0)},
                               {"n_points", std::to_string(exp.n_points)},
                               {"n_steps", std::to_string(exp.n_steps)},
                               {"seed", std::to_string(exp.seed)},
                               {"matrix_seed", std::to_string(exp.matrix_seed)}};
        for (std::size_t t = 0; t < exp.n_points; ++t) {
            if (res.diverged[t]) continue;
            for (std::size_t c = 0; c < exp.dim; ++c) run.final_points.push_back(res.final_x[t * exp.dim + c]);
        }
        out.runs.push_back(std::move(run));
    }
    return out;
}

// ---------------------------------------------------------------- stationarity study

void StationarityConfig::use_test_function(ScalarTestFunction::Kind kind) {
    const ScalarTestFunction fn{kind};
    f = [fn](double x) { return fn.value(x); };
    df = [fn](double x) { return fn.derivative(x); };
    function_name = scalar_kind_name(kind);
}

namespace {

std::vector<double> finite_only(const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (double x : v) {
        if (std::isfinite(x)) out.push_back(x);
    }
    return out;
}

}  // namespace

StationarityResult run_stationarity_study(const StationarityConfig& cfg, Backend backend) {
    if (!cfg.f || !cfg.df) throw ConfigError("stationarity study needs f and its derivative");
    if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(cfg.sigma > 0.0)) throw ConfigError("sigma must be positive (the reference density needs noise)");
    if (cfg.n_points < 2) throw ConfigError("n_points must be >= 2");
    if (!(cfg.init_hi > cfg.init_lo)) throw ConfigError("init_lo must be < init_hi");
    if (cfg.n_reference < 2) throw ConfigError("n_reference must be >= 2");

    const StationaryDensity density(cfg.f, cfg.sigma, cfg.grid, cfg.require_decay);

    StationarityResult out;
    out.reference = density.sample(cfg.n_reference, splitmix64(cfg.seed ^ 0xA5A5A5A5ULL));
    const SampleSet reference(out.reference);

    Rng init_rng = make_stream(cfg.seed, ~std::uint64_t{0});
    std::uniform_real_distribution<double> unif(cfg.init_lo, cfg.init_hi);
    std::vector<double> x0(cfg.n_points);
    for (double& x : x0) x = unif(init_rng);

    ScalarEnsembleSpec spec;
    spec.grad = cfg.df;
    spec.alpha = cfg.alpha;
    spec.mu = cfg.mu;
    spec.gamma0 = cfg.gamma0 > 0.0 ? cfg.gamma0 : cfg.mu;
    spec.sigma = cfg.sigma;
    spec.x0 = x0;
    spec.n_steps = cfg.n_steps;
    spec.record_steps = recording_schedule(cfg.n_steps, cfg.record_every);
    spec.seed = cfg.seed;

    spec.method = EnsembleMethod::gf_euler;
    const ScalarEnsembleResult gf = simulate_scalar_ensemble(spec, backend);
    spec.method = EnsembleMethod::nag_gs;
    const ScalarEnsembleResult nag = simulate_scalar_ensemble(spec, backend);

    KnnKlOptions kl_opts;
    kl_opts.k = cfg.knn_k;
    auto emit = [&](const ScalarEnsembleResult& res, const char* method) {
        for (std::size_t r = 0; r < spec.record_steps.size(); ++r) {
            const std::vector<double> alive = finite_only(res.snapshots[r]);
            const std::size_t step = spec.record_steps[r];
            if (alive.size() < 2) {
                for (const char* m : {"kl", "w1", "ks"}) out.series.add(step, m, method, std::nan(""));
                continue;
            }
            const SampleSet s(alive);
            if (cfg.compute_kl) {
                double kl = std::nan("");
                if (alive.size() > static_cast<std::size_t>(cfg.knn_k)) {
                    try {
                        kl = kl_divergence_knn(s, reference, kl_opts);
                    } catch (const NumericalError&) {
                        // Collapsed ensemble (all points at one location); leave NaN.
                    }
                }
                out.series.add(step, "kl", method, kl);
            }
            out.series.add(step, "w1", method, wasserstein1(s, reference));
            out.series.add(step, "ks", method, ks_statistic(s, reference));
        }
    };
    emit(gf, "gf_euler");
    emit(nag, "nag_gs");

    out.final_gf = gf.final_x;
    out.final_nag = nag.final_x;
    for (std::size_t i = 0; i < out.final_gf.size(); ++i) {
        if (gf.diverged[i]) out.final_gf[i] = std::nan("");
        if (nag.diverged[i]) out.final_nag[i] = std::nan("");
    }
    out.series.metadata = {{"function", cfg.function_name},
                           {"alpha", format_double(cfg.alpha)},
                           {"sigma", format_double(cfg.sigma)},
                           {"mu", format_double(cfg.mu)},
                           {"gamma0", format_double(spec.gamma0)},
                           {"n_points", std::to_string(cfg.n_points)},
                           {"n_steps", std::to_string(cfg.n_steps)},
                           {"n_reference", std::to_string(cfg.n_reference)},
                           {"grid_lo", format_double(cfg.grid.lo)},
                           {"grid_hi", format_double(cfg.grid.hi)},
                           {"grid_nodes", std::to_string(cfg.grid.n_nodes)},
                           {"seed", std::to_string(cfg.seed)}};
    return out;
}

}  // namespace naggs
