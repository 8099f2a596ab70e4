#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "naggs/common.hpp"
#include "naggs/ensemble_kernels.hpp"
#include "naggs/optimizers.hpp"
#include "naggs/parallel.hpp"
#include "naggs/problems.hpp"
#include "naggs/quadratic_analysis.hpp"
#include "naggs/rng.hpp"
#include "naggs/sde_lab.hpp"
#include "naggs/spectrum.hpp"
#include "naggs/training.hpp"

namespace naggs::cli {

using nlohmann::json;

void RunContext::note(const std::string& line) const {
    if (!quiet && log != nullptr) *log << line << '\n';
}

namespace {

std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::vector<double> grid(double lo, double hi, std::size_t n, const std::string& scale) {
    if (n == 0) throw ConfigError("grid size must be positive");
    if (!(hi >= lo)) throw ConfigError("grid bounds must satisfy min <= max");
    std::vector<double> out(n);
    if (scale == "log") {
        if (!(lo > 0.0)) throw ConfigError("log-scaled grids need a positive lower bound");
        for (std::size_t i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            out[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
        }
        out.front() = lo;
        out.back() = hi;
    } else if (scale == "linear" || scale == "uniform") {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            out[i] = lo + t * (hi - lo);
        }
    } else {
        throw ConfigError("unknown scale '" + scale + "' (expected log or linear)");
    }
    return out;
}

EnsembleMethod parse_method(const std::string& name) {
    if (name == "nag_gs") return EnsembleMethod::nag_gs;
    if (name == "nag_fi") return EnsembleMethod::nag_fi;
    if (name == "gf_euler") return EnsembleMethod::gf_euler;
    throw ConfigError("unknown method '" + name + "' (expected nag_gs, nag_fi or gf_euler)");
}

double optimal_or_nan(double mu, double L, double gamma) {
    try {
        return optimal_alpha(mu, L, gamma);
    } catch (const ConfigError&) {
        return std::nan("");
    }
}

}  // namespace

double resolve_alpha_token(const std::string& token, double alpha_c, std::optional<double> alpha_crit) {
    if (auto v = parse_number(token)) {
        if (!(*v > 0.0) || !std::isfinite(*v)) throw ConfigError("step size '" + token + "' must be positive");
        return *v;
    }
    std::string_view name = token;
    double factor = 1.0;
    if (const auto star = token.find('*'); star != std::string::npos) {
        const auto f = parse_number(std::string_view(token).substr(0, star));
        if (!f) throw ConfigError("malformed step size token '" + token + "'");
        factor = *f;
        name = std::string_view(token).substr(star + 1);
    }
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    double base = 0.0;
    if (name == "alpha_c" || name == "alpha_star") {
        if (!std::isfinite(alpha_c)) {
            throw ConfigError("'" + token + "': the rate-optimal step is undefined for this configuration");
        }
        base = alpha_c;
    } else if (name == "alpha_crit") {
        if (!alpha_crit) throw ConfigError("'" + token + "': no critical step size exists (needs mu < L/2)");
        base = *alpha_crit;
    } else {
        throw ConfigError("unknown step size token '" + token + "'");
    }
    const double a = factor * base;
    if (!(a > 0.0)) throw ConfigError("step size '" + token + "' must be positive");
    return a;
}

// ---------------------------------------------------------------- analyze

OutputBundle run_analyze(const AnalyzeSettings& s, const RunContext& ctx) {
    SpectrumConfig base{s.mu, s.L, s.gamma, 1.0, s.sigma};
    base.validate();
    const double a_star = optimal_or_nan(s.mu, s.L, s.gamma);
    const std::optional<double> a_crit = critical_alpha(s.mu, s.L, s.gamma);

    std::vector<double> alphas;
    if (!s.alphas.empty()) {
        for (const auto& tok : s.alphas) alphas.push_back(resolve_alpha_token(tok, a_star, a_crit));
    } else {
        double hi = s.alpha_max;
        if (hi == 0.0) {
            const double ref = std::isfinite(a_star) ? a_star : 5.0;
            hi = 2.0 * std::max(ref, a_crit.value_or(0.0));
        }
        alphas = grid(s.alpha_min, hi, s.n_alpha, s.alpha_scale);
        if (!(alphas.front() > 0.0)) throw ConfigError("alpha_min must be positive");
    }

    OutputBundle out;
    Table& curve = out.table("spectral_curve",
                             {"alpha", "lam1_abs", "lam2_abs", "lam3_abs", "lam4_abs", "rho", "stable"});
    for (const auto& p : spectral_radius_curve(base, alphas)) {
        curve.add_row({p.alpha, p.lambda_abs[0], p.lambda_abs[1], p.lambda_abs[2], p.lambda_abs[3],
                       p.rho, p.stable});
    }

    Table& cov = out.table("covariance_curve", {"alpha", "cov_eig1", "cov_eig2", "cov_eig3", "cov_eig4",
                                                "condition", "status"});
    for (double a : alphas) {
        SpectrumConfig cfg = base;
        cfg.alpha = a;
        try {
            const auto sc = stationary_covariance(cfg);
            cov.add_row({a, sc.eigenvalues[0], sc.eigenvalues[1], sc.eigenvalues[2], sc.eigenvalues[3],
                         num_or_null(sc.condition), sc.warning.empty() ? "ok" : "ill-conditioned"});
        } catch (const NonStationaryError&) {
            cov.add_row({a, nullptr, nullptr, nullptr, nullptr, nullptr, "non-stationary"});
        }
    }

    json summary = {{"mu", s.mu}, {"L", s.L}, {"gamma", s.gamma}, {"sigma", s.sigma}};
    summary["alpha_star"] = num_or_null(a_star);
    summary["alpha_crit"] = a_crit ? json(*a_crit) : json(nullptr);
    if (std::isfinite(a_star)) {
        SpectrumConfig at = base;
        at.alpha = a_star;
        summary["rho_at_alpha_star"] = stability_report(at).spectral_radius;
    } else {
        summary["rho_at_alpha_star"] = nullptr;
    }
    summary["large_step_limit"] = (s.L - s.mu) / s.mu;
    out.documents.emplace_back("summary.json", summary);

    ctx.note("alpha_star = " + format_double(a_star) +
             ", alpha_crit = " + (a_crit ? format_double(*a_crit) : std::string("none")));
    return out;
}

// ---------------------------------------------------------------- simulate

OutputBundle run_simulate(const SimulateSettings& s, const RunContext& ctx) {
    const EnsembleMethod method = parse_method(s.method);
    QuadraticExperiment exp;
    exp.dim = s.dim;
    exp.mu = s.mu;
    exp.L = s.L;
    exp.c = s.c;
    exp.sigma = s.sigma;
    exp.gamma0 = s.gamma0 == 0.0 ? s.mu : s.gamma0;
    exp.n_points = s.n_points;
    exp.n_steps = s.n_steps;
    exp.record_every = s.record_every;
    exp.seed = ctx.seed;
    exp.matrix_seed = s.matrix_seed;
    exp.newton_tol = s.newton_tol;
    exp.newton_max_iter = s.newton_max_iter;
    if (!(exp.mu > 0.0) || !(exp.L >= exp.mu)) throw ConfigError("need 0 < mu <= L");
    const double a_c = optimal_or_nan(exp.mu, exp.L, exp.gamma0);
    const auto a_crit = critical_alpha(exp.mu, exp.L, exp.gamma0);
    for (const auto& tok : s.alphas) exp.alphas.push_back(resolve_alpha_token(tok, a_c, a_crit));
    exp.validate();

    const auto res = run_quadratic_ensemble(exp, method);

    OutputBundle out;
    Table& summary = out.table("simulate_summary", {"alpha_index", "alpha", "final_dist_to_min",
                                                    "final_scatter_trace", "diverged_fraction"});
    for (std::size_t i = 0; i < res.runs.size(); ++i) {
        const QuadraticRun& run = res.runs[i];
        Table& metrics = out.table("metrics_alpha" + std::to_string(i), {"iteration", "metric", "method", "value"});
        for (const auto& row : run.series.rows) metrics.add_row({row.iteration, row.metric, row.method, row.value});

        Table& scatter = out.table("scatter_alpha" + std::to_string(i), {"point_id", "coord", "value", "plane"});
        const std::size_t dim = exp.dim;
        const std::size_t n_alive = run.final_points.size() / dim;
        const std::size_t n_dump = std::min(n_alive, s.scatter_points);
        for (std::size_t p = 0; p < n_dump; ++p) {
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = a + 1; b < dim; ++b) {
                    const std::string plane = "x" + std::to_string(a + 1) + "-x" + std::to_string(b + 1);
                    scatter.add_row({p, a + 1, run.final_points[p * dim + a], plane});
                    scatter.add_row({p, b + 1, run.final_points[p * dim + b], plane});
                }
            }
        }
        const EpochStats& last = run.stats.back();
        summary.add_row({i, run.alpha, last.dist_to_min, last.scatter_trace, run.diverged_fraction});
        ctx.note("alpha[" + std::to_string(i) + "] = " + format_double(run.alpha) +
                 ": dist_to_min " + format_double(last.dist_to_min) + ", diverged fraction " +
                 format_double(run.diverged_fraction));
    }
    return out;
}

// ---------------------------------------------------------------- stationary

OutputBundle run_stationary(const StationarySettings& s, const RunContext& ctx) {
    StationarityConfig cfg;
    cfg.use_test_function(parse_scalar_kind(s.function));
    cfg.alpha = s.alpha;
    cfg.sigma = s.sigma;
    cfg.mu = s.mu;
    cfg.gamma0 = s.gamma0;
    cfg.n_points = s.n_points;
    cfg.init_lo = s.init_lo;
    cfg.init_hi = s.init_hi;
    cfg.n_steps = s.n_steps;
    cfg.record_every = s.record_every;
    cfg.grid = Grid1D{s.grid_lo, s.grid_hi, s.grid_nodes};
    cfg.require_decay = s.require_decay;
    cfg.n_reference = s.n_reference;
    cfg.knn_k = s.knn_k;
    cfg.compute_kl = s.compute_kl;
    cfg.seed = ctx.seed;

    const auto res = run_stationarity_study(cfg);

    OutputBundle out;
    Table& metrics = out.table("stationary_metrics", {"iteration", "metric", "method", "value"});
    for (const auto& row : res.series.rows) metrics.add_row({row.iteration, row.metric, row.method, row.value});
    Table& samples = out.table("stationary_samples", {"method", "sample_id", "value"});
    for (std::size_t i = 0; i < res.final_gf.size(); ++i) samples.add_row({"gf_euler", i, res.final_gf[i]});
    for (std::size_t i = 0; i < res.final_nag.size(); ++i) samples.add_row({"nag_gs", i, res.final_nag[i]});
    for (std::size_t i = 0; i < res.reference.size(); ++i) samples.add_row({"reference", i, res.reference[i]});

    for (const char* method : {"gf_euler", "nag_gs"}) {
        const auto w1 = res.series.select("w1", method);
        if (!w1.empty()) ctx.note(std::string(method) + ": final W1 " + format_double(w1.back().second));
    }
    return out;
}

// ---------------------------------------------------------------- train / spectrum

namespace {

struct PreparedData {
    LogisticRegressionProblem train;
    LogisticRegressionProblem test;
};

PreparedData prepare_dataset(const DatasetSettings& d, std::uint64_t seed) {
    if (!(d.l2_reg >= 0.0)) throw ConfigError("l2_reg must be >= 0");
    if (!(d.test_fraction >= 0.0 && d.test_fraction < 1.0)) throw ConfigError("test_fraction must be in [0, 1)");
    LogisticRegressionProblem all;
    if (d.dataset == "blobs") {
        if (d.n_samples < 4 || d.n_features == 0) throw ConfigError("blobs need n_samples >= 4 and n_features >= 1");
        all = make_blobs(d.n_samples, d.n_features, d.separation, seed, d.l2_reg);
    } else if (d.dataset == "csv") {
        if (d.csv_path.empty()) throw ConfigError("dataset = csv needs csv_path");
        CsvSchema schema;
        schema.has_header = d.csv_header;
        schema.label_column = d.csv_label_column;
        schema.positive_class = d.csv_positive_class;
        schema.l2_reg = d.l2_reg;
        all = load_csv_dataset(d.csv_path, schema);
    } else {
        throw ConfigError("unknown dataset '" + d.dataset + "' (expected blobs or csv)");
    }
    auto [train, test] = train_test_split(all, d.test_fraction, seed);
    if (train.n_samples() == 0) throw ConfigError("training split is empty");
    if (d.standardize) {
        const auto [mean, sd] = standardize(train.features);
        if (test.n_samples() > 0) {
            test.features = (test.features.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
        }
    }
    return {std::move(train), std::move(test)};
}

std::vector<Vector> read_weights(const std::string& path, std::size_t n_params) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open weights file '" + path + "'");
    std::vector<Vector> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        Vector w;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto v = parse_number(cell);
            if (!v) throw ConfigError(path + ": line " + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
            w.push_back(*v);
        }
        if (w.size() != n_params) {
            throw ConfigError(path + ": line " + std::to_string(lineno) + ": expected " + std::to_string(n_params) +
                              " values, found " + std::to_string(w.size()));
        }
        rows.push_back(std::move(w));
    }
    if (rows.empty()) throw ConfigError(path + ": no parameter vectors");
    return rows;
}

}  // namespace

OutputBundle run_train(const TrainSettings& s, const RunContext& ctx) {
    const PreparedData data = prepare_dataset(s.data, ctx.seed);
    std::vector<OptimizerKind> kinds;
    for (const auto& name : s.optimizers) kinds.push_back(parse_optimizer_kind(name));
    if (kinds.empty()) throw ConfigError("at least one optimizer is required");
    const std::vector<double> lrs = s.lrs.empty() ? grid(s.lr_min, s.lr_max, s.n_lr, "log") : s.lrs;
    for (double lr : lrs) {
        if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rates must be positive");
    }
    if (s.epochs == 0) throw ConfigError("epochs must be positive");

    struct Job {
        OptimizerKind kind;
        double lr;
        TrainResult result;
    };
    std::vector<Job> jobs;
    for (OptimizerKind k : kinds) {
        for (double lr : lrs) jobs.push_back({k, lr, {}});
    }
    auto config_for = [&](const Job& j) {
        TrainConfig c;
        c.kind = j.kind;
        c.lr = j.lr;
        c.epochs = s.epochs;
        c.batch_size = s.batch_size;
        c.nag_mu = s.nag_mu;
        c.nag_gamma = s.nag_gamma;
        c.nag_update_gamma = s.nag_update_gamma;
        c.momentum = s.momentum;
        c.weight_decay = s.weight_decay;
        c.beta1 = s.beta1;
        c.beta2 = s.beta2;
        c.eps = s.eps;
        c.seed = ctx.seed;
        return c;
    };
    const LogisticRegressionProblem* test = data.test.n_samples() > 0 ? &data.test : nullptr;
    for_each_block(jobs.size(), Backend::openmp,
                   [&](std::size_t i) { jobs[i].result = train_logreg(data.train, test, config_for(jobs[i])); });

    OutputBundle out;
    Table& hist = out.table("train_history",
                            {"optimizer", "lr", "epoch", "train_loss", "test_loss", "train_acc", "test_acc"});
    Table& summary = out.table("train_summary", {"optimizer", "lr", "final_train_loss", "final_test_acc",
                                                 "converged", "diverged"});
    for (const Job& j : jobs) {
        const char* name = optimizer_kind_name(j.kind);
        for (const auto& e : j.result.history) {
            hist.add_row({name, j.lr, e.epoch, e.train_loss, e.test_loss, e.train_acc, e.test_acc});
        }
        const auto& last = j.result.history.back();
        summary.add_row({name, j.lr, last.train_loss, last.test_acc, training_converged(j.result),
                         j.result.diverged});
    }
    for (OptimizerKind k : kinds) {
        double best = 0.0;
        for (const Job& j : jobs) {
            if (j.kind == k && training_converged(j.result)) best = std::max(best, j.lr);
        }
        ctx.note(std::string(optimizer_kind_name(k)) + ": largest converged lr " +
                 (best > 0.0 ? format_double(best) : std::string("none")));
    }
    return out;
}

OutputBundle run_spectrum(const SpectrumSettings& s, const RunContext& ctx) {
    const PreparedData data = prepare_dataset(s.data, ctx.seed);
    if (s.checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
    if (!(s.tol > 0.0) || s.max_iter <= 0) throw ConfigError("tol and max_iter must be positive");

    std::vector<std::pair<std::size_t, Vector>> checkpoints;
    if (!s.weights_path.empty()) {
        const auto rows = read_weights(s.weights_path, data.train.n_params());
        for (std::size_t i = 0; i < rows.size(); ++i) checkpoints.emplace_back(i, rows[i]);
    } else {
        TrainConfig c;
        c.kind = parse_optimizer_kind(s.optimizer);
        c.lr = s.lr;
        c.epochs = s.epochs;
        c.batch_size = s.batch_size;
        c.nag_mu = s.nag_mu;
        c.nag_gamma = s.nag_gamma;
        c.momentum = s.momentum;
        c.seed = ctx.seed;
        const auto r = train_logreg(data.train, nullptr, c, [&](std::size_t epoch, const Vector& w) {
            if (epoch % s.checkpoint_every == 0) checkpoints.emplace_back(epoch, w);
        });
        if (r.diverged) ctx.note("training diverged; checkpoints stop at the last finite iterate");
    }

    std::vector<ExtremeEigenvalues> est(checkpoints.size());
    const auto& train = data.train;
    for_each_block(checkpoints.size(), Backend::openmp, [&](std::size_t i) {
        const Vector& w = checkpoints[i].second;
        const LinearOperator op{train.n_params(), [&](const Vector& v) { return logreg_hessian_apply(train, w, v); }};
        est[i] = extreme_eigenvalues(op, s.tol, s.max_iter, ctx.seed + checkpoints[i].first);
    });

    OutputBundle out;
    Table& t = out.table("spectrum", {"checkpoint_id", "lambda_min", "lambda_max"});
    std::size_t unconverged = 0;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        t.add_row({checkpoints[i].first, est[i].lambda_min.value, est[i].lambda_max.value});
        unconverged += !est[i].lambda_min.converged + !est[i].lambda_max.converged;
    }
    if (unconverged > 0) ctx.note(std::to_string(unconverged) + " eigenvalue estimates did not reach tol");
    return out;
}

// ---------------------------------------------------------------- sweep

OutputBundle run_sweep(const SweepSettings& s, const RunContext& ctx) {
    if (s.eigs.empty()) throw ConfigError("eigs must list at least one Hessian eigenvalue");
    for (double e : s.eigs) {
        if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("eigs must be finite and >= 0");
    }
    if (s.n_trials == 0) throw ConfigError("n_trials must be >= 1");
    if (!(s.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    struct Axis {
        const char* name;
        double lo, hi;
        std::string scale;
    };
    const Axis axes[3] = {{"alpha", s.alpha_min, s.alpha_max, s.alpha_scale},
                          {"gamma", s.gamma_min, s.gamma_max, s.gamma_scale},
                          {"mu", s.mu_min, s.mu_max, s.mu_scale}};
    for (const Axis& a : axes) {
        if (!(a.lo <= a.hi)) throw ConfigError(std::string(a.name) + ": bounds must satisfy min <= max");
        if (a.scale == "log") {
            if (!(a.lo > 0.0)) throw ConfigError(std::string(a.name) + ": log scale needs min > 0");
        } else if (a.scale != "uniform" && a.scale != "linear") {
            throw ConfigError(std::string(a.name) + ": unknown scale '" + a.scale + "'");
        }
    }

    struct Trial {
        double alpha = 0, gamma = 0, mu = 0, metric = 0;
        std::string status;
    };
    std::vector<Trial> trials(s.n_trials);
    const std::size_t dim = s.eigs.size();
    for_each_block(s.n_trials, Backend::openmp, [&](std::size_t t) {
        Rng rng = make_stream(ctx.seed, t);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double v[3];
        for (int k = 0; k < 3; ++k) {
            const double u = unit(rng);
            const Axis& a = axes[k];
            v[k] = a.scale == "log" ? std::exp(std::log(a.lo) + u * (std::log(a.hi) - std::log(a.lo)))
                                    : a.lo + u * (a.hi - a.lo);
            if (a.lo == a.hi) v[k] = a.lo;
        }
        Trial& tr = trials[t];
        tr.alpha = v[0];
        tr.gamma = v[1];
        tr.mu = v[2];
        const NagGsConfig cfg{tr.alpha, tr.mu, tr.gamma, s.sigma, false};
        try {
            cfg.validate();
        } catch (const ConfigError&) {
            tr.status = "rejected-config";
            tr.metric = std::nan("");
            return;
        }
        OptimizerState st = make_state(Vector(dim, s.x0), tr.gamma);
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector grad(dim), noise(dim);
        bool diverged = false;
        for (std::size_t k = 0; k < s.budget && !diverged; ++k) {
            const Vector xp = nag_gs_propose(st, cfg);
            for (std::size_t i = 0; i < dim; ++i) grad[i] = s.eigs[i] * xp[i];
            if (s.sigma > 0.0) {
                for (double& e : noise) e = normal(rng);
                st = nag_gs_step(st, grad, cfg, noise);
            } else {
                st = nag_gs_step(st, grad, cfg);
            }
            diverged = st.diverged || norm2(st.x) > s.divergence_threshold || norm2(st.v) > s.divergence_threshold;
        }
        tr.status = diverged ? "diverged" : "ok";
        tr.metric = diverged ? std::numeric_limits<double>::infinity() : norm2(st.x);
    });

    OutputBundle out;
    Table& table = out.table("sweep", {"trial", "alpha", "gamma", "mu", "final_metric", "diverged", "status"});
    std::size_t n_ok = 0, n_div = 0, n_rej = 0;
    for (std::size_t t = 0; t < trials.size(); ++t) {
        const Trial& tr = trials[t];
        const json metric = std::isnan(tr.metric) ? json(nullptr) : json(tr.metric);
        table.add_row({t, tr.alpha, tr.gamma, tr.mu, metric, tr.status == "diverged", tr.status});
        n_ok += tr.status == "ok";
        n_div += tr.status == "diverged";
        n_rej += tr.status == "rejected-config";
    }
    ctx.note(std::to_string(n_ok) + " converged-or-bounded, " + std::to_string(n_div) + " diverged, " +
             std::to_string(n_rej) + " rejected");
    return out;
}

}  // namespace naggs::cli
