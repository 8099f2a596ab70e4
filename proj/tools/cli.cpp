#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "naggs/common.hpp"
#include "naggs/parallel.hpp"
#include "output.hpp"

#ifndef NAGGS_VERSION
#define NAGGS_VERSION "0.0.0"
#endif

namespace naggs::cli {

namespace {

using nlohmann::json;

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
json echo_value(const T& v) {
    if constexpr (std::is_same_v<T, std::optional<double>>) {
        return v ? json(*v) : json(nullptr);
    } else {
        return json(v);
    }
}

/// Declares options on one subcommand and remembers how to echo their final values
/// into the metadata sidecar.
class Binder {
public:
    explicit Binder(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* opt(const std::string& name, T& ref, const std::string& desc) {
        CLI::Option* o = app_->add_option("--" + name, ref, desc);
        if constexpr (is_vector<T>::value) o->delimiter(',');
        echo_.emplace_back([name, &ref](json& j) { j[name] = echo_value(ref); });
        return o;
    }

    json echo() const {
        json j = json::object();
        for (const auto& e : echo_) e(j);
        return j;
    }

    CLI::App* app() const { return app_; }

private:
    CLI::App* app_;
    std::vector<std::function<void(json&)>> echo_;
};

void bind_dataset(Binder& b, DatasetSettings& d) {
    b.opt("dataset", d.dataset, "blobs or csv")->check(CLI::IsMember({"blobs", "csv"}));
    b.opt("n_samples", d.n_samples, "synthetic blob count");
    b.opt("n_features", d.n_features, "synthetic feature count");
    b.opt("separation", d.separation, "distance between blob means");
    b.opt("l2_reg", d.l2_reg, "L2 penalty")->check(CLI::NonNegativeNumber);
    b.opt("test_fraction", d.test_fraction, "held-out fraction")->check(CLI::Range(0.0, 0.99));
    b.opt("csv_path", d.csv_path, "CSV dataset path");
    b.opt("csv_header", d.csv_header, "first CSV row is a header");
    b.opt("csv_label_column", d.csv_label_column, "label column (negative counts from the end)");
    b.opt("csv_positive_class", d.csv_positive_class, "one-vs-rest positive label");
    b.opt("standardize", d.standardize, "standardize features with training statistics");
}

/// Rewrites `--set key=value` pairs into `--key value` appended after everything else so
/// they bind to the selected subcommand and override config-file values.
std::vector<std::string> expand_set_flags(const std::vector<std::string>& args) {
    std::vector<std::string> out, extra;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string kv;
        if (args[i] == "--set") {
            if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--set needs key=value");
            kv = args[++i];
        } else if (args[i].rfind("--set=", 0) == 0) {
            kv = args[i].substr(6);
        } else {
            out.push_back(args[i]);
            continue;
        }
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw CLI::ArgumentMismatch("--set expects key=value, got '" + kv + "'");
        extra.push_back("--" + kv.substr(0, eq));
        extra.push_back(kv.substr(eq + 1));
    }
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& log, std::ostream& err) {
    CLI::App app{"Experiment runner for the NAG-GS optimizer lab"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", NAGGS_VERSION);
    app.set_config("--config", "", "TOML-style file with one [subcommand] table");
    app.allow_config_extras(CLI::config_extras_mode::error);

    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string format = "csv";
    int jobs = 0;
    bool quiet = false;
    app.add_option("--seed", seed, "64-bit experiment seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--jobs", jobs, "parallel workers (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
    app.add_flag("--quiet", quiet, "suppress progress output");

    AnalyzeSettings analyze;
    SimulateSettings simulate;
    StationarySettings stationary;
    TrainSettings train;
    SpectrumSettings spectrum;
    SweepSettings sweep;

    std::vector<std::pair<Binder, std::function<OutputBundle(const RunContext&)>>> commands;
    auto add = [&](const char* name, const char* desc, std::function<OutputBundle(const RunContext&)> run) {
        commands.emplace_back(Binder(app.add_subcommand(name, desc)), std::move(run));
        return &commands.back().first;
    };
    commands.reserve(6);

    {
        Binder& b = *add("analyze", "spectral radius, step sizes and stationary covariance on the 2-D quadratic",
                         [&](const RunContext& c) { return run_analyze(analyze, c); });
        b.opt("mu", analyze.mu, "smallest Hessian eigenvalue");
        b.opt("L", analyze.L, "largest Hessian eigenvalue");
        b.opt("gamma", analyze.gamma, "fixed gamma");
        b.opt("sigma", analyze.sigma, "noise volatility");
        b.opt("alphas", analyze.alphas, "explicit step sizes (numbers or k*alpha_c / k*alpha_crit)");
        b.opt("alpha_min", analyze.alpha_min, "grid start");
        b.opt("alpha_max", analyze.alpha_max, "grid end (0 = automatic)");
        b.opt("n_alpha", analyze.n_alpha, "grid size");
        b.opt("alpha_scale", analyze.alpha_scale, "linear or log")->check(CLI::IsMember({"linear", "log"}));
    }
    {
        Binder& b = *add("simulate", "ensemble runs on a random quadratic, one per step size",
                         [&](const RunContext& c) { return run_simulate(simulate, c); });
        b.opt("method", simulate.method, "nag_gs, nag_fi or gf_euler");
        b.opt("dim", simulate.dim, "problem dimension");
        b.opt("mu", simulate.mu, "smallest Hessian eigenvalue");
        b.opt("L", simulate.L, "largest Hessian eigenvalue");
        b.opt("c", simulate.c, "minimizer shift (x* = c e)");
        b.opt("sigma", simulate.sigma, "noise volatility");
        b.opt("gamma0", simulate.gamma0, "initial gamma (0 = mu)");
        b.opt("alphas", simulate.alphas, "step sizes (numbers or k*alpha_c / k*alpha_crit)");
        b.opt("n_points", simulate.n_points, "ensemble size");
        b.opt("n_steps", simulate.n_steps, "iterations");
        b.opt("record_every", simulate.record_every, "recording cadence (0 = n_steps/200)");
        b.opt("matrix_seed", simulate.matrix_seed, "seed of the random rotation");
        b.opt("scatter_points", simulate.scatter_points, "final points dumped per step size");
        b.opt("newton_tol", simulate.newton_tol, "NAG-FI Newton tolerance");
        b.opt("newton_max_iter", simulate.newton_max_iter, "NAG-FI Newton iteration cap");
    }
    {
        Binder& b = *add("stationary", "distance to the Gibbs density for gradient flow and NAG-GS ensembles",
                         [&](const RunContext& c) { return run_stationary(stationary, c); });
        b.opt("function", stationary.function, "f1, f2 or quadratic");
        b.opt("alpha", stationary.alpha, "step size");
        b.opt("sigma", stationary.sigma, "noise volatility");
        b.opt("mu", stationary.mu, "NAG-GS mu");
        b.opt("gamma0", stationary.gamma0, "NAG-GS gamma (0 = mu)");
        b.opt("n_points", stationary.n_points, "ensemble size");
        b.opt("init_lo", stationary.init_lo, "initial points lower bound");
        b.opt("init_hi", stationary.init_hi, "initial points upper bound");
        b.opt("n_steps", stationary.n_steps, "iterations");
        b.opt("record_every", stationary.record_every, "recording cadence (0 = n_steps/200)");
        b.opt("grid_lo", stationary.grid_lo, "quadrature grid start");
        b.opt("grid_hi", stationary.grid_hi, "quadrature grid end");
        b.opt("grid_nodes", stationary.grid_nodes, "quadrature nodes (odd)");
        b.opt("require_decay", stationary.require_decay, "fail when the density does not decay on the grid");
        b.opt("n_reference", stationary.n_reference, "reference sample size");
        b.opt("knn_k", stationary.knn_k, "neighbour order of the KL estimator");
        b.opt("compute_kl", stationary.compute_kl, "compute the KL series");
    }
    {
        Binder& b = *add("train", "logistic regression with NAG-GS, SGD with momentum and AdamW over a learning-rate grid",
                         [&](const RunContext& c) { return run_train(train, c); });
        bind_dataset(b, train.data);
        b.opt("optimizers", train.optimizers, "nag_gs, sgd_momentum, adamw");
        b.opt("lrs", train.lrs, "explicit learning rates");
        b.opt("lr_min", train.lr_min, "log-grid start");
        b.opt("lr_max", train.lr_max, "log-grid end");
        b.opt("n_lr", train.n_lr, "log-grid size");
        b.opt("epochs", train.epochs, "epochs");
        b.opt("batch_size", train.batch_size, "minibatch size (0 = full batch)");
        b.opt("nag_mu", train.nag_mu, "NAG-GS mu");
        b.opt("nag_gamma", train.nag_gamma, "NAG-GS gamma");
        b.opt("nag_update_gamma", train.nag_update_gamma, "let gamma contract towards mu");
        b.opt("momentum", train.momentum, "SGD momentum");
        b.opt("weight_decay", train.weight_decay, "SGD/AdamW weight decay");
        b.opt("beta1", train.beta1, "AdamW beta1");
        b.opt("beta2", train.beta2, "AdamW beta2");
        b.opt("eps", train.eps, "AdamW epsilon");
    }
    {
        Binder& b = *add("spectrum", "extreme Hessian eigenvalues at training checkpoints",
                         [&](const RunContext& c) { return run_spectrum(spectrum, c); });
        bind_dataset(b, spectrum.data);
        b.opt("weights_path", spectrum.weights_path, "CSV of parameter vectors (one checkpoint per row)");
        b.opt("optimizer", spectrum.optimizer, "optimizer producing the checkpoints");
        b.opt("lr", spectrum.lr, "learning rate");
        b.opt("epochs", spectrum.epochs, "epochs");
        b.opt("checkpoint_every", spectrum.checkpoint_every, "epochs between checkpoints");
        b.opt("batch_size", spectrum.batch_size, "minibatch size (0 = full batch)");
        b.opt("nag_mu", spectrum.nag_mu, "NAG-GS mu");
        b.opt("nag_gamma", spectrum.nag_gamma, "NAG-GS gamma");
        b.opt("momentum", spectrum.momentum, "SGD momentum");
        b.opt("tol", spectrum.tol, "relative residual tolerance");
        b.opt("max_iter", spectrum.max_iter, "iteration cap per estimate");
    }
    {
        Binder& b = *add("sweep", "random search over (alpha, gamma, mu) on a diagonal quadratic",
                         [&](const RunContext& c) { return run_sweep(sweep, c); });
        b.opt("eigs", sweep.eigs, "Hessian eigenvalues");
        b.opt("x0", sweep.x0, "initial value of every coordinate");
        b.opt("sigma", sweep.sigma, "noise volatility");
        b.opt("n_trials", sweep.n_trials, "number of trials");
        b.opt("budget", sweep.budget, "steps per trial");
        b.opt("alpha_min", sweep.alpha_min, "alpha lower bound");
        b.opt("alpha_max", sweep.alpha_max, "alpha upper bound");
        b.opt("alpha_scale", sweep.alpha_scale, "log or uniform");
        b.opt("gamma_min", sweep.gamma_min, "gamma lower bound");
        b.opt("gamma_max", sweep.gamma_max, "gamma upper bound");
        b.opt("gamma_scale", sweep.gamma_scale, "log or uniform");
        b.opt("mu_min", sweep.mu_min, "mu lower bound");
        b.opt("mu_max", sweep.mu_max, "mu upper bound");
        b.opt("mu_scale", sweep.mu_scale, "log or uniform");
        b.opt("divergence_threshold", sweep.divergence_threshold, "norm treated as divergence");
    }

    try {
        std::vector<std::string> args = expand_set_flags(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::Success& e) {
        return app.exit(e, log, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, log, err);
        return kConfigError;
    }

    const auto it = std::find_if(commands.begin(), commands.end(),
                                 [](const auto& c) { return c.first.app()->parsed(); });
    const std::string name = it->first.app()->get_name();
    RunContext ctx{seed, jobs, quiet, &log};
    if (jobs > 0) set_thread_limit(jobs);

    try {
        OutputBundle bundle = it->second(ctx);
        const json meta = {{"command", name},
                           {"version", NAGGS_VERSION},
                           {"seed", seed},
                           {"config", it->first.echo()}};
        const auto written = write_all(bundle, out_dir, format == "json" ? OutputFormat::json : OutputFormat::csv, meta);
        ctx.note("wrote " + std::to_string(written.size()) + " files to " + out_dir);
        return kSuccess;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace naggs::cli
