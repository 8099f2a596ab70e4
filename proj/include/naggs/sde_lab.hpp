#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "naggs/dist_metrics.hpp"
#include "naggs/ensemble_kernels.hpp"
#include "naggs/problems.hpp"

namespace naggs {

struct MetricRow {
    std::size_t iteration = 0;
    std::string metric;
    std::string method;
    double value = 0.0;
};

/// Per-iteration records plus an echo of the configuration that produced them.
struct MetricSeries {
    std::vector<MetricRow> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add(std::size_t iteration, std::string metric, std::string method, double value);
    /// Values of one (metric, method) series in insertion order.
    std::vector<std::pair<std::size_t, double>> select(const std::string& metric,
                                                       const std::string& method) const;
    /// True when iterations are strictly increasing inside every (metric, method) series.
    bool iterations_increasing() const;
};

/// Final positions of a scalar ensemble.
struct Ensemble {
    std::vector<double> positions;
    std::vector<std::uint8_t> diverged;
    std::uint64_t seed = 0;

    std::size_t size() const { return positions.size(); }
    std::size_t n_diverged() const;
    /// Finite, non-diverged positions.
    std::vector<double> alive() const;
};

/// x <- x - alpha f'(x) + sigma sqrt(alpha) eta for each sample.
Ensemble euler_maruyama_gf(const std::function<double(double)>& f_grad,
                           const std::vector<double>& x0_samples, double alpha, double sigma,
                           std::size_t n_steps, std::uint64_t seed,
                           Backend backend = Backend::openmp);

/// 0, c, 2c, ..., n_steps with c = record_every, or ceil(n_steps/200) when record_every == 0.
std::vector<std::size_t> recording_schedule(std::size_t n_steps, std::size_t record_every = 0);

struct QuadraticExperiment {
    std::size_t dim = 3;
    double mu = 1.0;
    double L = 1.9;
    double c = 5.0;
    double sigma = 1.0;
    double gamma0 = 1.0;
    std::vector<double> alphas;
    std::size_t n_points = 20000;
    std::size_t n_steps = 200;
    std::size_t record_every = 0;
    std::uint64_t seed = 0;
    /// Seed of the random rotation in make_test_matrix.
    std::uint64_t matrix_seed = 1;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;

    void validate() const;
};

/// Summary of the ensemble at one recorded step.
struct EpochStats {
    std::size_t step = 0;
    std::size_t alive = 0;
    double dist_to_min = 0.0;
    double scatter_trace = 0.0;
    std::vector<double> skewness;
    std::vector<double> excess_kurtosis;
};

std::vector<EpochStats> epoch_stats(const QuadraticEnsembleResult& res);

struct QuadraticRun {
    double alpha = 0.0;
    MetricSeries series;
    std::vector<EpochStats> stats;
    /// Row-major (n_alive x dim) final iterates of trajectories that did not diverge.
    std::vector<double> final_points;
    double diverged_fraction = 0.0;
};

struct QuadraticExperimentResult {
    Quadratic problem;
    std::vector<QuadraticRun> runs;
};

/// Runs one ensemble per alpha on A = make_test_matrix(mu, L, dim, matrix_seed) with
/// x* = c e. Series per run: dist_to_min, scatter_trace and alive_fraction.
QuadraticExperimentResult run_quadratic_ensemble(const QuadraticExperiment& exp,
                                                 EnsembleMethod method,
                                                 Backend backend = Backend::openmp);

struct StationarityConfig {
    /// Objective and derivative. Set from a ScalarTestFunction with use_test_function.
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::string function_name = "custom";

    double alpha = 8e-3;
    double sigma = 1e-3;
    /// NAG-GS parameter; gamma0 defaults to mu when left at 0.
    double mu = 1.0 / 33.0;
    double gamma0 = 0.0;

    std::size_t n_points = 100;
    double init_lo = -10.0;
    double init_hi = 10.0;
    std::size_t n_steps = 5000;
    std::size_t record_every = 0;

    Grid1D grid{-10.0, 10.0, 400001};
    bool require_decay = true;
    std::size_t n_reference = 10000;
    int knn_k = 1;
    bool compute_kl = true;
    std::uint64_t seed = 0;

    void use_test_function(ScalarTestFunction::Kind kind);
};

struct StationarityResult {
    /// Metrics kl, w1, ks for methods gf_euler and nag_gs.
    MetricSeries series;
    std::vector<double> final_gf;
    std::vector<double> final_nag;
    std::vector<double> reference;
};

StationarityResult run_stationarity_study(const StationarityConfig& cfg,
                                          Backend backend = Backend::openmp);

}  // namespace naggs
