#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "output.hpp"

namespace naggs::cli {

/// Settings shared by every subcommand.
struct RunContext {
    std::uint64_t seed = 0;
    int jobs = 0;
    bool quiet = false;
    std::ostream* log = nullptr;

    void note(const std::string& line) const;
};

/// Resolves a step-size token: a plain number, or `[k*]name` with name one of
/// alpha_c / alpha_star (rate-optimal step) and alpha_crit.
double resolve_alpha_token(const std::string& token, double alpha_c, std::optional<double> alpha_crit);

struct AnalyzeSettings {
    double mu = 1.0;
    double L = 3.0;
    double gamma = 1.0;
    double sigma = 1.0;
    /// Explicit step sizes (tokens); when empty a grid from alpha_min to alpha_max is used.
    std::vector<std::string> alphas;
    double alpha_min = 1e-2;
    /// 0 selects 2*max(alpha_star, alpha_crit), or 10 when L == mu.
    double alpha_max = 0.0;
    std::size_t n_alpha = 200;
    std::string alpha_scale = "linear";
};
OutputBundle run_analyze(const AnalyzeSettings& s, const RunContext& ctx);

struct SimulateSettings {
    std::string method = "nag_gs";
    std::size_t dim = 3;
    double mu = 1.0;
    double L = 1.9;
    double c = 5.0;
    double sigma = 1.0;
    /// 0 means gamma0 = mu.
    double gamma0 = 0.0;
    std::vector<std::string> alphas{"0.5*alpha_c", "alpha_c", "2*alpha_c", "10*alpha_c"};
    std::size_t n_points = 20000;
    std::size_t n_steps = 200;
    std::size_t record_every = 0;
    std::uint64_t matrix_seed = 1;
    /// Number of final points dumped per alpha into the scatter file.
    std::size_t scatter_points = 2000;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
};
OutputBundle run_simulate(const SimulateSettings& s, const RunContext& ctx);

struct StationarySettings {
    std::string function = "f1";
    double alpha = 8e-3;
    double sigma = 1e-3;
    double mu = 1.0 / 33.0;
    double gamma0 = 0.0;
    std::size_t n_points = 100;
    double init_lo = -10.0;
    double init_hi = 10.0;
    std::size_t n_steps = 5000;
    std::size_t record_every = 0;
    double grid_lo = -10.0;
    double grid_hi = 10.0;
    std::size_t grid_nodes = 400001;
    bool require_decay = true;
    std::size_t n_reference = 10000;
    int knn_k = 1;
    bool compute_kl = true;
};
OutputBundle run_stationary(const StationarySettings& s, const RunContext& ctx);

/// Dataset selection shared by train and spectrum.
struct DatasetSettings {
    std::string dataset = "blobs";
    std::size_t n_samples = 600;
    std::size_t n_features = 10;
    double separation = 3.0;
    double l2_reg = 1e-3;
    double test_fraction = 0.25;
    std::string csv_path;
    bool csv_header = false;
    int csv_label_column = -1;
    std::optional<double> csv_positive_class;
    bool standardize = true;
};

struct TrainSettings {
    DatasetSettings data;
    std::vector<std::string> optimizers{"nag_gs", "sgd_momentum", "adamw"};
    /// Explicit learning rates; when empty a log grid from lr_min to lr_max is used.
    std::vector<double> lrs;
    double lr_min = 1e-3;
    double lr_max = 1e2;
    std::size_t n_lr = 10;
    std::size_t epochs = 50;
    std::size_t batch_size = 0;
    double nag_mu = 1.0;
    double nag_gamma = 1.0;
    bool nag_update_gamma = false;
    double momentum = 0.9;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};
OutputBundle run_train(const TrainSettings& s, const RunContext& ctx);

struct SpectrumSettings {
    DatasetSettings data;
    /// CSV of parameter vectors, one checkpoint per row. When empty the checkpoints are
    /// the iterates of a training run configured below.
    std::string weights_path;
    std::string optimizer = "nag_gs";
    double lr = 0.5;
    std::size_t epochs = 20;
    std::size_t checkpoint_every = 1;
    std::size_t batch_size = 0;
    double nag_mu = 1.0;
    double nag_gamma = 1.0;
    double momentum = 0.9;
    double tol = 1e-10;
    int max_iter = 20000;
};
OutputBundle run_spectrum(const SpectrumSettings& s, const RunContext& ctx);

struct SweepSettings {
    /// Diagonal Hessian of the quadratic objective f(x) = 0.5 x^T diag(eigs) x.
    std::vector<double> eigs{1.0, 10.0};
    double x0 = 1.0;
    double sigma = 0.0;
    std::size_t n_trials = 200;
    std::size_t budget = 200;
    double alpha_min = 1e-2;
    double alpha_max = 1e2;
    std::string alpha_scale = "log";
    double gamma_min = 1e-2;
    double gamma_max = 1e2;
    std::string gamma_scale = "log";
    double mu_min = -10.0;
    double mu_max = 10.0;
    std::string mu_scale = "uniform";
    double divergence_threshold = 1e8;
};
OutputBundle run_sweep(const SweepSettings& s, const RunContext& ctx);

}  // namespace naggs::cli
