#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "naggs/common.hpp"
#include "naggs/parallel.hpp"

namespace naggs {

enum class EnsembleMethod { nag_gs, nag_fi, gf_euler };

const char* method_name(EnsembleMethod m);

/// Ensemble of independent trajectories on f(x) = 0.5 (x - x*)^T A (x - x*).
/// Trajectory i draws its initial point and all of its noise from make_stream(seed, i),
/// so runs that differ only in alpha share initial points and noise paths.
struct QuadraticEnsembleSpec {
    Eigen::MatrixXd A;
    Vector x_star;
    EnsembleMethod method = EnsembleMethod::nag_gs;
    double alpha = 0.1;
    double mu = 1.0;
    double gamma0 = 1.0;
    double sigma = 0.0;
    bool update_gamma = false;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;

    std::size_t n_traj = 1000;
    std::size_t n_steps = 100;
    /// Steps (0 = initial state) at which moments are accumulated. Sorted ascending.
    std::vector<std::size_t> record_steps;

    enum class Init { gaussian, zero };
    Init init = Init::gaussian;
    double init_scale = 1.0;

    std::uint64_t seed = 0;
    double divergence_threshold = 1e8;
    std::size_t block_size = 256;
};

/// Power sums of (x - x*) over live trajectories at one recorded step.
struct RecordMoments {
    std::size_t step = 0;
    std::size_t alive = 0;
    /// sums[4*c + (p-1)] = sum over live trajectories of (x_c - x*_c)^p, p = 1..4.
    std::vector<double> sums;
};

struct QuadraticEnsembleResult {
    std::size_t dim = 0;
    std::vector<RecordMoments> records;
    /// Row-major n_traj x dim. Diverged trajectories keep their last finite state.
    std::vector<double> final_x;
    std::vector<double> final_v;
    std::vector<std::uint8_t> diverged;
    /// Step at which each trajectory diverged (n_steps + 1 when it did not).
    std::vector<std::size_t> diverged_at;

    std::size_t n_diverged() const;
};

QuadraticEnsembleResult simulate_quadratic_ensemble(const QuadraticEnsembleSpec& spec,
                                                    Backend backend = Backend::openmp);

/// Scalar ensemble for a general 1-D objective given by its derivative.
struct ScalarEnsembleSpec {
    EnsembleMethod method = EnsembleMethod::gf_euler;  // gf_euler or nag_gs
    std::function<double(double)> grad;
    double alpha = 1e-2;
    double mu = 1.0;
    double gamma0 = 1.0;
    double sigma = 0.0;
    bool update_gamma = false;

    std::vector<double> x0;
    std::size_t n_steps = 100;
    std::vector<std::size_t> record_steps;

    std::uint64_t seed = 0;
    double divergence_threshold = 1e8;
    std::size_t block_size = 256;
};

struct ScalarEnsembleResult {
    /// snapshots[r][i]: position of trajectory i at record_steps[r], NaN once diverged.
    std::vector<std::vector<double>> snapshots;
    std::vector<double> final_x;
    std::vector<std::uint8_t> diverged;
};

ScalarEnsembleResult simulate_scalar_ensemble(const ScalarEnsembleSpec& spec,
                                              Backend backend = Backend::openmp);

}  // namespace naggs
