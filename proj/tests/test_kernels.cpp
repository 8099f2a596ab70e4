#include <gtest/gtest.h>

#include <atomic>
#include <bit>
#include <cmath>

#include "naggs/ensemble_kernels.hpp"
#include "naggs/optimizers.hpp"
#include "naggs/parallel.hpp"
#include "naggs/problems.hpp"
#include "naggs/rng.hpp"
#include "naggs/sde_lab.hpp"

using namespace naggs;

namespace {

QuadraticEnsembleSpec small_spec(EnsembleMethod method) {
    QuadraticEnsembleSpec s;
    s.A = make_test_matrix(1.0, 3.0, 3, 1).A;
    s.x_star = Vector(3, 5.0);
    s.method = method;
    s.alpha = method == EnsembleMethod::gf_euler ? 0.2 : 1.5;
    s.mu = 1.0;
    s.gamma0 = 1.0;
    s.sigma = 1.0;
    s.n_traj = 1000;
    s.n_steps = 40;
    s.record_steps = {0, 10, 40};
    s.block_size = 64;
    s.seed = 17;
    return s;
}

void expect_identical(const QuadraticEnsembleResult& a, const QuadraticEnsembleResult& b) {
    EXPECT_EQ(a.final_x, b.final_x);
    EXPECT_EQ(a.final_v, b.final_v);
    EXPECT_EQ(a.diverged, b.diverged);
    EXPECT_EQ(a.diverged_at, b.diverged_at);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t r = 0; r < a.records.size(); ++r) {
        EXPECT_EQ(a.records[r].alive, b.records[r].alive);
        EXPECT_EQ(a.records[r].sums, b.records[r].sums);
    }
}

}  // namespace

TEST(Parallel, EveryBlockVisitedOnce) {
    set_thread_limit(4);
    std::vector<std::atomic<int>> hits(1000);
    for_each_block(hits.size(), Backend::openmp, [&](std::size_t b) { hits[b]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    set_thread_limit(0);
}

TEST(Parallel, ExceptionsPropagate) {
    for (Backend backend : {Backend::serial, Backend::openmp}) {
        EXPECT_THROW(for_each_block(50, backend,
                                    [](std::size_t b) {
                                        if (b == 17) throw NumericalError("boom");
                                    }),
                     NumericalError);
    }
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Rng a = make_stream(1, 2), b = make_stream(1, 2), c = make_stream(1, 3), d = make_stream(2, 2);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(Kernels, SerialAndOpenMpAreBitIdentical) {
    for (EnsembleMethod m : {EnsembleMethod::nag_gs, EnsembleMethod::nag_fi, EnsembleMethod::gf_euler}) {
        const auto spec = small_spec(m);
        const auto serial = simulate_quadratic_ensemble(spec, Backend::serial);
        set_thread_limit(3);
        const auto par = simulate_quadratic_ensemble(spec, Backend::openmp);
        set_thread_limit(0);
        expect_identical(serial, par);
    }
}

TEST(Kernels, IndependentOfThreadCount) {
    const auto spec = small_spec(EnsembleMethod::nag_gs);
    set_thread_limit(1);
    const auto one = simulate_quadratic_ensemble(spec);
    set_thread_limit(5);
    const auto five = simulate_quadratic_ensemble(spec);
    set_thread_limit(0);
    expect_identical(one, five);
}

TEST(Kernels, TrajectoryMatchesSequentialStepper) {
    // Deterministic run (sigma = 0): each trajectory equals plain nag_gs_step iterations.
    auto spec = small_spec(EnsembleMethod::nag_gs);
    spec.sigma = 0.0;
    spec.n_traj = 5;
    const auto res = simulate_quadratic_ensemble(spec, Backend::serial);
    const Quadratic q = make_quadratic(spec.A, 5.0);
    // Trajectory 0's start is recovered from a zero-step run.
    auto start = spec;
    start.n_steps = 0;
    start.record_steps = {0};
    const auto init = simulate_quadratic_ensemble(start, Backend::serial);
    OptimizerState s = make_state(Vector(init.final_x.begin(), init.final_x.begin() + 3), 1.0);
    const NagGsConfig cfg{spec.alpha, spec.mu, spec.gamma0, 0.0, false};
    for (std::size_t k = 0; k < spec.n_steps; ++k) s = nag_gs_step(s, quadratic_grad(q, nag_gs_propose(s, cfg)), cfg);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(res.final_x[i], s.x[i], 1e-12);
}

TEST(Kernels, DivergenceIsRecordedPerTrajectory) {
    auto spec = small_spec(EnsembleMethod::gf_euler);
    spec.alpha = 1.0;  // gradient flow step beyond 2/L
    const auto res = simulate_quadratic_ensemble(spec, Backend::serial);
    EXPECT_EQ(res.n_diverged(), spec.n_traj);
    for (std::size_t t = 0; t < spec.n_traj; ++t) EXPECT_LE(res.diverged_at[t], spec.n_steps);
    EXPECT_EQ(res.records.back().alive, 0u);
    for (double x : res.final_x) EXPECT_TRUE(std::isfinite(x));
}

TEST(Kernels, ScalarEnsembleBackendsAgree) {
    ScalarEnsembleSpec s;
    s.grad = [](double x) { return std::sinh(x) * 0.1; };
    s.method = EnsembleMethod::nag_gs;
    s.alpha = 0.05;
    s.mu = 0.1;
    s.gamma0 = 0.1;
    s.sigma = 0.3;
    for (int i = 0; i < 700; ++i) s.x0.push_back(-3.0 + 6.0 * i / 699.0);
    s.n_steps = 60;
    s.record_steps = {0, 30, 60};
    s.block_size = 50;
    const auto a = simulate_scalar_ensemble(s, Backend::serial);
    set_thread_limit(4);
    const auto b = simulate_scalar_ensemble(s, Backend::openmp);
    set_thread_limit(0);
    EXPECT_EQ(a.final_x, b.final_x);
    for (std::size_t r = 0; r < a.snapshots.size(); ++r) {
        for (std::size_t i = 0; i < a.snapshots[r].size(); ++i) {
            EXPECT_EQ(std::bit_cast<std::uint64_t>(a.snapshots[r][i]),
                      std::bit_cast<std::uint64_t>(b.snapshots[r][i]));
        }
    }
}

TEST(Kernels, EulerMaruyamaBackendsAgree) {
    std::vector<double> x0(513, 1.0);
    const auto grad = [](double x) { return x; };
    const auto a = euler_maruyama_gf(grad, x0, 0.01, 1.0, 100, 3, Backend::serial);
    set_thread_limit(2);
    const auto b = euler_maruyama_gf(grad, x0, 0.01, 1.0, 100, 3, Backend::openmp);
    set_thread_limit(0);
    EXPECT_EQ(a.positions, b.positions);
}
