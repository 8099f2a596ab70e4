#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "naggs/problems.hpp"
#include "naggs/spectrum.hpp"

using namespace naggs;

namespace {

LinearOperator dense_operator(const Eigen::MatrixXd& H) {
    return {static_cast<std::size_t>(H.rows()), [H](const Vector& v) {
                const Eigen::VectorXd r =
                    H * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
                return Vector(r.data(), r.data() + r.size());
            }};
}

Eigen::MatrixXd diag(std::initializer_list<double> d) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v[i++] = x;
    return v.asDiagonal();
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = g(rng);
    return 0.5 * (M + M.transpose());
}

}  // namespace

TEST(PowerIteration, Examples) {
    const auto e = power_iteration(dense_operator(diag({1.0, 2.0, 3.0})), 1e-10, 2000, 1);
    EXPECT_TRUE(e.converged);
    EXPECT_NEAR(e.value, 3.0, 1e-8);
    EXPECT_LT(e.residual, 1e-8);
    EXPECT_NEAR(norm2(e.vector), 1.0, 1e-12);

    const auto neg = power_iteration(dense_operator(diag({-5.0, 2.0})), 1e-10, 2000, 2);
    EXPECT_NEAR(neg.value, -5.0, 1e-8);

    const auto id = power_iteration(dense_operator(Eigen::MatrixXd::Identity(4, 4)), 1e-10, 100, 3);
    EXPECT_EQ(id.iterations, 1);
    EXPECT_NEAR(id.value, 1.0, 1e-15);
}

TEST(PowerIteration, NonConvergenceIsFlagged) {
    // Equal-magnitude eigenvalues of opposite sign never settle.
    const auto e = power_iteration(dense_operator(diag({-1.0, 1.0})), 1e-12, 50, 4);
    EXPECT_FALSE(e.converged);
    EXPECT_GT(e.residual, 1e-12);
}

TEST(PowerIteration, Deterministic) {
    std::mt19937_64 rng(5);
    const auto op = dense_operator(random_symmetric(12, rng));
    const auto a = power_iteration(op, 1e-9, 500, 77);
    const auto b = power_iteration(op, 1e-9, 500, 77);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.vector, b.vector);
}

TEST(RayleighRefine, ExactEigenvectorNeedsNoSteps) {
    const auto e = rayleigh_refine(dense_operator(diag({1.0, 2.0, 3.0})), Vector{0.0, 1.0, 0.0}, 1e-12, 100);
    EXPECT_EQ(e.value, 2.0);
    EXPECT_EQ(e.iterations, 0);
    EXPECT_TRUE(e.converged);
}

TEST(RayleighRefine, AscendsToDominant) {
    const double s = 1.0 / std::sqrt(3.0);
    const auto e = rayleigh_refine(dense_operator(diag({1.0, 2.0, 3.0})), Vector{s, s, s}, 1e-10, 500);
    EXPECT_NEAR(e.value, 3.0, 1e-9);
    const auto lo = rayleigh_refine(dense_operator(diag({1.0, 2.0, 3.0})), Vector{s, s, s}, 1e-10, 500,
                                    RayleighTarget::smallest);
    EXPECT_NEAR(lo.value, 1.0, 1e-9);
}

TEST(RayleighRefine, RandomMatrixFromPowerIteration) {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd H = random_symmetric(10, rng);
    const auto op = dense_operator(H);
    const auto pi = power_iteration(op, 1e-3, 200, 1);
    const auto e = rayleigh_refine(op, pi.vector, 1e-8, 2000,
                                   pi.value > 0 ? RayleighTarget::largest : RayleighTarget::smallest);
    EXPECT_LT(e.residual, 1e-6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double ref = pi.value > 0 ? es.eigenvalues()(9) : es.eigenvalues()(0);
    EXPECT_NEAR(e.value, ref, 1e-8);
}

TEST(RayleighRefine, ZeroStartRejected) {
    EXPECT_THROW(rayleigh_refine(dense_operator(diag({1.0, 2.0})), Vector{0.0, 0.0}, 1e-8, 10), ConfigError);
}

TEST(ExtremeEigenvalues, SmallExamples) {
    const auto a = extreme_eigenvalues(dense_operator(diag({1.0, 2.0, 3.0})), 1e-10, 5000, 1);
    EXPECT_NEAR(a.lambda_min.value, 1.0, 1e-8);
    EXPECT_NEAR(a.lambda_max.value, 3.0, 1e-8);
    const auto b = extreme_eigenvalues(dense_operator(diag({-1.0, 0.5, 2.0})), 1e-10, 5000, 1);
    EXPECT_NEAR(b.lambda_min.value, -1.0, 1e-8);
    EXPECT_NEAR(b.lambda_max.value, 2.0, 1e-8);
}

TEST(ExtremeEigenvalues, RandomSymmetricUpTo50) {
    std::mt19937_64 rng(7);
    for (int n : {5, 13, 27, 50}) {
        const Eigen::MatrixXd H = random_symmetric(n, rng);
        const auto est = extreme_eigenvalues(dense_operator(H), 1e-10, 20000, 3);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        const double lmin = es.eigenvalues()(0);
        const double lmax = es.eigenvalues()(n - 1);
        EXPECT_NEAR(est.lambda_min.value, lmin, 1e-6 * std::max(1.0, std::abs(lmin))) << n;
        EXPECT_NEAR(est.lambda_max.value, lmax, 1e-6 * std::max(1.0, std::abs(lmax))) << n;
        // Shift identity: lambda_min = lambda_max - rho(lambda_max I - H).
        const Eigen::MatrixXd S = lmax * Eigen::MatrixXd::Identity(n, n) - H;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(S);
        EXPECT_NEAR(lmax - ss.eigenvalues().cwiseAbs().maxCoeff(), lmin, 1e-10 * std::max(1.0, std::abs(lmin)));
    }
}

TEST(ExtremeEigenvalues, LogisticHessianMatchesDense) {
    const auto p = make_blobs(200, 49, 1.0, 9, 0.01);
    ASSERT_EQ(p.n_params(), 50u);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 0.1);
    Vector w(p.n_params());
    for (double& x : w) x = g(rng);
    const LinearOperator op{p.n_params(), [&](const Vector& v) { return logreg_hessian_apply(p, w, v); }};
    const auto est = extreme_eigenvalues(op, 1e-10, 50000, 4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(logreg_hessian_dense(p, w));
    EXPECT_NEAR(est.lambda_min.value, es.eigenvalues()(0), 1e-5);
    EXPECT_NEAR(est.lambda_max.value, es.eigenvalues()(49), 1e-5);
}

TEST(Probes, DetectBrokenOperators) {
    std::mt19937_64 rng(10);
    const auto good = dense_operator(random_symmetric(8, rng));
    EXPECT_LT(probe_linearity(good, 10, 1), 1e-12);
    EXPECT_LT(probe_symmetry(good, 10, 1), 1e-12);

    Eigen::MatrixXd ns = random_symmetric(8, rng);
    ns(0, 1) += 1.0;
    EXPECT_GT(probe_symmetry(dense_operator(ns), 10, 1), 1e-3);

    const LinearOperator affine{3, [](const Vector& v) { return Vector{v[0] + 1.0, v[1], v[2]}; }};
    EXPECT_GT(probe_linearity(affine, 10, 1), 1e-3);
}

TEST(RayleighRefine, ReachesTightResidualFromNearEigenvector) {
    // Starting within 1e-8 of the top eigenvector the quotient is already exact to rounding;
    // the refinement still has to drive the residual down.
    std::mt19937_64 rng(19);
    const Eigen::MatrixXd H = random_symmetric(30, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd v = es.eigenvectors().col(29) + 1e-8 * es.eigenvectors().col(3);
    const auto est = rayleigh_refine(dense_operator(H), Vector(v.data(), v.data() + v.size()), 1e-13, 1000);
    EXPECT_TRUE(est.converged) << est.residual;
    EXPECT_NEAR(est.value, es.eigenvalues()(29), 1e-12 * std::abs(es.eigenvalues()(29)));
}
