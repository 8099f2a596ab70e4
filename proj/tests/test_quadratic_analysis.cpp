#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "naggs/common.hpp"
#include "naggs/quadratic_analysis.hpp"
#include "oracles.hpp"

using namespace naggs;

namespace {

std::vector<std::complex<double>> as_vector(const Eigenvalues4& e) { return {e.begin(), e.end()}; }

double dense_rho(const Eigen::MatrixXd& M) {
    double r = 0.0;
    for (const auto& z : oracle::dense_eigenvalues(M)) r = std::max(r, std::abs(z));
    return r;
}

}  // namespace

TEST(IterationMatrix, IdentityLimit) {
    const IterationMatrix E = build_iteration_matrix({1.0, 3.0, 1.0, 1e-10, 0.0});
    EXPECT_LT((E - IterationMatrix::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(IterationMatrix, HandSubstitution) {
    // mu = gamma = 1, L = 3, alpha = 1: tau = 1.
    const IterationMatrix E = build_iteration_matrix({1.0, 3.0, 1.0, 1.0, 0.0});
    IterationMatrix ref = IterationMatrix::Zero();
    ref(0, 0) = ref(1, 1) = 0.5;
    ref(0, 2) = ref(1, 3) = 0.5;
    ref(2, 2) = 0.5;                       // mu-mode: (mu - mu) terms vanish, 1/(1+tau)
    ref(3, 1) = 1.0 * (1.0 - 3.0) / (1.0 * 2.0 * 2.0);  // -0.5
    ref(3, 3) = 1.0 * (1.0 - 3.0) / (1.0 * 2.0 * 2.0) + 0.5;  // 0
    EXPECT_LT((E - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(IterationMatrix, EqualAxesEigenvalues) {
    const SpectrumConfig cfg{2.0, 2.0, 3.0, 0.7, 0.0};
    const auto ev = oracle::dense_eigenvalues(build_iteration_matrix(cfg));
    const double l1 = 3.0 / (3.0 + 0.7 * 2.0);
    const double l2 = 1.0 / 1.7;
    EXPECT_LT(oracle::matched_max_error(ev, {l1, l1, l2, l2}), 1e-12);
}

TEST(Eigenvalues, ClosedFormMatchesDenseSolve) {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int complex_cases = 0;
    for (int t = 0; t < 1000; ++t) {
        const double mu = std::exp(4.0 * u(rng) - 2.0);
        const double L = mu * std::exp(4.0 * u(rng));
        const double gamma = mu * std::exp(3.0 * u(rng));
        const double alpha = std::exp(8.0 * u(rng) - 4.0);
        const SpectrumConfig cfg{mu, L, gamma, alpha, 0.0};
        const auto closed = as_vector(iteration_eigenvalues(cfg));
        const auto dense = oracle::dense_eigenvalues(build_iteration_matrix(cfg));
        ASSERT_LT(oracle::matched_max_error(closed, dense), 1e-9)
            << "mu=" << mu << " L=" << L << " gamma=" << gamma << " alpha=" << alpha;
        if (std::abs(closed[2].imag()) > 0.0) ++complex_cases;
    }
    EXPECT_GT(complex_cases, 50);
}

TEST(Eigenvalues, GammaEqualsMuGivesEqualPair) {
    const auto e = iteration_eigenvalues({0.7, 2.0, 0.7, 1.3, 0.0});
    EXPECT_EQ(e[0], e[1]);
}

TEST(Eigenvalues, ComplexConjugateInsideInterval) {
    const double mu = 1.0, L = 3.0, gamma = 1.5;
    const double lo = (mu + gamma - 2.0 * std::sqrt(gamma * L)) / (L - mu);
    const double hi = (mu + gamma + 2.0 * std::sqrt(gamma * L)) / (L - mu);
    for (int i = 1; i < 20; ++i) {
        const double alpha = std::max(lo, 0.0) + (hi - std::max(lo, 0.0)) * i / 20.0;
        const auto e = iteration_eigenvalues({mu, L, gamma, alpha, 0.0});
        EXPECT_GT(std::abs(e[2].imag()), 0.0);
        EXPECT_NEAR(e[2].real(), e[3].real(), 1e-14);
        EXPECT_NEAR(e[2].imag(), -e[3].imag(), 1e-14);
        EXPECT_NEAR(std::abs(e[2]), std::abs(e[3]), 1e-14);
    }
}

TEST(Eigenvalues, LargeStepLimit) {
    const double mu = 1.0, L = 5.0, gamma = 2.0;
    const auto e = iteration_eigenvalues({mu, L, gamma, 1e7, 0.0});
    EXPECT_LT(std::abs(e[0]), 1e-6);
    EXPECT_LT(std::abs(e[1]), 1e-6);
    EXPECT_LT(std::abs(e[2]), 1e-6);
    EXPECT_NEAR(std::abs(e[3]), L / mu - 1.0, 1e-5);
}

TEST(StepSizes, ReferenceValues) {
    EXPECT_NEAR(optimal_alpha(1.0, 1.9, 1.0), 5.29, 0.01);
    EXPECT_NEAR(optimal_alpha(1.0, 3.0, 1.0), 2.73, 0.01);
    ASSERT_TRUE(critical_alpha(1.0, 3.0, 1.0).has_value());
    EXPECT_NEAR(*critical_alpha(1.0, 3.0, 1.0), 4.83, 0.01);
    EXPECT_FALSE(critical_alpha(1.0, 1.9, 1.0).has_value());
    EXPECT_TRUE(std::isinf(optimal_alpha(2.0, 2.0, 3.0)));
    EXPECT_THROW(optimal_alpha(1.0, 3.0, 0.5), ConfigError);
}

TEST(StepSizes, GeneralFormulaReducesAtGammaEqualsMu) {
    for (double mu : {0.1, 1.0, 2.5}) {
        const double L = 7.0 * mu;
        const double a = optimal_alpha(mu, L, mu);
        const double general = (mu + mu + std::sqrt(4.0 * mu * L)) / (L - mu);
        EXPECT_NEAR(a, general, 1e-12 * a);
    }
}

TEST(StepSizes, OptimalAlphaMinimizesSpectralRadius) {
    // Brute-force oracle: scan rho over a fine grid.
    for (auto [mu, L, gamma] : {std::tuple{1.0, 1.9, 1.0}, std::tuple{1.0, 3.0, 1.0},
                                std::tuple{0.5, 4.0, 2.0}}) {
        const double a_star = optimal_alpha(mu, L, gamma);
        double best_a = 0.0, best_rho = 10.0;
        for (int i = 1; i <= 20000; ++i) {
            const double a = 3.0 * a_star * i / 20000.0;
            const double r = stability_report({mu, L, gamma, a, 0.0}).spectral_radius;
            if (r < best_rho) {
                best_rho = r;
                best_a = a;
            }
        }
        EXPECT_NEAR(best_a, a_star, 2e-3 * a_star);
    }
}

TEST(StepSizes, OrderingAndMonotonicityProperties) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int crit_checked = 0;
    for (int t = 0; t < 1000; ++t) {
        const double mu = std::exp(4.0 * u(rng) - 2.0);
        const double L = mu * (1.0 + std::exp(5.0 * u(rng) - 1.0));
        const double gamma = mu * (1.0 + 5.0 * u(rng));
        const double a = optimal_alpha(mu, L, gamma);
        EXPECT_GT(a, 2.0 * std::sqrt(mu / L));
        if (mu < L / 2.0) {
            EXPECT_GT(*critical_alpha(mu, L, gamma), a);
            ++crit_checked;
        }
        for (int j = 0; j <= 10; ++j) {
            const double lam = mu + (L - mu) * j / 10.0;
            if (lam == mu) continue;
            EXPECT_GE(optimal_alpha(mu, lam, gamma), a * (1.0 - 1e-14));
        }
    }
    EXPECT_GT(crit_checked, 100);
}

TEST(SpectralRadius, CriticalStepIsUnitRadius) {
    const double ac = *critical_alpha(1.0, 3.0, 1.0);
    EXPECT_NEAR(stability_report({1.0, 3.0, 1.0, ac, 0.0}).spectral_radius, 1.0, 1e-6);
    // Independent root check: |lambda_4| = 1 located by bisection on the dense matrix.
    const double root = oracle::bisect(
        [](double a) { return dense_rho(build_iteration_matrix({1.0, 3.0, 1.0, a, 0.0})) - 1.0; },
        optimal_alpha(1.0, 3.0, 1.0), 20.0);
    EXPECT_NEAR(root, ac, 1e-6);
}

TEST(SpectralRadius, IncreasingBeyondOptimum) {
    for (auto [mu, L, gamma] : {std::tuple{1.0, 3.0, 1.0}, std::tuple{1.0, 1.9, 1.0},
                                std::tuple{0.2, 5.0, 0.7}}) {
        const double a = optimal_alpha(mu, L, gamma);
        std::vector<double> alphas;
        for (int i = 0; i < 50; ++i) alphas.push_back(a + 2.0 * a * i / 49.0);
        const auto curve = spectral_radius_curve({mu, L, gamma, 1.0, 0.0}, alphas);
        for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GT(curve[i].rho, curve[i - 1].rho);
        EXPECT_LT(curve.front().rho, 1.0);
    }
    const auto small = spectral_radius_curve({1.0, 3.0, 1.0, 1.0, 0.0}, {1e-9});
    EXPECT_LT(small[0].rho, 1.0);
    EXPECT_GT(small[0].rho, 1.0 - 1e-8);
}

TEST(SpectralRadius, StableAtOptimumForRandomConfigs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double mu = 0.1 + u(rng);
        const double L = 2.0 * mu * (1.0 + 10.0 * u(rng));
        const double gamma = mu * (1.0 + 3.0 * u(rng));
        const auto rep = stability_report({mu, L, gamma, optimal_alpha(mu, L, gamma), 0.0});
        EXPECT_TRUE(rep.stable);
    }
}

TEST(DenominatorCubic, PositiveRootIsCriticalStep) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        const double mu = 0.1 + u(rng);
        const double gamma = mu * (1.0 + 3.0 * u(rng));
        const bool below = t % 2 == 0;
        const double L = below ? 2.0 * mu * (1.0 + 5.0 * u(rng) + 1e-3) : mu * (1.0 + 0.99 * u(rng));
        const auto c = covariance_denominator_cubic(mu, L, gamma);
        std::vector<double> pos;
        for (double r : oracle::real_cubic_roots(c[0], c[1], c[2], c[3])) {
            if (r > 0.0) pos.push_back(r);
        }
        if (below) {
            ASSERT_EQ(pos.size(), 1u);
            EXPECT_NEAR(pos[0], *critical_alpha(mu, L, gamma), 1e-7 * pos[0]);
        } else {
            EXPECT_TRUE(pos.empty());
        }
    }
}

TEST(Lyapunov, ResidualAndSymmetry) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const double mu = 0.2 + u(rng);
        const double L = mu * (1.0 + 3.0 * u(rng));
        const double gamma = mu * (1.0 + u(rng));
        const double alpha = optimal_alpha(mu, L, gamma) * (0.2 + 0.8 * u(rng));
        const SpectrumConfig cfg{mu, L, gamma, alpha, 0.5 + u(rng)};
        const auto sc = stationary_covariance(cfg);
        const Eigen::Matrix4d E = build_iteration_matrix(cfg);
        const Eigen::Matrix4d Q = noise_covariance(cfg);
        EXPECT_LE((sc.C - E * sc.C * E.transpose() - Q).norm(), 1e-10 * Q.norm());
        EXPECT_LE((sc.C - sc.C.transpose()).norm(), 0.0);
        EXPECT_GE(sc.eigenvalues[0], -1e-12);
        EXPECT_TRUE(sc.warning.empty());
    }
}

TEST(Lyapunov, TrivialCases) {
    const SpectrumConfig quiet{1.0, 1.9, 1.0, 2.0, 0.0};
    EXPECT_EQ(stationary_covariance(quiet).C.norm(), 0.0);

    Eigen::MatrixXd Q(2, 2);
    Q << 2.0, 0.5, 0.5, 1.0;
    EXPECT_LT((solve_discrete_lyapunov(Eigen::MatrixXd::Zero(2, 2), Q) - Q).norm(), 1e-15);
}

TEST(Lyapunov, AgreesWithFixedPointIteration) {
    const SpectrumConfig cfg{1.0, 1.9, 1.0, 5.0, 1.0};
    const Eigen::Matrix4d E = build_iteration_matrix(cfg);
    const Eigen::Matrix4d Q = noise_covariance(cfg);
    Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
    for (int k = 0; k < 2000; ++k) C = E * C * E.transpose() + Q;
    EXPECT_LT((stationary_covariance(cfg).C - C).norm(), 1e-12);
}

TEST(Lyapunov, QuadraticSigmaScaling) {
    const SpectrumConfig one{1.0, 1.9, 1.0, 5.285, 1.0};
    SpectrumConfig two = one;
    two.sigma = 2.0;
    const Eigen::Matrix4d c1 = stationary_covariance(one).C;
    const Eigen::Matrix4d c2 = stationary_covariance(two).C;
    EXPECT_LE((c2 - 4.0 * c1).cwiseAbs().maxCoeff(), 1e-10 * c1.cwiseAbs().maxCoeff());
}

TEST(Lyapunov, NonStationaryRejected) {
    const double ac = *critical_alpha(1.0, 3.0, 1.0);
    EXPECT_THROW(stationary_covariance({1.0, 3.0, 1.0, 1.1 * ac, 1.0}), NonStationaryError);
}

TEST(Lyapunov, BlowUpNearCriticalStep) {
    // gamma = 3/2 shifts the critical step to 6.
    const double mu = 1.0, L = 3.0, gamma = 1.5;
    const double ac = *critical_alpha(mu, L, gamma);
    EXPECT_NEAR(ac, 6.0, 1e-12);
    double prev = 0.0;
    for (double frac : {0.5, 0.8, 0.9, 0.95, 0.99, 0.999}) {
        const auto sc = stationary_covariance({mu, L, gamma, frac * ac, 1.0});
        EXPECT_GT(sc.eigenvalues[3], prev);
        prev = sc.eigenvalues[3];
    }
    EXPECT_GT(prev, 100.0);
}

TEST(NdStability, OddDimensionDuplicatesLastMode) {
    const auto rep = nd_stability({1.0, 2.0, 3.0}, 1.0, 1.0, 2.0);
    ASSERT_EQ(rep.blocks.size(), 2u);
    EXPECT_EQ(rep.blocks[1].lambda_a, 3.0);
    EXPECT_EQ(rep.blocks[1].lambda_b, 3.0);
    const Eigen::MatrixXd E = build_iteration_matrix_nd({1.0, 2.0, 3.0}, 1.0, 1.0, 2.0);
    EXPECT_NEAR(rep.spectral_radius, dense_rho(E), 1e-12);
}

TEST(NdStability, TwoModeCaseMatchesReport) {
    const auto nd = nd_stability({1.0, 3.0}, 1.0, 1.0, 2.0);
    EXPECT_NEAR(nd.spectral_radius, stability_report({1.0, 3.0, 1.0, 2.0, 0.0}).spectral_radius, 1e-15);
    const auto pair = mode_eigenvalues(1.0, 1.0, 1.0, 2.0);
    EXPECT_NEAR(std::abs(pair[0]), 1.0 / 3.0, 1e-14);
}

TEST(MonteCarloCovariance, ZeroNoiseGivesZero) {
    const auto mc = montecarlo_covariance_check({1.0, 1.9, 1.0, 5.0, 0.0}, 500, 50, 1);
    EXPECT_EQ(mc.second_moment.norm(), 0.0);
}

TEST(MonteCarloCovariance, DoublingSigmaQuadruples) {
    const SpectrumConfig base{1.0, 1.9, 1.0, 5.285, 1.0};
    SpectrumConfig twice = base;
    twice.sigma = 2.0;
    const auto a = montecarlo_covariance_check(base, 4000, 60, 3);
    const auto b = montecarlo_covariance_check(twice, 4000, 60, 3);
    // Same seed and zero start: the trajectories scale exactly with sigma.
    EXPECT_LT((b.second_moment - 4.0 * a.second_moment).cwiseAbs().maxCoeff(),
              1e-10 * a.second_moment.cwiseAbs().maxCoeff());
}
