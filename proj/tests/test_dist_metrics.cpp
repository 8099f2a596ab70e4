#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "naggs/common.hpp"
#include "naggs/dist_metrics.hpp"
#include "naggs/problems.hpp"
#include "oracles.hpp"

using namespace naggs;

namespace {

std::vector<double> gaussian(std::size_t n, double mean, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(mean, sd);
    std::vector<double> out(n);
    for (double& x : out) x = g(rng);
    return out;
}

}  // namespace

TEST(SampleSet, SortsAndRejectsNonFinite) {
    const SampleSet s({3.0, 1.0, 2.0});
    EXPECT_EQ(s.values(), (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_DOUBLE_EQ(s.ecdf(2.0), 2.0 / 3.0);
    EXPECT_EQ(s.ecdf(0.0), 0.0);
    EXPECT_THROW(SampleSet({1.0, NAN}), ConfigError);
}

TEST(Ks, SelfDistanceIsZero) {
    const SampleSet a(gaussian(1000, 0.0, 1.0, 1));
    EXPECT_EQ(ks_statistic(a, a), 0.0);
}

TEST(Ks, DisjointSupportsGiveOne) {
    EXPECT_EQ(ks_statistic(SampleSet({0.0, 1.0}), SampleSet({5.0, 6.0})), 1.0);
}

TEST(Ks, HandComputedExample) {
    // F_a jumps at 1,2,3; F_b at 2.5 and 4.
    const SampleSet a({1.0, 2.0, 3.0});
    const SampleSet b({2.5, 4.0});
    EXPECT_DOUBLE_EQ(ks_statistic(a, b), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(ks_statistic(b, a), 2.0 / 3.0);
}

TEST(Ks, OneSampleAgainstNormalCdf) {
    const SampleSet a(gaussian(100000, 0.0, 1.0, 2));
    EXPECT_LT(ks_statistic(a, oracle::normal_cdf), 0.01);
    const SampleSet shifted(gaussian(100000, 0.5, 1.0, 2));
    EXPECT_GT(ks_statistic(shifted, oracle::normal_cdf), 0.15);
}

TEST(Wasserstein, ShiftedSamplesGiveShift) {
    const std::vector<double> base = gaussian(500, 0.0, 1.0, 3);
    std::vector<double> moved = base;
    for (double& x : moved) x += 0.75;
    EXPECT_NEAR(wasserstein1(SampleSet(base), SampleSet(moved)), 0.75, 1e-12);
}

TEST(Wasserstein, UnequalSizesMatchIntegralDefinition) {
    const SampleSet a({0.0, 1.0});
    const SampleSet b({0.5});
    // |F_a - F_b| = 1/2 on [0, 1): integral 1/2.
    EXPECT_NEAR(wasserstein1(a, b), 0.5, 1e-15);
    const SampleSet c(gaussian(300, 0.0, 1.0, 4));
    const SampleSet d(gaussian(700, 0.2, 1.5, 5));
    // Brute-force integral of |F_c - F_d| on a fine grid.
    double ref = 0.0;
    const double lo = std::min(c[0], d[0]);
    const double hi = std::max(c[c.n() - 1], d[d.n() - 1]);
    const int n = 400000;
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        const double x = lo + (i + 0.5) * h;
        ref += std::abs(c.ecdf(x) - d.ecdf(x)) * h;
    }
    EXPECT_NEAR(wasserstein1(c, d), ref, 1e-3);
}

TEST(Wasserstein, GaussianScalePair) {
    const SampleSet a(gaussian(100000, 0.0, 1.0, 6));
    const SampleSet b(gaussian(100000, 0.0, 1.5, 7));
    EXPECT_NEAR(wasserstein1(a, b), std::sqrt(2.0 / M_PI) * 0.5, 0.02);
}

TEST(KnnKl, GaussianPairsNearAnalytic) {
    struct Case {
        double m1, s1, m2, s2;
    };
    for (const Case c : {Case{0.0, 1.0, 1.0, 1.0}, Case{0.0, 1.0, 0.0, 2.0}, Case{0.5, 0.7, 0.0, 1.0}}) {
        const SampleSet a(gaussian(100000, c.m1, c.s1, 11));
        const SampleSet b(gaussian(100000, c.m2, c.s2, 12));
        const double analytic = std::log(c.s2 / c.s1) +
                                (c.s1 * c.s1 + (c.m1 - c.m2) * (c.m1 - c.m2)) / (2.0 * c.s2 * c.s2) - 0.5;
        EXPECT_NEAR(kl_divergence_knn(a, b), analytic, 0.05);
    }
}

TEST(KnnKl, DuplicatesAreJitteredOrRejected) {
    const SampleSet a({1.0, 1.0, 2.0, 3.0});
    const SampleSet b({1.5, 2.5, 3.5});
    EXPECT_TRUE(std::isfinite(kl_divergence_knn(a, b)));
    KnnKlOptions strict;
    strict.jitter = 0.0;
    EXPECT_THROW(kl_divergence_knn(a, b, strict), NumericalError);
}

TEST(StationaryDensity, QuadraticGivesNormal) {
    const auto rho = stationary_density([](double x) { return 0.5 * x * x; }, std::sqrt(2.0),
                                        Grid1D{-12.0, 12.0, 24001});
    EXPECT_NEAR(rho.total_mass(), 1.0, 1e-10);
    EXPECT_NEAR(rho.moment(1), 0.0, 1e-12);
    EXPECT_NEAR(rho.moment(2), 1.0, 1e-8);
    EXPECT_NEAR(rho.log_partition(), 0.5 * std::log(2.0 * M_PI), 1e-8);
    for (double x : {-2.0, -0.3, 0.0, 1.1, 2.5}) {
        EXPECT_NEAR(rho.pdf(x), std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI), 1e-7);
        EXPECT_NEAR(rho.cdf(x), oracle::normal_cdf(x), 1e-6);
    }
    EXPECT_NEAR(rho.quantile(oracle::normal_cdf(1.3)), 1.3, 1e-4);
    const SampleSet s(rho.sample(50000, 3));
    EXPECT_LT(ks_statistic(s, oracle::normal_cdf), 0.01);
}

TEST(StationaryDensity, SmallSigmaConcentratesAtMinima) {
    const ScalarTestFunction f1{ScalarTestFunction::Kind::two_pit};
    const auto rho = stationary_density([&](double x) { return f1.value(x); }, 0.05,
                                        Grid1D{-10.0, 10.0, 40001});
    const double xmin = std::acosh(std::exp(2.5));
    EXPECT_NEAR(rho.moment(2), xmin * xmin, 0.01);
    EXPECT_NEAR(rho.cdf(0.0), 0.5, 1e-9);
}

TEST(StationaryDensity, GridTooSmall) {
    auto f = [](double x) { return 0.5 * x * x; };
    EXPECT_THROW(stationary_density(f, 10.0, Grid1D{-1.0, 1.0, 101}), NumericalError);
    EXPECT_NO_THROW(stationary_density(f, 10.0, Grid1D{-1.0, 1.0, 101}, false));
    EXPECT_THROW(stationary_density(f, 1.0, Grid1D{-1.0, 1.0, 100}), ConfigError);
    EXPECT_THROW(stationary_density(f, 0.0, Grid1D{-1.0, 1.0, 101}), ConfigError);
}
