#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "naggs/common.hpp"

namespace naggs {

/// Sorted 1-D sample. Non-finite values are rejected.
class SampleSet {
public:
    SampleSet() = default;
    explicit SampleSet(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t n() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Fraction of samples <= x.
    double ecdf(double x) const;

private:
    std::vector<double> values_;
};

/// sup_x |F_a(x) - F_b(x)|.
double ks_statistic(const SampleSet& a, const SampleSet& b);

/// One-sample variant against a continuous CDF.
double ks_statistic(const SampleSet& a, const std::function<double(double)>& cdf);

/// Integral of |F_a - F_b|. For equal sizes this is the mean gap between order statistics.
double wasserstein1(const SampleSet& a, const SampleSet& b);

struct KnnKlOptions {
    int k = 1;
    /// Ties are broken by adding uniform noise of magnitude jitter * scale, where scale
    /// is the largest absolute sample value. Set to 0 to disable.
    double jitter = 1e-12;
    std::uint64_t seed = 0x5eed;
};

/// k-nearest-neighbour estimate of KL(a || b) in one dimension:
///   (1/n) sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1))
/// where rho_k(i) is the k-th neighbour distance of a_i inside a (excluding itself) and
/// nu_k(i) the k-th neighbour distance of a_i inside b. Throws NumericalError if a
/// neighbour distance is still zero after tie-breaking.
double kl_divergence_knn(const SampleSet& a, const SampleSet& b, const KnnKlOptions& opts = {});

struct Grid1D {
    double lo = -10.0;
    double hi = 10.0;
    /// Must be odd and >= 3 (composite Simpson rule).
    std::size_t n_nodes = 20001;
};

/// rho*(x) = exp(-2 f(x)/sigma^2) / Z on [lo, hi].
class StationaryDensity {
public:
    /// Throws ConfigError for invalid grids and NumericalError("grid too small") when the
    /// unnormalized density at either endpoint exceeds 1e-12 of its maximum (unless
    /// require_decay is false, which truncates the density to the grid instead).
    StationaryDensity(std::function<double(double)> f, double sigma, Grid1D grid,
                      bool require_decay = true);

    double log_density_unnorm(double x) const;
    /// log Z.
    double log_partition() const { return log_z_; }
    double partition() const;

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;
    /// E[x^k] under rho*, by Simpson quadrature.
    double moment(int k) const;
    /// Integral of pdf over the grid (1 up to quadrature error).
    double total_mass() const;

    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    const Grid1D& grid() const { return grid_; }
    double sigma() const { return sigma_; }

private:
    std::function<double(double)> f_;
    double sigma_;
    Grid1D grid_;
    double h_ = 0.0;
    double log_max_ = 0.0;
    double log_z_ = 0.0;
    // Unnormalized weights exp(logp - log_max) at nodes and the cumulative distribution.
    std::vector<double> w_;
    std::vector<double> cdf_;
};

StationaryDensity stationary_density(std::function<double(double)> f, double sigma, Grid1D grid,
                                     bool require_decay = true);

}  // namespace naggs
