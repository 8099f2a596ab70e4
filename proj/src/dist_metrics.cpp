#include "naggs/dist_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "naggs/rng.hpp"

namespace naggs {

SampleSet::SampleSet(std::vector<double> values) : values_(std::move(values)) {
    if (!all_finite(values_)) throw ConfigError("SampleSet: non-finite value");
    std::sort(values_.begin(), values_.end());
}

double SampleSet::ecdf(double x) const {
    if (values_.empty()) return 0.0;
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double ks_statistic(const SampleSet& a, const SampleSet& b) {
    if (a.n() == 0 || b.n() == 0) throw ConfigError("ks_statistic: empty sample");
    const double n = static_cast<double>(a.n());
    const double m = static_cast<double>(b.n());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.n() && j < b.n()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.n() && a[i] <= x) ++i;
        while (j < b.n() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double ks_statistic(const SampleSet& a, const std::function<double(double)>& cdf) {
    if (a.n() == 0) throw ConfigError("ks_statistic: empty sample");
    const double n = static_cast<double>(a.n());
    double d = 0.0;
    for (std::size_t i = 0; i < a.n(); ++i) {
        const double F = cdf(a[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return d;
}

double wasserstein1(const SampleSet& a, const SampleSet& b) {
    if (a.n() == 0 || b.n() == 0) throw ConfigError("wasserstein1: empty sample");
    if (a.n() == b.n()) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.n(); ++i) s += std::abs(a[i] - b[i]);
        return s / static_cast<double>(a.n());
    }
    // Integrate |F_a - F_b| over the merged support; both ECDFs are step functions.
    const double n = static_cast<double>(a.n());
    const double m = static_cast<double>(b.n());
    std::size_t i = 0;
    std::size_t j = 0;
    double x_prev = std::min(a[0], b[0]);
    double total = 0.0;
    while (i < a.n() || j < b.n()) {
        const double x = j >= b.n() || (i < a.n() && a[i] <= b[j]) ? a[i] : b[j];
        total += std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m) * (x - x_prev);
        while (i < a.n() && a[i] <= x) ++i;
        while (j < b.n() && b[j] <= x) ++j;
        x_prev = x;
    }
    return total;
}

namespace {

std::vector<double> jittered(const std::vector<double>& v, double magnitude, Rng& rng) {
    std::vector<double> out = v;
    if (magnitude > 0.0) {
        std::uniform_real_distribution<double> u(-magnitude, magnitude);
        for (double& x : out) x += u(rng);
        std::sort(out.begin(), out.end());
    }
    return out;
}

// k-th smallest distance from x to the elements of sorted `s`, skipping index `self`.
double kth_distance(const std::vector<double>& s, double x, std::size_t pos, int k,
                    std::size_t self) {
    // Candidates left of `pos` (indices < pos) and from `pos` on.
    std::ptrdiff_t l = static_cast<std::ptrdiff_t>(pos) - 1;
    std::size_t r = pos;
    double d = 0.0;
    for (int found = 0; found < k;) {
        if (r == self) {
            ++r;
            continue;
        }
        if (l >= 0 && static_cast<std::size_t>(l) == self) {
            --l;
            continue;
        }
        const double dl = l >= 0 ? x - s[static_cast<std::size_t>(l)] : std::numeric_limits<double>::infinity();
        const double dr = r < s.size() ? s[r] - x : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
            d = dl;
            --l;
        } else {
            d = dr;
            ++r;
        }
        ++found;
    }
    return d;
}

}  // namespace

double kl_divergence_knn(const SampleSet& a, const SampleSet& b, const KnnKlOptions& opts) {
    if (opts.k < 1) throw ConfigError("kl_divergence_knn: k must be >= 1");
    const auto k = static_cast<std::size_t>(opts.k);
    if (a.n() < k + 1 || b.n() < k + 1) throw ConfigError("kl_divergence_knn: too few samples");

    double scale = 0.0;
    for (double x : a.values()) scale = std::max(scale, std::abs(x));
    for (double x : b.values()) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) scale = 1.0;
    Rng rng = make_stream(opts.seed, 0);
    const std::vector<double> xa = jittered(a.values(), opts.jitter * scale, rng);
    const std::vector<double> xb = jittered(b.values(), opts.jitter * scale, rng);

    double acc = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) {
        const double x = xa[i];
        const double rho = kth_distance(xa, x, i, opts.k, i);
        const auto pos = static_cast<std::size_t>(std::lower_bound(xb.begin(), xb.end(), x) - xb.begin());
        const double nu = kth_distance(xb, x, pos, opts.k, xb.size());
        if (!(rho > 0.0) || !(nu > 0.0)) {
            throw NumericalError("kl_divergence_knn: zero neighbour distance after tie-breaking");
        }
        acc += std::log(nu / rho);
    }
    const double n = static_cast<double>(xa.size());
    const double m = static_cast<double>(xb.size());
    return acc / n + std::log(m / (n - 1.0));
}

// ---------------------------------------------------------------- stationary density

StationaryDensity::StationaryDensity(std::function<double(double)> f, double sigma, Grid1D grid,
                                     bool require_decay)
    : f_(std::move(f)), sigma_(sigma), grid_(grid) {
    if (!f_) throw ConfigError("stationary_density: missing objective");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("stationary_density: sigma must be > 0");
    if (!(grid.hi > grid.lo) || !std::isfinite(grid.lo) || !std::isfinite(grid.hi)) {
        throw ConfigError("stationary_density: need lo < hi");
    }
    if (grid.n_nodes < 3 || grid.n_nodes % 2 == 0) {
        throw ConfigError("stationary_density: n_nodes must be odd and >= 3");
    }
    const std::size_t n = grid.n_nodes;
    h_ = (grid.hi - grid.lo) / static_cast<double>(n - 1);

    std::vector<double> logp(n);
    log_max_ = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        logp[j] = log_density_unnorm(grid.lo + static_cast<double>(j) * h_);
        if (std::isnan(logp[j])) throw NumericalError("stationary_density: objective returned NaN");
        log_max_ = std::max(log_max_, logp[j]);
    }
    if (!std::isfinite(log_max_)) throw NumericalError("stationary_density: density vanishes on the grid");

    w_.resize(n);
    for (std::size_t j = 0; j < n; ++j) w_[j] = std::exp(logp[j] - log_max_);
    if (require_decay && (w_.front() >= 1e-12 || w_.back() >= 1e-12)) {
        throw NumericalError("stationary_density: grid too small (density at an endpoint is not negligible)");
    }

    double simpson = w_.front() + w_.back();
    for (std::size_t j = 1; j + 1 < n; ++j) simpson += (j % 2 == 1 ? 4.0 : 2.0) * w_[j];
    simpson *= h_ / 3.0;
    log_z_ = std::log(simpson) + log_max_;

    // Piecewise-linear density between nodes; its exact integral defines the CDF.
    cdf_.assign(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) cdf_[j] = cdf_[j - 1] + 0.5 * h_ * (w_[j - 1] + w_[j]);
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
}

double StationaryDensity::log_density_unnorm(double x) const {
    return -2.0 * f_(x) / (sigma_ * sigma_);
}

double StationaryDensity::partition() const { return std::exp(log_z_); }

double StationaryDensity::pdf(double x) const {
    if (x < grid_.lo || x > grid_.hi) return 0.0;
    return std::exp(log_density_unnorm(x) - log_z_);
}

double StationaryDensity::cdf(double x) const {
    if (x <= grid_.lo) return 0.0;
    if (x >= grid_.hi) return 1.0;
    const double u = (x - grid_.lo) / h_;
    const auto j = std::min(static_cast<std::size_t>(u), grid_.n_nodes - 2);
    const double t = u - static_cast<double>(j);
    const double scale = (cdf_[j + 1] - cdf_[j]) / (0.5 * (w_[j] + w_[j + 1]));
    if (!std::isfinite(scale)) return cdf_[j];
    return cdf_[j] + scale * (w_[j] * t + 0.5 * (w_[j + 1] - w_[j]) * t * t);
}

double StationaryDensity::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile: p must lie in [0, 1]");
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), p);
    if (it == cdf_.begin()) return grid_.lo;
    if (it == cdf_.end()) return grid_.hi;
    const auto j = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    const double mass = cdf_[j + 1] - cdf_[j];
    const double x0 = grid_.lo + static_cast<double>(j) * h_;
    if (!(mass > 0.0)) return x0;
    // Solve w0 t + (w1 - w0) t^2 / 2 = target for t in [0, 1].
    const double w0 = w_[j];
    const double w1 = w_[j + 1];
    const double target = (p - cdf_[j]) / mass * 0.5 * (w0 + w1);
    const double a = 0.5 * (w1 - w0);
    const double disc = std::max(0.0, w0 * w0 + 4.0 * a * target);
    double t = (w0 + std::sqrt(disc)) > 0.0 ? 2.0 * target / (w0 + std::sqrt(disc)) : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    return x0 + t * h_;
}

double StationaryDensity::moment(int k) const {
    const std::size_t n = grid_.n_nodes;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = grid_.lo + static_cast<double>(j) * h_;
        const double c = (j == 0 || j + 1 == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        s += c * std::pow(x, k) * w_[j];
    }
    return s * h_ / 3.0 * std::exp(log_max_ - log_z_);
}

double StationaryDensity::total_mass() const { return moment(0); }

std::vector<double> StationaryDensity::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng = make_stream(seed, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(n);
    for (double& x : out) x = quantile(u(rng));
    return out;
}

StationaryDensity stationary_density(std::function<double(double)> f, double sigma, Grid1D grid,
                                     bool require_decay) {
    return StationaryDensity(std::move(f), sigma, grid, require_decay);
}

}  // namespace naggs
