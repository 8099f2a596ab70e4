#include "naggs/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "naggs/rng.hpp"

namespace naggs {

// ---------------------------------------------------------------- quadratics

double Quadratic::value(std::span<const double> x) const {
    require_same_dim(x.size(), dim(), "Quadratic::value");
    Eigen::VectorXd d(static_cast<Eigen::Index>(dim()));
    for (std::size_t i = 0; i < dim(); ++i) d[static_cast<Eigen::Index>(i)] = x[i] - shift_c;
    return 0.5 * d.dot(A * d);
}

GradientOracle Quadratic::oracle() const {
    GradientOracle o;
    o.dim = dim();
    o.eval_grad = [q = *this](const Vector& x) { return quadratic_grad(q, x); };
    o.eval_hessian_apply = [q = *this](const Vector&, const Vector& v) {
        return quadratic_hessian_apply(q, v);
    };
    return o;
}

Quadratic make_quadratic(Eigen::MatrixXd A, double shift_c) {
    if (A.rows() != A.cols() || A.rows() == 0) throw DimensionError("quadratic: A must be square");
    if (!A.allFinite()) throw ConfigError("quadratic: A has non-finite entries");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ConfigError("quadratic: A must be symmetric");
    }
    return Quadratic{std::move(A), shift_c};
}

Quadratic make_diagonal_quadratic(const std::vector<double>& spectrum, double shift_c) {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(spectrum.data(),
                                                          static_cast<Eigen::Index>(spectrum.size()));
    return make_quadratic(d.asDiagonal(), shift_c);
}

Vector quadratic_grad(const Quadratic& q, std::span<const double> x) {
    const std::size_t n = q.dim();
    require_same_dim(x.size(), n, "quadratic_grad");
    Vector g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s += q.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (x[j] - q.shift_c);
        }
        g[i] = s;
    }
    return g;
}

Vector quadratic_hessian_apply(const Quadratic& q, std::span<const double> v) {
    const std::size_t n = q.dim();
    require_same_dim(v.size(), n, "quadratic_hessian_apply");
    Vector h(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s += q.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[j];
        }
        h[i] = s;
    }
    return h;
}

std::vector<double> test_matrix_spectrum(double mu, double L, std::size_t dim, std::uint64_t seed) {
    if (!(mu > 0.0) || !(L >= mu) || !std::isfinite(L)) {
        throw ConfigError("make_test_matrix needs 0 < mu <= L");
    }
    if (dim < 2) throw ConfigError("make_test_matrix needs dim >= 2");
    Rng rng = make_stream(seed, 1);
    std::uniform_real_distribution<double> unif(mu, L);
    std::vector<double> d;
    d.reserve(dim);
    d.push_back(mu);
    for (std::size_t i = 2; i < dim; ++i) d.push_back(unif(rng));
    d.push_back(L);
    std::sort(d.begin(), d.end());
    return d;
}

Quadratic make_test_matrix(double mu, double L, std::size_t dim, std::uint64_t seed,
                           double shift_c) {
    const std::vector<double> d = test_matrix_spectrum(mu, L, dim, seed);
    const auto n = static_cast<Eigen::Index>(dim);
    Rng rng = make_stream(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd G(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) G(i, j) = normal(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (R(j, j) < 0.0) Q.col(j) *= -1.0;
    }
    const Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(d.data(), n);
    Eigen::MatrixXd A = Q * dv.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose());
    return Quadratic{std::move(A), shift_c};
}

// ---------------------------------------------------------------- scalar functions

namespace {

double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

double ScalarTestFunction::value(double x) const {
    switch (kind) {
        case Kind::two_pit: {
            const double u = 2.0 * log_cosh(x) - 5.0;
            return u * u / 50.0;
        }
        case Kind::fm_sin:
            return std::cos(1.6 * x + (5.0 / 3.0) * std::sin(0.64 * x) - std::numbers::pi);
        case Kind::quadratic:
            return 0.5 * x * x;
    }
    return 0.0;
}

double ScalarTestFunction::derivative(double x) const {
    switch (kind) {
        case Kind::two_pit: {
            const double u = 2.0 * log_cosh(x) - 5.0;
            return (2.0 / 25.0) * u * std::tanh(x);
        }
        case Kind::fm_sin: {
            const double phi = 1.6 * x + (5.0 / 3.0) * std::sin(0.64 * x) - std::numbers::pi;
            const double dphi = 1.6 + (5.0 / 3.0) * 0.64 * std::cos(0.64 * x);
            return -std::sin(phi) * dphi;
        }
        case Kind::quadratic:
            return x;
    }
    return 0.0;
}

double ScalarTestFunction::second_derivative(double x) const {
    switch (kind) {
        case Kind::two_pit: {
            const double u = 2.0 * log_cosh(x) - 5.0;
            const double t = std::tanh(x);
            return (2.0 / 25.0) * (2.0 * t * t + u * (1.0 - t * t));
        }
        case Kind::fm_sin: {
            const double phi = 1.6 * x + (5.0 / 3.0) * std::sin(0.64 * x) - std::numbers::pi;
            const double dphi = 1.6 + (5.0 / 3.0) * 0.64 * std::cos(0.64 * x);
            const double ddphi = -(5.0 / 3.0) * 0.64 * 0.64 * std::sin(0.64 * x);
            return -std::cos(phi) * dphi * dphi - std::sin(phi) * ddphi;
        }
        case Kind::quadratic:
            return 1.0;
    }
    return 0.0;
}

ScalarTestFunction::Kind parse_scalar_kind(const std::string& name) {
    if (name == "f1" || name == "two_pit") return ScalarTestFunction::Kind::two_pit;
    if (name == "f2" || name == "fm_sin") return ScalarTestFunction::Kind::fm_sin;
    if (name == "quadratic") return ScalarTestFunction::Kind::quadratic;
    throw ConfigError("unknown scalar function '" + name + "' (expected f1, f2 or quadratic)");
}

const char* scalar_kind_name(ScalarTestFunction::Kind kind) {
    switch (kind) {
        case ScalarTestFunction::Kind::two_pit:
            return "f1";
        case ScalarTestFunction::Kind::fm_sin:
            return "f2";
        case ScalarTestFunction::Kind::quadratic:
            return "quadratic";
    }
    return "unknown";
}

// ---------------------------------------------------------------- logistic regression

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_params(const LogisticRegressionProblem& p, std::size_t n) {
    require_same_dim(n, p.n_params(), "logistic regression parameters");
}

double margin(const LogisticRegressionProblem& p, std::span<const double> w, Eigen::Index i) {
    const Eigen::Index d = p.features.cols();
    double z = p.includes_bias ? w[static_cast<std::size_t>(d)] : 0.0;
    for (Eigen::Index j = 0; j < d; ++j) z += p.features(i, j) * w[static_cast<std::size_t>(j)];
    return z;
}

template <typename Fn>
void for_batch(const LogisticRegressionProblem& p, std::span<const std::size_t> batch, Fn&& fn) {
    if (batch.empty()) {
        for (std::size_t i = 0; i < p.n_samples(); ++i) fn(static_cast<Eigen::Index>(i));
    } else {
        for (std::size_t i : batch) {
            if (i >= p.n_samples()) throw DimensionError("batch index out of range");
            fn(static_cast<Eigen::Index>(i));
        }
    }
}

double batch_size(const LogisticRegressionProblem& p, std::span<const std::size_t> batch) {
    const std::size_t n = batch.empty() ? p.n_samples() : batch.size();
    if (n == 0) throw ConfigError("logistic regression: empty batch");
    return static_cast<double>(n);
}

}  // namespace

LossGrad logreg_loss_grad(const LogisticRegressionProblem& p, std::span<const double> w,
                          std::span<const std::size_t> batch) {
    check_params(p, w.size());
    const double n = batch_size(p, batch);
    const Eigen::Index d = p.features.cols();
    LossGrad out;
    out.grad.assign(w.size(), 0.0);
    double loss = 0.0;
    for_batch(p, batch, [&](Eigen::Index i) {
        const double z = margin(p, w, i);
        const double y = p.labels[i];
        loss += softplus(z) - y * z;
        const double r = sigmoid(z) - y;
        for (Eigen::Index j = 0; j < d; ++j) out.grad[static_cast<std::size_t>(j)] += r * p.features(i, j);
        if (p.includes_bias) out.grad[static_cast<std::size_t>(d)] += r;
    });
    double sq = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        out.grad[j] = out.grad[j] / n + p.l2_reg * w[j];
        sq += w[j] * w[j];
    }
    out.loss = loss / n + 0.5 * p.l2_reg * sq;
    return out;
}

double logreg_loss(const LogisticRegressionProblem& p, std::span<const double> w,
                   std::span<const std::size_t> batch) {
    check_params(p, w.size());
    const double n = batch_size(p, batch);
    double loss = 0.0;
    for_batch(p, batch, [&](Eigen::Index i) {
        const double z = margin(p, w, i);
        loss += softplus(z) - p.labels[i] * z;
    });
    double sq = 0.0;
    for (double wj : w) sq += wj * wj;
    return loss / n + 0.5 * p.l2_reg * sq;
}

Vector logreg_hessian_apply(const LogisticRegressionProblem& p, std::span<const double> w,
                            std::span<const double> v, std::span<const std::size_t> batch) {
    check_params(p, w.size());
    require_same_dim(v.size(), w.size(), "logreg_hessian_apply");
    const double n = batch_size(p, batch);
    const Eigen::Index d = p.features.cols();
    Vector out(w.size(), 0.0);
    for_batch(p, batch, [&](Eigen::Index i) {
        const double s = sigmoid(margin(p, w, i));
        double xv = p.includes_bias ? v[static_cast<std::size_t>(d)] : 0.0;
        for (Eigen::Index j = 0; j < d; ++j) xv += p.features(i, j) * v[static_cast<std::size_t>(j)];
        const double c = s * (1.0 - s) * xv;
        for (Eigen::Index j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] += c * p.features(i, j);
        if (p.includes_bias) out[static_cast<std::size_t>(d)] += c;
    });
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = out[j] / n + p.l2_reg * v[j];
    return out;
}

Eigen::MatrixXd logreg_hessian_dense(const LogisticRegressionProblem& p, std::span<const double> w) {
    check_params(p, w.size());
    const auto m = static_cast<Eigen::Index>(p.n_params());
    const Eigen::Index d = p.features.cols();
    Eigen::MatrixXd X(p.features.rows(), m);
    X.leftCols(d) = p.features;
    if (p.includes_bias) X.col(d).setOnes();
    Eigen::VectorXd s(p.features.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double si = sigmoid(margin(p, w, i));
        s[i] = si * (1.0 - si);
    }
    Eigen::MatrixXd H = X.transpose() * s.asDiagonal() * X / static_cast<double>(X.rows());
    H.diagonal().array() += p.l2_reg;
    return H;
}

double logreg_accuracy(const LogisticRegressionProblem& p, std::span<const double> w) {
    check_params(p, w.size());
    if (p.n_samples() == 0) return 0.0;
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < p.features.rows(); ++i) {
        const double pred = margin(p, w, i) >= 0.0 ? 1.0 : 0.0;
        if (pred == p.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(p.n_samples());
}

GradientOracle logreg_oracle(const LogisticRegressionProblem& p) {
    GradientOracle o;
    o.dim = p.n_params();
    o.eval_grad = [&p](const Vector& w) { return logreg_loss_grad(p, w).grad; };
    o.eval_hessian_apply = [&p](const Vector& w, const Vector& v) {
        return logreg_hessian_apply(p, w, v);
    };
    return o;
}

LogisticRegressionProblem make_blobs(std::size_t n_samples, std::size_t n_features,
                                     double separation, std::uint64_t seed, double l2_reg) {
    if (n_samples < 2) throw ConfigError("make_blobs needs at least 2 samples");
    if (n_features == 0) throw ConfigError("make_blobs needs at least 1 feature");
    Rng rng = make_stream(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    LogisticRegressionProblem p;
    p.features.resize(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(n_features));
    p.labels.resize(static_cast<Eigen::Index>(n_samples));
    p.l2_reg = l2_reg;
    const std::size_t shifted = std::min<std::size_t>(2, n_features);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double y = static_cast<double>(i % 2);
        const double offset = (y > 0.5 ? 0.5 : -0.5) * separation;
        p.labels[static_cast<Eigen::Index>(i)] = y;
        for (std::size_t j = 0; j < n_features; ++j) {
            p.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                normal(rng) + (j < shifted ? offset : 0.0);
        }
    }
    return p;
}

std::pair<LogisticRegressionProblem, LogisticRegressionProblem> train_test_split(
    const LogisticRegressionProblem& p, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must be in [0, 1)");
    }
    const std::size_t n = p.n_samples();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = make_stream(seed, 7);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_test;
    if (n_train == 0) throw ConfigError("train/test split leaves no training rows");

    auto take = [&](std::size_t begin, std::size_t end) {
        LogisticRegressionProblem q;
        q.l2_reg = p.l2_reg;
        q.includes_bias = p.includes_bias;
        q.features.resize(static_cast<Eigen::Index>(end - begin), p.features.cols());
        q.labels.resize(static_cast<Eigen::Index>(end - begin));
        for (std::size_t k = begin; k < end; ++k) {
            const auto r = static_cast<Eigen::Index>(k - begin);
            q.features.row(r) = p.features.row(static_cast<Eigen::Index>(idx[k]));
            q.labels[r] = p.labels[static_cast<Eigen::Index>(idx[k])];
        }
        return q;
    };
    return {take(0, n_train), take(n_train, n)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> standardize(Eigen::MatrixXd& features) {
    const Eigen::Index n = features.rows();
    if (n == 0) throw ConfigError("standardize: no rows");
    Eigen::VectorXd mean = features.colwise().mean().transpose();
    Eigen::VectorXd sd(features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        features.col(j).array() -= mean[j];
        const double var = features.col(j).squaredNorm() / static_cast<double>(n);
        sd[j] = std::sqrt(var);
        if (sd[j] > 0.0) features.col(j) /= sd[j];
    }
    return {mean, sd};
}

}  // namespace naggs
