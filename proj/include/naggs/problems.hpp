#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "naggs/common.hpp"
#include "naggs/optimizers.hpp"

namespace naggs {

/// f(x) = 0.5 (x - c e)^T A (x - c e). With this convention the Hessian is A itself,
/// so mu and L are exactly the extreme eigenvalues of A.
struct Quadratic {
    Eigen::MatrixXd A;
    double shift_c = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(A.rows()); }
    Vector minimizer() const { return Vector(dim(), shift_c); }
    double value(std::span<const double> x) const;
    GradientOracle oracle() const;
};

Quadratic make_quadratic(Eigen::MatrixXd A, double shift_c = 0.0);
Quadratic make_diagonal_quadratic(const std::vector<double>& spectrum, double shift_c = 0.0);

Vector quadratic_grad(const Quadratic& q, std::span<const double> x);
Vector quadratic_hessian_apply(const Quadratic& q, std::span<const double> v);

/// A = Q D Q^T with D = diag(mu, interior..., L), interior eigenvalues uniform in [mu, L],
/// Q from a Householder QR of a Gaussian matrix (signs fixed so R has a positive diagonal).
Quadratic make_test_matrix(double mu, double L, std::size_t dim, std::uint64_t seed,
                           double shift_c = 0.0);

/// Eigenvalues used by make_test_matrix (ascending), for callers that need D.
std::vector<double> test_matrix_spectrum(double mu, double L, std::size_t dim, std::uint64_t seed);

/// Scalar non-convex test functions:
///   two_pit: f1(x) = (2 log cosh x - 5)^2 / 50
///   fm_sin:  f2(x) = cos(1.6 x + (5/3) sin(0.64 x) - pi)
struct ScalarTestFunction {
    enum class Kind { two_pit, fm_sin, quadratic };
    Kind kind = Kind::two_pit;

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;
};

ScalarTestFunction::Kind parse_scalar_kind(const std::string& name);
const char* scalar_kind_name(ScalarTestFunction::Kind kind);

struct LogisticRegressionProblem {
    /// n_samples x n_features (without the bias column).
    Eigen::MatrixXd features;
    /// Labels in {0, 1}.
    Eigen::VectorXd labels;
    double l2_reg = 0.0;
    bool includes_bias = true;

    std::size_t n_samples() const { return static_cast<std::size_t>(features.rows()); }
    /// Parameter dimension: n_features (+1 for the bias, stored last).
    std::size_t n_params() const {
        return static_cast<std::size_t>(features.cols()) + (includes_bias ? 1 : 0);
    }
};

struct LossGrad {
    double loss = 0.0;
    Vector grad;
};

/// Mean cross-entropy over `batch` (all samples when empty) plus (l2_reg/2)||w||^2.
/// The bias is regularized like the other weights.
LossGrad logreg_loss_grad(const LogisticRegressionProblem& p, std::span<const double> w,
                          std::span<const std::size_t> batch = {});

double logreg_loss(const LogisticRegressionProblem& p, std::span<const double> w,
                   std::span<const std::size_t> batch = {});

/// X^T diag(s(1-s)) X v / n + l2_reg v over `batch` (all samples when empty).
Vector logreg_hessian_apply(const LogisticRegressionProblem& p, std::span<const double> w,
                            std::span<const double> v, std::span<const std::size_t> batch = {});

/// Dense Hessian, used as an oracle for the matrix-free spectrum estimates.
Eigen::MatrixXd logreg_hessian_dense(const LogisticRegressionProblem& p, std::span<const double> w);

/// Fraction of samples classified correctly with threshold 0.5.
double logreg_accuracy(const LogisticRegressionProblem& p, std::span<const double> w);

GradientOracle logreg_oracle(const LogisticRegressionProblem& p);

/// Two Gaussian classes of `n_samples` points in `n_features` dimensions with unit
/// variance. Class means are +/- separation/2 along the first min(2, n_features)
/// coordinates. Labels alternate so the classes are balanced.
LogisticRegressionProblem make_blobs(std::size_t n_samples, std::size_t n_features,
                                     double separation, std::uint64_t seed, double l2_reg = 0.0);

/// Splits rows: the last round(test_fraction * n) rows after a seeded shuffle form the test set.
std::pair<LogisticRegressionProblem, LogisticRegressionProblem> train_test_split(
    const LogisticRegressionProblem& p, double test_fraction, std::uint64_t seed);

/// Per-feature standardization in place; returns the (mean, std) used. Constant
/// features are centered and left unscaled.
std::pair<Eigen::VectorXd, Eigen::VectorXd> standardize(Eigen::MatrixXd& features);

struct CsvSchema {
    bool has_header = false;
    /// Column index of the label. Negative values count from the end (-1 = last).
    int label_column = -1;
    /// Feature column indices; empty means every column except the label.
    std::vector<int> feature_columns;
    bool standardize = false;
    /// Multiclass labels are reduced one-vs-rest against this value. When absent the
    /// labels must already be in {0,1} or {-1,+1}.
    std::optional<double> positive_class;
    double l2_reg = 0.0;
    bool includes_bias = true;
};

/// Throws ConfigError for unreadable files and malformed content; messages name the
/// offending (1-based) line.
LogisticRegressionProblem load_csv_dataset(const std::string& path, const CsvSchema& schema);
LogisticRegressionProblem parse_csv_dataset(const std::string& text, const CsvSchema& schema);

}  // namespace naggs
