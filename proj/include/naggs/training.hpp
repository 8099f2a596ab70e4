#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "naggs/problems.hpp"

namespace naggs {

enum class OptimizerKind { nag_gs, sgd_momentum, adamw };

OptimizerKind parse_optimizer_kind(const std::string& name);
const char* optimizer_kind_name(OptimizerKind kind);

struct TrainConfig {
    OptimizerKind kind = OptimizerKind::nag_gs;
    /// Step size; for NAG-GS this is alpha.
    double lr = 0.1;
    std::size_t epochs = 20;
    /// Minibatch size; 0 means full batch.
    std::size_t batch_size = 0;

    double nag_mu = 1.0;
    double nag_gamma = 1.0;
    bool nag_update_gamma = false;

    double momentum = 0.9;
    double weight_decay = 0.0;

    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    std::uint64_t seed = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

struct TrainResult {
    /// Row 0 is the initial model (w = 0); row e is the model after epoch e.
    std::vector<EpochRecord> history;
    Vector final_w;
    bool diverged = false;
};

/// Called after every epoch (including epoch 0) with the current parameters.
using EpochCallback = std::function<void(std::size_t epoch, const Vector& w)>;

/// Trains logistic regression from w = 0. `test` may be null (test columns then repeat the
/// train metrics). Stops early when the iterate or the loss becomes non-finite.
TrainResult train_logreg(const LogisticRegressionProblem& train,
                         const LogisticRegressionProblem* test, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

/// Finite at every epoch, ran to completion, final train loss below the initial one, and
/// every loss in the second half of the run also below the initial one. The last clause
/// rejects runs that oscillate wildly and happen to end on a low point.
bool training_converged(const TrainResult& r);

}  // namespace naggs
