#include <gtest/gtest.h>

#include <cmath>

#include "naggs/problems.hpp"
#include "naggs/training.hpp"

using namespace naggs;

TEST(Training, InitialRowIsUninformativeModel) {
    const auto p = make_blobs(100, 4, 3.0, 1);
    TrainConfig cfg;
    cfg.epochs = 3;
    const auto r = train_logreg(p, nullptr, cfg);
    ASSERT_EQ(r.history.size(), 4u);
    EXPECT_EQ(r.history[0].epoch, 0u);
    EXPECT_NEAR(r.history[0].train_loss, std::log(2.0), 1e-15);
    EXPECT_EQ(r.history[0].test_loss, r.history[0].train_loss);
}

TEST(Training, EveryOptimizerLearnsSeparableBlobs) {
    const auto p = make_blobs(200, 3, 4.0, 2, 1e-3);
    for (auto kind : {OptimizerKind::nag_gs, OptimizerKind::sgd_momentum, OptimizerKind::adamw}) {
        TrainConfig cfg;
        cfg.kind = kind;
        cfg.lr = kind == OptimizerKind::adamw ? 0.05 : 0.5;
        cfg.epochs = 100;
        const auto r = train_logreg(p, nullptr, cfg);
        EXPECT_TRUE(training_converged(r)) << optimizer_kind_name(kind);
        EXPECT_GT(r.history.back().train_acc, 0.95) << optimizer_kind_name(kind);
    }
}

TEST(Training, MinibatchRunsAreSeedDeterministic) {
    const auto p = make_blobs(120, 3, 2.0, 3);
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 5;
    cfg.seed = 11;
    const auto a = train_logreg(p, nullptr, cfg);
    const auto b = train_logreg(p, nullptr, cfg);
    EXPECT_EQ(a.final_w, b.final_w);
    cfg.seed = 12;
    EXPECT_NE(train_logreg(p, nullptr, cfg).final_w, a.final_w);
}

TEST(Training, DivergenceStopsEarly) {
    const auto p = make_blobs(100, 3, 3.0, 4);
    TrainConfig cfg;
    cfg.kind = OptimizerKind::sgd_momentum;
    cfg.lr = 1e6;
    cfg.epochs = 200;
    const auto r = train_logreg(p, nullptr, cfg);
    EXPECT_FALSE(training_converged(r));
}

TEST(Training, CallbackSeesEveryEpoch) {
    const auto p = make_blobs(50, 2, 3.0, 5);
    TrainConfig cfg;
    cfg.epochs = 4;
    std::vector<std::size_t> seen;
    train_logreg(p, nullptr, cfg, [&](std::size_t e, const Vector& w) {
        seen.push_back(e);
        EXPECT_EQ(w.size(), p.n_params());
    });
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Training, NamesAndValidation) {
    EXPECT_EQ(parse_optimizer_kind("adamw"), OptimizerKind::adamw);
    EXPECT_THROW(parse_optimizer_kind("lbfgs"), ConfigError);
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_EQ(train_logreg(make_blobs(10, 2, 1.0, 1), nullptr, cfg).history.size(), 1u);
    cfg.lr = 0.0;
    EXPECT_THROW(train_logreg(make_blobs(10, 2, 1.0, 1), nullptr, cfg), ConfigError);
}

TEST(Training, OscillatingRunEndingLowIsNotConverged) {
    auto with_losses = [](std::vector<double> losses) {
        TrainResult r;
        for (std::size_t e = 0; e < losses.size(); ++e) r.history.push_back({e, losses[e], losses[e], 0.5, 0.5});
        return r;
    };
    EXPECT_TRUE(training_converged(with_losses({0.7, 0.5, 0.4, 0.35, 0.3})));
    EXPECT_FALSE(training_converged(with_losses({0.7, 2.0, 9.0, 4.0, 0.5})));
    EXPECT_FALSE(training_converged(with_losses({0.7, 0.5, 0.4, 0.3, 0.8})));
    EXPECT_FALSE(training_converged(with_losses({0.7})));
}
