#include "naggs/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "naggs/rng.hpp"

namespace naggs {

OptimizerKind parse_optimizer_kind(const std::string& name) {
    if (name == "nag_gs") return OptimizerKind::nag_gs;
    if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::sgd_momentum;
    if (name == "adamw") return OptimizerKind::adamw;
    throw ConfigError("unknown optimizer '" + name + "' (expected nag_gs, sgd_momentum, adamw)");
}

const char* optimizer_kind_name(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::nag_gs:
            return "nag_gs";
        case OptimizerKind::sgd_momentum:
            return "sgd_momentum";
        case OptimizerKind::adamw:
            return "adamw";
    }
    return "unknown";
}

namespace {

EpochRecord evaluate(std::size_t epoch, const LogisticRegressionProblem& train,
                     const LogisticRegressionProblem* test, const Vector& w) {
    EpochRecord r;
    r.epoch = epoch;
    r.train_loss = logreg_loss(train, w);
    r.train_acc = logreg_accuracy(train, w);
    const LogisticRegressionProblem& t = test != nullptr && test->n_samples() > 0 ? *test : train;
    r.test_loss = logreg_loss(t, w);
    r.test_acc = logreg_accuracy(t, w);
    return r;
}

}  // namespace

TrainResult train_logreg(const LogisticRegressionProblem& train,
                         const LogisticRegressionProblem* test, const TrainConfig& cfg,
                         const EpochCallback& on_epoch) {
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("lr must be positive");
    const std::size_t dim = train.n_params();
    const std::size_t n = train.n_samples();
    const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);

    NagGsConfig gs{cfg.lr, cfg.nag_mu, cfg.nag_gamma, 0.0, cfg.nag_update_gamma};
    if (cfg.kind == OptimizerKind::nag_gs) gs.validate();

    OptimizerState state = make_state(Vector(dim, 0.0), cfg.nag_gamma);
    state.v.assign(dim, 0.0);
    if (cfg.kind == OptimizerKind::nag_gs) state.v = state.x;
    AdamWState adam = make_adamw_state(Vector(dim, 0.0));

    auto params = [&]() -> const Vector& {
        return cfg.kind == OptimizerKind::adamw ? adam.base.x : state.x;
    };

    TrainResult out;
    out.history.push_back(evaluate(0, train, test, params()));
    if (on_epoch) on_epoch(0, params());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Vector probe(dim);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (bs < n) {
            Rng rng = make_stream(cfg.seed, epoch);
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (std::size_t start = 0; start < n; start += bs) {
            const std::span<const std::size_t> batch(order.data() + start, std::min(bs, n - start));
            switch (cfg.kind) {
                case OptimizerKind::nag_gs: {
                    nag_gs_propose_into(state, gs, probe);
                    const LossGrad lg = logreg_loss_grad(train, probe, batch);
                    nag_gs_step_inplace(state, lg.grad, gs);
                    break;
                }
                case OptimizerKind::sgd_momentum: {
                    const LossGrad lg = logreg_loss_grad(train, state.x, batch);
                    state = sgd_momentum_step(std::move(state), lg.grad, cfg.lr, cfg.momentum,
                                              cfg.weight_decay);
                    break;
                }
                case OptimizerKind::adamw: {
                    const LossGrad lg = logreg_loss_grad(train, adam.base.x, batch);
                    adam = adamw_step(std::move(adam), lg.grad, cfg.lr, cfg.beta1, cfg.beta2,
                                      cfg.eps, cfg.weight_decay);
                    break;
                }
            }
            const bool bad = cfg.kind == OptimizerKind::adamw ? adam.base.diverged : state.diverged;
            if (bad || !all_finite(params())) {
                out.diverged = true;
                break;
            }
        }
        if (out.diverged) break;
        EpochRecord rec = evaluate(epoch, train, test, params());
        out.history.push_back(rec);
        if (on_epoch) on_epoch(epoch, params());
        if (!std::isfinite(rec.train_loss)) {
            out.diverged = true;
            break;
        }
    }
    out.final_w = params();
    return out;
}

bool training_converged(const TrainResult& r) {
    if (r.diverged || r.history.size() < 2) return false;
    for (const auto& e : r.history) {
        if (!std::isfinite(e.train_loss)) return false;
    }
    const double initial = r.history.front().train_loss;
    const auto second_half = r.history.begin() + static_cast<std::ptrdiff_t>(r.history.size() / 2);
    return std::all_of(second_half, r.history.end(),
                       [initial](const EpochRecord& e) { return e.train_loss < initial; });
}

}  // namespace naggs
