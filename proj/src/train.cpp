#include "wat/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wat {

void TrainConfig::validate(int num_classes) const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (lr <= 0.0) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (eta < 0.0) throw std::invalid_argument("TrainConfig: eta must be >= 0");
    if (beta < 0.0) throw std::invalid_argument("TrainConfig: beta must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
    if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
    if (loss_clip <= 0.0) throw std::invalid_argument("TrainConfig: loss_clip must be > 0");
    train_attack.validate();
    eval_attack.validate();
    if (strategy == Strategy::FixedWeights) {
        if (static_cast<int>(fixed_weights.size()) != num_classes + 1)
            throw std::invalid_argument("TrainConfig: fixed_weights must have K+1 entries");
        check_simplex(fixed_weights, 1e-9);
    }
}

ClassLossVector epoch_class_losses(const ModelParams& params, const Dataset& split,
                                   const AttackConfig& attack, double beta, uint64_t seed,
                                   uint64_t stream_key) {
    const int K = split.num_classes;
    if (split.size() == 0) throw std::invalid_argument("epoch_class_losses: empty split");
    for (int k = 0; k < K; ++k)
        if (split.class_index[k].empty())
            throw std::invalid_argument("epoch_class_losses: class " + std::to_string(k) +
                                        " missing from split");
    ClassLossVector out(K + 1, 0.0);
    for (int i = 0; i < split.size(); ++i) {
        auto x = split.inputs.row(i);
        int y = split.labels[i];
        Rng rng = Rng::substream(seed, {stream_key, static_cast<uint64_t>(i)});
        Vec x_adv = pgd_attack(params, x, y, attack, rng);
        double loss = trades_loss(params, x, x_adv, y, beta);
        out[0] += loss / split.size();
        out[y + 1] += loss / split.class_index[y].size();
    }
    return out;
}

int select_model(const std::vector<ClassLossVector>& val_losses) {
    if (val_losses.empty()) throw std::invalid_argument("select_model: empty loss matrix");
    int best = 0;
    double best_worst = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < val_losses.size(); ++t) {
        const auto& row = val_losses[t];
        if (row.size() < 2) throw std::invalid_argument("select_model: row too short");
        double worst = *std::max_element(row.begin() + 1, row.end());
        if (worst < best_worst) {
            best_worst = worst;
            best = static_cast<int>(t);
        }
    }
    return best + 1;  // 1-based epoch
}

namespace {

WeightSimplex epoch_weights(const TrainConfig& cfg, int num_classes, const Vec& cumulative,
                            bool first_epoch) {
    switch (cfg.strategy) {
        case Strategy::Wat:
            if (first_epoch || cfg.eta == 0.0) return init_weights(num_classes);
            return hedge_weights(cumulative, cfg.eta);
        case Strategy::Uniform: {
            WeightSimplex w(num_classes + 1, 0.0);
            w[0] = 1.0;
            return w;
        }
        case Strategy::FixedWeights:
            return cfg.fixed_weights;
    }
    throw std::logic_error("epoch_weights: unreachable");
}

}  // namespace

TrainRecord train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& val_set) {
    const int K = train_set.num_classes;
    cfg.validate(K);
    if (val_set.num_classes != K) throw std::invalid_argument("train: class count mismatch");
    for (int k = 0; k < K; ++k)
        if (train_set.class_index[k].empty() || val_set.class_index[k].empty())
            throw std::invalid_argument("train: class " + std::to_string(k) +
                                        " missing from a split");

    TrainRecord rec;
    rec.seed = cfg.seed;
    rec.strategy = cfg.strategy;
    rec.eta = cfg.eta;

    Rng init_rng = Rng::substream(cfg.seed, {rngkey::kModelInit});
    ModelParams model = ModelParams::random_init(cfg.model, K, train_set.dim(), cfg.hidden,
                                                 cfg.init_scale, init_rng);
    Vec velocity(model.param_count(), 0.0);
    Vec cumulative_norm_loss(K + 1, 0.0);  // running hedge totals

    LossSpec spec;
    spec.kind = LossKind::Trades;
    spec.beta = cfg.beta;

    const bool keep_all = cfg.model == ModelKind::Linear;
    double best_worst = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    ModelParams best_model = model;

    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        WeightSimplex w = epoch_weights(cfg, K, cumulative_norm_loss, epoch == 1);
        check_simplex(w, 1e-9);
        rec.weights.push_back(w);

        Rng shuffle_rng = Rng::substream(cfg.seed, {rngkey::kShuffle, static_cast<uint64_t>(epoch)});
        shuffle_rng.shuffle(order);

        const int n = train_set.size();
        for (int start = 0, batch_id = 0; start < n; start += cfg.batch_size, ++batch_id) {
            int bs = std::min(cfg.batch_size, n - start);
            LabeledBatch batch;
            batch.inputs = Matrix(bs, train_set.dim());
            batch.labels.resize(bs);
            batch.adversarial = Matrix(bs, train_set.dim());
            for (int b = 0; b < bs; ++b) {
                int i = order[start + b];
                auto src = train_set.inputs.row(i);
                std::copy(src.begin(), src.end(), batch.inputs.row(b).begin());
                batch.labels[b] = train_set.labels[i];
                Rng atk_rng = Rng::substream(
                    cfg.seed, {rngkey::kTrainAttack, static_cast<uint64_t>(epoch),
                               static_cast<uint64_t>(i)});
                Vec x_adv = pgd_attack(model, src, batch.labels[b], cfg.train_attack, atk_rng);
                std::copy(x_adv.begin(), x_adv.end(), batch.adversarial->row(b).begin());
            }
            LossGrad lg = loss_and_grad(model, batch, spec, w);
            if (!std::isfinite(lg.loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch));
            Vec theta = model.flatten();
            Vec g = lg.grad.flatten();
            for (size_t j = 0; j < theta.size(); ++j) {
                velocity[j] = cfg.momentum * velocity[j] -
                              cfg.lr * (g[j] + cfg.weight_decay * theta[j]);
                theta[j] += velocity[j];
            }
            model.set_from_flat(theta);
        }

        ClassLossVector train_cl =
            epoch_class_losses(model, train_set, cfg.train_attack, cfg.beta,
                               cfg.seed ^ static_cast<uint64_t>(epoch), rngkey::kTrainAttack);
        ClassLossVector val_cl =
            epoch_class_losses(model, val_set, cfg.eval_attack, cfg.beta,
                               cfg.seed ^ static_cast<uint64_t>(epoch), rngkey::kEvalAttack);
        rec.train_losses.push_back(train_cl);
        rec.val_losses.push_back(val_cl);

        ClassLossVector norm(K + 1);
        for (int k = 0; k <= K; ++k) {
            norm[k] = std::min(val_cl[k], cfg.loss_clip) / cfg.loss_clip;
            cumulative_norm_loss[k] += norm[k];
        }
        rec.val_losses_normalized.push_back(norm);

        double worst = *std::max_element(val_cl.begin() + 1, val_cl.end());
        if (worst < best_worst) {
            best_worst = worst;
            best_epoch = epoch;
            best_model = model;
        }
        if (keep_all) {
            rec.snapshots.push_back(model);
            rec.snapshot_epochs.push_back(epoch);
        }
    }

    if (!keep_all) {
        rec.snapshots.push_back(best_model);
        rec.snapshot_epochs.push_back(best_epoch);
        if (best_epoch != cfg.epochs) {
            rec.snapshots.push_back(model);
            rec.snapshot_epochs.push_back(cfg.epochs);
        }
    }
    rec.final_model = model;
    rec.selected_epoch = select_model(rec.val_losses);
    rec.selected_model = keep_all ? rec.snapshots[rec.selected_epoch - 1] : best_model;

    if (cfg.strategy == Strategy::Wat && cfg.eta > 0.0)
        rec.audit = audit_no_regret(rec.val_losses_normalized, rec.weights, cfg.eta);
    return rec;
}

}  // namespace wat
