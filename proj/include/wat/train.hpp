#pragma once

#include <string>
#include <vector>

#include "wat/attack.hpp"
#include "wat/dataset.hpp"
#include "wat/hedge.hpp"
#include "wat/model.hpp"

namespace wat {

enum class Strategy { Wat, Uniform, FixedWeights };

struct TrainConfig {
    int epochs = 30;
    double lr = 0.1;
    double eta = 0.1;
    double beta = 6.0;
    int batch_size = 128;
    double momentum = 0.9;
    double weight_decay = 2e-4;
    AttackConfig train_attack = AttackConfig::train_default();
    AttackConfig eval_attack = AttackConfig::eval_default();
    double loss_clip = 5.0;  // hedge-stream normalization cap B
    uint64_t seed = 0;
    Strategy strategy = Strategy::Wat;
    Vec fixed_weights;  // K+1 simplex, FixedWeights only

    ModelKind model = ModelKind::Linear;
    int hidden = 16;          // Mlp only
    double init_scale = 0.1;  // parameter init std

    void validate(int num_classes) const;
};

// (K+1)-vector of per-split losses: index 0 averages the whole split, index k
// averages over class-k members.
using ClassLossVector = Vec;

struct TrainRecord {
    std::vector<ClassLossVector> train_losses;  // per epoch
    std::vector<ClassLossVector> val_losses;    // per epoch (eval-strength adversary)
    std::vector<ClassLossVector> val_losses_normalized;  // hedge/audit stream, entries in [0,1]
    std::vector<WeightSimplex> weights;                  // w^t used during epoch t
    std::vector<ModelParams> snapshots;  // linear: every epoch; mlp: best + final
    std::vector<int> snapshot_epochs;    // 1-based epoch of each snapshot
    int selected_epoch = 0;              // 1-based
    ModelParams selected_model;
    ModelParams final_model;
    NoRegretReport audit;  // on the normalized validation stream
    uint64_t seed = 0;
    Strategy strategy = Strategy::Wat;
    double eta = 0.0;
};

// Regenerates adversarial examples for the whole split with the given attack
// and returns per-class average TRADES losses. Every class must be present.
ClassLossVector epoch_class_losses(const ModelParams& params, const Dataset& split,
                                   const AttackConfig& attack, double beta, uint64_t seed,
                                   uint64_t stream_key);

// Minimax selection: argmin over epochs of max over classes (indices 1..K) of
// the validation loss; earliest epoch on ties. Input rows are (K+1)-vectors.
int select_model(const std::vector<ClassLossVector>& val_losses);

// One entry point for all strategies. Wat recomputes the simplex each epoch
// from cumulative normalized validation losses; Uniform fixes (1,0,...,0);
// FixedWeights fixes the supplied simplex.
TrainRecord train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& val_set);

}  // namespace wat
