#pragma once

#include <vector>

#include "wat/linalg.hpp"

namespace wat {

// Weights over the K+1 decisions: index 0 is the average-loss decision,
// indices 1..K are the classes. Entries are nonnegative and sum to 1.
using WeightSimplex = Vec;

void check_simplex(const WeightSimplex& w, double tol = 1e-12);

// Uniform simplex over K+1 decisions.
WeightSimplex init_weights(int num_classes);

// w_k = exp(eta * cumulative_k) / sum_j exp(eta * cumulative_j), max-shifted.
// Larger cumulative loss gets heavier weight. eta == 0 returns exact uniform.
WeightSimplex hedge_weights(const Vec& cumulative, double eta);

struct NoRegretReport {
    double lhs = 0.0;                 // max_{k in 1..K} min_t L_k^t
    double rhs = 0.0;                 // (1/T) sum_t <w^t, L^t> + log(K+1)/(T eta)
    std::vector<bool> premise_holds;  // K+1 flags, one per decision
    bool all_premises_hold = false;
    bool inequality_holds = false;
    bool eta_in_regime = false;  // eta <= 1/2
    double eta = 0.0;
    int rounds = 0;
};

// Audits the worst-class no-regret inequality on a played history. Losses are
// expected pre-normalized to [0,1]; the premise per decision k is
// (1/T) sum_t L_k^t >= 1/(1-eta) * min_t L_k^t. The inequality is audited,
// never enforced.
NoRegretReport audit_no_regret(const std::vector<Vec>& loss_history,
                               const std::vector<WeightSimplex>& weights_per_round, double eta);

struct Lemma1Report {
    double lhs = 0.0;  // sum_t <C^t, p^t>
    double rhs = 0.0;  // sum_t C_k^t - eta sum_t |C_k^t| - log(N)/eta
    bool holds = false;
    int decision = 0;
};

// Multiplicative-weights guarantee for one decision k, costs in [-1,1],
// weights produced by hedge_weights on the running cumulative costs.
Lemma1Report audit_lemma1(const std::vector<Vec>& cost_history,
                          const std::vector<WeightSimplex>& weights_per_round, double eta,
                          int decision);

}  // namespace wat
