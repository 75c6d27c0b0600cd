#pragma once

#include <optional>

#include "wat/model.hpp"
#include "wat/rng.hpp"

namespace wat {

enum class InnerLoss { Ce, Kl, CwMargin };

struct AttackConfig {
    double epsilon = 8.0 / 255.0;
    int steps = 10;
    double step_size = 0.007;
    InnerLoss inner = InnerLoss::Kl;
    std::optional<std::pair<double, double>> clip;  // domain box [lo, hi], all coordinates
    int restarts = 0;

    void validate() const;

    static AttackConfig train_default() { return {}; }
    static AttackConfig eval_default() {
        AttackConfig c;
        c.steps = 100;
        c.step_size = 0.003;
        return c;
    }
};

// Coordinate-wise clamp to [center - eps, center + eps], then to the domain
// box. Idempotent.
Vec project_linf(std::span<const double> x, std::span<const double> center, double epsilon,
                 const std::optional<std::pair<double, double>>& clip);

// Signed-gradient ascent on the configured inner loss inside the l-inf ball.
// Deterministic start at x; each restart adds a uniform-in-ball start. Returns
// the iterate with the largest inner loss seen across all restarts.
Vec pgd_attack(const ModelParams& params, std::span<const double> x, int label,
               const AttackConfig& cfg, Rng& rng);

// Inner-loss value the attack maximizes (for best-iterate selection and tests).
double attack_objective(const ModelParams& params, std::span<const double> x_clean,
                        std::span<const double> x_adv, int label, InnerLoss inner);

struct WorstCaseMargins {
    Vec per_class;   // margin against each competitor under its worst l-inf
                     // perturbation; entry [label] is +inf (no self-competition)
    double worst = 0.0;
};

// Exact inner maximization for linear scorers: the worst-case score gap
// against y' is <w_y' - w_y, x> + eps * ||w_y' - w_y||_1.
WorstCaseMargins linear_worst_case_margin(const Matrix& weights, std::span<const double> x,
                                          int label, double epsilon);

// Theorem-style robust error indicator: 1 iff the worst-case margin is <= gamma.
int robust_error_indicator(const Matrix& weights, std::span<const double> x, int label,
                           double gamma, double epsilon);

}  // namespace wat
