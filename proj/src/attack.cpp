#include "wat/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wat {

void AttackConfig::validate() const {
    if (epsilon < 0.0) throw std::invalid_argument("AttackConfig: epsilon must be >= 0");
    if (steps < 1) throw std::invalid_argument("AttackConfig: steps must be >= 1");
    if (step_size <= 0.0) throw std::invalid_argument("AttackConfig: step_size must be > 0");
    if (restarts < 0) throw std::invalid_argument("AttackConfig: restarts must be >= 0");
    if (clip && clip->first > clip->second)
        throw std::invalid_argument("AttackConfig: clip box lo > hi");
}

Vec project_linf(std::span<const double> x, std::span<const double> center, double epsilon,
                 const std::optional<std::pair<double, double>>& clip) {
    if (epsilon < 0.0) throw std::invalid_argument("project_linf: epsilon must be >= 0");
    if (x.size() != center.size()) throw std::invalid_argument("project_linf: size mismatch");
    if (clip && clip->first > clip->second)
        throw std::invalid_argument("project_linf: clip box lo > hi");
    Vec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double v = std::clamp(x[i], center[i] - epsilon, center[i] + epsilon);
        if (clip) v = std::clamp(v, clip->first, clip->second);
        out[i] = v;
    }
    return out;
}

double attack_objective(const ModelParams& params, std::span<const double> x_clean,
                        std::span<const double> x_adv, int label, InnerLoss inner) {
    switch (inner) {
        case InnerLoss::Ce:
            return cross_entropy(forward(params, x_adv), label);
        case InnerLoss::Kl:
            return kl_divergence(forward(params, x_clean), forward(params, x_adv));
        case InnerLoss::CwMargin: {
            Vec s = forward(params, x_adv);
            return -margin(s, label);
        }
    }
    throw std::logic_error("attack_objective: unreachable");
}

namespace {

// Gradient of the inner loss with respect to the current iterate.
Vec objective_input_grad(const ModelParams& params, std::span<const double> x_clean,
                         std::span<const double> x_adv, int label, InnerLoss inner) {
    const int K = params.num_classes;
    Vec cot(K, 0.0);
    Vec s_adv = forward(params, x_adv);
    switch (inner) {
        case InnerLoss::Ce: {
            Vec p = softmax(s_adv);
            for (int i = 0; i < K; ++i) cot[i] = p[i];
            cot[label] -= 1.0;
            break;
        }
        case InnerLoss::Kl: {
            Vec p = softmax(forward(params, x_clean));
            Vec q = softmax(s_adv);
            for (int i = 0; i < K; ++i) cot[i] = q[i] - p[i];
            break;
        }
        case InnerLoss::CwMargin: {
            int runner = -1;
            for (int i = 0; i < K; ++i) {
                if (i == label) continue;
                if (runner < 0 || s_adv[i] > s_adv[runner]) runner = i;
            }
            cot[runner] = 1.0;
            cot[label] = -1.0;
            break;
        }
    }
    return input_grad(params, x_adv, cot);
}

}  // namespace

Vec pgd_attack(const ModelParams& params, std::span<const double> x, int label,
               const AttackConfig& cfg, Rng& rng) {
    cfg.validate();
    if (static_cast<int>(x.size()) != params.input_dim)
        throw std::invalid_argument("pgd_attack: input dimension mismatch");
    if (label < 0 || label >= params.num_classes)
        throw std::invalid_argument("pgd_attack: label out of range");

    Vec best;
    double best_obj = -std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec& cand) {
        double obj = attack_objective(params, x, cand, label, cfg.inner);
        if (obj > best_obj) {
            best_obj = obj;
            best = cand;
        }
    };

    for (int r = 0; r <= cfg.restarts; ++r) {
        Vec cur;
        if (r == 0) {
            cur = project_linf(x, x, cfg.epsilon, cfg.clip);
        } else {
            Vec start(x.size());
            for (size_t i = 0; i < x.size(); ++i)
                start[i] = x[i] + rng.uniform(-cfg.epsilon, cfg.epsilon);
            cur = project_linf(start, x, cfg.epsilon, cfg.clip);
        }
        consider(cur);
        for (int step = 0; step < cfg.steps; ++step) {
            Vec g = objective_input_grad(params, x, cur, label, cfg.inner);
            if (!all_finite(g)) throw std::runtime_error("pgd_attack: non-finite gradient");
            for (size_t i = 0; i < cur.size(); ++i) {
                double s = (g[i] > 0.0) ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
                cur[i] += cfg.step_size * s;
            }
            cur = project_linf(cur, x, cfg.epsilon, cfg.clip);
            consider(cur);
        }
    }
    return best;
}

WorstCaseMargins linear_worst_case_margin(const Matrix& weights, std::span<const double> x,
                                          int label, double epsilon) {
    const int K = weights.rows;
    if (label < 0 || label >= K)
        throw std::invalid_argument("linear_worst_case_margin: label out of range");
    if (epsilon < 0.0) throw std::invalid_argument("linear_worst_case_margin: epsilon < 0");
    WorstCaseMargins out;
    out.per_class.assign(K, std::numeric_limits<double>::infinity());
    out.worst = std::numeric_limits<double>::infinity();
    auto wy = weights.row(label);
    for (int c = 0; c < K; ++c) {
        if (c == label) continue;
        auto wc = weights.row(c);
        double gap = 0.0, l1 = 0.0;
        for (int j = 0; j < weights.cols; ++j) {
            double diff = wc[j] - wy[j];
            gap += diff * x[j];
            l1 += std::fabs(diff);
        }
        // adversarial margin against c: <w_y - w_c, x> - eps ||w_c - w_y||_1
        out.per_class[c] = -gap - epsilon * l1;
        out.worst = std::min(out.worst, out.per_class[c]);
    }
    return out;
}

int robust_error_indicator(const Matrix& weights, std::span<const double> x, int label,
                           double gamma, double epsilon) {
    return linear_worst_case_margin(weights, x, label, epsilon).worst <= gamma ? 1 : 0;
}

}  // namespace wat
