#include "wat/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace wat {

namespace {

AccSummary summarize(const Dataset& test, const std::vector<int>& correct, std::string kind) {
    const int K = test.num_classes;
    AccSummary out;
    out.kind = std::move(kind);
    out.per_class.assign(K, 0.0);
    int total = 0;
    for (int k = 0; k < K; ++k) {
        const auto& idx = test.class_index[k];
        if (idx.empty())
            throw std::invalid_argument("class_accuracies: class " + std::to_string(k) +
                                        " missing from test set");
        int hits = 0;
        for (int i : idx) hits += correct[i];
        out.per_class[k] = static_cast<double>(hits) / idx.size();
        total += hits;
    }
    out.average = static_cast<double>(total) / test.size();
    out.worst_class = 0;
    out.worst = out.per_class[0];
    for (int k = 1; k < K; ++k)
        if (out.per_class[k] < out.worst) {
            out.worst = out.per_class[k];
            out.worst_class = k;
        }
    return out;
}

}  // namespace

AccSummary class_accuracies(const ModelParams& params, const Dataset& test,
                            const AttackConfig* attack, uint64_t seed) {
    std::vector<int> correct(test.size(), 0);
    for (int i = 0; i < test.size(); ++i) {
        auto x = test.inputs.row(i);
        int y = test.labels[i];
        bool ok = predict(forward(params, x)) == y;
        if (ok && attack) {
            Rng rng = Rng::substream(seed, {rngkey::kEvalAttack, static_cast<uint64_t>(i)});
            Vec x_adv = pgd_attack(params, x, y, *attack, rng);
            ok = predict(forward(params, x_adv)) == y;
        }
        correct[i] = ok ? 1 : 0;
    }
    return summarize(test, correct, attack ? "robust(pgd)" : "natural");
}

AccSummary class_accuracies_exact(const ModelParams& params, const Dataset& test, double epsilon) {
    if (params.kind != ModelKind::Linear)
        throw std::invalid_argument("class_accuracies_exact: linear models only");
    std::vector<int> correct(test.size(), 0);
    for (int i = 0; i < test.size(); ++i) {
        auto wc = linear_worst_case_margin(params.linear, test.inputs.row(i), test.labels[i],
                                           epsilon);
        correct[i] = wc.worst > 0.0 ? 1 : 0;
    }
    return summarize(test, correct, "robust(exact)");
}

double rho(const AccSummary& base, const AccSummary& treated) {
    if (base.kind != treated.kind)
        throw std::invalid_argument("rho: summaries of different kinds");
    if (base.worst <= 0.0 || base.average <= 0.0)
        throw std::invalid_argument("rho: base accuracies must be positive");
    return rho_values(base.average, base.worst, treated.average, treated.worst);
}

double rho_values(double base_avg, double base_worst, double treated_avg, double treated_worst) {
    if (base_worst <= 0.0 || base_avg <= 0.0)
        throw std::invalid_argument("rho: base accuracies must be positive");
    return (treated_worst - base_worst) / base_worst - (base_avg - treated_avg) / base_avg;
}

double cv(const Vec& per_class) {
    if (per_class.empty()) throw std::invalid_argument("cv: empty vector");
    bool constant = true;
    for (double a : per_class)
        if (a != per_class[0]) constant = false;
    if (constant) return 0.0;  // exact zero, no rounding residue from the mean
    double mean = 0.0;
    for (double a : per_class) mean += a;
    mean /= per_class.size();
    double v = 0.0;
    for (double a : per_class) v += (a - mean) * (a - mean);
    return v / per_class.size();
}

}  // namespace wat
