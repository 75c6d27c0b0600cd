#include "wat/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wat/attack.hpp"

namespace wat {

void BoundConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("BoundConfig: delta in (0,1)");
    if (B <= 0.0) throw std::invalid_argument("BoundConfig: B must be > 0");
    if (gamma <= 0.0) throw std::invalid_argument("BoundConfig: gamma must be > 0");
    if (W_norm <= 0.0) throw std::invalid_argument("BoundConfig: W_norm must be > 0");
    if (p < 1.0 || q < 1.0) throw std::invalid_argument("BoundConfig: p, q must be >= 1");
    double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    if (std::fabs(inv_p + inv_q - 1.0) > 1e-12)
        throw std::invalid_argument("BoundConfig: p, q must be conjugate");
    if (mc_draws < 1) throw std::invalid_argument("BoundConfig: mc_draws must be >= 1");
    if (epsilon < 0.0) throw std::invalid_argument("BoundConfig: epsilon must be >= 0");
}

RadEstimate mc_rademacher(const std::vector<Vec>& evaluations, int draws, Rng& rng) {
    if (evaluations.empty()) throw std::invalid_argument("mc_rademacher: no functions");
    const size_t n = evaluations[0].size();
    if (n == 0) throw std::invalid_argument("mc_rademacher: no sample points");
    for (const Vec& e : evaluations)
        if (e.size() != n) throw std::invalid_argument("mc_rademacher: ragged evaluations");
    if (draws < 1) throw std::invalid_argument("mc_rademacher: draws must be >= 1");

    double sum = 0.0, sum_sq = 0.0;
    Vec sigma(n);
    for (int t = 0; t < draws; ++t) {
        for (size_t i = 0; i < n; ++i) sigma[i] = rng.sign();
        double best = -std::numeric_limits<double>::infinity();
        for (const Vec& e : evaluations) {
            double s = 0.0;
            for (size_t i = 0; i < n; ++i) s += sigma[i] * e[i];
            best = std::max(best, s);
        }
        double v = best / static_cast<double>(n);
        sum += v;
        sum_sq += v * v;
    }
    RadEstimate out;
    out.draws = draws;
    out.mean = sum / draws;
    if (draws > 1) {
        double var = (sum_sq - sum * sum / draws) / (draws - 1);
        out.std_error = std::sqrt(std::max(var, 0.0) / draws);
    }
    return out;
}

double theorem2_slack(double rad_per_class_max, double B, int K, int n_total, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("theorem2: delta in (0,1)");
    if (B <= 0.0 || K < 1 || n_total < 1) throw std::invalid_argument("theorem2: bad inputs");
    return 2.0 * B * rad_per_class_max +
           3.0 * B * std::sqrt(K * std::log(2.0 / delta) / (2.0 * n_total));
}

double theorem2_rhs(double empirical_wc_risk, double rad_per_class_max, double B, int K,
                    int n_total, double delta) {
    if (!std::isfinite(empirical_wc_risk))
        throw std::invalid_argument("theorem2_rhs: non-finite risk");
    return empirical_wc_risk + theorem2_slack(rad_per_class_max, B, K, n_total, delta);
}

Theorem3Report theorem3_terms(const Matrix& weights, const Dataset& data, const BoundConfig& cfg) {
    cfg.validate();
    const int K = data.num_classes;
    const int n = data.size();
    const int d = data.dim();
    if (weights.rows != K || weights.cols != d)
        throw std::invalid_argument("theorem3_terms: weight shape mismatch");
    for (int k = 0; k < K; ++k) {
        if (data.class_index[k].empty())
            throw std::invalid_argument("theorem3_terms: class " + std::to_string(k) + " empty");
        if (static_cast<int>(data.class_index[k].size()) * K != n)
            throw std::invalid_argument("theorem3_terms: classes must be balanced");
    }

    Theorem3Report rep;

    rep.weight_norm = 0.0;
    for (int k = 0; k < K; ++k)
        rep.weight_norm = std::max(rep.weight_norm, norm_p(weights.row(k), cfg.p));
    rep.norm_cap_ok = rep.weight_norm <= cfg.W_norm + 1e-12;

    int indicators = 0;
    for (int i = 0; i < n; ++i)
        indicators += robust_error_indicator(weights, data.inputs.row(i), data.labels[i],
                                             cfg.gamma, cfg.epsilon);
    rep.e_mean = static_cast<double>(K) * indicators / n;

    // U = max over (y,k) of E_sigma || sum_{i in S_k} sigma_i x_i 1(y_i = y) ||_q.
    // Within S_k every label equals k, so only the y == k cells are nonzero;
    // the loop still covers all cells to match the stated maximization.
    rep.u = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int y = 0; y < K; ++y) {
            std::vector<const double*> rows;
            for (int i : data.class_index[k])
                if (data.labels[i] == y) rows.push_back(data.inputs.row(i).data());
            if (rows.empty()) continue;
            Rng rng = Rng::substream(cfg.seed, {rngkey::kRademacher, static_cast<uint64_t>(k),
                                               static_cast<uint64_t>(y)});
            double sum = 0.0, sum_sq = 0.0;
            Vec acc(d);
            for (int t = 0; t < cfg.mc_draws; ++t) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (const double* x : rows) {
                    double s = rng.sign();
                    for (int j = 0; j < d; ++j) acc[j] += s * x[j];
                }
                double v = norm_p(acc, cfg.q);
                sum += v;
                sum_sq += v * v;
            }
            double mean = sum / cfg.mc_draws;
            if (mean > rep.u) {
                rep.u = mean;
                rep.u_estimate.mean = mean;
                rep.u_estimate.draws = cfg.mc_draws;
                if (cfg.mc_draws > 1) {
                    double var = (sum_sq - sum * sum / cfg.mc_draws) / (cfg.mc_draws - 1);
                    rep.u_estimate.std_error = std::sqrt(std::max(var, 0.0) / cfg.mc_draws);
                }
            }
        }
    }

    double inv_q = std::isinf(cfg.q) ? 0.0 : 1.0 / cfg.q;
    rep.c = 2.0 * cfg.W_norm * K * K * cfg.epsilon * std::pow(static_cast<double>(d), inv_q) /
                (cfg.gamma * std::sqrt(static_cast<double>(n))) +
            3.0 * std::sqrt(K * std::log(2.0 / cfg.delta) / (2.0 * n));
    rep.rhs = rep.e_mean + 2.0 * cfg.W_norm * K * K * K / (cfg.gamma * n) * rep.u + rep.c;
    return rep;
}

}  // namespace wat
