#include "wat/hedge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wat {

void check_simplex(const WeightSimplex& w, double tol) {
    if (w.empty()) throw std::invalid_argument("WeightSimplex: empty");
    double sum = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw std::invalid_argument("WeightSimplex: negative entry");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > tol) throw std::invalid_argument("WeightSimplex: sum != 1");
}

WeightSimplex init_weights(int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("init_weights: need at least 1 class");
    return WeightSimplex(num_classes + 1, 1.0 / (num_classes + 1));
}

WeightSimplex hedge_weights(const Vec& cumulative, double eta) {
    if (cumulative.empty()) throw std::invalid_argument("hedge_weights: empty input");
    if (!all_finite(cumulative)) throw std::invalid_argument("hedge_weights: non-finite input");
    if (eta < 0.0) throw std::invalid_argument("hedge_weights: eta must be >= 0");
    const size_t n = cumulative.size();
    if (eta == 0.0) return WeightSimplex(n, 1.0 / n);
    double m = *std::max_element(cumulative.begin(), cumulative.end());
    WeightSimplex w(n);
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) {
        w[i] = std::exp(eta * (cumulative[i] - m));
        z += w[i];
    }
    for (double& v : w) v /= z;
    return w;
}

NoRegretReport audit_no_regret(const std::vector<Vec>& loss_history,
                               const std::vector<WeightSimplex>& weights_per_round, double eta) {
    if (loss_history.empty()) throw std::invalid_argument("audit_no_regret: empty history");
    if (weights_per_round.size() != loss_history.size())
        throw std::invalid_argument("audit_no_regret: history/weights length mismatch");
    if (eta <= 0.0) throw std::invalid_argument("audit_no_regret: eta must be > 0");
    const int T = static_cast<int>(loss_history.size());
    const int n = static_cast<int>(loss_history[0].size());  // K+1 decisions
    const int K = n - 1;
    if (K < 1) throw std::invalid_argument("audit_no_regret: need at least one class");

    NoRegretReport rep;
    rep.eta = eta;
    rep.rounds = T;
    rep.eta_in_regime = eta <= 0.5;

    double weighted_sum = 0.0;
    Vec min_loss(n, std::numeric_limits<double>::infinity());
    Vec avg_loss(n, 0.0);
    for (int t = 0; t < T; ++t) {
        const Vec& l = loss_history[t];
        const WeightSimplex& w = weights_per_round[t];
        if (static_cast<int>(l.size()) != n || static_cast<int>(w.size()) != n)
            throw std::invalid_argument("audit_no_regret: ragged history");
        for (int k = 0; k < n; ++k) {
            if (!std::isfinite(l[k]) || l[k] < 0.0)
                throw std::invalid_argument("audit_no_regret: loss must be finite and >= 0");
            weighted_sum += w[k] * l[k];
            min_loss[k] = std::min(min_loss[k], l[k]);
            avg_loss[k] += l[k] / T;
        }
    }

    rep.premise_holds.resize(n);
    rep.all_premises_hold = true;
    for (int k = 0; k < n; ++k) {
        bool ok = avg_loss[k] >= min_loss[k] / (1.0 - eta) - 1e-12;
        rep.premise_holds[k] = ok;
        rep.all_premises_hold = rep.all_premises_hold && ok;
    }

    // lhs is over classes only (decisions 1..K)
    rep.lhs = *std::max_element(min_loss.begin() + 1, min_loss.end());
    rep.rhs = weighted_sum / T + std::log(static_cast<double>(n)) / (T * eta);
    rep.inequality_holds = rep.lhs <= rep.rhs + 1e-12;
    return rep;
}

Lemma1Report audit_lemma1(const std::vector<Vec>& cost_history,
                          const std::vector<WeightSimplex>& weights_per_round, double eta,
                          int decision) {
    if (cost_history.empty()) throw std::invalid_argument("audit_lemma1: empty history");
    if (weights_per_round.size() != cost_history.size())
        throw std::invalid_argument("audit_lemma1: history/weights length mismatch");
    if (eta <= 0.0) throw std::invalid_argument("audit_lemma1: eta must be > 0");
    const int T = static_cast<int>(cost_history.size());
    const int n = static_cast<int>(cost_history[0].size());
    if (decision < 0 || decision >= n) throw std::invalid_argument("audit_lemma1: bad decision");

    Lemma1Report rep;
    rep.decision = decision;
    double cost_k = 0.0, abs_cost_k = 0.0;
    for (int t = 0; t < T; ++t) {
        const Vec& c = cost_history[t];
        const WeightSimplex& p = weights_per_round[t];
        if (static_cast<int>(c.size()) != n || static_cast<int>(p.size()) != n)
            throw std::invalid_argument("audit_lemma1: ragged history");
        for (int k = 0; k < n; ++k) {
            if (!(c[k] >= -1.0 && c[k] <= 1.0))
                throw std::invalid_argument("audit_lemma1: cost outside [-1,1]");
            rep.lhs += c[k] * p[k];
        }
        cost_k += c[decision];
        abs_cost_k += std::fabs(c[decision]);
    }
    rep.rhs = cost_k - eta * abs_cost_k - std::log(static_cast<double>(n)) / eta;
    rep.holds = rep.lhs >= rep.rhs - 1e-12;
    return rep;
}

}  // namespace wat
