#pragma once

#include <limits>

#include "wat/dataset.hpp"
#include "wat/linalg.hpp"
#include "wat/rng.hpp"

namespace wat {

struct BoundConfig {
    double delta = 0.1;    // confidence, in (0,1)
    double B = 1.0;        // loss range bound
    double gamma = 1.0;    // margin
    double W_norm = 1.0;   // cap on max_k ||w_k||_p
    double p = std::numeric_limits<double>::infinity();
    double q = 1.0;        // conjugate: 1/p + 1/q = 1
    int mc_draws = 10000;
    double epsilon = 8.0 / 255.0;
    uint64_t seed = 0;

    void validate() const;
};

struct RadEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int draws = 0;
};

// Monte-Carlo empirical Rademacher complexity of a finite function dictionary:
// evaluations[f][i] = h_f(z_i). Each draw computes
// (1/n) max_f sum_i sigma_i h_f(z_i) with sigma uniform on {-1,+1}^n.
RadEstimate mc_rademacher(const std::vector<Vec>& evaluations, int draws, Rng& rng);

// empirical_wc_risk + 2 B rad_max + 3 B sqrt(K log(2/delta) / (2 n_total))
double theorem2_rhs(double empirical_wc_risk, double rad_per_class_max, double B, int K,
                    int n_total, double delta);

// The additive slack of theorem2_rhs alone.
double theorem2_slack(double rad_per_class_max, double B, int K, int n_total, double delta);

struct Theorem3Report {
    double e_mean = 0.0;  // (K/|S|) sum_i E_i
    double u = 0.0;       // max over (y,k) cells of E_sigma || sum sigma_i x_i 1(y_i=y) ||_q
    double c = 0.0;
    double rhs = 0.0;
    RadEstimate u_estimate;     // the maximizing cell's MC estimate
    bool norm_cap_ok = true;    // max_k ||w_k||_p <= W_norm
    double weight_norm = 0.0;   // observed max_k ||w_k||_p
};

// Worst-class robust error bound terms for a linear K x d scorer on a
// balanced sample. U is Monte-Carlo estimated with cfg.mc_draws sign draws.
Theorem3Report theorem3_terms(const Matrix& weights, const Dataset& data, const BoundConfig& cfg);

}  // namespace wat
