#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wat/bounds.hpp"
#include "wat/metrics.hpp"

using namespace wat;

namespace {

// Exact Rademacher complexity of a finite dictionary by enumerating all 2^n
// sign patterns.
double exact_rademacher(const std::vector<Vec>& evals) {
    int n = static_cast<int>(evals[0].size());
    double total = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
        double best = -std::numeric_limits<double>::infinity();
        for (const Vec& e : evals) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += ((mask >> i & 1) ? 1.0 : -1.0) * e[i];
            best = std::max(best, s);
        }
        total += best / n;
    }
    return total / (1 << n);
}

Dataset balanced_two_class(int per_class, int d, uint64_t seed, double sep = 0.4) {
    MixtureSpec spec;
    spec.num_classes = 2;
    spec.dim = d;
    spec.means = {Vec(d, 0.5 - sep / 2), Vec(d, 0.5 + sep / 2)};
    spec.stds = {0.08, 0.08};
    spec.counts = {per_class, per_class};
    spec.seed = seed;
    return gaussian_mixture(spec);
}

}  // namespace

TEST_CASE("mc_rademacher basics") {
    Rng rng(1);
    // single function: expectation is exactly 0
    RadEstimate single = mc_rademacher({Vec{0.4, -0.7, 0.9}}, 4000, rng);
    CHECK(std::fabs(single.mean) <= 3.0 * single.std_error);

    // {h, -h} with h = (1,1): exact value 0.5
    std::vector<Vec> pair = {{1.0, 1.0}, {-1.0, -1.0}};
    CHECK(exact_rademacher(pair) == doctest::Approx(0.5).epsilon(1e-15));
    RadEstimate mc = mc_rademacher(pair, 4000, rng);
    CHECK(std::fabs(mc.mean - 0.5) <= 3.0 * std::max(mc.std_error, 1e-12));

    CHECK_THROWS(mc_rademacher({}, 100, rng));
    CHECK_THROWS(mc_rademacher({Vec{1.0}, Vec{1.0, 2.0}}, 100, rng));
}

TEST_CASE("mc estimates agree with exact enumeration on small fixtures") {
    Rng gen(2);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 3 + static_cast<int>(gen.below(6));
        int m = 1 + static_cast<int>(gen.below(4));
        std::vector<Vec> evals(m, Vec(n));
        for (auto& e : evals)
            for (double& v : e) v = gen.uniform(-1.0, 1.0);
        double exact = exact_rademacher(evals);
        Rng rng(trial);
        RadEstimate mc = mc_rademacher(evals, 6000, rng);
        CHECK(std::fabs(mc.mean - exact) <= 3.0 * std::max(mc.std_error, 1e-12));
    }
}

TEST_CASE("growing the dictionary never shrinks exact complexity") {
    Rng gen(3);
    std::vector<Vec> evals;
    double prev = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < 5; ++m) {
        Vec e(6);
        for (double& v : e) v = gen.uniform(-1.0, 1.0);
        evals.push_back(e);
        double r = exact_rademacher(evals);
        CHECK(r >= prev - 1e-15);
        prev = r;
    }
}

TEST_CASE("standard error shrinks like one over sqrt(draws)") {
    std::vector<Vec> evals = {{0.3, -0.9, 0.5, 0.7}, {-0.2, 0.4, -0.8, 0.1}};
    Rng r1(4), r2(4);
    RadEstimate small = mc_rademacher(evals, 5000, r1);
    RadEstimate big = mc_rademacher(evals, 20000, r2);
    double ratio = small.std_error / big.std_error;
    CHECK(ratio > 1.5);  // expect ~2 when draws quadruple
    CHECK(ratio < 2.5);
}

TEST_CASE("theorem2 arithmetic") {
    // direct hand computation from the statement
    double expect = 0.3 + 2.0 * 1.0 * 0.05 + 3.0 * std::sqrt(2.0 * std::log(20.0) / 1600.0);
    CHECK(std::fabs(theorem2_rhs(0.3, 0.05, 1.0, 2, 800, 0.1) - expect) <= 1e-12);
    CHECK(expect == doctest::Approx(0.5835).epsilon(1e-3));

    // vanishing slack: rad = 0, delta near 1, huge n
    CHECK(theorem2_rhs(0.3, 0.0, 1.0, 2, 100000000, 0.999999) ==
          doctest::Approx(0.3).epsilon(1e-3));

    // monotone decreasing in delta and n
    CHECK(theorem2_rhs(0.3, 0.05, 1.0, 2, 800, 0.2) < theorem2_rhs(0.3, 0.05, 1.0, 2, 800, 0.1));
    CHECK(theorem2_rhs(0.3, 0.05, 1.0, 2, 3200, 0.1) < theorem2_rhs(0.3, 0.05, 1.0, 2, 800, 0.1));

    CHECK_THROWS(theorem2_rhs(0.3, 0.05, 1.0, 2, 800, 1.5));
}

TEST_CASE("theorem3 c-term arithmetic") {
    BoundConfig cfg;
    cfg.W_norm = 1.0;
    cfg.gamma = 1.0;
    cfg.delta = 0.1;
    cfg.q = 1.0;
    cfg.epsilon = 8.0 / 255.0;
    cfg.mc_draws = 10;
    // K=2, d=4, |S|=400
    Dataset data = balanced_two_class(200, 4, 5);
    Matrix w(2, 4);  // zero weights keep the norm cap satisfied
    Theorem3Report rep = theorem3_terms(w, data, cfg);
    double c_expect = 2.0 * 1.0 * 4.0 * (8.0 / 255.0) * 4.0 / (1.0 * std::sqrt(400.0)) +
                      3.0 * std::sqrt(2.0 * std::log(20.0) / 800.0);
    CHECK(std::fabs(rep.c - c_expect) <= 1e-12);
    CHECK(c_expect == doctest::Approx(0.3097).epsilon(1e-3));
    CHECK(rep.norm_cap_ok);
}

TEST_CASE("theorem3 E term vanishes on separated data with a strong separator") {
    MixtureSpec spec;
    spec.num_classes = 2;
    spec.dim = 2;
    spec.means = {{0.3, 0.5}, {0.7, 0.5}};
    spec.stds = {0.02, 0.02};
    spec.counts = {50, 50};
    spec.seed = 6;
    Dataset data = gaussian_mixture(spec);
    Matrix w(2, 2);  // boundary x0 = x1, scaled so margins swamp gamma
    w(0, 0) = -30.0;
    w(0, 1) = 30.0;
    w(1, 0) = 30.0;
    w(1, 1) = -30.0;
    BoundConfig cfg;
    cfg.epsilon = 0.0;
    cfg.gamma = 1e-9;
    cfg.W_norm = 30.0;
    cfg.mc_draws = 10;
    Theorem3Report rep = theorem3_terms(w, data, cfg);
    CHECK(rep.e_mean == 0.0);
}

TEST_CASE("theorem3 U term is exact for one point per cell") {
    Dataset data;
    data.inputs = Matrix(2, 3);
    data.inputs(0, 0) = 1.0;  // x = e_1 for both examples
    data.inputs(1, 0) = 1.0;
    data.labels = {0, 1};
    data.num_classes = 2;
    data.finalize();
    BoundConfig cfg;
    cfg.q = 1.0;
    cfg.mc_draws = 50;
    Matrix w(2, 3);
    Theorem3Report rep = theorem3_terms(w, data, cfg);
    CHECK(rep.u == doctest::Approx(1.0).epsilon(1e-12));  // |sigma|*||e_1||_1 = 1 always
}

TEST_CASE("theorem3 rejects unbalanced data and flags norm violations") {
    MixtureSpec spec;
    spec.num_classes = 2;
    spec.dim = 2;
    spec.means = {{0.3, 0.3}, {0.7, 0.7}};
    spec.stds = {0.1, 0.1};
    spec.counts = {10, 20};
    spec.seed = 7;
    Dataset unbalanced = gaussian_mixture(spec);
    Matrix w(2, 2);
    BoundConfig cfg;
    cfg.mc_draws = 10;
    CHECK_THROWS(theorem3_terms(w, unbalanced, cfg));

    Dataset data = balanced_two_class(10, 2, 8);
    Matrix large(2, 2);
    large(0, 0) = 10.0;
    Theorem3Report rep = theorem3_terms(large, data, cfg);  // W_norm default 1
    CHECK_FALSE(rep.norm_cap_ok);
    CHECK(rep.weight_norm == doctest::Approx(10.0));
}

TEST_CASE("theorem3 bound holds against the closed-form adversary") {
    Rng rng(9);
    int holds = 0, trials = 30;
    for (int t = 0; t < trials; ++t) {
        Dataset sample = balanced_two_class(40, 2, 100 + t);
        Dataset fresh = balanced_two_class(40, 2, 5000 + t);
        ModelParams m = ModelParams::random_init(ModelKind::Linear, 2, 2, 0, 0.4, rng);
        BoundConfig cfg;
        cfg.gamma = 0.5;
        cfg.W_norm = 5.0;
        cfg.mc_draws = 300;
        cfg.seed = t;
        Theorem3Report rep = theorem3_terms(m.linear, sample, cfg);
        AccSummary exact = class_accuracies_exact(m, fresh, cfg.epsilon);
        double wc_err = 1.0 - exact.worst;
        if (rep.rhs >= wc_err) ++holds;
    }
    CHECK(holds >= static_cast<int>(0.95 * trials));
}

TEST_CASE("bound config validation") {
    BoundConfig bad;
    bad.delta = 0.0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.p = 2.0;  // no longer conjugate with q = 1
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.p = 2.0;
    bad.q = 2.0;
    CHECK_NOTHROW(bad.validate());
}
