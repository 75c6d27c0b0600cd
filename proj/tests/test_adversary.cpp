#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wat/attack.hpp"

using namespace wat;

namespace {

// Exhaustive minimum of the natural margin over all 2^d corner perturbations.
double corner_margin(const Matrix& w, const Vec& x, int y, double eps) {
    int d = static_cast<int>(x.size());
    double worst = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vec xp = x;
        for (int j = 0; j < d; ++j) xp[j] += (mask >> j & 1) ? eps : -eps;
        Vec s = matvec(w, xp);
        worst = std::min(worst, margin(s, y));
    }
    return worst;
}

Matrix random_w(int K, int d, Rng& rng) {
    Matrix w(K, d);
    for (double& v : w.data) v = rng.uniform(-1.0, 1.0);
    return w;
}

}  // namespace

TEST_CASE("project_linf") {
    Vec center{0.5, 0.5};
    Vec inside{0.52, 0.49};
    CHECK(project_linf(inside, center, 0.1, std::nullopt) == inside);
    CHECK(project_linf(Vec{0.9, 0.1}, center, 0.0, std::nullopt) == center);
    Vec far{0.5 + 0.2, 0.5 + 0.2};
    Vec want{0.6, 0.6};
    CHECK(project_linf(far, center, 0.1, std::nullopt) == want);
    // idempotent, and box applies after the ball
    auto box = std::make_optional(std::pair<double, double>{0.0, 0.55});
    Vec once = project_linf(far, center, 0.1, box);
    CHECK(once == Vec{0.55, 0.55});
    CHECK(project_linf(once, center, 0.1, box) == once);
    CHECK_THROWS(project_linf(far, center, 0.1, std::make_optional(std::pair<double, double>{1.0, 0.0})));
}

TEST_CASE("pgd on a constant model stays put") {
    ModelParams m = ModelParams::make_linear(3, 4);  // all-zero weights
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.steps = 5;
    cfg.step_size = 0.03;
    cfg.inner = InnerLoss::Ce;
    Rng rng(1);
    Vec x{0.2, 0.4, 0.6, 0.8};
    CHECK(pgd_attack(m, x, 1, cfg, rng) == x);
}

TEST_CASE("single-step full-size PGD hits the closed-form corner on binary linear") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng.below(5));
        ModelParams m = ModelParams::make_linear(2, d);
        m.linear = random_w(2, d, rng);
        Vec x(d);
        for (double& v : x) v = rng.uniform(0.2, 0.8);
        int y = static_cast<int>(rng.below(2));
        double eps = 0.05;

        AttackConfig cfg;
        cfg.epsilon = eps;
        cfg.steps = 1;
        cfg.step_size = eps;
        cfg.inner = InnerLoss::Ce;
        Rng arng(trial);
        Vec xa = pgd_attack(m, x, y, cfg, arng);
        double got = margin(forward(m, xa), y);
        WorstCaseMargins wc = linear_worst_case_margin(m.linear, x, y, eps);
        // if no weight difference coordinate is exactly zero, one CE step lands
        // on the worst corner
        bool degenerate = false;
        for (int j = 0; j < d; ++j)
            if (m.linear(0, j) == m.linear(1, j)) degenerate = true;
        if (!degenerate) CHECK(got == doctest::Approx(wc.worst).epsilon(1e-9));
    }
}

TEST_CASE("pgd never leaves the ball or the box") {
    Rng rng(3);
    ModelParams m = ModelParams::make_linear(3, 3);
    m.linear = random_w(3, 3, rng);
    for (InnerLoss inner : {InnerLoss::Ce, InnerLoss::Kl, InnerLoss::CwMargin}) {
        AttackConfig cfg;
        cfg.epsilon = 0.07;
        cfg.steps = 12;
        cfg.step_size = 0.02;
        cfg.inner = inner;
        cfg.clip = {{0.0, 1.0}};
        cfg.restarts = 2;
        for (int t = 0; t < 20; ++t) {
            Vec x{rng.uniform(), rng.uniform(), rng.uniform()};
            Rng arng(t);
            Vec xa = pgd_attack(m, x, t % 3, cfg, arng);
            for (int j = 0; j < 3; ++j) {
                CHECK(std::fabs(xa[j] - x[j]) <= cfg.epsilon + 1e-12);
                CHECK(xa[j] >= 0.0);
                CHECK(xa[j] <= 1.0);
            }
        }
    }
}

TEST_CASE("restarts never hurt the attack objective") {
    Rng rng(4);
    ModelParams m = ModelParams::make_linear(3, 4);
    m.linear = random_w(3, 4, rng);
    AttackConfig base;
    base.epsilon = 0.08;
    base.steps = 3;
    base.step_size = 0.02;
    base.inner = InnerLoss::CwMargin;
    for (int t = 0; t < 20; ++t) {
        Vec x{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        Rng r0(t), r1(t);
        Vec a0 = pgd_attack(m, x, t % 3, base, r0);
        AttackConfig more = base;
        more.restarts = 3;
        Vec a1 = pgd_attack(m, x, t % 3, more, r1);
        CHECK(attack_objective(m, x, a1, t % 3, base.inner) >=
              attack_objective(m, x, a0, t % 3, base.inner) - 1e-12);
    }
}

TEST_CASE("linear_worst_case_margin") {
    // eps = 0 reduces to natural margins
    Rng rng(5);
    Matrix w = random_w(3, 4, rng);
    Vec x{0.3, 0.7, 0.2, 0.9};
    WorstCaseMargins nat = linear_worst_case_margin(w, x, 1, 0.0);
    CHECK(nat.worst == doctest::Approx(margin(matvec(w, x), 1)).epsilon(1e-12));

    // hand instance: orthogonal unit rows, big radius -> robustly misclassified
    Matrix w2(2, 2);
    w2(0, 0) = 1.0;
    w2(1, 1) = 1.0;
    WorstCaseMargins hand = linear_worst_case_margin(w2, Vec{1.0, 1.0}, 0, 0.5);
    CHECK(hand.worst == doctest::Approx(-1.0).epsilon(1e-12));  // gap 0 + 0.5*2
    CHECK(hand.worst <= 0.0);

    CHECK_THROWS(linear_worst_case_margin(w2, Vec{1.0, 1.0}, 5, 0.1));
}

TEST_CASE("closed form equals corner enumeration") {
    Rng rng(6);
    for (int trial = 0; trial < 60; ++trial) {
        int d = 2 + static_cast<int>(rng.below(7));
        int K = 2 + static_cast<int>(rng.below(3));
        Matrix w = random_w(K, d, rng);
        Vec x(d);
        for (double& v : x) v = rng.uniform();
        int y = static_cast<int>(rng.below(K));
        double eps = rng.uniform(0.01, 0.2);
        WorstCaseMargins wc = linear_worst_case_margin(w, x, y, eps);
        CHECK(wc.worst == doctest::Approx(corner_margin(w, x, y, eps)).epsilon(1e-9));
    }
}

TEST_CASE("closed form lower-bounds any PGD output margin") {
    Rng rng(7);
    ModelParams m = ModelParams::make_linear(4, 3);
    m.linear = random_w(4, 3, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.06;
    cfg.steps = 20;
    cfg.step_size = 0.01;
    cfg.inner = InnerLoss::CwMargin;
    for (int t = 0; t < 30; ++t) {
        Vec x{rng.uniform(), rng.uniform(), rng.uniform()};
        int y = static_cast<int>(rng.below(4));
        Rng arng(t);
        Vec xa = pgd_attack(m, x, y, cfg, arng);
        WorstCaseMargins wc = linear_worst_case_margin(m.linear, x, y, cfg.epsilon);
        CHECK(wc.worst <= margin(forward(m, xa), y) + 1e-9);
    }
}

TEST_CASE("robust_error_indicator") {
    Matrix w(2, 2);
    w(0, 0) = 2.0;
    w(1, 1) = -1.0;
    Vec x{1.0, 1.0};
    CHECK(robust_error_indicator(w, x, 0, 0.0, 0.0) == 0);  // confidently correct
    CHECK(robust_error_indicator(w, x, 0, 100.0, 0.0) == 1);  // gamma dominates

    Matrix w2(2, 2);
    w2(0, 0) = 1.0;
    w2(1, 1) = 1.0;
    CHECK(robust_error_indicator(w2, Vec{1.0, 1.0}, 0, 0.0, 0.5) == 1);

    // eps=0, gamma=0 equals the natural 0/1 error (strict margin)
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        Matrix rw = random_w(3, 2, rng);
        Vec rx{rng.uniform(), rng.uniform()};
        int y = static_cast<int>(rng.below(3));
        int natural_err = margin(matvec(rw, rx), y) <= 0.0 ? 1 : 0;
        CHECK(robust_error_indicator(rw, rx, y, 0.0, 0.0) == natural_err);
    }
}

TEST_CASE("attack config validation") {
    AttackConfig bad;
    bad.steps = 0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.step_size = 0.0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.epsilon = -0.1;
    CHECK_THROWS(bad.validate());
    CHECK_NOTHROW(AttackConfig::train_default().validate());
    CHECK_NOTHROW(AttackConfig::eval_default().validate());
}
