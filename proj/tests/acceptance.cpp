// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is checked at its stated tolerance and budget.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "wat/bounds.hpp"
#include "wat/experiment.hpp"
#include "wat/golden.hpp"
#include "wat/hedge.hpp"
#include "wat/metrics.hpp"
#include "wat/train.hpp"

using namespace wat;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, double seconds, const std::string& detail) {
    std::printf("%s criterion %2d: %-28s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", id, name, seconds,
                detail.empty() ? "" : " — ", detail.c_str());
    if (!pass) ++g_failures;
}

void run(int id, const char* name, const std::function<bool(std::string&)>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, pass, secs, detail);
}

std::string config_path() {
    const char* dir = std::getenv("WAT_CONFIG_DIR");
    return std::string(dir ? dir : "configs") + "/default.json";
}

std::vector<WeightSimplex> play_hedge(const std::vector<Vec>& losses, double eta) {
    std::vector<WeightSimplex> ws;
    Vec cum(losses[0].size(), 0.0);
    for (size_t t = 0; t < losses.size(); ++t) {
        ws.push_back(t == 0 ? init_weights(static_cast<int>(cum.size()) - 1)
                            : hedge_weights(cum, eta));
        for (size_t k = 0; k < cum.size(); ++k) cum[k] += losses[t][k];
    }
    return ws;
}

bool criterion1(std::string& detail) {
    auto checks = recompute_golden_rho(0.001);
    int bad = 0;
    for (const auto& c : checks)
        if (!c.matches) ++bad;
    detail = std::to_string(checks.size()) + " table entries, " + std::to_string(bad) +
             " printed rho values inconsistent with their own printed accuracies";
    return bad == 0;
}

bool criterion2(std::string& detail) {
    Rng gen(101);
    int premise_trials = 0;
    for (double eta : {0.05, 0.1, 0.5}) {
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<Vec> hist(100, Vec(10));
            for (auto& round : hist)
                for (double& x : round) x = gen.uniform();
            auto ws = play_hedge(hist, eta);
            NoRegretReport r = audit_no_regret(hist, ws, eta);
            if (r.all_premises_hold) {
                ++premise_trials;
                if (!r.inequality_holds) {
                    detail = "theorem 1 inequality violated with premise satisfied";
                    return false;
                }
            }
            if (eta <= 0.5) {
                // lemma 1 on cost-scaled histories, every decision
                Lemma1Report l = audit_lemma1(hist, ws, eta, trial % 10);
                if (!l.holds) {
                    detail = "lemma 1 inequality violated at eta " + std::to_string(eta);
                    return false;
                }
            }
        }
    }
    detail = "3000 trials, premise held in " + std::to_string(premise_trials);
    return true;
}

bool criterion3(std::string& detail) {
    ExperimentConfig cfg = load_config(config_path());
    cfg.seeds = {1, 2};
    cfg.train.epochs = 5;
    cfg.train.train_attack.steps = 3;
    cfg.train.eval_attack.steps = 5;
    json a = run_experiment_record(cfg);
    json b = run_experiment_record(cfg);
    if (a.dump() != b.dump()) {
        detail = "records for identical (config, seed) differ";
        return false;
    }
    int simplexes = 0;
    for (const json& sj : a.at("seeds"))
        for (const auto& [name, mj] : sj.at("methods").items())
            for (const auto& wj : mj.at("weights")) {
                Vec w = wj.get<Vec>();
                double sum = 0.0;
                for (double x : w) {
                    if (x < 0.0) {
                        detail = "negative simplex entry in " + name;
                        return false;
                    }
                    sum += x;
                }
                if (std::fabs(sum - 1.0) > 1e-12) {
                    detail = "simplex sum off by " + std::to_string(sum - 1.0);
                    return false;
                }
                ++simplexes;
            }
    detail = "byte-identical records; " + std::to_string(simplexes) + " simplexes checked";
    return true;
}

bool criterion4(std::string& detail) {
    Rng rng(102);
    const double h = 1e-5;
    double worst_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        bool mlp = trial % 2 == 1;
        int K = 2 + static_cast<int>(rng.below(3));
        int d = 2 + static_cast<int>(rng.below(3));
        ModelParams m = ModelParams::random_init(mlp ? ModelKind::Mlp : ModelKind::Linear, K, d, 3,
                                                 0.5, rng);
        LabeledBatch b;
        int n = 5;
        b.inputs = Matrix(n, d);
        Matrix adv(n, d);
        for (int i = 0; i < n; ++i) {
            b.labels.push_back(static_cast<int>(rng.below(K)));
            for (int j = 0; j < d; ++j) {
                b.inputs(i, j) = rng.uniform();
                adv(i, j) = b.inputs(i, j) + rng.uniform(-0.03, 0.03);
            }
        }
        b.adversarial = adv;
        LossSpec spec;
        spec.beta = rng.uniform(0.0, 6.0);
        Vec w(K + 1);
        double s = 0.0;
        for (double& x : w) s += (x = -std::log(1.0 - rng.uniform()));
        for (double& x : w) x /= s;

        Vec g = loss_and_grad(m, b, spec, w).grad.flatten();
        Vec theta = m.flatten();
        for (size_t i = 0; i < theta.size(); ++i) {
            Vec tp = theta, tm = theta;
            tp[i] += h;
            tm[i] -= h;
            ModelParams mp = m, mm = m;
            mp.set_from_flat(tp);
            mm.set_from_flat(tm);
            double fd =
                (loss_and_grad(mp, b, spec, w).loss - loss_and_grad(mm, b, spec, w).loss) /
                (2.0 * h);
            double err = std::fabs(fd - g[i]) / std::max(1.0, std::fabs(fd));
            worst_err = std::max(worst_err, err);
            if (err > 1e-5) {
                detail = "relative error " + std::to_string(err) + " at trial " +
                         std::to_string(trial);
                return false;
            }
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "100 instances, worst relative error %.2e", worst_err);
    detail = buf;
    return true;
}

bool criterion5(std::string& detail) {
    Rng rng(103);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 2 + static_cast<int>(rng.below(9));
        int K = 2 + static_cast<int>(rng.below(3));
        Matrix w(K, d);
        for (double& v : w.data) v = rng.uniform(-1.0, 1.0);
        Vec x(d);
        for (double& v : x) v = rng.uniform();
        int y = static_cast<int>(rng.below(K));
        double eps = rng.uniform(0.01, 0.2);
        WorstCaseMargins wc = linear_worst_case_margin(w, x, y, eps);
        double brute = std::numeric_limits<double>::infinity();
        for (int mask = 0; mask < (1 << d); ++mask) {
            Vec xp = x;
            for (int j = 0; j < d; ++j) xp[j] += (mask >> j & 1) ? eps : -eps;
            brute = std::min(brute, margin(matvec(w, xp), y));
        }
        if (std::fabs(wc.worst - brute) > 1e-9) {
            detail = "closed form vs corner enumeration differ by " +
                     std::to_string(wc.worst - brute);
            return false;
        }
    }
    // single-step full-size PGD on binary linear models hits the corner
    for (int trial = 0; trial < 100; ++trial) {
        int d = 2 + static_cast<int>(rng.below(5));
        ModelParams m = ModelParams::make_linear(2, d);
        for (double& v : m.linear.data) v = rng.uniform(-1.0, 1.0);
        Vec x(d);
        for (double& v : x) v = rng.uniform(0.25, 0.75);
        int y = static_cast<int>(rng.below(2));
        AttackConfig cfg;
        cfg.epsilon = 0.05;
        cfg.steps = 1;
        cfg.step_size = 0.05;
        cfg.inner = InnerLoss::Ce;
        Rng arng(trial);
        Vec xa = pgd_attack(m, x, y, cfg, arng);
        double got = margin(forward(m, xa), y);
        double want = linear_worst_case_margin(m.linear, x, y, cfg.epsilon).worst;
        if (std::fabs(got - want) > 1e-9) {
            detail = "PGD corner margin off by " + std::to_string(got - want);
            return false;
        }
    }
    detail = "200 corner enumerations + 100 single-step PGD corners";
    return true;
}

bool criterion6(std::string& detail) {
    ExperimentConfig cfg = load_config(config_path());
    json rec = run_experiment_record(cfg);
    const json& agg = rec.at("aggregate");
    int n = static_cast<int>(cfg.seeds.size());
    int disparity = agg.at("uniform_disparity_ge_10pts").get<int>();
    int wat_better = agg.at("wat_worst_gt_uniform").get<int>();
    int rho_pos = agg.at("rho_pgd_positive").get<int>();
    detail = "disparity " + std::to_string(disparity) + "/" + std::to_string(n) + ", wat>uniform " +
             std::to_string(wat_better) + "/" + std::to_string(n) + ", rho_pgd>0 " +
             std::to_string(rho_pos) + "/" + std::to_string(n);
    return disparity >= 4 && wat_better >= 4 && rho_pos >= 4;
}

bool criterion7(std::string& detail) {
    ExperimentConfig cfg = load_config(config_path());
    json sweep = sweep_eta_record(cfg, {0.01, 0.05, 0.1, 0.5});
    const json *lo = nullptr, *hi = nullptr;
    for (const json& row : sweep.at("rows")) {
        if (row.at("eta").get<double>() == 0.01) lo = &row;
        if (row.at("eta").get<double>() == 0.5) hi = &row;
    }
    int worst_dir = 0, avg_dir = 0, n = 0;
    for (size_t i = 0; i < lo->at("per_seed").size(); ++i) {
        const json& a = lo->at("per_seed")[i];
        const json& b = hi->at("per_seed")[i];
        ++n;
        if (b.at("robust_worst").get<double>() >= a.at("robust_worst").get<double>()) ++worst_dir;
        if (a.at("robust_avg").get<double>() >= b.at("robust_avg").get<double>()) ++avg_dir;
    }
    detail = "worst(0.5)>=worst(0.01) in " + std::to_string(worst_dir) + "/" + std::to_string(n) +
             ", avg(0.01)>=avg(0.5) in " + std::to_string(avg_dir) + "/" + std::to_string(n);
    return worst_dir >= 4 && avg_dir >= 4;
}

bool criterion8(std::string& detail) {
    // direct arithmetic identities at 1e-12
    double t2 = theorem2_rhs(0.3, 0.05, 1.0, 2, 800, 0.1);
    double t2_direct = 0.3 + 2.0 * 1.0 * 0.05 + 3.0 * std::sqrt(2.0 * std::log(20.0) / 1600.0);
    if (std::fabs(t2 - t2_direct) > 1e-12) {
        detail = "theorem 2 slack arithmetic mismatch";
        return false;
    }

    Rng rng(104);
    int holds = 0;
    const int trials = 100;
    double c_checked = -1.0;
    for (int t = 0; t < trials; ++t) {
        MixtureSpec spec;
        spec.num_classes = 2;
        spec.dim = 2;
        spec.means = {{0.35, 0.5}, {0.65, 0.5}};
        spec.stds = {0.08, 0.08};
        spec.counts = {40, 40};
        spec.seed = 200 + t;
        Dataset sample = gaussian_mixture(spec);
        spec.seed = 7000 + t;
        Dataset fresh = gaussian_mixture(spec);
        ModelParams m = ModelParams::random_init(ModelKind::Linear, 2, 2, 0, 0.4, rng);
        BoundConfig bc;
        bc.gamma = 0.5;
        bc.W_norm = 5.0;
        bc.mc_draws = 200;
        bc.seed = t;
        Theorem3Report rep = theorem3_terms(m.linear, sample, bc);
        if (c_checked < 0.0) {
            double c_direct =
                2.0 * bc.W_norm * 4.0 * bc.epsilon * 2.0 / (bc.gamma * std::sqrt(80.0)) +
                3.0 * std::sqrt(2.0 * std::log(2.0 / bc.delta) / 160.0);
            if (std::fabs(rep.c - c_direct) > 1e-12) {
                detail = "theorem 3 c-term arithmetic mismatch";
                return false;
            }
            c_checked = rep.c;
        }
        AccSummary exact = class_accuracies_exact(m, fresh, bc.epsilon);
        if (rep.rhs >= 1.0 - exact.worst) ++holds;
    }
    if (holds < 95) {
        detail = "theorem 3 bound held in only " + std::to_string(holds) + "/100 trials";
        return false;
    }

    // theorem 2 with a model-snapshot dictionary: rhs upper-bounds each
    // member's fresh-draw worst-class robust risk
    MixtureSpec spec;
    spec.num_classes = 2;
    spec.dim = 2;
    spec.means = {{0.3, 0.5}, {0.7, 0.5}};
    spec.stds = {0.08, 0.08};
    spec.counts = {80, 80};
    spec.seed = 31;
    Dataset sample = gaussian_mixture(spec);
    spec.seed = 32;
    Dataset fresh = gaussian_mixture(spec);
    std::vector<ModelParams> dict;
    for (int i = 0; i < 4; ++i)
        dict.push_back(ModelParams::random_init(ModelKind::Linear, 2, 2, 0, 0.6, rng));
    double eps = 8.0 / 255.0, gamma = 0.5;
    // max over classes of the dictionary Rademacher estimate of ramp losses
    double rad_max = 0.0;
    for (int k = 0; k < 2; ++k) {
        std::vector<Vec> evals;
        for (const ModelParams& m : dict) {
            Vec e;
            for (int i : sample.class_index[k]) {
                double wm =
                    linear_worst_case_margin(m.linear, sample.inputs.row(i), k, eps).worst;
                e.push_back(ramp_loss(wm, gamma));
            }
            evals.push_back(e);
        }
        Rng rrng(40 + k);
        rad_max = std::max(rad_max, mc_rademacher(evals, 2000, rrng).mean);
    }
    for (const ModelParams& m : dict) {
        AccSummary emp = class_accuracies_exact(m, sample, eps);
        double emp_risk = 0.0;  // empirical worst-class ramp risk
        for (int k = 0; k < 2; ++k) {
            double r = 0.0;
            for (int i : sample.class_index[k])
                r += ramp_loss(
                    linear_worst_case_margin(m.linear, sample.inputs.row(i), k, eps).worst, gamma);
            emp_risk = std::max(emp_risk, r / sample.class_index[k].size());
        }
        double rhs = theorem2_rhs(emp_risk, rad_max, 1.0, 2, sample.size(), 0.1);
        AccSummary pop = class_accuracies_exact(m, fresh, eps);
        if (rhs < 1.0 - pop.worst - 1e-12) {
            detail = "theorem 2 dictionary bound violated";
            return false;
        }
        (void)emp;
    }
    detail = "100 theorem-3 trials, " + std::to_string(holds) + " held; arithmetic at 1e-12";
    return true;
}

bool criterion9(std::string& detail) {
    // exact enumeration within 3 SE on n <= 10 fixtures
    Rng gen(105);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + static_cast<int>(gen.below(8));
        int m = 1 + static_cast<int>(gen.below(4));
        std::vector<Vec> evals(m, Vec(n));
        for (auto& e : evals)
            for (double& v : e) v = gen.uniform(-1.0, 1.0);
        double exact = 0.0;
        for (int mask = 0; mask < (1 << n); ++mask) {
            double best = -std::numeric_limits<double>::infinity();
            for (const Vec& e : evals) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += ((mask >> i & 1) ? 1.0 : -1.0) * e[i];
                best = std::max(best, s);
            }
            exact += best / n;
        }
        exact /= (1 << n);
        Rng rng(trial);
        RadEstimate mc = mc_rademacher(evals, 8000, rng);
        if (std::fabs(mc.mean - exact) > 3.0 * std::max(mc.std_error, 1e-12)) {
            detail = "MC estimate outside 3 SE of enumeration at trial " + std::to_string(trial);
            return false;
        }
    }
    // SE halves (+-25%) when draws quadruple
    std::vector<Vec> evals = {{0.3, -0.9, 0.5, 0.7, -0.1}, {-0.2, 0.4, -0.8, 0.1, 0.6}};
    Rng r1(1), r2(1);
    double se1 = mc_rademacher(evals, 8000, r1).std_error;
    double se4 = mc_rademacher(evals, 32000, r2).std_error;
    double ratio = se1 / se4;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "SE ratio at 4x draws: %.3f", ratio);
    detail = buf;
    return ratio >= 1.5 && ratio <= 2.5;
}

bool criterion10(std::string& detail) {
    AccSummary base;
    base.average = 0.61;
    base.worst = 0.32;
    base.per_class = {0.9, 0.32, 0.61};
    base.kind = "robust(pgd)";
    if (rho(base, base) != 0.0) {
        detail = "rho(base, base) != 0";
        return false;
    }
    if (cv(Vec{0.4, 0.4, 0.4, 0.4}) != 0.0) {
        detail = "cv of constant vector != 0";
        return false;
    }
    if (cv(Vec{0.1, 0.6, 0.3}) != cv(Vec{0.3, 0.1, 0.6})) {
        detail = "cv not permutation invariant";
        return false;
    }
    // robust <= natural per class on an actual evaluation
    MixtureSpec spec;
    spec.num_classes = 3;
    spec.dim = 2;
    spec.means = {{0.25, 0.5}, {0.78, 0.5}, {0.52, 0.5}};
    spec.stds = {0.07, 0.07, 0.21};
    spec.counts = {40, 40, 40};
    spec.seed = 9;
    Dataset test = gaussian_mixture(spec);
    Rng rng(106);
    for (int t = 0; t < 5; ++t) {
        ModelParams m = ModelParams::random_init(ModelKind::Linear, 3, 2, 0, 0.5, rng);
        AccSummary nat = class_accuracies(m, test, nullptr, 11);
        AttackConfig atk;
        atk.steps = 10;
        atk.step_size = 0.01;
        atk.inner = InnerLoss::Ce;
        AccSummary rob = class_accuracies(m, test, &atk, 11);
        for (size_t k = 0; k < nat.per_class.size(); ++k)
            if (rob.per_class[k] > nat.per_class[k]) {
                detail = "robust accuracy exceeded natural accuracy";
                return false;
            }
    }
    detail = "identities hold";
    return true;
}

}  // namespace

int main() {
    run(1, "rho golden tables", criterion1);
    run(2, "hedge audits", criterion2);
    run(3, "simplex + determinism", criterion3);
    run(4, "gradient correctness", criterion4);
    run(5, "adversary exactness", criterion5);
    run(6, "disparity + WAT effect", criterion6);
    run(7, "eta trade-off direction", criterion7);
    run(8, "bound validity", criterion8);
    run(9, "rademacher estimator", criterion9);
    run(10, "metric identities", criterion10);
    if (g_failures > 0) std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
