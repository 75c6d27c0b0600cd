#include "wat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "wat/metrics.hpp"

namespace wat {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchemaVersion = "1.0";

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("config missing required field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

InnerLoss inner_from_string(const std::string& s) {
    if (s == "ce") return InnerLoss::Ce;
    if (s == "kl") return InnerLoss::Kl;
    if (s == "cw_margin") return InnerLoss::CwMargin;
    throw ConfigError("unknown inner loss '" + s + "' (expected ce, kl or cw_margin)");
}

std::string inner_to_string(InnerLoss l) {
    switch (l) {
        case InnerLoss::Ce: return "ce";
        case InnerLoss::Kl: return "kl";
        case InnerLoss::CwMargin: return "cw_margin";
    }
    return "?";
}

AttackConfig attack_from_json(const json& j, AttackConfig base) {
    base.epsilon = get_or(j, "epsilon", base.epsilon);
    base.steps = get_or(j, "steps", base.steps);
    base.step_size = get_or(j, "step_size", base.step_size);
    if (j.contains("inner")) base.inner = inner_from_string(j.at("inner").get<std::string>());
    base.restarts = get_or(j, "restarts", base.restarts);
    if (j.contains("clip")) {
        auto c = j.at("clip").get<std::vector<double>>();
        if (c.size() != 2) throw ConfigError("attack clip must be [lo, hi]");
        base.clip = {{c[0], c[1]}};
    }
    return base;
}

json attack_to_json(const AttackConfig& a) {
    json j;
    j["epsilon"] = a.epsilon;
    j["steps"] = a.steps;
    j["step_size"] = a.step_size;
    j["inner"] = inner_to_string(a.inner);
    j["restarts"] = a.restarts;
    if (a.clip) j["clip"] = {a.clip->first, a.clip->second};
    return j;
}

json acc_to_json(const AccSummary& a) {
    json j;
    j["kind"] = a.kind;
    j["per_class"] = a.per_class;
    j["average"] = a.average;
    j["worst"] = a.worst;
    j["worst_class"] = a.worst_class;
    return j;
}

json audit_to_json(const NoRegretReport& r) {
    json j;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["premise_holds"] = r.premise_holds;
    j["all_premises_hold"] = r.all_premises_hold;
    j["inequality_holds"] = r.inequality_holds;
    j["eta_in_regime"] = r.eta_in_regime;
    j["eta"] = r.eta;
    j["rounds"] = r.rounds;
    return j;
}

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Wat: return "wat";
        case Strategy::Uniform: return "uniform";
        case Strategy::FixedWeights: return "fixed";
    }
    return "?";
}

json train_record_to_json(const TrainRecord& rec) {
    json j;
    j["strategy"] = strategy_name(rec.strategy);
    j["eta"] = rec.eta;
    j["seed"] = rec.seed;
    j["selected_epoch"] = rec.selected_epoch;
    j["train_losses"] = rec.train_losses;
    j["val_losses"] = rec.val_losses;
    j["val_losses_normalized"] = rec.val_losses_normalized;
    j["weights"] = rec.weights;
    if (rec.strategy == Strategy::Wat && rec.eta > 0.0) j["audit"] = audit_to_json(rec.audit);
    j["selected_model"] = rec.selected_model.flatten();
    return j;
}

struct MethodOutcome {
    TrainRecord record;
    AccSummary natural;
    AccSummary robust_pgd;
    bool has_exact = false;
    AccSummary robust_exact;
};

MethodOutcome run_method(const ExperimentConfig& cfg, const std::string& method, uint64_t seed,
                         double eta_override, const SeedData& data) {
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    if (method == "wat") {
        tc.strategy = Strategy::Wat;
        if (eta_override >= 0.0) tc.eta = eta_override;
    } else if (method == "uniform") {
        tc.strategy = Strategy::Uniform;
    } else if (method == "fixed") {
        tc.strategy = Strategy::FixedWeights;
        tc.fixed_weights = cfg.fixed_weights;
    } else {
        throw ConfigError("unknown method '" + method + "'");
    }
    MethodOutcome out;
    out.record = train(tc, data.train, data.val);
    const ModelParams& model = out.record.selected_model;
    out.natural = class_accuracies(model, data.test, nullptr, mix_seed(seed, 101));
    out.robust_pgd = class_accuracies(model, data.test, &tc.eval_attack, mix_seed(seed, 102));
    if (model.kind == ModelKind::Linear) {
        out.has_exact = true;
        out.robust_exact = class_accuracies_exact(model, data.test, tc.eval_attack.epsilon);
    }
    return out;
}

json method_outcome_to_json(const MethodOutcome& m) {
    json j = train_record_to_json(m.record);
    json acc;
    acc["natural"] = acc_to_json(m.natural);
    acc["robust_pgd"] = acc_to_json(m.robust_pgd);
    if (m.has_exact) acc["robust_exact"] = acc_to_json(m.robust_exact);
    j["accuracy"] = acc;
    json cvj;
    cvj["natural"] = cv(m.natural.per_class);
    cvj["robust_pgd"] = cv(m.robust_pgd.per_class);
    j["cv"] = cvj;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (classes.size() < 2) throw ConfigError("config: need at least 2 classes");
    if (dim < 1) throw ConfigError("config: dim must be >= 1");
    if (!(box_lo < box_hi)) throw ConfigError("config: empty domain box");
    for (const auto& c : classes) {
        if (static_cast<int>(c.mean.size()) != dim) throw ConfigError("config: class mean dim");
        if (!(c.std > 0.0)) throw ConfigError("config: class std must be > 0");
        if (c.train_count <= per_class_val)
            throw ConfigError("config: train_count must exceed per_class_val");
        if (c.test_count < 1) throw ConfigError("config: test_count must be >= 1");
    }
    if (per_class_val < 1) throw ConfigError("config: per_class_val must be >= 1");
    if (methods.empty()) throw ConfigError("config: no methods requested");
    for (const auto& m : methods)
        if (m != "wat" && m != "uniform" && m != "fixed")
            throw ConfigError("config: unknown method '" + m + "'");
    if (seeds.empty()) throw ConfigError("config: no seeds");
    if (etas.empty()) throw ConfigError("config: empty eta list");
    for (double e : etas)
        if (e < 0.0) throw ConfigError("config: eta must be >= 0");
    try {
        TrainConfig tc = train;
        tc.strategy = Strategy::Uniform;
        tc.validate(num_classes());
        if (std::find(methods.begin(), methods.end(), "fixed") != methods.end()) {
            tc.strategy = Strategy::FixedWeights;
            tc.fixed_weights = fixed_weights;
            tc.validate(num_classes());
        }
        if (bounds_enabled) bounds.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

json ExperimentConfig::to_json() const {
    json j;
    json data;
    data["dim"] = dim;
    data["box"] = {box_lo, box_hi};
    json cls = json::array();
    for (const auto& c : classes) {
        json cj;
        cj["mean"] = c.mean;
        cj["std"] = c.std;
        cj["train_count"] = c.train_count;
        cj["test_count"] = c.test_count;
        cls.push_back(cj);
    }
    data["classes"] = cls;
    data["per_class_val"] = per_class_val;
    j["data"] = data;

    json t;
    t["epochs"] = train.epochs;
    t["lr"] = train.lr;
    t["eta"] = train.eta;
    t["beta"] = train.beta;
    t["batch_size"] = train.batch_size;
    t["momentum"] = train.momentum;
    t["weight_decay"] = train.weight_decay;
    t["loss_clip"] = train.loss_clip;
    t["model"] = train.model == ModelKind::Linear ? "linear" : "mlp";
    t["hidden"] = train.hidden;
    t["init_scale"] = train.init_scale;
    j["train"] = t;
    j["train_attack"] = attack_to_json(train.train_attack);
    j["eval_attack"] = attack_to_json(train.eval_attack);
    j["methods"] = methods;
    if (!fixed_weights.empty()) j["fixed_weights"] = fixed_weights;
    j["seeds"] = seeds;
    j["etas"] = etas;
    if (bounds_enabled) {
        json b;
        b["delta"] = bounds.delta;
        b["B"] = bounds.B;
        b["gamma"] = bounds.gamma;
        b["W_norm"] = bounds.W_norm;
        b["q"] = bounds.q;
        b["mc_draws"] = bounds.mc_draws;
        b["epsilon"] = bounds.epsilon;
        j["bounds"] = b;
    }
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    const json& data = j.contains("data") ? j.at("data") : json::object();
    cfg.dim = require<int>(data, "dim");
    if (data.contains("box")) {
        auto b = data.at("box").get<std::vector<double>>();
        if (b.size() != 2) throw ConfigError("data.box must be [lo, hi]");
        cfg.box_lo = b[0];
        cfg.box_hi = b[1];
    }
    if (!data.contains("classes")) throw ConfigError("config missing data.classes");
    for (const json& cj : data.at("classes")) {
        ClassSpec c;
        c.mean = require<Vec>(cj, "mean");
        c.std = require<double>(cj, "std");
        c.train_count = require<int>(cj, "train_count");
        c.test_count = require<int>(cj, "test_count");
        cfg.classes.push_back(c);
    }
    cfg.per_class_val = require<int>(data, "per_class_val");

    const json& t = j.contains("train") ? j.at("train") : json::object();
    cfg.train.epochs = get_or(t, "epochs", cfg.train.epochs);
    cfg.train.lr = get_or(t, "lr", cfg.train.lr);
    cfg.train.eta = get_or(t, "eta", cfg.train.eta);
    cfg.train.beta = get_or(t, "beta", cfg.train.beta);
    cfg.train.batch_size = get_or(t, "batch_size", cfg.train.batch_size);
    cfg.train.momentum = get_or(t, "momentum", cfg.train.momentum);
    cfg.train.weight_decay = get_or(t, "weight_decay", cfg.train.weight_decay);
    cfg.train.loss_clip = get_or(t, "loss_clip", cfg.train.loss_clip);
    cfg.train.hidden = get_or(t, "hidden", cfg.train.hidden);
    cfg.train.init_scale = get_or(t, "init_scale", cfg.train.init_scale);
    std::string model = get_or<std::string>(t, "model", "linear");
    if (model == "linear")
        cfg.train.model = ModelKind::Linear;
    else if (model == "mlp")
        cfg.train.model = ModelKind::Mlp;
    else
        throw ConfigError("train.model must be linear or mlp");

    if (j.contains("train_attack"))
        cfg.train.train_attack = attack_from_json(j.at("train_attack"), AttackConfig::train_default());
    if (j.contains("eval_attack"))
        cfg.train.eval_attack = attack_from_json(j.at("eval_attack"), AttackConfig::eval_default());

    cfg.methods = require<std::vector<std::string>>(j, "methods");
    if (j.contains("fixed_weights")) cfg.fixed_weights = j.at("fixed_weights").get<Vec>();
    cfg.seeds = require<std::vector<uint64_t>>(j, "seeds");
    if (j.contains("etas")) cfg.etas = j.at("etas").get<std::vector<double>>();

    if (j.contains("bounds")) {
        const json& b = j.at("bounds");
        cfg.bounds_enabled = true;
        cfg.bounds.delta = get_or(b, "delta", cfg.bounds.delta);
        cfg.bounds.B = get_or(b, "B", cfg.bounds.B);
        cfg.bounds.gamma = get_or(b, "gamma", cfg.bounds.gamma);
        cfg.bounds.W_norm = get_or(b, "W_norm", cfg.bounds.W_norm);
        cfg.bounds.q = get_or(b, "q", cfg.bounds.q);
        cfg.bounds.p = std::isinf(cfg.bounds.q) ? 1.0
                       : cfg.bounds.q == 1.0 ? std::numeric_limits<double>::infinity()
                                             : cfg.bounds.q / (cfg.bounds.q - 1.0);
        cfg.bounds.mc_draws = get_or(b, "mc_draws", cfg.bounds.mc_draws);
        cfg.bounds.epsilon = get_or(b, "epsilon", cfg.train.eval_attack.epsilon);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

SeedData make_seed_data(const ExperimentConfig& cfg, uint64_t seed) {
    MixtureSpec pool;
    pool.num_classes = cfg.num_classes();
    pool.dim = cfg.dim;
    pool.box_lo = cfg.box_lo;
    pool.box_hi = cfg.box_hi;
    for (const auto& c : cfg.classes) {
        pool.means.push_back(c.mean);
        pool.stds.push_back(c.std);
        pool.counts.push_back(c.train_count);
    }
    pool.seed = mix_seed(seed, 1);
    MixtureSpec test = pool;
    test.counts.clear();
    for (const auto& c : cfg.classes) test.counts.push_back(c.test_count);
    test.seed = mix_seed(seed, 2);

    SeedData out;
    Dataset full = gaussian_mixture(pool);
    auto [tr, val] = stratified_split(full, cfg.per_class_val);
    out.train = std::move(tr);
    out.val = std::move(val);
    out.test = gaussian_mixture(test);
    return out;
}

json run_experiment_record(const ExperimentConfig& cfg) {
    cfg.validate();
    json rec;
    rec["schema_version"] = kSchemaVersion;
    rec["tool"] = "wat-lab";
    rec["config"] = cfg.to_json();

    const bool has_uniform =
        std::find(cfg.methods.begin(), cfg.methods.end(), "uniform") != cfg.methods.end();

    int uniform_disparity = 0, wat_worst_gt_uniform = 0, rho_pgd_positive = 0;

    json seeds = json::array();
    for (uint64_t seed : cfg.seeds) {
        SeedData data = make_seed_data(cfg, seed);
        json sj;
        sj["seed"] = seed;
        json methods;
        std::map<std::string, MethodOutcome> outcomes;
        for (const auto& m : cfg.methods) {
            MethodOutcome out = run_method(cfg, m, seed, -1.0, data);
            methods[m] = method_outcome_to_json(out);
            outcomes.emplace(m, std::move(out));
        }
        sj["methods"] = methods;

        if (has_uniform) {
            const MethodOutcome& base = outcomes.at("uniform");
            json rho_j;
            for (const char* kind : {"natural", "robust_pgd", "robust_exact"}) {
                json per_kind;
                for (const auto& m : cfg.methods) {
                    if (m == "uniform") continue;
                    const MethodOutcome& tr = outcomes.at(m);
                    const AccSummary* b = nullptr;
                    const AccSummary* t = nullptr;
                    if (std::string(kind) == "natural") {
                        b = &base.natural;
                        t = &tr.natural;
                    } else if (std::string(kind) == "robust_pgd") {
                        b = &base.robust_pgd;
                        t = &tr.robust_pgd;
                    } else if (base.has_exact && tr.has_exact) {
                        b = &base.robust_exact;
                        t = &tr.robust_exact;
                    }
                    if (b && t && b->worst > 0.0 && b->average > 0.0) per_kind[m] = rho(*b, *t);
                }
                if (!per_kind.empty()) rho_j[kind] = per_kind;
            }
            sj["rho"] = rho_j;

            if (base.robust_pgd.average - base.robust_pgd.worst >= 0.10) ++uniform_disparity;
            if (outcomes.count("wat")) {
                const MethodOutcome& w = outcomes.at("wat");
                if (w.robust_pgd.worst > base.robust_pgd.worst) ++wat_worst_gt_uniform;
                if (base.robust_pgd.worst > 0.0 && base.robust_pgd.average > 0.0 &&
                    rho(base.robust_pgd, w.robust_pgd) > 0.0)
                    ++rho_pgd_positive;
            }
        }

        if (cfg.bounds_enabled && cfg.train.model == ModelKind::Linear) {
            json bj;
            for (const auto& m : cfg.methods) {
                const ModelParams& model = outcomes.at(m).record.selected_model;
                Theorem3Report rep = theorem3_terms(model.linear, data.test, cfg.bounds);
                json r;
                r["e_mean"] = rep.e_mean;
                r["u"] = rep.u;
                r["c"] = rep.c;
                r["rhs"] = rep.rhs;
                r["weight_norm"] = rep.weight_norm;
                r["norm_cap_ok"] = rep.norm_cap_ok;
                r["note"] = "dictionary-free linear bound; rhs may exceed 1";
                bj[m] = r;
            }
            sj["bounds"] = bj;
        }
        seeds.push_back(sj);
    }
    rec["seeds"] = seeds;

    json agg;
    agg["num_seeds"] = cfg.seeds.size();
    if (has_uniform) {
        agg["uniform_disparity_ge_10pts"] = uniform_disparity;
        agg["wat_worst_gt_uniform"] = wat_worst_gt_uniform;
        agg["rho_pgd_positive"] = rho_pgd_positive;
    }
    rec["aggregate"] = agg;
    return rec;
}

json sweep_eta_record(const ExperimentConfig& cfg, const std::vector<double>& etas) {
    cfg.validate();
    if (etas.empty()) throw ConfigError("sweep: empty eta list");
    for (double e : etas)
        if (e < 0.0) throw ConfigError("sweep: eta must be >= 0");

    json rec;
    rec["schema_version"] = kSchemaVersion;
    rec["tool"] = "wat-lab";
    rec["kind"] = "eta_sweep";
    rec["config"] = cfg.to_json();
    rec["etas"] = etas;

    json rows = json::array();
    // one pass per seed so data generation and the uniform baseline are shared
    std::vector<std::map<std::string, json>> per_eta(etas.size());
    for (uint64_t seed : cfg.seeds) {
        SeedData data = make_seed_data(cfg, seed);
        MethodOutcome base = run_method(cfg, "uniform", seed, -1.0, data);
        for (size_t e = 0; e < etas.size(); ++e) {
            MethodOutcome w = run_method(cfg, "wat", seed, etas[e], data);
            json cell;
            cell["seed"] = seed;
            cell["natural_avg"] = w.natural.average;
            cell["natural_worst"] = w.natural.worst;
            cell["robust_avg"] = w.robust_pgd.average;
            cell["robust_worst"] = w.robust_pgd.worst;
            // rho is undefined when the baseline's worst class is at zero
            auto safe_rho = [](const AccSummary& b, const AccSummary& t) -> json {
                if (b.worst <= 0.0 || b.average <= 0.0) return nullptr;
                return rho(b, t);
            };
            cell["rho_natural"] = safe_rho(base.natural, w.natural);
            cell["rho_pgd"] = safe_rho(base.robust_pgd, w.robust_pgd);
            cell["baseline_natural_avg"] = base.natural.average;
            cell["baseline_robust_avg"] = base.robust_pgd.average;
            cell["baseline_robust_worst"] = base.robust_pgd.worst;
            per_eta[e]["seed_" + std::to_string(seed)] = cell;
        }
    }
    for (size_t e = 0; e < etas.size(); ++e) {
        json row;
        row["eta"] = etas[e];
        double na = 0, nw = 0, ra = 0, rw = 0, rn = 0, rp = 0;
        int rn_n = 0, rp_n = 0;
        json cells = json::array();
        for (const auto& [_, cell] : per_eta[e]) {
            na += cell.at("natural_avg").get<double>();
            nw += cell.at("natural_worst").get<double>();
            ra += cell.at("robust_avg").get<double>();
            rw += cell.at("robust_worst").get<double>();
            if (!cell.at("rho_natural").is_null()) {
                rn += cell.at("rho_natural").get<double>();
                ++rn_n;
            }
            if (!cell.at("rho_pgd").is_null()) {
                rp += cell.at("rho_pgd").get<double>();
                ++rp_n;
            }
            cells.push_back(cell);
        }
        double n = static_cast<double>(cfg.seeds.size());
        row["mean_natural_avg"] = na / n;
        row["mean_natural_worst"] = nw / n;
        row["mean_robust_avg"] = ra / n;
        row["mean_robust_worst"] = rw / n;
        row["mean_rho_natural"] = rn_n > 0 ? json(rn / rn_n) : json(nullptr);
        row["mean_rho_pgd"] = rp_n > 0 ? json(rp / rp_n) : json(nullptr);
        row["per_seed"] = cells;
        rows.push_back(row);
    }
    rec["rows"] = rows;
    return rec;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
    return buf;
}

}  // namespace

std::string render_accuracy_csv(const json& record) {
    std::string out = "seed,method,kind";
    const json& cfg = record.at("config");
    size_t K = cfg.at("data").at("classes").size();
    for (size_t k = 0; k < K; ++k) out += ",class" + std::to_string(k);
    out += ",average,worst\n";
    char buf[32];
    for (const json& sj : record.at("seeds")) {
        for (const auto& [name, mj] : sj.at("methods").items()) {
            for (const auto& [kind, aj] : mj.at("accuracy").items()) {
                out += sj.at("seed").dump() + "," + name + "," + kind;
                for (const json& v : aj.at("per_class")) {
                    std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
                    out += std::string(",") + buf;
                }
                std::snprintf(buf, sizeof(buf), "%.17g", aj.at("average").get<double>());
                out += std::string(",") + buf;
                std::snprintf(buf, sizeof(buf), "%.17g", aj.at("worst").get<double>());
                out += std::string(",") + buf + "\n";
            }
        }
    }
    return out;
}

std::string render_weights_csv(const json& record) {
    std::string out = "seed,method,epoch";
    const json& cfg = record.at("config");
    size_t K = cfg.at("data").at("classes").size();
    out += ",w_avg";
    for (size_t k = 0; k < K; ++k) out += ",w_class" + std::to_string(k);
    out += "\n";
    char buf[32];
    for (const json& sj : record.at("seeds")) {
        for (const auto& [name, mj] : sj.at("methods").items()) {
            int epoch = 1;
            for (const json& w : mj.at("weights")) {
                out += sj.at("seed").dump() + "," + name + "," + std::to_string(epoch++);
                for (const json& v : w) {
                    std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
                    out += std::string(",") + buf;
                }
                out += "\n";
            }
        }
    }
    return out;
}

std::string render_report_markdown(const json& record) {
    std::string out = "# Experiment report\n\n";
    out += "Schema " + record.at("schema_version").get<std::string>() + "\n\n";
    for (const json& sj : record.at("seeds")) {
        out += "## Seed " + sj.at("seed").dump() + "\n\n";
        out += "| method | kind | avg (%) | worst (%) | worst class | CV | rho vs uniform |\n";
        out += "|---|---|---|---|---|---|---|\n";
        for (const auto& [name, mj] : sj.at("methods").items()) {
            for (const auto& [kind, aj] : mj.at("accuracy").items()) {
                std::string rho_cell = "-";
                if (sj.contains("rho") && sj.at("rho").contains(kind) &&
                    sj.at("rho").at(kind).contains(name)) {
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.3f",
                                  sj.at("rho").at(kind).at(name).get<double>());
                    rho_cell = buf;
                }
                std::string cv_cell = "-";
                std::string cv_key = kind == "natural" ? "natural" : "robust_pgd";
                if (kind != "robust_exact" && mj.at("cv").contains(cv_key)) {
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.4f", mj.at("cv").at(cv_key).get<double>());
                    cv_cell = buf;
                }
                out += "| " + name + " | " + kind + " | " + pct(aj.at("average").get<double>()) +
                       " | " + pct(aj.at("worst").get<double>()) + " | " +
                       aj.at("worst_class").dump() + " | " + cv_cell + " | " + rho_cell + " |\n";
            }
        }
        out += "\n";
    }
    const json& agg = record.at("aggregate");
    out += "## Aggregate\n\n";
    for (const auto& [k, v] : agg.items()) out += "- " + k + ": " + v.dump() + "\n";
    return out;
}

void write_run_dir(const json& record, const std::string& dir, double wall_seconds) {
    fs::create_directories(dir);
    write_text(fs::path(dir) / "record.json", record.dump(2) + "\n");
    write_text(fs::path(dir) / "accuracy.csv", render_accuracy_csv(record));
    write_text(fs::path(dir) / "weights.csv", render_weights_csv(record));
    write_text(fs::path(dir) / "report.md", render_report_markdown(record));
    json meta;
    meta["wall_seconds"] = wall_seconds;
    write_text(fs::path(dir) / "run_meta.json", meta.dump(2) + "\n");
}

void write_sweep_dir(const json& sweep, const std::string& dir, double wall_seconds) {
    fs::create_directories(dir);
    write_text(fs::path(dir) / "sweep.json", sweep.dump(2) + "\n");
    std::string csv =
        "eta,natural_avg,natural_worst,robust_avg,robust_worst,rho_natural,rho_pgd\n";
    std::string md = "# Eta sweep\n\n";
    md += "| eta | nat avg (%) | nat worst (%) | rob avg (%) | rob worst (%) | rho_nat | rho_pgd "
          "|\n|---|---|---|---|---|---|---|\n";
    char buf[256];
    auto fmt_rho = [](const json& v) -> std::string {
        if (v.is_null()) return "-";  // undefined: baseline worst class at zero
        char b[32];
        std::snprintf(b, sizeof(b), "%.6f", v.get<double>());
        return b;
    };
    for (const json& row : sweep.at("rows")) {
        std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f,%.6f,%.6f,%s,%s\n",
                      row.at("eta").get<double>(), row.at("mean_natural_avg").get<double>(),
                      row.at("mean_natural_worst").get<double>(),
                      row.at("mean_robust_avg").get<double>(),
                      row.at("mean_robust_worst").get<double>(),
                      fmt_rho(row.at("mean_rho_natural")).c_str(),
                      fmt_rho(row.at("mean_rho_pgd")).c_str());
        csv += buf;
        std::snprintf(buf, sizeof(buf), "| %g | %s | %s | %s | %s | %s | %s |\n",
                      row.at("eta").get<double>(),
                      pct(row.at("mean_natural_avg").get<double>()).c_str(),
                      pct(row.at("mean_natural_worst").get<double>()).c_str(),
                      pct(row.at("mean_robust_avg").get<double>()).c_str(),
                      pct(row.at("mean_robust_worst").get<double>()).c_str(),
                      fmt_rho(row.at("mean_rho_natural")).c_str(),
                      fmt_rho(row.at("mean_rho_pgd")).c_str());
        md += buf;
    }
    write_text(fs::path(dir) / "sweep.csv", csv);
    write_text(fs::path(dir) / "sweep.md", md);
    json meta;
    meta["wall_seconds"] = wall_seconds;
    write_text(fs::path(dir) / "run_meta.json", meta.dump(2) + "\n");
}

json load_record(const std::string& dir) {
    fs::path p = fs::path(dir) / "record.json";
    std::ifstream in(p);
    if (!in) throw std::runtime_error("missing record: " + p.string());
    json rec;
    try {
        rec = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt record " + p.string() + ": " + e.what());
    }
    if (!rec.contains("schema_version")) throw std::runtime_error("record missing schema_version");
    std::string v = rec.at("schema_version").get<std::string>();
    std::string major = v.substr(0, v.find('.'));
    std::string expect_major = std::string(kSchemaVersion);
    expect_major = expect_major.substr(0, expect_major.find('.'));
    if (major != expect_major)
        throw std::runtime_error("unsupported record schema major version " + v);
    return rec;
}

void emit_report(const std::string& run_dir, const std::string& format) {
    json rec = load_record(run_dir);
    fs::path dir(run_dir);
    if (format == "csv") {
        write_text(dir / "accuracy.csv", render_accuracy_csv(rec));
        write_text(dir / "weights.csv", render_weights_csv(rec));
    } else if (format == "markdown") {
        write_text(dir / "report.md", render_report_markdown(rec));
    } else if (format == "json") {
        write_text(dir / "report.json", rec.dump(2) + "\n");
    } else {
        throw ConfigError("unknown report format '" + format + "' (csv, json or markdown)");
    }
}

json audit_run(const std::string& run_dir) {
    json rec = load_record(run_dir);
    json out;
    out["run_dir"] = run_dir;
    json per_seed = json::array();
    for (const json& sj : rec.at("seeds")) {
        json entry;
        entry["seed"] = sj.at("seed");
        json methods;
        for (const auto& [name, mj] : sj.at("methods").items()) {
            if (mj.at("strategy").get<std::string>() != "wat") continue;
            double eta = mj.at("eta").get<double>();
            if (eta <= 0.0) continue;
            auto losses = mj.at("val_losses_normalized").get<std::vector<Vec>>();
            auto weights = mj.at("weights").get<std::vector<Vec>>();
            NoRegretReport rep = audit_no_regret(losses, weights, eta);
            methods[name] = audit_to_json(rep);
        }
        entry["audits"] = methods;
        per_seed.push_back(entry);
    }
    out["seeds"] = per_seed;
    return out;
}

}  // namespace wat
