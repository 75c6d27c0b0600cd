#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "wat/experiment.hpp"
#include "wat/golden.hpp"

namespace fs = std::filesystem;

namespace {

fs::path run_root() {
    if (const char* root = std::getenv("WAT_RUN_ROOT")) return fs::path(root);
    return fs::path("runs");
}

fs::path resolve_out(const std::string& out, const std::string& config_path,
                     const char* suffix) {
    if (!out.empty()) return run_root() / out;
    return run_root() / (fs::path(config_path).stem().string() + suffix);
}

void flag_failed(const fs::path& dir, const std::string& why) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream rec(dir / "record.json", std::ios::binary);
    wat::json j;
    j["failed"] = true;
    j["error"] = why;
    rec << j.dump(2) << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wat: worst-class adversarial training lab"};
    app.require_subcommand(1);

    std::string config_path, run_dir, out, format = "markdown";
    std::vector<double> etas;

    CLI::App* run = app.add_subcommand("run", "train, evaluate and persist an experiment");
    run->add_option("config", config_path, "experiment config (json)")->required();
    run->add_option("--out", out, "run directory name under the run root");

    CLI::App* sweep = app.add_subcommand("sweep-eta", "one WAT run per eta plus baseline");
    sweep->add_option("config", config_path, "experiment config (json)")->required();
    sweep->add_option("--etas", etas, "eta values (default from config)");
    sweep->add_option("--out", out, "run directory name under the run root");

    CLI::App* report = app.add_subcommand("report", "re-render tables from a stored record");
    report->add_option("run_dir", run_dir, "run directory")->required();
    report->add_option("--format", format, "csv, json or markdown")
        ->check(CLI::IsMember({"csv", "json", "markdown"}));

    CLI::App* audit = app.add_subcommand("audit", "re-run the no-regret auditors on a record");
    audit->add_option("run_dir", run_dir, "run directory")->required();

    app.add_subcommand("golden-rho", "recompute the paper tables' rho values and diff");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    fs::path dir;
    try {
        if (run->parsed()) {
            wat::ExperimentConfig cfg = wat::load_config(config_path);
            dir = resolve_out(out, config_path, "");
            auto t0 = std::chrono::steady_clock::now();
            try {
                wat::json rec = wat::run_experiment_record(cfg);
                wat::write_run_dir(rec, dir.string(), seconds_since(t0));
            } catch (const std::runtime_error& e) {
                flag_failed(dir, e.what());
                throw;
            }
            std::cout << "run written to " << dir.string() << "\n";
        } else if (sweep->parsed()) {
            wat::ExperimentConfig cfg = wat::load_config(config_path);
            if (etas.empty()) etas = cfg.etas;
            dir = resolve_out(out, config_path, "-sweep");
            auto t0 = std::chrono::steady_clock::now();
            wat::json rec = wat::sweep_eta_record(cfg, etas);
            wat::write_sweep_dir(rec, dir.string(), seconds_since(t0));
            std::cout << "sweep written to " << dir.string() << "\n";
        } else if (report->parsed()) {
            wat::emit_report(run_dir, format);
            std::cout << "report (" << format << ") written to " << run_dir << "\n";
        } else if (audit->parsed()) {
            wat::json rep = wat::audit_run(run_dir);
            std::cout << rep.dump(2) << "\n";
            for (const wat::json& s : rep.at("seeds"))
                for (const auto& [name, a] : s.at("audits").items())
                    if (!a.at("inequality_holds").get<bool>()) {
                        std::cerr << "audit failed for method " << name << "\n";
                        return 2;
                    }
        } else {  // golden-rho
            auto rows = wat::recompute_golden_rho();
            std::cout << wat::render_golden_rho_report(rows);
            for (const auto& r : rows)
                if (!r.matches) return 2;
        }
    } catch (const wat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
