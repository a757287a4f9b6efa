#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "randuq/bounds.hpp"
#include "randuq/collocation.hpp"
#include "randuq/config.hpp"
#include "randuq/deformation.hpp"

namespace {

using randuq::CollocationEngine;
using randuq::CollocationRecord;
using randuq::MomentResult;
using randuq::StudyConfig;

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

struct OutputSink {
    std::filesystem::path dir;
    std::string command;
    std::string config_hash;
    std::vector<std::string> outputs;

    void write_text(const std::string& name, const std::string& text) {
        std::filesystem::create_directories(dir);
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write output file: " + (dir / name).string());
        out << text;
        outputs.push_back(name);
    }

    void finish(const std::string& status) {
        std::filesystem::create_directories(dir);
        nlohmann::json manifest;
        // fold into an existing manifest so every file in the directory keeps
        // exactly one entry
        {
            std::ifstream in(dir / "manifest.json");
            if (in) {
                try {
                    in >> manifest;
                } catch (const nlohmann::json::exception&) {
                    manifest = nlohmann::json::object();
                }
            }
        }
        manifest["artifact_version"] = "1.0.0";
        manifest["config_hash"] = config_hash;
        manifest["created_utc"] = timestamp_utc();
        if (!manifest.contains("studies") || !manifest["studies"].is_array())
            manifest["studies"] = nlohmann::json::array();
        nlohmann::json entry;
        entry["name"] = command;
        entry["status"] = status;
        entry["outputs"] = outputs;
        auto& studies = manifest["studies"];
        bool replaced = false;
        for (auto& existing : studies) {
            if (existing.value("name", "") == command) {
                existing = entry;
                replaced = true;
                break;
            }
        }
        if (!replaced) studies.push_back(entry);
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << manifest.dump(2) << '\n';
    }
};

StudyConfig load_config(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error("config file not found: " + path);
    return StudyConfig::parse_file(path);
}

int effective_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string records_csv(const std::vector<CollocationRecord>& records, int point_dim) {
    std::string text = "node_key";
    for (int d = 1; d <= point_dim; ++d) text += ",y_" + std::to_string(d);
    text += ",qoi_raw,qoi_norm,iters,seconds\n";
    for (const CollocationRecord& r : records) {
        text += r.key;
        for (double v : r.point) text += "," + sci(v);
        text += "," + sci(r.qoi_raw) + "," + sci(r.qoi_normalized) + "," +
                std::to_string(r.cg_iterations) + "," + sci(r.seconds) + "\n";
    }
    return text;
}

int run_command(const std::string& config_path, const std::string& out_dir, int workers,
                const std::string& grid_dump) {
    const StudyConfig cfg = load_config(config_path);
    OutputSink sink{out_dir, "run", cfg.hash(), {}};

    CollocationEngine engine(cfg, std::filesystem::path(out_dir) / "cache", effective_workers(workers));
    const auto start = std::chrono::steady_clock::now();
    std::vector<CollocationRecord> records;
    const MomentResult result = engine.run_study(&records);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::string moments = "mean,variance,knots,w,N_s,mesh_n,reference_qoi\n";
    moments += sci(result.mean) + "," + sci(result.variance) + "," + std::to_string(result.knots) +
               "," + std::to_string(result.level) + "," + std::to_string(result.retained_modes) +
               "," + std::to_string(result.mesh_n) + "," + sci(result.reference_qoi) + "\n";
    sink.write_text("moments.csv", moments);
    sink.write_text("records.csv", records_csv(records, cfg.total_modes));
    sink.write_text("effective_config.cfg", cfg.canonical());
    if (!grid_dump.empty()) {
        const auto rule = randuq::SparseGridRule::build(cfg.retained_modes, cfg.level, cfg.family);
        std::ostringstream os;
        rule.dump(os);
        sink.write_text(grid_dump, os.str());
    }
    sink.finish("ok");

    if (result.variance_clamp > 1e-10)
        std::cerr << "warning: variance clamped to zero (magnitude " << result.variance_clamp << ")\n";
    std::cout << "mean = " << result.mean << "\n"
              << "variance = " << result.variance << "\n"
              << "knots = " << result.knots << "\n"
              << "solves = " << engine.solves_performed() << "\n"
              << "wall_seconds = " << wall << "\n";
    return 0;
}

int converge_command(const std::string& config_path, const std::string& out_dir, int workers,
                     int w_max, std::vector<int> ns_list) {
    const StudyConfig cfg = load_config(config_path);
    OutputSink sink{out_dir, "converge", cfg.hash(), {}};
    if (ns_list.empty()) ns_list = {2, 3, 4};

    CollocationEngine engine(cfg, std::filesystem::path(out_dir) / "cache", effective_workers(workers));
    const auto rows = engine.convergence_study(ns_list, w_max);

    std::string csv = "N_s,w,knots,mean_error,var_error\n";
    for (const auto& r : rows)
        csv += std::to_string(r.retained_modes) + "," + std::to_string(r.level) + "," +
               std::to_string(r.knots) + "," + sci(r.mean_error) + "," + sci(r.var_error) + "\n";
    sink.write_text("convergence.csv", csv);
    sink.write_text("effective_config.cfg", cfg.canonical());
    sink.finish("ok");

    std::cout << "N_s\tw\tknots\tmean_error\tvar_error\n";
    for (const auto& r : rows)
        std::cout << r.retained_modes << '\t' << r.level << '\t' << r.knots << '\t' << r.mean_error
                  << '\t' << r.var_error << '\n';
    return 0;
}

int truncate_command(const std::string& config_path, const std::string& out_dir, int workers,
                     std::vector<int> ns_list) {
    const StudyConfig cfg = load_config(config_path);
    OutputSink sink{out_dir, "truncate", cfg.hash(), {}};
    if (ns_list.empty()) ns_list = {2, 3, 4, 6};

    CollocationEngine engine(cfg, std::filesystem::path(out_dir) / "cache", effective_workers(workers));
    const auto study = engine.truncation_study(ns_list, cfg.reference_modes);

    std::string csv = "N_s,mean_error,var_error,B_T_bound\n";
    for (const auto& r : study.rows)
        csv += std::to_string(r.retained_modes) + "," + sci(r.mean_error) + "," + sci(r.var_error) +
               "," + sci(r.tail_bound) + "\n";
    sink.write_text("truncation.csv", csv);
    sink.write_text("effective_config.cfg", cfg.canonical());
    sink.finish("ok");

    std::cout << "N_s\tmean_error\tvar_error\tB_T_bound\n";
    for (const auto& r : study.rows)
        std::cout << r.retained_modes << '\t' << r.mean_error << '\t' << r.var_error << '\t'
                  << r.tail_bound << '\n';
    std::cout << "reference N_s = " << study.reference_modes << "\n"
              << "fitted mean-error slope = " << study.fitted_slope << "\n";
    return 0;
}

int plan_command(const std::string& config_path, double tol) {
    randuq::BoundParams params;
    if (!config_path.empty()) params = load_config(config_path).bounds;
    const randuq::ComplexityPlan plan = randuq::complexity_plan(tol, params);
    std::cout << "tol = " << tol << "\n"
              << "decay_ratio = " << plan.decay_ratio << "\n"
              << "N_s_required = " << plan.retained_required << "\n"
              << "knot_exponent = " << plan.knot_exponent << "\n"
              << "eta_required = " << plan.knots_required << "\n"
              << "W_total = " << plan.work_total << "\n";
    return 0;
}

int diag_command(const std::string& config_path) {
    const StudyConfig cfg = load_config(config_path);
    const auto model = randuq::DeformationModel::experiment(
        cfg.total_modes, cfg.length_scale, cfg.period, cfg.scaling, cfg.mesh_n);
    const auto truncated = model.truncate(cfg.retained_modes);
    const randuq::RegionDiagnostics d =
        truncated.region_diagnostics(2, cfg.coefficient, cfg.coefficient, cfg.alpha);
    std::cout << "N_s = " << cfg.retained_modes << "\n"
              << "jacobian_sum = " << d.jacobian_sum << "\n"
              << "displacement_sum = " << d.displacement_sum << "\n"
              << "delta_tilde = " << d.delta_tilde << "\n"
              << "gamma = " << d.gamma << "\n"
              << "beta_max = " << d.beta_max << "\n"
              << "tau = " << d.tau << "\n"
              << "sigma_hat = " << d.sigma_hat << "\n"
              << "alpha = " << d.alpha << "\n"
              << "B_tilde = " << d.B_tilde << "\n"
              << "D_tilde = " << d.D_tilde << "\n"
              << "C_tilde = " << d.C_tilde << "\n"
              << "epsilon = " << d.epsilon << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-grid collocation moments for a parabolic problem on a randomly deformed domain"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int workers = 0;
    int seed = 0; // reserved; the pipeline is deterministic
    int w_max = 4;
    std::vector<int> ns_list;
    double tol = 0.0;
    std::string grid_dump;

    CLI::App* cmd_run = app.add_subcommand("run", "single collocation run: mean, variance, records");
    cmd_run->add_option("--config", config_path, "config file")->required();
    cmd_run->add_option("--out", out_dir, "output directory");
    cmd_run->add_option("--workers", workers, "worker threads (0 = hardware)");
    cmd_run->add_option("--seed", seed, "reserved");
    cmd_run->add_option("--grid-dump", grid_dump, "also write the sparse grid table to this file");

    CLI::App* cmd_converge = app.add_subcommand("converge", "level sweep against an isotropic reference");
    cmd_converge->add_option("--config", config_path, "config file")->required();
    cmd_converge->add_option("--out", out_dir, "output directory");
    cmd_converge->add_option("--workers", workers, "worker threads (0 = hardware)");
    cmd_converge->add_option("--seed", seed, "reserved");
    cmd_converge->add_option("--w-max", w_max, "largest level in the sweep");
    cmd_converge->add_option("--ns-list", ns_list, "retained dimensions")->delimiter(',');

    CLI::App* cmd_truncate = app.add_subcommand("truncate", "truncation sweep at fixed level");
    cmd_truncate->add_option("--config", config_path, "config file")->required();
    cmd_truncate->add_option("--out", out_dir, "output directory");
    cmd_truncate->add_option("--workers", workers, "worker threads (0 = hardware)");
    cmd_truncate->add_option("--seed", seed, "reserved");
    cmd_truncate->add_option("--ns-list", ns_list, "retained dimensions")->delimiter(',');

    CLI::App* cmd_plan = app.add_subcommand("plan", "work planner for a target tolerance");
    cmd_plan->add_option("--tol", tol, "target tolerance")->required();
    cmd_plan->add_option("--config", config_path, "config file for the bound constants");

    CLI::App* cmd_diag = app.add_subcommand("diag", "admissibility and analyticity-region diagnostics");
    cmd_diag->add_option("--config", config_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_run->parsed()) return run_command(config_path, out_dir, workers, grid_dump);
        if (cmd_converge->parsed()) return converge_command(config_path, out_dir, workers, w_max, ns_list);
        if (cmd_truncate->parsed()) return truncate_command(config_path, out_dir, workers, ns_list);
        if (cmd_plan->parsed()) return plan_command(config_path, tol);
        if (cmd_diag->parsed()) return diag_command(config_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::overflow_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << '\n';
        return what.rfind("config file not found", 0) == 0 ? 2 : 1;
    }
    return 0;
}
