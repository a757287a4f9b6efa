#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randuq/config.hpp"
#include "randuq/deformation.hpp"
#include "randuq/fem.hpp"
#include "randuq/mesh.hpp"
#include "randuq/sparse_grid.hpp"

namespace randuq {

/// One finished node evaluation. The stochastic point is stored padded to the
/// full model dimension so records from truncated runs share one file.
struct CollocationRecord {
    std::string key;
    std::vector<double> point;
    double qoi_raw = 0.0;
    double qoi_normalized = 0.0;
    long cg_iterations = 0;
    double seconds = 0.0;
};

struct MomentResult {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t knots = 0;
    int level = 0;
    int retained_modes = 0;
    int mesh_n = 0;
    double reference_qoi = 0.0; ///< raw value used for normalization
    double variance_clamp = 0.0;
    std::string provenance = "study";
};

struct ConvergenceStudyRow {
    int retained_modes = 0;
    int level = 0;
    std::size_t knots = 0;
    double mean_error = 0.0;
    double var_error = 0.0;
};

struct TruncationStudyRow {
    int retained_modes = 0;
    double mean_error = 0.0;
    double var_error = 0.0;
    double tail_bound = 0.0; ///< B_T of the full model past N_s
};

struct TruncationStudy {
    std::vector<TruncationStudyRow> rows;
    double fitted_slope = 0.0; ///< log-log slope of mean error vs N_s
    int reference_modes = 0;
};

/// Append-only store of node evaluations, one file per (mesh, dt, model)
/// fingerprint so a change of solver fidelity never reuses stale values.
class QoiCache {
public:
    QoiCache() = default;
    QoiCache(std::filesystem::path directory, const std::string& fingerprint, int point_dim);

    std::optional<CollocationRecord> lookup(const std::string& key) const;
    /// Inserts and appends to the backing file; keys already present are ignored.
    void insert(const CollocationRecord& record);
    std::size_t size() const { return records_.size(); }
    const std::filesystem::path& path() const { return file_; }

private:
    void append_line(const CollocationRecord& record);

    std::filesystem::path file_;
    int point_dim_ = 0;
    std::map<std::string, CollocationRecord> records_;
};

/// Drives collocation sweeps: one deterministic solve per sparse-grid node,
/// cache-backed and optionally spread over a worker pool, then a sequential
/// moment reduction in canonical node order.
class CollocationEngine {
public:
    CollocationEngine(StudyConfig config, std::filesystem::path cache_dir, int workers = 1);

    const StudyConfig& config() const { return config_; }
    const DeformationModel& model() const { return model_; }

    /// Moments at the given truncation, level and mesh. Records, when
    /// requested, come back in canonical node order.
    MomentResult run(int retained, int level, int mesh_n,
                     std::vector<CollocationRecord>* records = nullptr);

    MomentResult run_study(std::vector<CollocationRecord>* records = nullptr);

    /// High-level isotropic stand-in for an adaptive reference.
    MomentResult reference(int retained, int level, int mesh_n);

    std::vector<ConvergenceStudyRow> convergence_study(std::span<const int> retained_list,
                                                       int max_level);

    TruncationStudy truncation_study(std::span<const int> retained_list, int reference_modes);

    /// Deterministic solves triggered since construction (cache misses only).
    long solves_performed() const { return solves_performed_; }

private:
    struct NodeTask {
        std::string key;
        std::vector<double> point; ///< padded to the model dimension
    };

    CollocationRecord solve_node(const Mesh& mesh, const std::vector<int>& dirichlet,
                                 const NodeTask& task) const;
    QoiCache& cache_for(int mesh_n);
    ScalarField qoi_weight_field() const;

    StudyConfig config_;
    std::filesystem::path cache_dir_;
    int workers_ = 1;
    DeformationModel model_;
    std::map<int, QoiCache> caches_;
    long solves_performed_ = 0;
};

/// Least-squares slope of log|error| against log(abscissa); rows with zero
/// error are skipped.
double fitted_loglog_slope(std::span<const double> abscissa, std::span<const double> error);

} // namespace randuq
