#include "randuq/collocation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace randuq {

namespace {

std::string fnv_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

QoiCache::QoiCache(std::filesystem::path directory, const std::string& fingerprint, int point_dim)
    : point_dim_(point_dim) {
    std::filesystem::create_directories(directory);
    file_ = directory / ("qoi_" + fingerprint + ".csv");

    std::ifstream in(file_);
    if (!in) return;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cols = split(line, ',');
        if (static_cast<int>(cols.size()) != point_dim_ + 5) continue;
        CollocationRecord r;
        r.key = cols[0];
        r.point.resize(static_cast<std::size_t>(point_dim_));
        for (int d = 0; d < point_dim_; ++d)
            r.point[static_cast<std::size_t>(d)] = std::stod(cols[static_cast<std::size_t>(d) + 1]);
        r.qoi_raw = std::stod(cols[static_cast<std::size_t>(point_dim_) + 1]);
        r.qoi_normalized = std::stod(cols[static_cast<std::size_t>(point_dim_) + 2]);
        r.cg_iterations = std::stol(cols[static_cast<std::size_t>(point_dim_) + 3]);
        r.seconds = std::stod(cols[static_cast<std::size_t>(point_dim_) + 4]);
        records_.emplace(r.key, std::move(r));
    }
}

std::optional<CollocationRecord> QoiCache::lookup(const std::string& key) const {
    const auto it = records_.find(key);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

void QoiCache::insert(const CollocationRecord& record) {
    if (records_.count(record.key)) return;
    records_.emplace(record.key, record);
    append_line(record);
}

void QoiCache::append_line(const CollocationRecord& record) {
    const bool fresh = !std::filesystem::exists(file_) || std::filesystem::file_size(file_) == 0;
    std::ofstream out(file_, std::ios::app);
    if (!out) throw std::runtime_error("cannot write cache file: " + file_.string());
    if (fresh) {
        out << "node_key";
        for (int d = 1; d <= point_dim_; ++d) out << ",y_" << d;
        out << ",qoi_raw,qoi_norm,iters,seconds\n";
    }
    out << record.key;
    for (double v : record.point) out << ',' << format_full(v);
    out << ',' << format_full(record.qoi_raw) << ',' << format_full(record.qoi_normalized) << ','
        << record.cg_iterations << ',' << format_full(record.seconds) << '\n';
}

CollocationEngine::CollocationEngine(StudyConfig config, std::filesystem::path cache_dir, int workers)
    : config_(std::move(config)),
      cache_dir_(std::move(cache_dir)),
      workers_(std::max(1, workers)),
      model_(DeformationModel::experiment(config_.total_modes, config_.length_scale,
                                          config_.period, config_.scaling, config_.mesh_n)) {
    config_.validate();
}

ScalarField CollocationEngine::qoi_weight_field() const {
    if (config_.qoi_weight == "one") return [](Vec2) { return 1.0; };
    // g(x1) g(2 x2) with g(t) = t (1 - t), supported on the lower half
    return [](Vec2 p) {
        const double gx = p.x * (1.0 - p.x);
        const double t = 2.0 * p.y;
        return gx * t * (1.0 - t);
    };
}

QoiCache& CollocationEngine::cache_for(int mesh_n) {
    auto it = caches_.find(mesh_n);
    if (it != caches_.end()) return it->second;
    std::ostringstream id;
    id << model_.signature() << ";mesh_n=" << mesh_n << ";dt=" << format_full(config_.dt)
       << ";T=" << format_full(config_.final_time) << ";cg=" << format_full(config_.cg_tol)
       << ";g2=" << format_full(config_.flux) << ";a=" << format_full(config_.coefficient)
       << ";qoi=" << config_.qoi_weight;
    char suffix[64];
    std::snprintf(suffix, sizeof suffix, "n%d_dt%.6g", mesh_n, config_.dt);
    auto [pos, inserted] =
        caches_.emplace(mesh_n, QoiCache(cache_dir_, fnv_hex(id.str()) + "_" + suffix,
                                         config_.total_modes));
    return pos->second;
}

CollocationRecord CollocationEngine::solve_node(const Mesh& mesh,
                                                const std::vector<int>& dirichlet,
                                                const NodeTask& task) const {
    const auto start = std::chrono::steady_clock::now();
    const std::span<const double> y(task.point);

    const double a_value = config_.coefficient;
    TransientProblem problem;
    problem.stiffness = assemble_stiffness(mesh, [&](Vec2 x) {
        return model_.diffusion_matrix([a_value](Vec2) { return a_value; }, x, y);
    });
    problem.mass = assemble_mass(mesh, [&](Vec2 x) { return model_.jacobian_det(x, y); });
    problem.load = assemble_neumann_load(mesh, config_.flux, [&](Vec2 mid, Vec2 normal) {
        return model_.neumann_factor(mid, y, normal);
    });
    problem.dt = config_.dt;
    problem.final_time = config_.final_time;
    problem.dirichlet = dirichlet;
    problem.cg_tol = config_.cg_tol;

    TimeStepStats stats;
    const std::vector<double> u = backward_euler_solve(problem, &stats);

    CollocationRecord record;
    record.key = task.key;
    record.point = task.point;
    record.qoi_raw = evaluate_qoi(mesh, u, qoi_weight_field());
    record.cg_iterations = stats.total_cg_iterations;
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

MomentResult CollocationEngine::run(int retained, int level, int mesh_n,
                                    std::vector<CollocationRecord>* records) {
    if (retained < 1 || retained > config_.total_modes)
        throw std::invalid_argument("retained dimension out of range");

    // the map must stay one-to-one over the whole parameter box; the stronger
    // analyticity margin is reported by the diagnostics command instead of
    // gating the sweep
    if (model_.displacement_sum() >= 1.0)
        throw std::domain_error("deformation too large: the stretch can collapse the domain");

    const SparseGridRule rule = SparseGridRule::build(retained, level, config_.family);
    const Mesh mesh = Mesh::structured(mesh_n);
    const std::vector<int> dirichlet = mesh.dirichlet_vertices();
    QoiCache& cache = cache_for(mesh_n);

    const std::uint64_t center = fraction_key(0, 1);
    const auto padded_task = [&](const NodeKey& key, std::span<const double> point) {
        NodeTask task;
        NodeKey full(static_cast<std::size_t>(config_.total_modes), center);
        std::copy(key.begin(), key.end(), full.begin());
        task.key = key_to_string(full);
        task.point.assign(static_cast<std::size_t>(config_.total_modes), 0.0);
        std::copy(point.begin(), point.end(), task.point.begin());
        return task;
    };

    // normalization solve at the origin; shares the cache with the grid center
    const NodeTask origin = padded_task(NodeKey{}, {});
    CollocationRecord origin_record;
    if (auto hit = cache.lookup(origin.key)) {
        origin_record = *hit;
    } else {
        origin_record = solve_node(mesh, dirichlet, origin);
        ++solves_performed_;
        origin_record.qoi_normalized = config_.normalize ? 1.0 : origin_record.qoi_raw;
        cache.insert(origin_record);
    }
    const double reference_qoi = origin_record.qoi_raw;

    std::vector<NodeTask> tasks(rule.size());
    std::vector<CollocationRecord> results(rule.size());
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        tasks[i] = padded_task(rule.node_keys()[i], rule.nodes()[i]);
        if (auto hit = cache.lookup(tasks[i].key))
            results[i] = *hit;
        else
            missing.push_back(i);
    }

    if (!missing.empty()) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::atomic<bool> failed{false};
        std::string failure;
        std::mutex failure_mutex;
        const int threads = std::min<int>(workers_, static_cast<int>(missing.size()));
        const auto worker = [&]() {
            while (true) {
                const std::size_t slot = next.fetch_add(1);
                if (slot >= missing.size() || failed.load()) return;
                const std::size_t i = missing[slot];
                try {
                    results[i] = solve_node(mesh, dirichlet, tasks[i]);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> guard(failure_mutex);
                    failed.store(true);
                    if (failure.empty())
                        failure = "node " + tasks[i].key + ": " + e.what();
                }
            }
        };
        if (threads <= 1) {
            worker();
        } else {
            pool.reserve(static_cast<std::size_t>(threads));
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (std::thread& t : pool) t.join();
        }
        if (failed.load()) throw std::runtime_error("collocation aborted at " + failure);
        solves_performed_ += static_cast<long>(missing.size());

        // canonical-order insertion keeps the cache file deterministic
        for (std::size_t i : missing) {
            results[i].qoi_normalized =
                config_.normalize ? results[i].qoi_raw / reference_qoi : results[i].qoi_raw;
            cache.insert(results[i]);
        }
    }

    std::vector<double> values(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        values[i] = config_.normalize ? results[i].qoi_raw / reference_qoi : results[i].qoi_raw;
        results[i].qoi_normalized = values[i];
    }
    const Moments m = rule.moments(values);

    MomentResult out;
    out.mean = m.mean;
    out.variance = m.variance;
    out.variance_clamp = m.clamp_magnitude;
    out.knots = rule.size();
    out.level = level;
    out.retained_modes = retained;
    out.mesh_n = mesh_n;
    out.reference_qoi = reference_qoi;
    if (records) *records = results;
    return out;
}

MomentResult CollocationEngine::run_study(std::vector<CollocationRecord>* records) {
    return run(config_.retained_modes, config_.level, config_.mesh_n, records);
}

MomentResult CollocationEngine::reference(int retained, int level, int mesh_n) {
    MomentResult r = run(retained, level, mesh_n);
    std::ostringstream tag;
    tag << "reference w=" << level << " mesh=" << mesh_n << " N_s=" << retained;
    r.provenance = tag.str();
    return r;
}

std::vector<ConvergenceStudyRow> CollocationEngine::convergence_study(
    std::span<const int> retained_list, int max_level) {
    std::vector<ConvergenceStudyRow> rows;
    for (int retained : retained_list) {
        const MomentResult ref =
            reference(retained, config_.reference_level, config_.reference_mesh_n);
        for (int w = 0; w <= max_level; ++w) {
            const MomentResult r = run(retained, w, config_.reference_mesh_n);
            rows.push_back({retained, w, r.knots, std::abs(r.mean - ref.mean),
                            std::abs(r.variance - ref.variance)});
        }
    }
    return rows;
}

TruncationStudy CollocationEngine::truncation_study(std::span<const int> retained_list,
                                                    int reference_modes) {
    TruncationStudy study;
    study.reference_modes = reference_modes;
    const MomentResult ref = reference(reference_modes, config_.level, config_.mesh_n);

    std::vector<double> xs, es;
    for (int retained : retained_list) {
        const MomentResult r = run(retained, config_.level, config_.mesh_n);
        TruncationStudyRow row;
        row.retained_modes = retained;
        row.mean_error = std::abs(r.mean - ref.mean);
        row.var_error = std::abs(r.variance - ref.variance);
        row.tail_bound = model_.tail_jacobian_bound(retained);
        study.rows.push_back(row);
        xs.push_back(static_cast<double>(retained));
        es.push_back(row.mean_error);
    }
    study.fitted_slope = fitted_loglog_slope(xs, es);
    return study;
}

double fitted_loglog_slope(std::span<const double> abscissa, std::span<const double> error) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        if (!(error[i] > 0.0)) continue;
        const double lx = std::log(abscissa[i]);
        const double ly = std::log(error[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace randuq
