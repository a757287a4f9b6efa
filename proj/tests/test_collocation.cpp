#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "randuq/collocation.hpp"

using namespace randuq;

namespace {

StudyConfig small_config() {
    StudyConfig cfg;
    cfg.total_modes = 3;
    cfg.mesh_n = 9;
    cfg.dt = 0.125;
    cfg.final_time = 1.0;
    cfg.retained_modes = 2;
    cfg.level = 1;
    cfg.reference_mesh_n = 9;
    cfg.reference_level = 2;
    cfg.reference_modes = 3;
    return cfg;
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "randuq_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("zero deformation collapses the spread") {
    StudyConfig cfg = small_config();
    cfg.scaling = 0.0;
    CollocationEngine engine(cfg, fresh_dir("flat"), 1);
    const MomentResult r = engine.run(2, 2, 9);
    CHECK(std::abs(r.mean - 1.0) <= 1e-10);
    CHECK(r.variance <= 1e-12);
    CHECK(r.knots == 13);
}

TEST_CASE("single-node study") {
    const StudyConfig cfg = small_config();
    CollocationEngine engine(cfg, fresh_dir("single"), 1);
    const MomentResult r = engine.run(1, 0, 9);
    CHECK(r.knots == 1);
    CHECK(r.mean == 1.0); // the lone node is the normalization solve itself
    CHECK(r.variance == 0.0);
    CHECK(engine.solves_performed() == 1);
}

TEST_CASE("cache serves nested levels") {
    const StudyConfig cfg = small_config();
    const auto dir = fresh_dir("nested");

    CollocationEngine engine(cfg, dir, 1);
    const MomentResult low = engine.run(2, 1, 9);
    CHECK(low.knots == 5);
    CHECK(engine.solves_performed() == 5);

    const MomentResult high = engine.run(2, 2, 9);
    CHECK(high.knots == 13);
    CHECK(engine.solves_performed() == 13); // exactly the new nodes

    // a cold engine with a fresh cache reproduces the same bits
    CollocationEngine cold(cfg, fresh_dir("nested_cold"), 1);
    const MomentResult direct = cold.run(2, 2, 9);
    CHECK(direct.mean == high.mean);
    CHECK(direct.variance == high.variance);

    // reloading the cache from disk issues no further solves
    CollocationEngine reload(cfg, dir, 1);
    const MomentResult replay = reload.run(2, 2, 9);
    CHECK(reload.solves_performed() == 0);
    CHECK(replay.mean == high.mean);
    CHECK(replay.variance == high.variance);
}

TEST_CASE("worker count does not change the result") {
    const StudyConfig cfg = small_config();
    CollocationEngine serial(cfg, fresh_dir("serial"), 1);
    CollocationEngine pooled(cfg, fresh_dir("pooled"), 3);

    std::vector<CollocationRecord> ra, rb;
    const MomentResult a = serial.run(2, 2, 9, &ra);
    const MomentResult b = pooled.run(2, 2, 9, &rb);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].key == rb[i].key);
        CHECK(ra[i].qoi_raw == rb[i].qoi_raw);
        CHECK(ra[i].qoi_normalized == rb[i].qoi_normalized);
    }
}

TEST_CASE("records are canonical and padded") {
    const StudyConfig cfg = small_config();
    CollocationEngine engine(cfg, fresh_dir("records"), 1);
    std::vector<CollocationRecord> records;
    engine.run(2, 1, 9, &records);
    REQUIRE(records.size() == 5);
    for (const auto& r : records) {
        CHECK(r.point.size() == 3); // padded to the full model dimension
        CHECK(r.point[2] == 0.0);
        CHECK(r.cg_iterations > 0);
        CHECK(r.qoi_raw > 0.0);
    }
    // the grid center is the normalization node
    bool found_center = false;
    for (const auto& r : records)
        if (r.key == ".") {
            found_center = true;
            CHECK(r.qoi_normalized == 1.0);
        }
    CHECK(found_center);
}

TEST_CASE("convergence study hits zero at the reference level") {
    StudyConfig cfg = small_config();
    cfg.reference_level = 2;
    CollocationEngine engine(cfg, fresh_dir("conv"), 1);
    const std::vector<int> ns = {2};
    const auto rows = engine.convergence_study(ns, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].knots == 1);
    CHECK(rows[1].knots == 5);
    CHECK(rows[2].knots == 13);
    CHECK(rows[2].mean_error == 0.0); // self-comparison at w = w_ref
    CHECK(rows[2].var_error == 0.0);
    for (const auto& r : rows) CHECK(r.retained_modes == 2);
}

TEST_CASE("truncation study") {
    const StudyConfig cfg = small_config();
    CollocationEngine engine(cfg, fresh_dir("trunc"), 1);
    const std::vector<int> ns = {1, 2, 3};
    const TruncationStudy study = engine.truncation_study(ns, 3);
    REQUIRE(study.rows.size() == 3);

    // the analytic tail bound decreases strictly
    CHECK(study.rows[0].tail_bound > study.rows[1].tail_bound);
    CHECK(study.rows[1].tail_bound > study.rows[2].tail_bound);
    CHECK(study.rows[2].tail_bound == 0.0);

    // keeping every mode leaves no truncation error
    CHECK(study.rows[2].mean_error == 0.0);
    CHECK(study.rows[2].var_error == 0.0);

    // empirical error is dominated by a tail-bound profile fitted at the
    // first retained dimension
    const double scale = study.rows[0].mean_error / study.rows[0].tail_bound;
    for (const auto& row : study.rows)
        CHECK(row.mean_error <= scale * row.tail_bound + 1e-15);
}

TEST_CASE("inadmissible runs are rejected before solving") {
    StudyConfig cfg = small_config();
    cfg.scaling = 10.0; // stretch far beyond the admissibility budget
    CollocationEngine engine(cfg, fresh_dir("inadmissible"), 1);
    CHECK_THROWS_AS(engine.run(2, 1, 9), std::domain_error);
    CHECK(engine.solves_performed() == 0);
}

TEST_CASE("cache file layout") {
    const StudyConfig cfg = small_config();
    const auto dir = fresh_dir("layout");
    CollocationEngine engine(cfg, dir, 1);
    engine.run(2, 1, 9);

    std::size_t files = 0;
    std::filesystem::path cache_file;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        ++files;
        cache_file = entry.path();
    }
    REQUIRE(files == 1);
    CHECK(cache_file.filename().string().find("n9") != std::string::npos);

    std::ifstream in(cache_file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "node_key,y_1,y_2,y_3,qoi_raw,qoi_norm,iters,seconds");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);

    // a different mesh goes to a different file
    engine.run(2, 0, 5);
    files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        ++files;
        (void)entry;
    }
    CHECK(files == 2);
}
