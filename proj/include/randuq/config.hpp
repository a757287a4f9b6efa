#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "randuq/bounds.hpp"
#include "randuq/sparse_grid.hpp"

namespace randuq {

/// Full study description, read from a sectioned text config. Every field has
/// a default; the canonical serialization echoes all effective values so no
/// defaulting stays silent.
struct StudyConfig {
    // [model]
    int total_modes = 15;     ///< N
    double length_scale = 0.38;
    double period = 1.0;
    double scaling = 1.0 / 2.175;
    std::string decay = "linear";
    std::string variant = "upper-half-stretch";
    double coefficient = 1.0; ///< constant diffusion value a

    // [solver]
    int mesh_n = 65;
    double dt = 0.01;
    double final_time = 1.0;
    double cg_tol = 1e-10;
    double flux = 1.0; ///< natural-boundary data g2

    // [grid]
    int retained_modes = 4; ///< N_s
    int level = 4;          ///< w
    GridFamily family = GridFamily::SM;

    // [study]
    bool normalize = true;
    std::string qoi_weight = "parabolic"; ///< or "one"
    int reference_level = 6;
    int reference_mesh_n = 65;
    int reference_modes = 8;

    // [bounds]
    double alpha = 1.0;
    BoundParams bounds;

    static StudyConfig parse(std::istream& in);
    static StudyConfig parse_file(const std::filesystem::path& path);

    void validate() const;

    /// Deterministic full serialization; parsing it back reproduces the
    /// identical canonical form.
    std::string canonical() const;

    /// FNV-1a hash of the canonical form, as fixed-width hex.
    std::string hash() const;
};

} // namespace randuq
