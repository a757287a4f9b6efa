#pragma once

#include <functional>
#include <span>
#include <vector>

#include "randuq/geometry.hpp"
#include "randuq/mesh.hpp"
#include "randuq/sparse_matrix.hpp"

namespace randuq {

using ScalarField = std::function<double(Vec2)>;
using MatrixField = std::function<Mat2(Vec2)>;
/// Boundary transport factor evaluated at an edge midpoint with the reference
/// outward normal; identity map corresponds to a constant 1.
using EdgeFactor = std::function<double(Vec2, Vec2)>;

/// Stiffness with a matrix-valued coefficient, one-point (barycenter)
/// quadrature per triangle. The coefficient is symmetrized so the assembled
/// matrix is bitwise symmetric.
SparseMatrix assemble_stiffness(const Mesh& mesh, const MatrixField& coefficient);

/// Consistent P1 mass scaled by a positive weight at the barycenter.
SparseMatrix assemble_mass(const Mesh& mesh, const ScalarField& weight);

/// Volume load from a scalar source, barycenter quadrature.
std::vector<double> assemble_domain_load(const Mesh& mesh, const ScalarField& source);

/// Natural-boundary load: each edge tagged neumann contributes
/// factor(midpoint, normal) * flux * |edge| / 2 to both endpoints.
std::vector<double> assemble_neumann_load(const Mesh& mesh, double flux,
                                          const EdgeFactor& factor = {});

struct TransientProblem {
    SparseMatrix stiffness;
    SparseMatrix mass;
    std::vector<double> load;
    std::vector<double> initial;
    double dt = 0.0;
    double final_time = 0.0;
    std::vector<int> dirichlet;
    double cg_tol = 1e-10;
    /// Optional multiplicative time dependence of the load; defaults to 1.
    std::function<double(double)> load_scale;
};

struct TimeStepStats {
    int steps = 0;
    long total_cg_iterations = 0;
    double max_relative_residual = 0.0;
};

using TrajectoryHook = std::function<void(int, double, std::span<const double>)>;

/// Implicit Euler stepping of (M + dt K) u^{k+1} = M u^k + dt b, essential
/// dofs pinned to zero each step. Returns the final-time state. Throws if a
/// linear solve fails to converge, reporting iterations and residual.
std::vector<double> backward_euler_solve(const TransientProblem& problem,
                                         TimeStepStats* stats = nullptr,
                                         const TrajectoryHook& hook = {});

/// Weighted integral of the P1 field over the triangles below the horizontal
/// split line: exact element integrals of u times the weight at the barycenter.
/// Throws if a triangle straddles the split.
double evaluate_qoi(const Mesh& mesh, std::span<const double> values,
                    const ScalarField& weight, double split = 0.5);

/// sqrt(e^T M e) with consistent unweighted mass, e the nodal difference to a
/// reference field.
double l2_error(const Mesh& mesh, std::span<const double> values, const ScalarField& reference);

struct ConvergenceRow {
    int vertices_per_side = 0;
    double h = 0.0;
    double error = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double rate = 0.0; ///< least-squares slope of log error vs log h
};

struct ManufacturedCase {
    std::function<double(Vec2, double)> exact; ///< must vanish on all four sides
    ScalarField forcing_space;
    std::function<double(double)> forcing_time;
};

/// Heat-equation verification run: all-Dirichlet square, dt = dt_factor * h^2,
/// final-time L2 error per mesh and the fitted spatial rate.
ConvergenceResult manufactured_convergence(const ManufacturedCase& mcase,
                                           std::span<const int> mesh_sizes,
                                           double final_time,
                                           double dt_factor = 1.0);

} // namespace randuq
