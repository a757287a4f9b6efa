#include "randuq/fem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace randuq {

namespace {

struct ElementGeometry {
    Vec2 grad[3]; ///< gradients of the three hat functions
    double area = 0.0;
};

ElementGeometry element_geometry(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Vec2 p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Vec2 p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const double twice_area = cross(p1 - p0, p2 - p0);
    if (twice_area <= 0.0) throw std::invalid_argument("triangle is degenerate or clockwise");
    ElementGeometry g;
    g.area = 0.5 * twice_area;
    g.grad[0] = {(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area};
    g.grad[1] = {(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area};
    g.grad[2] = {(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area};
    return g;
}

} // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const MatrixField& coefficient) {
    std::vector<Triplet> triplets;
    triplets.reserve(9 * mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const ElementGeometry g = element_geometry(mesh, static_cast<int>(t));
        Mat2 c = coefficient(mesh.triangle_barycenter(static_cast<int>(t)));
        if (!std::isfinite(c.a00) || !std::isfinite(c.a01) || !std::isfinite(c.a10) ||
            !std::isfinite(c.a11))
            throw std::invalid_argument("non-finite diffusion coefficient entry");
        const double off = 0.5 * (c.a01 + c.a10);
        const auto& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const Vec2 gi = g.grad[i];
                const Vec2 gj = g.grad[j];
                // written so that the (i,j) and (j,i) values round identically
                const double v = g.area * (c.a00 * gi.x * gj.x + c.a11 * gi.y * gj.y +
                                           off * (gi.x * gj.y + gi.y * gj.x));
                triplets.push_back({tri[static_cast<std::size_t>(i)],
                                    tri[static_cast<std::size_t>(j)], v});
            }
        }
    }
    return SparseMatrix::from_triplets(static_cast<int>(mesh.vertices.size()), std::move(triplets));
}

SparseMatrix assemble_mass(const Mesh& mesh, const ScalarField& weight) {
    std::vector<Triplet> triplets;
    triplets.reserve(9 * mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double area = mesh.triangle_area(static_cast<int>(t));
        const double w = weight(mesh.triangle_barycenter(static_cast<int>(t)));
        if (!(w > 0.0)) throw std::invalid_argument("mass weight must be positive");
        const double scale = w * area / 12.0;
        const auto& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                triplets.push_back({tri[static_cast<std::size_t>(i)],
                                    tri[static_cast<std::size_t>(j)],
                                    scale * (i == j ? 2.0 : 1.0)});
    }
    return SparseMatrix::from_triplets(static_cast<int>(mesh.vertices.size()), std::move(triplets));
}

std::vector<double> assemble_domain_load(const Mesh& mesh, const ScalarField& source) {
    std::vector<double> load(mesh.vertices.size(), 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double area = mesh.triangle_area(static_cast<int>(t));
        const double f = source(mesh.triangle_barycenter(static_cast<int>(t)));
        const auto& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            load[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])] += f * area / 3.0;
    }
    return load;
}

std::vector<double> assemble_neumann_load(const Mesh& mesh, double flux, const EdgeFactor& factor) {
    std::vector<double> load(mesh.vertices.size(), 0.0);
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        if (e.tag != BoundaryTag::neumann) continue;
        const Vec2 pa = mesh.vertices[static_cast<std::size_t>(e.a)];
        const Vec2 pb = mesh.vertices[static_cast<std::size_t>(e.b)];
        const double len = norm(pb - pa);
        const Vec2 mid = 0.5 * (pa + pb);
        const double f = factor ? factor(mid, e.outward_normal) : 1.0;
        const double v = f * flux * len / 2.0;
        load[static_cast<std::size_t>(e.a)] += v;
        load[static_cast<std::size_t>(e.b)] += v;
    }
    return load;
}

std::vector<double> backward_euler_solve(const TransientProblem& problem,
                                         TimeStepStats* stats,
                                         const TrajectoryHook& hook) {
    const int n = problem.mass.size();
    if (problem.dt <= 0.0 || problem.final_time <= 0.0)
        throw std::invalid_argument("time step and final time must be positive");
    const double ratio = problem.final_time / problem.dt;
    const int steps = static_cast<int>(std::lround(ratio));
    if (steps < 1 || std::abs(steps - ratio) > 1e-8 * ratio + 1e-12)
        throw std::invalid_argument("time step must divide the final time");

    SparseMatrix system = problem.mass.scaled_sum(1.0, problem.dt, problem.stiffness);
    system.constrain(problem.dirichlet);

    std::vector<double> u = problem.initial.empty()
                                ? std::vector<double>(static_cast<std::size_t>(n), 0.0)
                                : problem.initial;
    if (static_cast<int>(u.size()) != n)
        throw std::invalid_argument("initial state size does not match the operators");
    for (int d : problem.dirichlet) u[static_cast<std::size_t>(d)] = 0.0;

    TimeStepStats local;
    std::vector<double> rhs(static_cast<std::size_t>(n));
    std::vector<double> previous = u;
    std::vector<double> guess(static_cast<std::size_t>(n));
    for (int k = 0; k < steps; ++k) {
        const double t_next = (k + 1) * problem.dt;
        problem.mass.multiply(u, rhs);
        if (!problem.load.empty()) {
            const double scale = problem.load_scale ? problem.load_scale(t_next) : 1.0;
            for (int i = 0; i < n; ++i)
                rhs[static_cast<std::size_t>(i)] += problem.dt * scale * problem.load[static_cast<std::size_t>(i)];
        }
        for (int d : problem.dirichlet) rhs[static_cast<std::size_t>(d)] = 0.0;

        // linear predictor as the CG start
        for (int i = 0; i < n; ++i)
            guess[static_cast<std::size_t>(i)] =
                k == 0 ? u[static_cast<std::size_t>(i)]
                       : 2.0 * u[static_cast<std::size_t>(i)] - previous[static_cast<std::size_t>(i)];
        previous = u;

        SolveReport report;
        u = solve_linear(system, rhs, problem.cg_tol, 0, guess, &report);
        local.total_cg_iterations += report.iterations;
        local.max_relative_residual = std::max(local.max_relative_residual, report.relative_residual);
        if (!report.converged) {
            std::ostringstream msg;
            msg << "linear solve did not converge at step " << k + 1 << ": " << report.iterations
                << " iterations, relative residual " << report.relative_residual;
            throw std::runtime_error(msg.str());
        }
        local.steps = k + 1;
        if (hook) hook(k + 1, t_next, u);
    }
    if (stats) *stats = local;
    return u;
}

double evaluate_qoi(const Mesh& mesh, std::span<const double> values,
                    const ScalarField& weight, double split) {
    if (values.size() != mesh.vertices.size())
        throw std::invalid_argument("nodal vector size does not match the mesh");
    const double tol = 1e-12;
    double q = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        int below = 0, above = 0;
        for (int i = 0; i < 3; ++i) {
            const double y = mesh.vertices[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])].y;
            if (y <= split + tol) ++below;
            if (y >= split - tol) ++above;
        }
        if (below < 3 && above < 3)
            throw std::invalid_argument("subdomain split is not aligned with the mesh");
        if (below < 3) continue;
        const double area = mesh.triangle_area(static_cast<int>(t));
        const double w = weight(mesh.triangle_barycenter(static_cast<int>(t)));
        const double u_mean = (values[static_cast<std::size_t>(tri[0])] +
                               values[static_cast<std::size_t>(tri[1])] +
                               values[static_cast<std::size_t>(tri[2])]) / 3.0;
        q += w * area * u_mean;
    }
    return q;
}

double l2_error(const Mesh& mesh, std::span<const double> values, const ScalarField& reference) {
    std::vector<double> e(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        e[i] = values[i] - reference(mesh.vertices[i]);
    const SparseMatrix m = assemble_mass(mesh, [](Vec2) { return 1.0; });
    std::vector<double> me(e.size());
    m.multiply(e, me);
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * me[i];
    return std::sqrt(std::max(s, 0.0));
}

ConvergenceResult manufactured_convergence(const ManufacturedCase& mcase,
                                           std::span<const int> mesh_sizes,
                                           double final_time,
                                           double dt_factor) {
    ConvergenceResult result;
    for (int n : mesh_sizes) {
        const Mesh mesh = Mesh::structured(n, BoundaryLayout::all_dirichlet);
        const double h = mesh.h();
        const double dt_target = dt_factor * h * h;
        const int steps = std::max(1, static_cast<int>(std::ceil(final_time / dt_target)));

        TransientProblem problem;
        problem.stiffness = assemble_stiffness(mesh, [](Vec2) { return Mat2::identity(); });
        problem.mass = assemble_mass(mesh, [](Vec2) { return 1.0; });
        problem.load = assemble_domain_load(mesh, mcase.forcing_space);
        problem.load_scale = mcase.forcing_time;
        problem.initial.resize(mesh.vertices.size());
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
            problem.initial[i] = mcase.exact(mesh.vertices[i], 0.0);
        problem.dt = final_time / steps;
        problem.final_time = final_time;
        problem.dirichlet = mesh.dirichlet_vertices();

        const std::vector<double> u = backward_euler_solve(problem);
        const double err = l2_error(mesh, u, [&](Vec2 x) { return mcase.exact(x, final_time); });
        result.rows.push_back({n, h, err});
    }

    // least-squares slope of log(error) against log(h)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (const ConvergenceRow& r : result.rows) {
        if (r.error <= 0.0) continue;
        const double lx = std::log(r.h);
        const double ly = std::log(r.error);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    result.rate = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return result;
}

} // namespace randuq
