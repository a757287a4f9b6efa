#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "randuq/fem.hpp"

using namespace randuq;

namespace {

struct Lcg {
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    double next() {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>((s >> 11) & ((1ull << 52) - 1)) / static_cast<double>(1ull << 52);
    }
};

Mesh reference_triangle() {
    Mesh m;
    m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    m.triangles = {{0, 1, 2}};
    m.vertices_per_side = 2;
    return m;
}

template <typename F>
double simpson(const F& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("structured mesh shape") {
    const Mesh m2 = Mesh::structured(2);
    CHECK(m2.vertices.size() == 4);
    CHECK(m2.triangles.size() == 2);
    CHECK(m2.boundary_edges.size() == 4);

    const Mesh m3 = Mesh::structured(3);
    CHECK(m3.vertices.size() == 9);
    CHECK(m3.triangles.size() == 8);

    for (int n : {2, 3, 9}) {
        const Mesh m = Mesh::structured(n);
        double total = 0.0;
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            const double a = m.triangle_area(static_cast<int>(t));
            CHECK(a > 0.0);
            total += a;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }

    // top edge essential, other sides natural
    int dirichlet_edges = 0;
    for (const BoundaryEdge& e : m3.boundary_edges)
        if (e.tag == BoundaryTag::dirichlet) {
            ++dirichlet_edges;
            CHECK(m3.vertices[static_cast<std::size_t>(e.a)].y == 1.0);
            CHECK(m3.vertices[static_cast<std::size_t>(e.b)].y == 1.0);
        }
    CHECK(dirichlet_edges == 2);
    CHECK(m3.dirichlet_vertices() == std::vector<int>{6, 7, 8});

    CHECK_THROWS_AS(Mesh::structured(1), std::invalid_argument);
}

TEST_CASE("stiffness assembly") {
    const Mesh mesh = Mesh::structured(5);
    const auto ident = [](Vec2) { return Mat2::identity(); };
    const SparseMatrix k = assemble_stiffness(mesh, ident);

    // constants lie in the kernel: interior row sums vanish
    const std::vector<double> ones(mesh.vertices.size(), 1.0);
    std::vector<double> k1(mesh.vertices.size());
    k.multiply(ones, k1);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec2 v = mesh.vertices[i];
        const bool boundary = v.x == 0.0 || v.x == 1.0 || v.y == 0.0 || v.y == 1.0;
        if (!boundary) CHECK(std::abs(k1[i]) <= 1e-13);
    }

    // bitwise symmetry of assembled entries
    for (int i = 0; i < k.size(); ++i)
        for (int kk = k.row_offsets()[static_cast<std::size_t>(i)];
             kk < k.row_offsets()[static_cast<std::size_t>(i) + 1]; ++kk) {
            const int j = k.columns()[static_cast<std::size_t>(kk)];
            CHECK(k.coeff(i, j) == k.coeff(j, i));
        }

    // scaling the coefficient scales the matrix exactly
    const SparseMatrix k2 = assemble_stiffness(mesh, [](Vec2) { return 2.0 * Mat2::identity(); });
    for (std::size_t i = 0; i < k.values().size(); ++i)
        CHECK(k2.values()[i] == 2.0 * k.values()[i]);

    // linearity in the coefficient
    const Mat2 g1 = {1.3, 0.2, 0.2, 0.9};
    const Mat2 g2 = {0.7, -0.1, -0.1, 1.8};
    const double a = 0.3, b = 1.7;
    const SparseMatrix ka = assemble_stiffness(mesh, [&](Vec2) { return g1; });
    const SparseMatrix kb = assemble_stiffness(mesh, [&](Vec2) { return g2; });
    const SparseMatrix kc = assemble_stiffness(mesh, [&](Vec2) { return a * g1 + b * g2; });
    const SparseMatrix kd = ka.scaled_sum(a, b, kb);
    for (std::size_t i = 0; i < kc.values().size(); ++i)
        CHECK(kc.values()[i] == doctest::Approx(kd.values()[i]).epsilon(1e-13));

    const auto bad = [](Vec2) { return Mat2{std::nan(""), 0, 0, 1}; };
    CHECK_THROWS_AS(assemble_stiffness(mesh, bad), std::invalid_argument);
}

TEST_CASE("mass assembly") {
    const Mesh tri = reference_triangle();
    const SparseMatrix m = assemble_mass(tri, [](Vec2) { return 1.0; });
    const double scale = 0.5 / 12.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(m.coeff(i, j) == doctest::Approx(scale * (i == j ? 2.0 : 1.0)).epsilon(1e-15));

    const Mesh mesh = Mesh::structured(9);
    const SparseMatrix mm = assemble_mass(mesh, [](Vec2) { return 1.0; });
    double total = 0.0;
    for (double v : mm.values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));

    // positive definiteness: CG solves a random right-hand side
    Lcg rng;
    std::vector<double> rhs(mesh.vertices.size());
    for (double& v : rhs) v = rng.next() - 0.5;
    SolveReport report;
    solve_linear(mm, rhs, 1e-12, 0, {}, &report);
    CHECK(report.converged);

    CHECK_THROWS_AS(assemble_mass(mesh, [](Vec2) { return -1.0; }), std::invalid_argument);
}

TEST_CASE("natural-boundary load") {
    const Mesh mesh = Mesh::structured(3);
    const std::vector<double> load = assemble_neumann_load(mesh, 1.0);

    double total = 0.0;
    for (double v : load) total += v;
    CHECK(total == doctest::Approx(3.0).epsilon(1e-14)); // three unit sides

    // each vertex on a natural edge collects half its adjacent edge lengths
    const double h = 0.5;
    CHECK(load[0] == doctest::Approx(h).epsilon(1e-14));        // corner: bottom + left
    CHECK(load[1] == doctest::Approx(h).epsilon(1e-14));        // bottom midpoint
    CHECK(load[4] == doctest::Approx(0.0).epsilon(1e-14));      // interior
    CHECK(load[6] == doctest::Approx(h / 2.0).epsilon(1e-14));  // top-left corner: left edge only

    // factor callable scales edges individually
    const std::vector<double> scaled =
        assemble_neumann_load(mesh, 1.0, [](Vec2, Vec2) { return 2.0; });
    for (std::size_t i = 0; i < load.size(); ++i)
        CHECK(scaled[i] == doctest::Approx(2.0 * load[i]).epsilon(1e-15));
}

TEST_CASE("conjugate gradient") {
    const SparseMatrix eye = SparseMatrix::identity(7);
    std::vector<double> b = {1, -2, 3, -4, 5, -6, 7};
    SolveReport report;
    const std::vector<double> x = solve_linear(eye, b, 1e-12, 0, {}, &report);
    CHECK(report.iterations == 1);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-14));

    // random SPD system against a dense elimination oracle
    const int n = 10;
    Lcg rng;
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rng.next() - 0.5;
    // A = B^T B + 10 I
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += dense[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                     dense[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s + (i == j ? 10.0 : 0.0);
        }
    std::vector<Triplet> trip;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            trip.push_back({i, j, a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]});
    const SparseMatrix sp = SparseMatrix::from_triplets(n, trip);

    std::vector<double> rhs(n);
    for (double& v : rhs) v = rng.next();

    // oracle: Gaussian elimination with partial pivoting
    std::vector<std::vector<double>> aug = a;
    std::vector<double> orc = rhs;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
                std::abs(aug[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
                pivot = r;
        std::swap(aug[static_cast<std::size_t>(col)], aug[static_cast<std::size_t>(pivot)]);
        std::swap(orc[static_cast<std::size_t>(col)], orc[static_cast<std::size_t>(pivot)]);
        for (int r = col + 1; r < n; ++r) {
            const double f = aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                             aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
            for (int c = col; c < n; ++c)
                aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
                    f * aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
            orc[static_cast<std::size_t>(r)] -= f * orc[static_cast<std::size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = orc[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c)
            s -= aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * orc[static_cast<std::size_t>(c)];
        orc[static_cast<std::size_t>(r)] = s / aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
    }

    const std::vector<double> sol = solve_linear(sp, rhs, 1e-12, 0, {}, &report);
    for (int i = 0; i < n; ++i)
        CHECK(sol[static_cast<std::size_t>(i)] == doctest::Approx(orc[static_cast<std::size_t>(i)]).epsilon(1e-9));
    CHECK(report.relative_residual <= 1e-12);
}

TEST_CASE("backward Euler") {
    // zero data stays exactly zero
    {
        const Mesh mesh = Mesh::structured(5);
        TransientProblem p;
        p.stiffness = assemble_stiffness(mesh, [](Vec2) { return Mat2::identity(); });
        p.mass = assemble_mass(mesh, [](Vec2) { return 1.0; });
        p.dt = 0.25;
        p.final_time = 1.0;
        p.dirichlet = mesh.dirichlet_vertices();
        const std::vector<double> u = backward_euler_solve(p);
        for (double v : u) CHECK(v == 0.0);
    }

    // single-dof recurrence u^{k+1} = u^k + dt b / m
    {
        TransientProblem p;
        p.stiffness = SparseMatrix::from_triplets(1, {{0, 0, 0.0}});
        p.mass = SparseMatrix::from_triplets(1, {{0, 0, 2.0}});
        p.load = {3.0};
        p.dt = 0.25;
        p.final_time = 1.0;
        const std::vector<double> u = backward_euler_solve(p);
        CHECK(u[0] == doctest::Approx(4 * 0.25 * 3.0 / 2.0).epsilon(1e-12));
    }

    // approach to steady state is monotone in the horizon
    {
        const Mesh mesh = Mesh::structured(9);
        SparseMatrix k = assemble_stiffness(mesh, [](Vec2) { return Mat2::identity(); });
        const SparseMatrix m = assemble_mass(mesh, [](Vec2) { return 1.0; });
        std::vector<double> b = assemble_neumann_load(mesh, 1.0);
        const std::vector<int> dirichlet = mesh.dirichlet_vertices();

        SparseMatrix kc = k;
        kc.constrain(dirichlet);
        std::vector<double> bc = b;
        for (int d : dirichlet) bc[static_cast<std::size_t>(d)] = 0.0;
        const std::vector<double> steady = solve_linear(kc, bc, 1e-12);

        double prev = 1e300;
        for (double horizon : {1.0, 2.0, 4.0}) {
            TransientProblem p;
            p.stiffness = k;
            p.mass = m;
            p.load = b;
            p.dt = 0.1;
            p.final_time = horizon;
            p.dirichlet = dirichlet;
            const std::vector<double> u = backward_euler_solve(p);
            double dist = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i)
                dist = std::max(dist, std::abs(u[i] - steady[i]));
            CHECK(dist < prev);
            prev = dist;
        }
    }

    // unconditional stability: the mass-norm energy never grows without load
    {
        const Mesh mesh = Mesh::structured(9);
        TransientProblem p;
        p.stiffness = assemble_stiffness(mesh, [](Vec2) { return Mat2::identity(); });
        p.mass = assemble_mass(mesh, [](Vec2) { return 1.0; });
        p.dt = 0.5;
        p.final_time = 3.0;
        p.dirichlet = mesh.dirichlet_vertices();
        p.initial.resize(mesh.vertices.size());
        Lcg rng;
        for (double& v : p.initial) v = rng.next();
        for (int d : p.dirichlet) p.initial[static_cast<std::size_t>(d)] = 0.0;

        std::vector<double> energies;
        const auto energy = [&](std::span<const double> u) {
            std::vector<double> mu(u.size());
            p.mass.multiply(u, mu);
            double s = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * mu[i];
            return s;
        };
        energies.push_back(energy(p.initial));
        backward_euler_solve(p, nullptr, [&](int, double, std::span<const double> u) {
            energies.push_back(energy(u));
        });
        for (std::size_t i = 1; i < energies.size(); ++i)
            CHECK(energies[i] <= energies[i - 1] + 1e-14);
    }

    // nonnegative data keeps the state above the round-off floor
    {
        const Mesh mesh = Mesh::structured(9);
        TransientProblem p;
        p.stiffness = assemble_stiffness(mesh, [](Vec2) { return Mat2::identity(); });
        p.mass = assemble_mass(mesh, [](Vec2) { return 1.0; });
        p.load = assemble_neumann_load(mesh, 1.0);
        p.dt = 0.05;
        p.final_time = 1.0;
        p.dirichlet = mesh.dirichlet_vertices();
        const std::vector<double> u = backward_euler_solve(p);
        for (double v : u) CHECK(v >= -1e-12);
    }

    // a time step that does not divide the horizon is rejected
    {
        TransientProblem p;
        p.stiffness = SparseMatrix::identity(1);
        p.mass = SparseMatrix::identity(1);
        p.dt = 0.3;
        p.final_time = 1.0;
        CHECK_THROWS_AS(backward_euler_solve(p), std::invalid_argument);
    }

    // essential dofs stay pinned through every step
    {
        const Mesh mesh = Mesh::structured(9);
        TransientProblem p;
        p.stiffness = assemble_stiffness(mesh, [](Vec2) { return Mat2::identity(); });
        p.mass = assemble_mass(mesh, [](Vec2) { return 1.0; });
        p.load = assemble_neumann_load(mesh, 1.0);
        p.dt = 0.25;
        p.final_time = 1.0;
        p.dirichlet = mesh.dirichlet_vertices();
        backward_euler_solve(p, nullptr, [&](int, double, std::span<const double> u) {
            for (int d : p.dirichlet) CHECK(u[static_cast<std::size_t>(d)] == 0.0);
        });
    }
}

TEST_CASE("vtk dump") {
    const Mesh mesh = Mesh::structured(3);
    std::vector<double> field(mesh.vertices.size(), 0.5);
    std::ostringstream os;
    mesh.dump_vtk(os, field, "temp");
    const std::string text = os.str();
    CHECK(text.find("POINTS 9 double") != std::string::npos);
    CHECK(text.find("CELLS 8 32") != std::string::npos);
    CHECK(text.find("SCALARS temp double 1") != std::string::npos);
}

TEST_CASE("quantity of interest") {
    const Mesh mesh = Mesh::structured(17);
    const std::vector<double> ones(mesh.vertices.size(), 1.0);
    const std::vector<double> zeros(mesh.vertices.size(), 0.0);

    CHECK(evaluate_qoi(mesh, ones, [](Vec2) { return 1.0; }) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(evaluate_qoi(mesh, zeros, [](Vec2) { return 1.0; }) == 0.0);

    // separable weight against a dense 1-d quadrature oracle
    const auto g = [](double t) { return t * (1.0 - t); };
    const auto weight = [&](Vec2 p) { return g(p.x) * g(2.0 * p.y); };
    const double oracle = simpson([&](double x) { return g(x); }, 0.0, 1.0, 1 << 12) *
                          simpson([&](double y) { return g(2.0 * y); }, 0.0, 0.5, 1 << 12);
    const Mesh fine = Mesh::structured(33);
    const std::vector<double> fine_ones(fine.vertices.size(), 1.0);
    const double coarse_err = std::abs(evaluate_qoi(mesh, ones, weight) - oracle);
    const double fine_err = std::abs(evaluate_qoi(fine, fine_ones, weight) - oracle);
    CHECK(fine_err < coarse_err);
    CHECK(fine_err <= 5e-4);

    // linear functional of the state
    Lcg rng;
    std::vector<double> u1(mesh.vertices.size()), u2(mesh.vertices.size()), u12(mesh.vertices.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        u1[i] = rng.next();
        u2[i] = rng.next();
        u12[i] = u1[i] + u2[i];
    }
    CHECK(evaluate_qoi(mesh, u12, weight) ==
          doctest::Approx(evaluate_qoi(mesh, u1, weight) + evaluate_qoi(mesh, u2, weight))
              .epsilon(1e-13));

    // even vertex counts leave triangles straddling the split line
    const Mesh bad = Mesh::structured(4);
    const std::vector<double> bad_ones(bad.vertices.size(), 1.0);
    CHECK_THROWS_AS(evaluate_qoi(bad, bad_ones, [](Vec2) { return 1.0; }), std::invalid_argument);
}

TEST_CASE("manufactured solution") {
    // zero exact solution gives zero errors
    {
        ManufacturedCase zero;
        zero.exact = [](Vec2, double) { return 0.0; };
        zero.forcing_space = [](Vec2) { return 0.0; };
        zero.forcing_time = [](double) { return 1.0; };
        const std::vector<int> sizes = {5, 9};
        const ConvergenceResult r = manufactured_convergence(zero, sizes, 0.1);
        for (const auto& row : r.rows) CHECK(row.error <= 1e-15);
    }

    // decaying product mode: quick two-mesh sanity on the rate direction
    {
        ManufacturedCase mc;
        mc.exact = [](Vec2 p, double t) {
            return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y) * std::exp(-t);
        };
        mc.forcing_space = [](Vec2 p) {
            return (2.0 * std::numbers::pi * std::numbers::pi - 1.0) *
                   std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y);
        };
        mc.forcing_time = [](double t) { return std::exp(-t); };
        const std::vector<int> sizes = {9, 17, 33};
        const ConvergenceResult r = manufactured_convergence(mc, sizes, 0.1);
        CHECK(r.rate > 1.6);
        CHECK(r.rate < 2.4);
    }
}
