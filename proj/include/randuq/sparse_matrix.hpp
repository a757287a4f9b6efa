#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace randuq {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Square sparse matrix in compressed row storage. Column indices are sorted
/// within each row; duplicate triplets are summed in insertion order so that
/// symmetric assembly stays bitwise symmetric.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(int n, std::vector<Triplet> entries);
    static SparseMatrix identity(int n);

    int size() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }

    /// Entry lookup by binary search; intended for tests and diagnostics.
    double coeff(int row, int col) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;

    /// a*this + b*other; both matrices must share the sparsity pattern.
    SparseMatrix scaled_sum(double a, double b, const SparseMatrix& other) const;

    /// Homogeneous essential constraints: zero the listed rows and columns
    /// and place a unit diagonal, keeping the matrix symmetric.
    void constrain(std::span<const int> dofs);

    std::vector<double> diagonal() const;

    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& columns() const { return columns_; }
    const std::vector<double>& values() const { return values_; }

private:
    int n_ = 0;
    std::vector<int> row_offsets_;
    std::vector<int> columns_;
    std::vector<double> values_;
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient with a deterministic iteration
/// order. `initial` may be empty (zero start). On exit the report carries the
/// recomputed true relative residual.
std::vector<double> solve_linear(const SparseMatrix& matrix,
                                 std::span<const double> rhs,
                                 double tol = 1e-10,
                                 int max_iterations = 0,
                                 std::span<const double> initial = {},
                                 SolveReport* report = nullptr);

} // namespace randuq
