#include "randuq/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace randuq {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> entries) {
    if (n < 0) throw std::invalid_argument("matrix dimension must be nonnegative");
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw std::invalid_argument("triplet index out of range");
        if (!std::isfinite(t.value))
            throw std::invalid_argument("non-finite matrix entry");
    }
    // stable sort keeps duplicate contributions in insertion order, so the
    // (i,j) and (j,i) sums see identical addend sequences
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m;
    m.n_ = n;
    m.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    std::size_t i = 0;
    while (i < entries.size()) {
        const int r = entries[i].row;
        const int c = entries[i].col;
        double sum = 0.0;
        while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
            sum += entries[i].value;
            ++i;
        }
        m.columns_.push_back(c);
        m.values_.push_back(sum);
        m.row_offsets_[static_cast<std::size_t>(r) + 1] = static_cast<int>(m.columns_.size());
    }
    for (std::size_t r = 1; r < m.row_offsets_.size(); ++r)
        m.row_offsets_[r] = std::max(m.row_offsets_[r], m.row_offsets_[r - 1]);
    return m;
}

SparseMatrix SparseMatrix::identity(int n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, std::move(t));
}

double SparseMatrix::coeff(int row, int col) const {
    const auto begin = columns_.begin() + row_offsets_[static_cast<std::size_t>(row)];
    const auto end = columns_.begin() + row_offsets_[static_cast<std::size_t>(row) + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - columns_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < n_; ++r) {
        double sum = 0.0;
        const int lo = row_offsets_[static_cast<std::size_t>(r)];
        const int hi = row_offsets_[static_cast<std::size_t>(r) + 1];
        for (int k = lo; k < hi; ++k)
            sum += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(columns_[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(r)] = sum;
    }
}

SparseMatrix SparseMatrix::scaled_sum(double a, double b, const SparseMatrix& other) const {
    if (n_ != other.n_ || row_offsets_ != other.row_offsets_ || columns_ != other.columns_)
        throw std::invalid_argument("scaled_sum requires matching sparsity patterns");
    SparseMatrix out = *this;
    for (std::size_t k = 0; k < values_.size(); ++k)
        out.values_[k] = a * values_[k] + b * other.values_[k];
    return out;
}

void SparseMatrix::constrain(std::span<const int> dofs) {
    std::vector<char> fixed(static_cast<std::size_t>(n_), 0);
    for (int d : dofs) {
        if (d < 0 || d >= n_) throw std::invalid_argument("constraint dof out of range");
        fixed[static_cast<std::size_t>(d)] = 1;
    }
    for (int r = 0; r < n_; ++r) {
        const int lo = row_offsets_[static_cast<std::size_t>(r)];
        const int hi = row_offsets_[static_cast<std::size_t>(r) + 1];
        for (int k = lo; k < hi; ++k) {
            const int c = columns_[static_cast<std::size_t>(k)];
            if (!fixed[static_cast<std::size_t>(r)] && !fixed[static_cast<std::size_t>(c)]) continue;
            values_[static_cast<std::size_t>(k)] = (r == c) ? 1.0 : 0.0;
        }
    }
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
    for (int r = 0; r < n_; ++r) d[static_cast<std::size_t>(r)] = coeff(r, r);
    return d;
}

namespace {

double dot_product(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

std::vector<double> solve_linear(const SparseMatrix& matrix,
                                 std::span<const double> rhs,
                                 double tol,
                                 int max_iterations,
                                 std::span<const double> initial,
                                 SolveReport* report) {
    const int n = matrix.size();
    if (static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("rhs size does not match matrix dimension");
    if (max_iterations <= 0) max_iterations = 4 * n + 100;

    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    if (!initial.empty()) {
        if (static_cast<int>(initial.size()) != n)
            throw std::invalid_argument("initial guess size does not match matrix dimension");
        std::copy(initial.begin(), initial.end(), x.begin());
    }

    SolveReport local;
    const double rhs_norm = std::sqrt(dot_product(rhs, rhs));
    if (rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        local.converged = true;
        if (report) *report = local;
        return x;
    }

    std::vector<double> inv_diag = matrix.diagonal();
    for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;

    std::vector<double> r(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(n));
    std::vector<double> q(static_cast<std::size_t>(n));

    matrix.multiply(x, r);
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = inv_diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
    p = z;
    double rz = dot_product(r, z);

    for (int iter = 1; iter <= max_iterations; ++iter) {
        matrix.multiply(p, q);
        const double pq = dot_product(p, q);
        if (pq == 0.0) break;
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
        for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] -= alpha * q[static_cast<std::size_t>(i)];
        local.iterations = iter;
        const double res = std::sqrt(dot_product(r, r)) / rhs_norm;
        if (res <= tol) {
            local.converged = true;
            break;
        }
        for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = inv_diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
        const double rz_next = dot_product(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
    }

    matrix.multiply(x, q);
    double true_res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = q[static_cast<std::size_t>(i)] - rhs[static_cast<std::size_t>(i)];
        true_res += d * d;
    }
    local.relative_residual = std::sqrt(true_res) / rhs_norm;
    local.converged = local.converged || local.relative_residual <= tol;
    if (report) *report = local;
    return x;
}

} // namespace randuq
