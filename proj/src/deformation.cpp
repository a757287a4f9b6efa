#include "randuq/deformation.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace randuq {

namespace {

constexpr double kSingularTol = 1e-12;

/// Sample set for sup estimates: vertex lattice of the structured n x n mesh
/// plus the barycenters of its triangles.
std::vector<Vec2> sup_sample_points(int n) {
    if (n < 2) n = 2;
    const double h = 1.0 / (n - 1);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n) * n + 2u * static_cast<std::size_t>(n - 1) * (n - 1));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            pts.push_back({i * h, j * h});
    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            const double x = i * h, y = j * h;
            pts.push_back({x + 2.0 * h / 3.0, y + h / 3.0});
            pts.push_back({x + h / 3.0, y + 2.0 * h / 3.0});
        }
    }
    return pts;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

double region_gamma(double delta_tilde, int dim) {
    const double c = 1.0 / std::tan(std::numbers::pi / 8.0);
    const double top = c * std::pow(2.0 - delta_tilde, dim);
    return top / (std::pow(delta_tilde, dim) + top);
}

double region_beta_max(double delta_tilde, int dim) {
    const double g = region_gamma(delta_tilde, dim);
    const double log_term = std::log(2.0 - g);
    const double first = delta_tilde * log_term / (dim + log_term);
    const double second = std::sqrt(1.0 + delta_tilde * delta_tilde / 2.0) - 1.0;
    return std::min(first, second);
}

DeformationModel DeformationModel::generic(std::vector<DeformationMode> modes,
                                           std::function<Vec2(Vec2)> direction,
                                           std::function<Mat2(Vec2)> direction_jacobian,
                                           int sup_sample_n) {
    DeformationModel m;
    m.modes_ = std::move(modes);
    m.variant_ = DeformationVariant::generic;
    m.direction_ = std::move(direction);
    m.direction_jacobian_ = std::move(direction_jacobian);
    m.sample_n_ = sup_sample_n;
    m.estimate_sups();
    std::string sig = "generic;N=" + std::to_string(m.dimension());
    for (const DeformationMode& mode : m.modes_) sig += ";a=" + format_number(mode.amplitude);
    m.signature_ = sig;
    return m;
}

DeformationModel DeformationModel::upper_half_stretch(std::vector<DeformationMode> modes,
                                                      double scaling,
                                                      int sup_sample_n) {
    if (scaling < 0.0) throw std::invalid_argument("stretch scaling must be nonnegative");
    DeformationModel m;
    m.modes_ = std::move(modes);
    m.variant_ = DeformationVariant::upper_half_stretch;
    m.scaling_ = scaling;
    m.sample_n_ = sup_sample_n;
    m.estimate_sups();
    std::string sig = "uhs;N=" + std::to_string(m.dimension()) + ";c=" + format_number(scaling);
    for (const DeformationMode& mode : m.modes_) sig += ";a=" + format_number(mode.amplitude);
    m.signature_ = sig;
    return m;
}

DeformationModel DeformationModel::experiment(int total_modes, double length_scale,
                                              double period, double scaling,
                                              int sup_sample_n) {
    if (total_modes < 1) throw std::invalid_argument("experiment model needs at least one mode");
    if (length_scale <= 0.0 || period <= 0.0)
        throw std::invalid_argument("length scale and period must be positive");

    const double sqrt_pi_l = std::sqrt(std::numbers::pi) * length_scale;
    const double rescale = std::sqrt(3.0); // uniform(-sqrt3, sqrt3) variables onto [-1,1]

    std::vector<DeformationMode> modes;
    modes.reserve(static_cast<std::size_t>(total_modes));

    // leading amplitude (sqrt(pi) L / 2)^{1/2}: the value consistent with the
    // family's covariance origin and with the reported experiment moments
    DeformationMode first;
    first.index = 1;
    first.amplitude = rescale * std::sqrt(sqrt_pi_l / 2.0);
    first.profile = [](Vec2) { return 1.0; };
    first.profile_gradient = [](Vec2) { return Vec2{0.0, 0.0}; };
    first.profile_sup = 1.0;
    modes.push_back(std::move(first));

    for (int n = 2; n <= total_modes; ++n) {
        DeformationMode mode;
        mode.index = n;
        mode.amplitude = rescale * std::sqrt(sqrt_pi_l) / n;
        const double freq = (n / 2) * std::numbers::pi / period;
        const double inv_n = 1.0 / n;
        if (n % 2 == 0) {
            mode.profile = [freq, inv_n](Vec2 x) { return inv_n * std::sin(freq * x.x); };
            mode.profile_gradient = [freq, inv_n](Vec2 x) {
                return Vec2{inv_n * freq * std::cos(freq * x.x), 0.0};
            };
        } else {
            mode.profile = [freq, inv_n](Vec2 x) { return inv_n * std::cos(freq * x.x); };
            mode.profile_gradient = [freq, inv_n](Vec2 x) {
                return Vec2{-inv_n * freq * std::sin(freq * x.x), 0.0};
            };
        }
        mode.profile_sup = inv_n;
        modes.push_back(std::move(mode));
    }

    return upper_half_stretch(std::move(modes), scaling, sup_sample_n);
}

const DeformationMode& DeformationModel::mode(int l) const {
    if (l < 1 || l > dimension()) throw std::out_of_range("mode index out of range");
    return modes_[static_cast<std::size_t>(l - 1)];
}

DeformationModel DeformationModel::truncate(int keep) const {
    if (keep < 1 || keep > dimension())
        throw std::out_of_range("truncation length out of range");
    DeformationModel m = *this;
    m.modes_.resize(static_cast<std::size_t>(keep));
    m.estimate_sups();
    m.signature_ += ";trunc=" + std::to_string(keep);
    return m;
}

void DeformationModel::check_dimension(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != dimension())
        throw std::invalid_argument("stochastic point dimension does not match the model");
}

double DeformationModel::displacement_scalar(Vec2 x, std::span<const double> y) const {
    check_dimension(y);
    double e = 0.0;
    for (std::size_t l = 0; l < modes_.size(); ++l)
        e += modes_[l].amplitude * modes_[l].profile(x) * y[l];
    return e;
}

Vec2 DeformationModel::map_point(Vec2 x, std::span<const double> y) const {
    check_dimension(y);
    if (variant_ == DeformationVariant::upper_half_stretch) {
        if (x.y <= 0.5) return x;
        const double e = displacement_scalar(x, y);
        return {x.x, (x.y - 0.5) * (1.0 + scaling_ * e) + 0.5};
    }
    const Vec2 v = direction_(x);
    double e = 0.0;
    for (std::size_t l = 0; l < modes_.size(); ++l)
        e += modes_[l].amplitude * modes_[l].profile(x) * y[l];
    return x + e * v;
}

Mat2 DeformationModel::jacobian(Vec2 x, std::span<const double> y) const {
    Mat2 j;
    if (variant_ == DeformationVariant::upper_half_stretch) {
        check_dimension(y);
        if (x.y <= 0.5) {
            j = Mat2::identity();
        } else {
            double e = 0.0;
            double de = 0.0;
            for (std::size_t l = 0; l < modes_.size(); ++l) {
                e += modes_[l].amplitude * modes_[l].profile(x) * y[l];
                de += modes_[l].amplitude * modes_[l].profile_gradient(x).x * y[l];
            }
            j = {1.0, 0.0, (x.y - 0.5) * scaling_ * de, 1.0 + scaling_ * e};
        }
    } else {
        check_dimension(y);
        j = Mat2::identity();
        for (std::size_t l = 0; l < modes_.size(); ++l)
            j = j + (modes_[l].amplitude * y[l]) * mode_matrix(static_cast<int>(l) + 1, x);
    }
    if (j.det() <= kSingularTol)
        throw std::domain_error("deformation Jacobian is singular: realization is inadmissible");
    return j;
}

double DeformationModel::jacobian_det(Vec2 x, std::span<const double> y) const {
    return jacobian(x, y).det();
}

Mat2 DeformationModel::mode_matrix(int l, Vec2 x) const {
    const DeformationMode& m = mode(l);
    if (variant_ == DeformationVariant::upper_half_stretch) {
        if (x.y <= 0.5) return Mat2::zero();
        // effective direction (0, c (x2 - 1/2)) with Jacobian [[0,0],[0,c]]
        const double gx = m.profile_gradient(x).x;
        return {0.0, 0.0, scaling_ * (x.y - 0.5) * gx, scaling_ * m.profile(x)};
    }
    const Vec2 v = direction_(x);
    const Mat2 dv = direction_jacobian_(x);
    return m.profile(x) * dv + outer(v, m.profile_gradient(x));
}

Mat2 DeformationModel::diffusion_matrix(const std::function<double(Vec2)>& coefficient,
                                        Vec2 x, std::span<const double> y) const {
    const Mat2 j = jacobian(x, y);
    const double det = j.det();
    const double a_val = coefficient(map_point(x, y));
    // a det * dF^{-1} dF^{-T}, with the symmetric entries written once
    const double s = a_val / det;
    Mat2 g;
    g.a00 = s * (j.a01 * j.a01 + j.a11 * j.a11);
    g.a11 = s * (j.a00 * j.a00 + j.a10 * j.a10);
    g.a01 = -s * (j.a00 * j.a01 + j.a10 * j.a11);
    g.a10 = g.a01;
    return g;
}

double DeformationModel::neumann_factor(Vec2 x, std::span<const double> y,
                                        Vec2 reference_normal) const {
    const Mat2 j = jacobian(x, y);
    const double det = j.det();
    // w = dF^{-T} n
    const Vec2 n = reference_normal;
    const Vec2 w = {(j.a11 * n.x - j.a10 * n.y) / det,
                    (-j.a01 * n.x + j.a00 * n.y) / det};
    return det * norm(w) / norm(n);
}

double DeformationModel::tail_jacobian_bound(int keep) const {
    if (keep < 0 || keep > dimension())
        throw std::out_of_range("truncation length out of range");
    return tail_bounds_[static_cast<std::size_t>(keep)];
}

void DeformationModel::estimate_sups() {
    const std::vector<Vec2> pts = sup_sample_points(sample_n_);
    const std::size_t count = modes_.size();

    for (DeformationMode& m : modes_) {
        m.mode_matrix_sup = 0.0;
        m.displacement_sup = 0.0;
    }
    tail_bounds_.assign(count + 1, 0.0);
    displacement_sum_ = 0.0;

    std::vector<double> norms(count);
    for (const Vec2& p : pts) {
        double dir_norm;
        if (variant_ == DeformationVariant::upper_half_stretch)
            dir_norm = p.y > 0.5 ? scaling_ * (p.y - 0.5) : 0.0;
        else
            dir_norm = norm(direction_(p));

        double disp = 0.0;
        for (std::size_t l = 0; l < count; ++l) {
            const double mm = spectral_norm(mode_matrix(static_cast<int>(l) + 1, p));
            norms[l] = modes_[l].amplitude * mm;
            modes_[l].mode_matrix_sup = std::max(modes_[l].mode_matrix_sup, mm);
            const double d = std::abs(modes_[l].profile(p)) * dir_norm;
            modes_[l].displacement_sup = std::max(modes_[l].displacement_sup, d);
            disp += modes_[l].amplitude * d;
        }
        displacement_sum_ = std::max(displacement_sum_, disp);

        // suffix sums at this point feed the pointwise tail bounds
        double tail = 0.0;
        for (std::size_t k = count; k-- > 0;) {
            tail += norms[k];
            tail_bounds_[k] = std::max(tail_bounds_[k], tail);
        }
    }
}

RegionDiagnostics DeformationModel::region_diagnostics(int dim, double a_min, double a_max,
                                                       double alpha) const {
    if (dim < 1) throw std::invalid_argument("spatial dimension must be positive");
    if (a_min <= 0.0 || a_max < a_min)
        throw std::invalid_argument("coefficient bounds must satisfy 0 < a_min <= a_max");

    RegionDiagnostics d;
    d.alpha = alpha;
    d.jacobian_sum = jacobian_perturbation_sum();
    d.displacement_sum = displacement_sum_;
    d.delta_tilde = 1.0 - std::max(d.jacobian_sum, d.displacement_sum);
    if (d.delta_tilde <= 0.0)
        throw std::domain_error("deformation too large: admissibility margin is nonpositive");

    const double c = 1.0 / std::tan(std::numbers::pi / 8.0);
    const double dt = d.delta_tilde;
    d.gamma = region_gamma(dt, dim);
    d.beta_max = region_beta_max(dt, dim);
    d.tau = d.beta_max / (1.0 - dt);
    d.sigma_hat = std::log(std::sqrt(d.tau * d.tau + 1.0) + d.tau);

    const double beta = d.beta_max;
    const double two_minus = 2.0 - dt;
    const double denom_scale = a_min * c * std::pow(dt, dim) * alpha;
    d.B_tilde = a_min * (c * c - 1.0) * dt * (dt - 2.0 * beta) *
                (std::pow(dt, dim) * alpha - std::pow(two_minus, dim) * (2.0 - alpha)) /
                (std::pow((1.0 + c) * a_max + a_min, 2) * std::pow(two_minus, 2 * dim) *
                 (2.0 - alpha) * (2.0 - alpha));
    d.D_tilde = (1.0 + c) / denom_scale *
                ((two_minus + beta) * (two_minus + beta) + 2.0 * beta * (2.0 + (beta - dt)));
    d.C_tilde = (1.0 + c) * std::pow(2.0 * beta - dt + 2.0, 2) / denom_scale;
    const double ratio = d.C_tilde / d.B_tilde;
    d.epsilon = 1.0 / ((1.0 + ratio * ratio) * d.D_tilde);
    return d;
}

} // namespace randuq
