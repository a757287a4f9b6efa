#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "randuq/geometry.hpp"

namespace randuq {

/// One term of the scalar perturbation expansion e(x,y) = sum_l amplitude_l b_l(x) y_l.
/// Profile gradients are analytic; nothing in the model differentiates numerically.
struct DeformationMode {
    int index = 0;           ///< 1-based position in the expansion
    double amplitude = 0.0;  ///< includes the rescale of the sampling interval onto [-1,1]
    std::function<double(Vec2)> profile;
    std::function<Vec2(Vec2)> profile_gradient;
    double profile_sup = 0.0;      ///< sup_x |b_l(x)|
    double mode_matrix_sup = 0.0;  ///< sup_x ||B_l(x)||_2, filled at model construction
    double displacement_sup = 0.0; ///< sup_x |b_l(x) v(x)|_2, filled at model construction
};

enum class DeformationVariant { generic, upper_half_stretch };

/// Admissible-region diagnostics: the computable constants controlling where
/// the transformed diffusion matrix stays positive definite under a complex
/// shift of the stochastic variables, plus the induced analyticity-rate sigma.
struct RegionDiagnostics {
    double delta_tilde = 0.0;
    double gamma = 0.0;
    double beta_max = 0.0;
    double tau = 0.0;
    double sigma_hat = 0.0;
    double B_tilde = 0.0;
    double D_tilde = 0.0;
    double C_tilde = 0.0;
    double epsilon = 0.0;
    double alpha = 1.0;
    double jacobian_sum = 0.0;     ///< sup_x sum_l amplitude_l ||B_l(x)||_2
    double displacement_sum = 0.0; ///< sup_x sum_l amplitude_l |b_l(x) v(x)|_2
};

double region_gamma(double delta_tilde, int dim);
double region_beta_max(double delta_tilde, int dim);

/// Random mapping F(x,y) = x + sum_l amplitude_l b_l(x) y_l v(x) from the unit
/// square onto a deformed domain, with the derived Jacobian and transformed
/// diffusion fields. Immutable after construction; safe to share across threads.
class DeformationModel {
public:
    static DeformationModel generic(std::vector<DeformationMode> modes,
                                    std::function<Vec2(Vec2)> direction,
                                    std::function<Mat2(Vec2)> direction_jacobian,
                                    int sup_sample_n = 65);

    /// Vertical stretch of the upper half of the square, identity below the
    /// midline: F = (x1, (x2 - 1/2)(1 + c e(x1,y)) + 1/2) for x2 > 1/2.
    /// Mode profiles depend on x1 only.
    static DeformationModel upper_half_stretch(std::vector<DeformationMode> modes,
                                               double scaling,
                                               int sup_sample_n = 65);

    /// The stretch model with the standard mode family: a constant first mode
    /// of size sqrt(pi)*L/2 and oscillatory modes n^{-1} sin/cos(floor(n/2) pi x1 / L_p)
    /// with amplitudes (sqrt(pi) L)^{1/2} / n, all rescaled by sqrt(3) so the
    /// stochastic variables live on [-1,1] with unit variance.
    static DeformationModel experiment(int total_modes, double length_scale,
                                       double period, double scaling,
                                       int sup_sample_n = 65);

    int dimension() const { return static_cast<int>(modes_.size()); }
    DeformationVariant variant() const { return variant_; }
    double scaling() const { return scaling_; }
    const DeformationMode& mode(int l) const;

    /// Model with modes 1..keep; evaluations match the full model with the
    /// stochastic tail set to zero, bitwise.
    DeformationModel truncate(int keep) const;

    /// e(x,y); for the stretch variant only x1 enters.
    double displacement_scalar(Vec2 x, std::span<const double> y) const;

    Vec2 map_point(Vec2 x, std::span<const double> y) const;
    Mat2 jacobian(Vec2 x, std::span<const double> y) const;
    double jacobian_det(Vec2 x, std::span<const double> y) const;
    Mat2 mode_matrix(int l, Vec2 x) const;

    /// G(x,y) = (a o F) det(dF) dF^{-1} dF^{-T}, assembled in a symmetric form.
    Mat2 diffusion_matrix(const std::function<double(Vec2)>& coefficient,
                          Vec2 x, std::span<const double> y) const;

    /// Natural-boundary transport factor det(dF) |dF^{-T} n| / |n| for a
    /// reference outward normal n.
    double neumann_factor(Vec2 x, std::span<const double> y, Vec2 reference_normal) const;

    /// Tail bound B_T = sup_x sum_{l > keep} amplitude_l ||B_l(x)||_2.
    double tail_jacobian_bound(int keep) const;

    /// sup_x of the whole Jacobian-perturbation sum; the analyticity margin
    /// is one minus the larger of this and the displacement sum.
    double jacobian_perturbation_sum() const { return tail_bounds_.empty() ? 0.0 : tail_bounds_[0]; }

    /// sup_x sum_l amplitude_l |b_l(x)| |v(x)|: the map stays one-to-one and
    /// orientation-preserving while this is below one.
    double displacement_sum() const { return displacement_sum_; }

    RegionDiagnostics region_diagnostics(int dim, double a_min, double a_max, double alpha) const;

    /// Canonical parameter string; stable across runs, used for cache naming.
    const std::string& signature() const { return signature_; }

private:
    DeformationModel() = default;
    void check_dimension(std::span<const double> y) const;
    void estimate_sups();

    std::vector<DeformationMode> modes_;
    DeformationVariant variant_ = DeformationVariant::generic;
    double scaling_ = 0.0;
    std::function<Vec2(Vec2)> direction_;
    std::function<Mat2(Vec2)> direction_jacobian_;
    std::string signature_;
    int sample_n_ = 65;
    std::vector<double> tail_bounds_; ///< tail_bounds_[k] = sup_x sum_{l>k} amp ||B_l(x)||
    double displacement_sum_ = 0.0;
};

} // namespace randuq
