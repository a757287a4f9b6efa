#include "randuq/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace randuq {

double BoundParams::effective_delta_star() const {
    if (delta_star > 0.0) return delta_star;
    return (std::numbers::e * std::log(2.0) - 1.0) / C2_tilde;
}

void BoundParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    for (double v : {C1, C2_tilde, C_D, D_D, decay_exponent, script_E, C_T, C_SG, C_F, F, C_tau, W_sol})
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("bound constants must be finite and positive");
    if (C1 == 1.0) throw std::invalid_argument("C1 = 1 makes the bound prefactor singular");
}

double bound_mu2(int retained) {
    if (retained < 1) throw std::invalid_argument("dimension must be positive");
    return std::log(2.0) / (retained * (1.0 + std::log(2.0 * retained)));
}

double bound_mu3(const BoundParams& params, int retained) {
    if (retained < 1) throw std::invalid_argument("dimension must be positive");
    return params.sigma * params.effective_delta_star() * params.C2_tilde /
           (1.0 + std::log(2.0 * retained));
}

double sparse_grid_error_bound(const BoundParams& params, int retained, double knots) {
    params.validate();
    if (retained < 1) throw std::invalid_argument("dimension must be positive");
    if (!(knots >= 1.0)) throw std::invalid_argument("knot count must be at least 1");

    const double ds = params.effective_delta_star();
    const double prefactor = params.C1 / std::exp(params.sigma * ds * params.C2_tilde) *
                             std::pow(std::max(1.0, params.C1), retained) /
                             std::abs(1.0 - params.C1);
    const double mu2 = bound_mu2(retained);
    const double mu3 = bound_mu3(params, retained);
    const double decay = retained * params.sigma * std::pow(2.0, -1.0 / retained);
    return prefactor * std::pow(knots, mu3) * std::exp(-decay * std::pow(knots, mu2));
}

double bound_decreasing_threshold(const BoundParams& params, int retained) {
    const double mu2 = bound_mu2(retained);
    const double mu3 = bound_mu3(params, retained);
    const double decay = retained * params.sigma * std::pow(2.0, -1.0 / retained);
    // d/d eta log(bound) = mu3/eta - decay mu2 eta^{mu2-1} < 0 above this point
    return std::pow(mu3 / (decay * mu2), 1.0 / mu2);
}

ComplexityPlan complexity_plan(double tol, const BoundParams& params) {
    params.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    ComplexityPlan plan;
    plan.decay_ratio = params.script_E * tol / (params.C_D * (1.0 + params.D_D));
    const double ns_real = std::pow(plan.decay_ratio, -1.0 / params.decay_exponent);
    if (!std::isfinite(ns_real) || ns_real > 1e9)
        throw std::overflow_error("tolerance too small: required dimension overflows");
    plan.retained_required = std::max(1, static_cast<int>(std::ceil(ns_real)));

    plan.knot_exponent = (1.0 + std::log(2.0 * plan.retained_required)) / params.sigma;
    const double base = 3.0 * params.C_tau * params.C_SG * params.C_T * params.C_F *
                        std::pow(params.F, plan.retained_required) * std::exp(params.sigma) / tol;
    const double knots = std::pow(base, plan.knot_exponent);
    if (!std::isfinite(knots))
        throw std::overflow_error("tolerance too small: knot-count formula overflows");
    plan.knots_required = std::max(1.0, std::ceil(knots));
    plan.work_total = params.W_sol * plan.knots_required;
    if (!std::isfinite(plan.work_total))
        throw std::overflow_error("tolerance too small: total work overflows");
    return plan;
}

} // namespace randuq
