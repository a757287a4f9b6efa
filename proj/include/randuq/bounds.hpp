#pragma once

namespace randuq {

/// Constants feeding the sparse-grid error bound and the work planner. All of
/// them are inputs: the analysis defines them only implicitly, so the
/// evaluators below never try to estimate them.
struct BoundParams {
    double sigma = 1.0;       ///< sub-exponential rate (half the analyticity rate)
    double delta_star = 0.0;  ///< 0 selects the simplifying choice (e log2 - 1)/C2_tilde
    double C1 = 0.5;
    double C2_tilde = 1.0;
    double C_D = 1.0;
    double D_D = 1.0;
    double decay_exponent = 1.0; ///< l in the tail-decay law C_D N^{-l}
    double script_E = 1.0;
    double C_T = 1.0;
    double C_SG = 1.0;
    double C_F = 1.0;
    double F = 1.0;
    double C_tau = 1.0; ///< sup of the density ratio
    double W_sol = 1.0; ///< cost of one deterministic solve

    double effective_delta_star() const;
    void validate() const;
};

double bound_mu2(int retained);
double bound_mu3(const BoundParams& params, int retained);

/// Sub-exponential knot-count error bound
/// Q(sigma, delta*, N_s) eta^{mu3} exp(-N_s sigma 2^{-1/N_s} eta^{mu2}).
double sparse_grid_error_bound(const BoundParams& params, int retained, double knots);

/// Knot count beyond which the bound is strictly decreasing in the knot count.
double bound_decreasing_threshold(const BoundParams& params, int retained);

struct ComplexityPlan {
    int retained_required = 0;   ///< N_s(tol)
    double knots_required = 0.0; ///< eta(tol)
    double work_total = 0.0;     ///< W_sol * eta
    double decay_ratio = 0.0;    ///< E tol / (C_D (1 + D_D))
    double knot_exponent = 0.0;  ///< (1 + log 2N_s) / sigma
};

/// Work planner: dimension cut from the tail-decay law, then the knot count
/// needed to push the sparse-grid term below the tolerance. Throws
/// std::overflow_error when the knot formula leaves the finite range.
ComplexityPlan complexity_plan(double tol, const BoundParams& params);

} // namespace randuq
