#pragma once

// Free energy of the blockmodel and of the Curie-Weiss model, mean-field
// ground states, Hessians at the ground states, curvature constants and
// phase classification.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "ibm/errors.hpp"
#include "ibm/model.hpp"
#include "ibm/numerics.hpp"

namespace ibm {

/// Binary entropy with natural logs; h(0) = h(1) = 0.
inline double binary_entropy(double s) {
    if (s < 0.0 || s > 1.0) throw DomainError("binary_entropy: s outside [0, 1]");
    if (s == 0.0 || s == 1.0) return 0.0;
    return -s * std::log(s) - (1.0 - s) * std::log(1.0 - s);
}

/// Curie-Weiss free energy g^cw_b(mu) = -2 b mu^2 - 4 h((mu+1)/2) on (-1, 1).
inline double cw_free_energy(double b, double mu) {
    if (!(std::abs(mu) < 1.0)) throw DomainError("cw_free_energy: |mu| must be < 1");
    return -2.0 * b * mu * mu - 4.0 * binary_entropy(0.5 * (mu + 1.0));
}

/// Nonnegative Curie-Weiss ground state: 0 for b <= 1, else the positive
/// solution of x = tanh(b x) to 1e-10. For b > 1 the result obeys
/// 1 - 2b/(2b^2 + b - 1) < x^2 < 1 - e^{-2b}.
inline double mean_field_solve(double b) {
    if (!std::isfinite(b)) throw DomainError("mean_field_solve: b must be finite");
    if (b <= 1.0) return 0.0;
    // proven bounds on the root give a guaranteed sign change
    const double lo = std::sqrt(1.0 - 1.0 / b);
    const double hi = 1.0 - std::exp(-2.0 * b);
    return bisect_root([b](double x) { return std::tanh(b * x) - x; }, lo, hi, 1e-12);
}

/// IBM free energy g(x, y) on (-1, 1)^2.
inline double ibm_free_energy(const ModelParams& params, double x, double y) {
    if (!(std::abs(x) < 1.0 && std::abs(y) < 1.0))
        throw DomainError("ibm_free_energy: arguments must lie in (-1, 1)");
    return -2.0 * params.alpha * x * y - params.beta * (x * x + y * y) -
           4.0 * binary_entropy(0.5 * (x + 1.0)) - 4.0 * binary_entropy(0.5 * (y + 1.0));
}

enum class Phase { UniqueZero, FerroAligned, FerroPolarized, AxisFour };

inline const char* phase_name(Phase ph) {
    switch (ph) {
        case Phase::UniqueZero: return "unique_zero";
        case Phase::FerroAligned: return "ferro_aligned";
        case Phase::FerroPolarized: return "ferro_polarized";
        case Phase::AxisFour: return "axis_four";
    }
    return "?";
}

/// Minima of the free energy. All states satisfy x^2 = y^2 < 1 and the set
/// is closed under global sign flip.
struct GroundStateSet {
    std::vector<std::pair<double, double>> states;
    Phase phase = Phase::UniqueZero;
    double xtilde = 0.0; // common magnitude of the coordinates
    double g_star = 0.0; // minimum free-energy value
};

namespace detail {

inline void require_off_boundary(const ModelParams& params, const char* who) {
    if (std::abs(params.beta + std::abs(params.alpha) - 2.0) <= 1e-6)
        throw BoundaryError(std::string(who) +
                            ": beta + |alpha| is at the critical value 2 where the "
                            "curvature degenerates");
}

} // namespace detail

inline GroundStateSet ground_states(const ModelParams& params) {
    detail::require_off_boundary(params, "ground_states");
    const double strength = params.beta + std::abs(params.alpha);
    GroundStateSet out;
    if (strength < 2.0) {
        out.phase = Phase::UniqueZero;
        out.xtilde = 0.0;
        out.states = {{0.0, 0.0}};
    } else {
        const double xt = mean_field_solve(strength / 2.0);
        out.xtilde = xt;
        if (params.alpha == 0.0) {
            out.phase = Phase::AxisFour;
            out.states = {{xt, xt}, {xt, -xt}, {-xt, xt}, {-xt, -xt}};
        } else if (params.alpha > 0.0) {
            out.phase = Phase::FerroAligned;
            out.states = {{xt, xt}, {-xt, -xt}};
        } else {
            out.phase = Phase::FerroPolarized;
            out.states = {{xt, -xt}, {-xt, xt}};
        }
    }
    out.g_star = ibm_free_energy(params, out.states.front().first, out.states.front().second);
    return out;
}

/// Hessian of g at a ground state plus its closed-form eigenpairs:
/// 2(alpha - beta) + 4/(1 - x^2) on direction (1, -1) and
/// -2(alpha + beta) + 4/(1 - x^2) on (1, 1).
struct HessianInfo {
    Matrix h;                                     // 2x2
    std::array<double, 2> eigenvalues;            // paired with rows of eigenvectors
    std::array<std::array<double, 2>, 2> eigenvectors; // unit vectors
};

inline HessianInfo hessian_at(const ModelParams& params, std::pair<double, double> state) {
    const double x = state.first, y = state.second;
    if (std::abs(x * x - y * y) > 1e-6)
        throw DomainError("hessian_at: ground states satisfy x^2 = y^2");
    if (!(std::abs(x) < 1.0)) throw DomainError("hessian_at: state outside (-1, 1)^2");
    const double c = 4.0 / (1.0 - x * x);
    HessianInfo info;
    info.h = Matrix(2, 2);
    info.h(0, 0) = -2.0 * params.beta + c;
    info.h(1, 1) = -2.0 * params.beta + c;
    info.h(0, 1) = -2.0 * params.alpha;
    info.h(1, 0) = -2.0 * params.alpha;
    const double inv_sqrt2 = 0.70710678118654752440;
    info.eigenvalues = {2.0 * (params.alpha - params.beta) + c,
                        -2.0 * (params.alpha + params.beta) + c};
    info.eigenvectors = {{{inv_sqrt2, -inv_sqrt2}, {inv_sqrt2, inv_sqrt2}}};
    return info;
}

/// Quadratic-regime radius delta and curvature kappa^2 around the ground
/// states: g(x,y) >= g* + (kappa^2/2) (||(x,y) - s||_inf ^ delta)^2 for the
/// nearest ground state s.
struct CurvatureConstants {
    double delta = 0.0;
    double kappa_sq = 0.0;
};

inline CurvatureConstants curvature_constants(const ModelParams& params) {
    detail::require_off_boundary(params, "curvature_constants");
    const double strength = params.beta + std::abs(params.alpha);
    CurvatureConstants c;
    if (strength > 2.0) {
        c.delta = std::exp(-strength) * (strength - 2.0) / (4.0 * strength);
        c.kappa_sq = 1.0 - 2.0 / strength;
    } else {
        c.delta = std::sqrt((2.0 - strength) / 6.0);
        c.kappa_sq = 2.0 - strength;
    }
    return c;
}

} // namespace ibm
