#pragma once

// Closed-form information-theoretic quantities: the Kullback-Leibler
// divergence between single-swap models, the minimax lower bound on the
// sample size, the SDP sufficient threshold and the operator-norm deviation
// radius.

#include <cmath>
#include <cstddef>
#include <ostream>

#include "ibm/covariance.hpp"
#include "ibm/errors.hpp"
#include "ibm/model.hpp"

namespace ibm {

/// Number of single-swap neighbors of a balanced partition (choose s in S,
/// t in Sbar): m^2.
inline std::size_t swap_neighborhood_count(std::size_t m) { return m * m; }

/// The (m-1)^2 neighborhood count used inside the lower-bound arithmetic.
inline std::size_t lower_bound_neighborhood_count(std::size_t m) {
    return (m - 1) * (m - 1);
}

/// KL(P_T, P_S) = ((p-2)/p)(beta - alpha)(Delta - Omega) for a single-swap
/// neighbor T of S. Zero at p = 2 (formula endpoint).
inline double kl_pair(const ModelParams& params, const CovarianceSummary& summary) {
    if (!(params.alpha < params.beta)) throw DomainError("kl_pair: requires alpha < beta");
    const double p = static_cast<double>(params.p);
    if (params.p == 2) return 0.0;
    return (p - 2.0) / p * (params.beta - params.alpha) * summary.gap;
}

/// Operator-norm deviation radius R_{n,p}(delta) of the empirical centered
/// covariance.
inline double deviation_radius(std::size_t p, double gap, double c_ab, std::size_t n,
                               double delta) {
    if (n == 0) throw DomainError("deviation_radius: n >= 1");
    if (delta <= 0.0) throw DomainError("deviation_radius: delta > 0");
    const double pd = static_cast<double>(p);
    const double nd = static_cast<double>(n);
    const double a = std::sqrt((1.0 + 2.0 / c_ab) * gap * std::log(4.0 * pd / delta) / nd);
    const double b = (6.0 + 4.0 / c_ab) * std::log(pd / delta) / nd;
    return 2.0 * pd * std::max(a, b);
}

struct SampleComplexityReport {
    double kl_per_sample = 0.0;
    double n_lower = 0.0;      // below this n no estimator succeeds with the stated probability
    double n_upper = 0.0;      // SDP sufficient threshold
    double r_np = 0.0;         // deviation radius evaluated at n = ceil(n_upper)
    double c_alpha_beta = 0.0; // constant with Delta - Omega > C/p
    double gamma = 0.0;
    double delta = 0.0;
};

/// Evaluates the three closed forms with the exact gap:
///   n_lower = gamma log(p/4) / ((beta-alpha)(Delta-Omega)),
///   n_upper = 16 (3 + 2/C) log(4p/delta) / (Delta-Omega),
///   r_np    = R_{n,p}(delta) at n = ceil(n_upper).
/// c_ab <= 0 selects the instance default C = p (Delta-Omega); delta may
/// exceed 1 so logarithm-cancellation identities stay checkable.
inline SampleComplexityReport sample_size_bounds(const ModelParams& params, double gamma,
                                                 double delta, double c_ab = 0.0) {
    if (!(gamma > 0.0 && gamma < 0.6))
        throw DomainError("sample_size_bounds: gamma must lie in (0, 0.6)");
    if (!(delta > 0.0)) throw DomainError("sample_size_bounds: delta must be positive");
    if (params.p < 6) throw DomainError("sample_size_bounds: lower bound needs p >= 6");
    if (!(params.alpha < params.beta))
        throw DomainError("sample_size_bounds: requires alpha < beta");

    const CovarianceSummary summary = exact_delta_omega(params);
    const double pd = static_cast<double>(params.p);
    SampleComplexityReport rep;
    rep.gamma = gamma;
    rep.delta = delta;
    rep.c_alpha_beta = c_ab > 0.0 ? c_ab : pd * summary.gap;
    rep.kl_per_sample = kl_pair(params, summary);
    rep.n_lower = gamma * std::log(pd / 4.0) / ((params.beta - params.alpha) * summary.gap);
    rep.n_upper =
        16.0 * (3.0 + 2.0 / rep.c_alpha_beta) * std::log(4.0 * pd / delta) / summary.gap;
    const std::size_t n_at = static_cast<std::size_t>(std::ceil(std::max(1.0, rep.n_upper)));
    rep.r_np = deviation_radius(params.p, summary.gap, rep.c_alpha_beta, n_at, delta);
    return rep;
}

/// JSON export of a report.
inline void write_report_json(std::ostream& os, const SampleComplexityReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"kl_per_sample\":%.17g,\"n_lower\":%.17g,\"n_upper\":%.17g,"
                  "\"r_np\":%.17g,\"c_alpha_beta\":%.17g,\"gamma\":%.17g,\"delta\":%.17g}",
                  r.kl_per_sample, r.n_lower, r.n_upper, r.r_np, r.c_alpha_beta, r.gamma,
                  r.delta);
    os << buf;
}

} // namespace ibm
