#pragma once

// Exact joint law of the local magnetizations (mu_S, mu_Sbar) on the grid
// M^2, moments against it, and the Gaussian-mixture approximation around the
// ground states.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "ibm/errors.hpp"
#include "ibm/free_energy.hpp"
#include "ibm/model.hpp"
#include "ibm/numerics.hpp"
#include "ibm/rng.hpp"

namespace ibm {

/// Exact discrete distribution of (mu_S, mu_Sbar) over the (m+1) x (m+1)
/// lattice mu = (2k - m)/m. Immutable after construction; reads are
/// thread-safe.
class MagnetizationLaw {
public:
    explicit MagnetizationLaw(const ModelParams& params) : params_(params) {
        detail::require_law_scale(params, "magnetization_law");
        const std::size_t n = params.m + 1;
        mu_.resize(n);
        const double m = static_cast<double>(params.m);
        for (std::size_t k = 0; k < n; ++k)
            mu_[k] = (2.0 * static_cast<double>(k) - m) / m;
        log_weights_.assign(n * n, 0.0);
        for (std::size_t ks = 0; ks < n; ++ks)
            for (std::size_t kb = 0; kb < n; ++kb)
                log_weights_[ks * n + kb] = detail::log_magnetization_weight(params, ks, kb);
        log_z_ = log_sum_exp(log_weights_);
    }

    const ModelParams& params() const { return params_; }
    std::size_t block_size() const { return params_.m; }
    std::size_t grid_size() const { return params_.m + 1; }
    double mu_value(std::size_t k) const { return mu_[k]; }
    double log_weight(std::size_t k_s, std::size_t k_sb) const {
        return log_weights_[k_s * grid_size() + k_sb];
    }
    double log_normalizer() const { return log_z_; }
    double prob(std::size_t k_s, std::size_t k_sb) const {
        return std::exp(log_weight(k_s, k_sb) - log_z_);
    }

private:
    ModelParams params_;
    std::vector<double> mu_;
    std::vector<double> log_weights_;
    double log_z_ = 0.0;
};

inline MagnetizationLaw magnetization_law(const ModelParams& params) {
    return MagnetizationLaw(params);
}

/// E[phi(mu_S, mu_Sbar)] against the exact law.
template <class Phi>
double exact_moment(const MagnetizationLaw& law, Phi&& phi) {
    const std::size_t n = law.grid_size();
    double acc = 0.0;
    for (std::size_t ks = 0; ks < n; ++ks) {
        const double mu_s = law.mu_value(ks);
        for (std::size_t kb = 0; kb < n; ++kb)
            acc += phi(mu_s, law.mu_value(kb)) * law.prob(ks, kb);
    }
    return acc;
}

namespace detail {

/// Rows of H^{-1/2} for the 2x2 Hessian; directions (1,-1)/sqrt2, (1,1)/sqrt2
/// are exact eigenvectors, so the root comes in closed form.
inline std::array<std::array<double, 2>, 2> hessian_inverse_sqrt(const HessianInfo& hi) {
    const double a = 1.0 / std::sqrt(hi.eigenvalues[0]);
    const double b = 1.0 / std::sqrt(hi.eigenvalues[1]);
    // V diag(a,b) V^T with V columns (1,-1)/sqrt2 and (1,1)/sqrt2
    const double d = 0.5 * (a + b);
    const double o = 0.5 * (b - a);
    return {{{d, o}, {o, d}}};
}

inline double clip_to_square(double v) { return std::min(1.0, std::max(-1.0, v)); }

} // namespace detail

/// Mixture approximation (1/|G|) sum_{s in G} E[phi(s + (2/sqrt m) H^{-1/2} Z)]
/// with Z bivariate standard normal, evaluated by tensor Gauss-Hermite
/// quadrature with nodes_per_axis^2 points. phi is evaluated with its
/// arguments clipped to [-1, 1]^2 (nodes can land outside for small m).
template <class Phi>
double gaussian_mixture_expectation(const ModelParams& params, Phi&& phi,
                                    std::size_t nodes_per_axis = 40) {
    const GroundStateSet gs = ground_states(params);
    const double scale = 2.0 / std::sqrt(static_cast<double>(params.m));
    const GaussHermiteRule rule = gauss_hermite_rule(nodes_per_axis);
    const double sqrt2 = std::sqrt(2.0);
    const double inv_pi = 1.0 / 3.14159265358979323846264338327950288;

    double total = 0.0;
    for (const auto& s : gs.states) {
        const HessianInfo hi = hessian_at(params, s);
        const auto r = detail::hessian_inverse_sqrt(hi);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes_per_axis; ++i) {
            const double zi = sqrt2 * rule.nodes[i];
            double inner = 0.0;
            for (std::size_t j = 0; j < nodes_per_axis; ++j) {
                const double zj = sqrt2 * rule.nodes[j];
                const double x = detail::clip_to_square(s.first + scale * (r[0][0] * zi + r[0][1] * zj));
                const double y = detail::clip_to_square(s.second + scale * (r[1][0] * zi + r[1][1] * zj));
                inner += rule.weights[j] * phi(x, y);
            }
            acc += rule.weights[i] * inner;
        }
        total += acc * inv_pi;
    }
    return total / static_cast<double>(gs.states.size());
}

/// Monte Carlo form of the mixture expectation, kept for cross-validation of
/// the quadrature path.
template <class Phi>
double gaussian_mixture_expectation_mc(const ModelParams& params, Phi&& phi,
                                       std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw DomainError("gaussian_mixture_expectation_mc: samples >= 1");
    const GroundStateSet gs = ground_states(params);
    const double scale = 2.0 / std::sqrt(static_cast<double>(params.m));
    double total = 0.0;
    std::size_t state_index = 0;
    for (const auto& s : gs.states) {
        const HessianInfo hi = hessian_at(params, s);
        const auto r = detail::hessian_inverse_sqrt(hi);
        SplitMix64 rng(derive_stream(seed, state_index++));
        double acc = 0.0;
        for (std::size_t t = 0; t < samples; ++t) {
            const auto [z1, z2] = rng.normal_pair();
            const double x = detail::clip_to_square(s.first + scale * (r[0][0] * z1 + r[0][1] * z2));
            const double y = detail::clip_to_square(s.second + scale * (r[1][0] * z1 + r[1][1] * z2));
            acc += phi(x, y);
        }
        total += acc / static_cast<double>(samples);
    }
    return total / static_cast<double>(gs.states.size());
}

/// CSV export: columns mu_s, mu_sbar, log_weight, prob.
inline void write_law_csv(std::ostream& os, const MagnetizationLaw& law) {
    os << "mu_s,mu_sbar,log_weight,prob\n";
    char buf[128];
    const std::size_t n = law.grid_size();
    for (std::size_t ks = 0; ks < n; ++ks)
        for (std::size_t kb = 0; kb < n; ++kb) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", law.mu_value(ks),
                          law.mu_value(kb), law.log_weight(ks, kb), law.prob(ks, kb));
            os << buf;
        }
}

} // namespace ibm
