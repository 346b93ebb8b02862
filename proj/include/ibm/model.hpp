#pragma once

// The Ising blockmodel itself: parameters, balanced partitions, spin
// configurations, the Hamiltonian in its magnetization form, the exact
// partition function and the log density.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ibm/errors.hpp"
#include "ibm/numerics.hpp"

namespace ibm {

/// Couplings (alpha across blocks, beta within) plus system size. p must be
/// even; m = p/2 is the block size. alpha <= beta is required throughout;
/// alpha == beta is the Curie-Weiss special case, accepted by the model and
/// sampler but rejected by recovery (the partition is unidentifiable there).
struct ModelParams {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t p = 2;
    std::size_t m = 1;

    ModelParams(double alpha_, double beta_, std::size_t p_)
        : alpha(alpha_), beta(beta_), p(p_), m(p_ / 2) {
        if (p < 2 || p % 2 != 0) throw DomainError("ModelParams: p must be even and >= 2");
        if (!(alpha <= beta)) throw DomainError("ModelParams: requires alpha <= beta");
        if (!std::isfinite(alpha) || !std::isfinite(beta))
            throw DomainError("ModelParams: couplings must be finite");
    }
};

/// Balanced two-block labeling of [p]. Stored as 0/1 membership; exposes the
/// +-1 vector v_S = 1_S - 1_Sbar and the unit vector u_S = v_S / sqrt(p).
class Partition {
public:
    explicit Partition(std::vector<std::uint8_t> membership)
        : membership_(std::move(membership)) {
        std::size_t count = 0;
        for (std::uint8_t b : membership_) {
            if (b > 1) throw DomainError("Partition: membership entries must be 0/1");
            count += b;
        }
        if (membership_.empty() || membership_.size() % 2 != 0 ||
            count != membership_.size() / 2)
            throw DomainError("Partition: membership must be balanced with p even");
    }

    /// Parses a 0/1 membership string such as "1100".
    static Partition parse(const std::string& bits) {
        std::vector<std::uint8_t> mem;
        mem.reserve(bits.size());
        for (char c : bits) {
            if (c != '0' && c != '1') throw DomainError("Partition: bad membership string");
            mem.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        return Partition(std::move(mem));
    }

    /// The canonical partition {1,...,m} for tests and defaults.
    static Partition first_half(std::size_t p) {
        if (p < 2 || p % 2 != 0) throw DomainError("Partition: p must be even and >= 2");
        std::vector<std::uint8_t> mem(p, 0);
        for (std::size_t i = 0; i < p / 2; ++i) mem[i] = 1;
        return Partition(std::move(mem));
    }

    std::size_t size() const { return membership_.size(); }
    std::size_t block_size() const { return membership_.size() / 2; }
    bool in_s(std::size_t i) const { return membership_[i] != 0; }
    double sign(std::size_t i) const { return membership_[i] ? 1.0 : -1.0; }
    const std::vector<std::uint8_t>& membership() const { return membership_; }

    std::vector<double> v() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = sign(i);
        return out;
    }

    std::vector<double> u() const {
        std::vector<double> out = v();
        const double inv = 1.0 / std::sqrt(static_cast<double>(size()));
        for (double& x : out) x *= inv;
        return out;
    }

    /// Sign labeling (+1 on S, -1 on its complement).
    std::vector<int> labeling() const {
        std::vector<int> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = membership_[i] ? 1 : -1;
        return out;
    }

    std::string membership_string() const {
        std::string s(size(), '0');
        for (std::size_t i = 0; i < size(); ++i)
            if (membership_[i]) s[i] = '1';
        return s;
    }

    bool operator==(const Partition& other) const { return membership_ == other.membership_; }

private:
    std::vector<std::uint8_t> membership_;
};

/// A spin configuration sigma in {-1,+1}^p.
struct Configuration {
    std::vector<std::int8_t> spins;

    explicit Configuration(std::vector<std::int8_t> s) : spins(std::move(s)) {
        for (std::int8_t v : spins)
            if (v != 1 && v != -1) throw DomainError("Configuration: spins must be +-1");
    }
};

/// (mu_S, mu_Sbar): block averages of the spins.
inline std::pair<double, double> local_magnetizations(const Configuration& config,
                                                      const Partition& part) {
    if (config.spins.size() != part.size())
        throw DomainError("local_magnetizations: size mismatch");
    const std::size_t m = part.block_size();
    long long in = 0, out = 0;
    for (std::size_t i = 0; i < part.size(); ++i)
        (part.in_s(i) ? in : out) += config.spins[i];
    return {static_cast<double>(in) / static_cast<double>(m),
            static_cast<double>(out) / static_cast<double>(m)};
}

/// IBM energy -(m/4)(2 alpha mu_S mu_Sbar + beta (mu_S^2 + mu_Sbar^2)).
/// Equals the raw coupling form with pair sums over ordered pairs including
/// i == j; many Ising conventions exclude the diagonal, this model does not.
inline double hamiltonian(const Configuration& config, const Partition& part,
                          const ModelParams& params) {
    if (config.spins.size() != params.p || part.size() != params.p)
        throw DomainError("hamiltonian: size mismatch");
    const auto [mu_s, mu_sb] = local_magnetizations(config, part);
    const double m = static_cast<double>(params.m);
    return -(m / 4.0) *
           (2.0 * params.alpha * mu_s * mu_sb + params.beta * (mu_s * mu_s + mu_sb * mu_sb));
}

namespace detail {

/// ln of the unnormalized magnetization weight z_m at grid indices
/// (k_s, k_sb), where mu = (2k - m)/m.
inline double log_magnetization_weight(const ModelParams& params, std::size_t k_s,
                                       std::size_t k_sb) {
    const double m = static_cast<double>(params.m);
    const double mu_s = (2.0 * static_cast<double>(k_s) - m) / m;
    const double mu_sb = (2.0 * static_cast<double>(k_sb) - m) / m;
    const double energy = (m / 4.0) * (2.0 * params.alpha * mu_s * mu_sb +
                                       params.beta * (mu_s * mu_s + mu_sb * mu_sb));
    const long long mi = static_cast<long long>(params.m);
    // grouped so the block-swap symmetry of the weight is exact
    return energy + (log_binomial(mi, static_cast<long long>(k_s)) +
                     log_binomial(mi, static_cast<long long>(k_sb)));
}

inline void require_law_scale(const ModelParams& params, const char* who) {
    if (params.m > 5000)
        throw ResourceError(std::string(who) + ": m > 5000 (grid has (m+1)^2 terms)");
}

} // namespace detail

/// ln Z via the exact magnetization grid ((m+1)^2 terms, never 2^p).
/// Independent of any partition choice.
inline double log_partition_exact(const ModelParams& params) {
    detail::require_law_scale(params, "log_partition_exact");
    const std::size_t n = params.m + 1;
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t ks = 0; ks < n; ++ks)
        for (std::size_t kb = 0; kb < n; ++kb)
            max_lw = std::max(max_lw, detail::log_magnetization_weight(params, ks, kb));
    double acc = 0.0;
    for (std::size_t ks = 0; ks < n; ++ks)
        for (std::size_t kb = 0; kb < n; ++kb)
            acc += std::exp(detail::log_magnetization_weight(params, ks, kb) - max_lw);
    return max_lw + std::log(acc);
}

inline double log_density(const Configuration& config, const Partition& part,
                          const ModelParams& params) {
    return -hamiltonian(config, part, params) - log_partition_exact(params);
}

} // namespace ibm
