#pragma once

// Exact i.i.d. sampling from the blockmodel with a planted partition:
// draw (mu_S, mu_Sbar) from the exact magnetization law by inverse CDF,
// then pick uniformly which spins are +1 in each block. Draws use
// counter-based per-draw RNG streams, so batches parallelize and are
// reproducible regardless of execution order.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ibm/errors.hpp"
#include "ibm/magnetization.hpp"
#include "ibm/model.hpp"
#include "ibm/rng.hpp"

namespace ibm {

struct SampleBatch {
    ModelParams params;
    Partition partition; // the planted truth
    std::uint64_t seed = 0;
    std::vector<Configuration> configs;
};

/// Uniformly random balanced partition; deterministic given the seed.
inline Partition random_balanced_partition(std::size_t p, std::uint64_t seed) {
    if (p < 2 || p % 2 != 0)
        throw DomainError("random_balanced_partition: p must be even and >= 2");
    SplitMix64 rng(derive_stream(seed, 0));
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t m = p / 2;
    for (std::size_t i = 0; i < m; ++i)
        std::swap(idx[i], idx[i + rng.below(p - i)]);
    std::vector<std::uint8_t> mem(p, 0);
    for (std::size_t i = 0; i < m; ++i) mem[idx[i]] = 1;
    return Partition(std::move(mem));
}

namespace detail {

/// Marks `count` uniformly chosen entries of `slots` (partial Fisher-Yates).
inline void choose_uniform(std::vector<std::size_t>& scratch, std::size_t count,
                           SplitMix64& rng, std::vector<std::size_t>& out) {
    const std::size_t m = scratch.size();
    std::iota(scratch.begin(), scratch.end(), std::size_t{0});
    out.clear();
    for (std::size_t i = 0; i < count; ++i) {
        std::swap(scratch[i], scratch[i + rng.below(m - i)]);
        out.push_back(scratch[i]);
    }
}

} // namespace detail

/// n exact i.i.d. draws from the model with the given planted partition.
/// O(m) per draw after the O(m^2) law setup.
inline SampleBatch sample_configurations(const ModelParams& params, const Partition& part,
                                         std::size_t n, std::uint64_t seed) {
    if (part.size() != params.p) throw DomainError("sample_configurations: size mismatch");
    if (n < 1) throw DomainError("sample_configurations: n must be >= 1");
    const MagnetizationLaw law(params);
    const std::size_t g = law.grid_size();

    // cumulative distribution over the flattened grid for inverse-CDF draws
    std::vector<double> cdf(g * g);
    double acc = 0.0;
    for (std::size_t i = 0; i < g * g; ++i) {
        acc += std::exp(law.log_weight(i / g, i % g) - law.log_normalizer());
        cdf[i] = acc;
    }
    cdf.back() = 1.0;

    std::vector<std::size_t> s_sites, sb_sites;
    for (std::size_t i = 0; i < params.p; ++i)
        (part.in_s(i) ? s_sites : sb_sites).push_back(i);

    SampleBatch batch{params, part, seed, {}};
    batch.configs.reserve(n);
    std::vector<std::size_t> scratch(params.m), chosen;
    for (std::size_t t = 0; t < n; ++t) {
        SplitMix64 rng(derive_stream(seed, t));
        const double u = rng.uniform();
        const std::size_t cell = static_cast<std::size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const std::size_t ks = cell / g;
        const std::size_t kb = cell % g;

        std::vector<std::int8_t> spins(params.p, -1);
        detail::choose_uniform(scratch, ks, rng, chosen);
        for (std::size_t j : chosen) spins[s_sites[j]] = 1;
        detail::choose_uniform(scratch, kb, rng, chosen);
        for (std::size_t j : chosen) spins[sb_sites[j]] = 1;
        batch.configs.emplace_back(std::move(spins));
    }
    return batch;
}

} // namespace ibm
