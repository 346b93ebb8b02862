#pragma once

// Experiment orchestration: validated configs, Monte Carlo recovery curves
// with per-trial RNG streams (deterministic regardless of thread count), and
// the contour / phase-diagram table emitters.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ibm/bounds.hpp"
#include "ibm/covariance.hpp"
#include "ibm/errors.hpp"
#include "ibm/free_energy.hpp"
#include "ibm/model.hpp"
#include "ibm/recovery.hpp"
#include "ibm/sampler.hpp"

namespace ibm {

struct ExperimentConfig {
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<std::size_t> p_list;
    std::vector<std::size_t> n_list; // n = 0 means population-Gamma debug mode
    std::size_t trials = 1;
    RecoveryMethod method = RecoveryMethod::Sdp;
    std::uint64_t master_seed = 1;
    std::string output_path; // empty = stdout
    std::size_t threads = 0; // 0 = hardware concurrency
    double tol = 1e-7;
    std::size_t max_iters = 500;

    void validate() const {
        if (!(alpha < beta))
            throw ConfigError("config: recovery needs alpha < beta (identifiable partition)");
        if (p_list.empty() || n_list.empty()) throw ConfigError("config: empty p or n list");
        for (std::size_t p : p_list) {
            if (p < 2 || p % 2 != 0) throw ConfigError("config: every p must be even and >= 2");
            if (method == RecoveryMethod::Mle && p > 16)
                throw ConfigError("config: brute-force MLE needs p <= 16");
        }
        if (trials < 1) throw ConfigError("config: trials >= 1");
        if (!(tol > 0.0)) throw ConfigError("config: tol > 0");
        if (max_iters < 1) throw ConfigError("config: max-iters >= 1");
    }
};

struct TrialRow {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t p = 0;
    std::size_t n = 0;
    std::size_t trial_index = 0;
    RecoveryMethod method = RecoveryMethod::Sdp;
    int success = 0; // 1 iff diamond == 0
    int diamond = 0;
    int certified = 0;
    double wall_seconds = 0.0; // diagnostic only; never part of the CSV
};

namespace detail {

inline std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t p, std::size_t n,
                                std::size_t trial) {
    std::uint64_t s = cfg.master_seed;
    s = mix64(s ^ mix64(static_cast<std::uint64_t>(p)));
    s = mix64(s ^ mix64(static_cast<std::uint64_t>(n) + 0x9e37ULL));
    s = mix64(s ^ mix64(static_cast<std::uint64_t>(trial) + 0x79b9ULL));
    return s;
}

inline TrialRow run_one_trial(const ExperimentConfig& cfg, std::size_t p, std::size_t n,
                              std::size_t trial) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = trial_seed(cfg, p, n, trial);
    const ModelParams params(cfg.alpha, cfg.beta, p);
    const Partition truth = random_balanced_partition(p, derive_stream(seed, 1));

    Matrix sigma, gamma;
    if (n == 0) {
        // population-Gamma debug mode
        const CovarianceSummary summary = exact_delta_omega(params);
        gamma = population_gamma(summary, truth);
        sigma = population_sigma(summary, truth);
    } else {
        const SampleBatch batch =
            sample_configurations(params, truth, n, derive_stream(seed, 2));
        EmpiricalGamma eg = empirical_gamma(batch);
        sigma = std::move(eg.sigma_hat);
        gamma = std::move(eg.gamma_hat);
    }

    RecoveryResult result;
    switch (cfg.method) {
        case RecoveryMethod::Mle:
            result = mle_bruteforce(sigma);
            break;
        case RecoveryMethod::Sdp:
            result = sdp_solve(gamma, 0, cfg.tol, cfg.max_iters, derive_stream(seed, 3));
            break;
        case RecoveryMethod::Spectral:
            result = spectral_partition(gamma);
            break;
    }

    TrialRow row;
    row.alpha = cfg.alpha;
    row.beta = cfg.beta;
    row.p = p;
    row.n = n;
    row.trial_index = trial;
    row.method = cfg.method;
    row.diamond = diamond_distance(result.labels, truth.labeling());
    row.success = row.diamond == 0 ? 1 : 0;
    row.certified = result.certified ? 1 : 0;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

} // namespace detail

/// Runs the full (p, n, trial) grid. Each trial is a pure function of
/// (config, master_seed, indices); rows come back sorted by (p, n, trial)
/// whatever the thread count.
inline std::vector<TrialRow> run_recovery_curve(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Task {
        std::size_t p, n, trial, slot;
    };
    std::vector<Task> tasks;
    for (std::size_t p : cfg.p_list)
        for (std::size_t n : cfg.n_list)
            for (std::size_t t = 0; t < cfg.trials; ++t)
                tasks.push_back({p, n, t, tasks.size()});

    std::vector<TrialRow> rows(tasks.size());
    std::size_t workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
    if (workers == 0) workers = 1;
    workers = std::min(workers, tasks.size());

    if (workers <= 1) {
        for (const Task& task : tasks)
            rows[task.slot] = detail::run_one_trial(cfg, task.p, task.n, task.trial);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    rows[tasks[i].slot] =
                        detail::run_one_trial(cfg, tasks[i].p, tasks[i].n, tasks[i].trial);
                }
            });
        for (std::thread& th : pool) th.join();
    }
    return rows;
}

/// Self-describing CSV: one '#'-prefixed JSON line with the config, then one
/// row per trial. Wall-clock timing is deliberately left out so repeated
/// runs with the same seed are byte-identical.
inline void write_trial_rows_csv(std::ostream& os, const ExperimentConfig& cfg,
                                 const std::vector<TrialRow>& rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "# {\"alpha\":%.17g,\"beta\":%.17g,\"trials\":%zu,",
                  cfg.alpha, cfg.beta, cfg.trials);
    os << buf << "\"p_list\":[";
    for (std::size_t i = 0; i < cfg.p_list.size(); ++i)
        os << (i ? "," : "") << cfg.p_list[i];
    os << "],\"n_list\":[";
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i)
        os << (i ? "," : "") << cfg.n_list[i];
    std::snprintf(buf, sizeof(buf), "],\"method\":\"%s\",\"seed\":%llu}",
                  method_name(cfg.method),
                  static_cast<unsigned long long>(cfg.master_seed));
    os << buf << "\nalpha,beta,p,n,trial,method,success,diamond,certified\n";
    for (const TrialRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%zu,%zu,%zu,%s,%d,%d,%d\n", r.alpha,
                      r.beta, r.p, r.n, r.trial_index, method_name(r.method), r.success,
                      r.diamond, r.certified);
        os << buf;
    }
}

// ---------------------------------------------------------------------------
// Figure tables
// ---------------------------------------------------------------------------

struct ContourRow {
    double alpha, beta, x, y, g;
};

/// Free energy sampled on a uniform open grid of (-1, 1)^2 (cell centers).
inline std::vector<ContourRow> emit_contour(const ModelParams& params,
                                            std::size_t grid_size) {
    if (grid_size < 2) throw DomainError("emit_contour: grid_size >= 2");
    std::vector<ContourRow> rows;
    rows.reserve(grid_size * grid_size);
    const double step = 2.0 / static_cast<double>(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double x = -1.0 + step * (static_cast<double>(i) + 0.5);
        for (std::size_t j = 0; j < grid_size; ++j) {
            const double y = -1.0 + step * (static_cast<double>(j) + 0.5);
            rows.push_back({params.alpha, params.beta, x, y, ibm_free_energy(params, x, y)});
        }
    }
    return rows;
}

inline void write_contour_csv(std::ostream& os, const std::vector<ContourRow>& rows) {
    os << "alpha,beta,x,y,g\n";
    char buf[192];
    for (const ContourRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.alpha, r.beta,
                      r.x, r.y, r.g);
        os << buf;
    }
}

struct PhaseRow {
    double alpha, beta;
    std::string region; // I, II, III or AXIS
    double xtilde;
};

/// Phase-diagram table over a rectangle of couplings; only points with
/// alpha < beta are emitted. Boundary points beta + |alpha| = 2 fold into
/// region II.
inline std::vector<PhaseRow> emit_phase_diagram(double alpha_lo, double alpha_hi,
                                                double beta_lo, double beta_hi,
                                                double step) {
    if (!(step > 0.0)) throw DomainError("emit_phase_diagram: step must be positive");
    std::vector<PhaseRow> rows;
    for (double a = alpha_lo; a <= alpha_hi + 1e-12; a += step) {
        for (double b = beta_lo; b <= beta_hi + 1e-12; b += step) {
            if (!(a < b)) continue;
            const double strength = b + std::abs(a);
            PhaseRow row{a, b, "II", 0.0};
            if (strength > 2.0) {
                row.xtilde = mean_field_solve(strength / 2.0);
                if (a < 0.0)
                    row.region = "I";
                else if (a > 0.0)
                    row.region = "III";
                else
                    row.region = "AXIS";
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline void write_phase_csv(std::ostream& os, const std::vector<PhaseRow>& rows) {
    os << "alpha,beta,region,xtilde\n";
    char buf[160];
    for (const PhaseRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%s,%.17g\n", r.alpha, r.beta,
                      r.region.c_str(), r.xtilde);
        os << buf;
    }
}

} // namespace ibm
