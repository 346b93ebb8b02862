#pragma once

// Population and empirical covariance structure: the within/cross block
// covariances Delta and Omega, their asymptotic gap formulas, the centered
// matrices Gamma = P Sigma P and Gamma_hat, and the rank-structured
// population Gamma.

#include <cstdint>
#include <ostream>
#include <vector>

#include "ibm/errors.hpp"
#include "ibm/free_energy.hpp"
#include "ibm/magnetization.hpp"
#include "ibm/model.hpp"
#include "ibm/numerics.hpp"
#include "ibm/sampler.hpp"

namespace ibm {

enum class GapMode { Exact, Asymptotic };

/// Delta (within-block off-diagonal covariance), Omega (cross-block) and the
/// recovery signal gap. In Asymptotic mode delta/omega carry the leading
/// (m-independent) terms and gap the applicable case formula.
struct CovarianceSummary {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t m = 1;
    double delta = 0.0;
    double omega = 0.0;
    double gap = 0.0;
    GapMode mode = GapMode::Exact;
};

/// Exact Delta and Omega through moments of the magnetization law:
/// Delta = m/(2(m-1)) E[mu_S^2 + mu_Sbar^2] - 1/(m-1), Omega = E[mu_S mu_Sbar].
inline CovarianceSummary exact_delta_omega(const ModelParams& params) {
    if (params.m < 2)
        throw DomainError("exact_delta_omega: m >= 2 required (no within-block pair at m=1)");
    const MagnetizationLaw law(params);
    const double second = exact_moment(law, [](double x, double y) { return x * x + y * y; });
    const double cross = exact_moment(law, [](double x, double y) { return x * y; });
    const double m = static_cast<double>(params.m);
    CovarianceSummary s;
    s.alpha = params.alpha;
    s.beta = params.beta;
    s.m = params.m;
    s.delta = m / (2.0 * (m - 1.0)) * second - 1.0 / (m - 1.0);
    s.omega = cross;
    s.gap = s.delta - s.omega;
    s.mode = GapMode::Exact;
    return s;
}

/// The two-term asymptotic gap
///   (1/2|G|) sum_G (x - y)^2 + (1/m) (b-a)(1-x^2)^2 / (2 - (b-a)(1-x^2)).
inline double asymptotic_gap_general(const ModelParams& params) {
    const GroundStateSet gs = ground_states(params);
    double constant = 0.0;
    for (const auto& [x, y] : gs.states) constant += (x - y) * (x - y);
    constant /= 2.0 * static_cast<double>(gs.states.size());
    const double ba = params.beta - params.alpha;
    const double w = 1.0 - gs.xtilde * gs.xtilde;
    return constant + (ba * w * w / (2.0 - ba * w)) / static_cast<double>(params.m);
}

/// Case-resolved asymptotic gap: subcritical (b-a)/((2-(b-a)) m); aligned
/// (1/m)(b-a)(1-x^2)^2/(2-(b-a)(1-x^2)); axis x^2; polarized 2 x^2.
inline CovarianceSummary asymptotic_gap(const ModelParams& params) {
    const GroundStateSet gs = ground_states(params);
    const double xt = gs.xtilde;
    const double ba = params.beta - params.alpha;
    CovarianceSummary s;
    s.alpha = params.alpha;
    s.beta = params.beta;
    s.m = params.m;
    s.mode = GapMode::Asymptotic;
    // leading terms of Delta and Omega themselves
    double d0 = 0.0, o0 = 0.0;
    for (const auto& [x, y] : gs.states) {
        d0 += 0.5 * (x * x + y * y);
        o0 += x * y;
    }
    s.delta = d0 / static_cast<double>(gs.states.size());
    s.omega = o0 / static_cast<double>(gs.states.size());
    const double m = static_cast<double>(params.m);
    switch (gs.phase) {
        case Phase::UniqueZero:
            s.gap = ba / ((2.0 - ba) * m);
            break;
        case Phase::FerroAligned: {
            const double w = 1.0 - xt * xt;
            s.gap = ba * w * w / ((2.0 - ba * w) * m);
            break;
        }
        case Phase::AxisFour:
            s.gap = xt * xt;
            break;
        case Phase::FerroPolarized:
            s.gap = 2.0 * xt * xt;
            break;
    }
    return s;
}

/// Empirical covariance Sigma_hat and its centered version
/// Gamma_hat = P Sigma_hat P, P = I - 11^T/p.
struct EmpiricalGamma {
    Matrix sigma_hat;
    Matrix gamma_hat;
    std::size_t n = 0;
};

inline EmpiricalGamma empirical_gamma(const std::vector<Configuration>& configs,
                                      std::size_t p) {
    if (configs.empty()) throw DomainError("empirical_gamma: empty batch");
    // integer accumulation keeps n * Sigma_hat exact
    std::vector<long long> acc(p * p, 0);
    for (const Configuration& c : configs) {
        if (c.spins.size() != p) throw DomainError("empirical_gamma: size mismatch");
        for (std::size_t i = 0; i < p; ++i) {
            const long long si = c.spins[i];
            for (std::size_t j = i; j < p; ++j) acc[i * p + j] += si * c.spins[j];
        }
    }
    EmpiricalGamma out;
    out.n = configs.size();
    out.sigma_hat = Matrix(p, p);
    const double inv_n = 1.0 / static_cast<double>(configs.size());
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            const double v = static_cast<double>(acc[i * p + j]) * inv_n;
            out.sigma_hat(i, j) = v;
            out.sigma_hat(j, i) = v;
        }

    // Gamma_hat entrywise: Sigma - (r_i + r_j)/p + rbar/p^2 with r the row sums
    std::vector<double> rowsum(p, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < p; ++j) r += out.sigma_hat(i, j);
        rowsum[i] = r;
        total += r;
    }
    const double pd = static_cast<double>(p);
    out.gamma_hat = Matrix(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            out.gamma_hat(i, j) =
                out.sigma_hat(i, j) - (rowsum[i] + rowsum[j]) / pd + total / (pd * pd);
    return out;
}

inline EmpiricalGamma empirical_gamma(const SampleBatch& batch) {
    return empirical_gamma(batch.configs, batch.params.p);
}

/// Population Gamma = (1-Delta) P + p (Delta-Omega)/2 u_S u_S^T. Spectrum:
/// 0 on the all-ones vector, 1-Delta+p(Delta-Omega)/2 on u_S, 1-Delta with
/// multiplicity p-2.
inline Matrix population_gamma(const CovarianceSummary& summary, const Partition& part) {
    const std::size_t p = part.size();
    const double pd = static_cast<double>(p);
    const std::vector<double> u = part.u();
    Matrix g(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const double proj = (i == j ? 1.0 : 0.0) - 1.0 / pd;
            g(i, j) = (1.0 - summary.delta) * proj +
                      pd * (summary.delta - summary.omega) / 2.0 * u[i] * u[j];
        }
    return g;
}

/// Population Sigma: unit diagonal, Delta within blocks, Omega across.
inline Matrix population_sigma(const CovarianceSummary& summary, const Partition& part) {
    const std::size_t p = part.size();
    Matrix s(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (i == j)
                s(i, j) = 1.0;
            else
                s(i, j) = (part.in_s(i) == part.in_s(j)) ? summary.delta : summary.omega;
        }
    return s;
}

/// Dense CSV export, one matrix row per line.
inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%s%.17g", j ? "," : "", m(i, j));
            os << buf;
        }
        os << "\n";
    }
}

/// JSON export: {alpha, beta, m, delta, omega, gap, mode}.
inline void write_summary_json(std::ostream& os, const CovarianceSummary& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"alpha\":%.17g,\"beta\":%.17g,\"m\":%zu,\"delta\":%.17g,"
                  "\"omega\":%.17g,\"gap\":%.17g,\"mode\":\"%s\"}",
                  s.alpha, s.beta, s.m, s.delta, s.omega, s.gap,
                  s.mode == GapMode::Exact ? "exact" : "asymptotic");
    os << buf;
}

} // namespace ibm
