#pragma once

// Partition recovery: brute-force maximum likelihood, the elliptope SDP
// relaxation solved by low-rank coordinate ascent with an a-posteriori
// Laplacian certificate, spectral sign clustering, and the diamond metric.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ibm/errors.hpp"
#include "ibm/model.hpp"
#include "ibm/numerics.hpp"
#include "ibm/rng.hpp"

namespace ibm {

/// A +-1 sign labeling of the sites. Unlike Partition it need not be
/// balanced; the SDP and spectral estimators are unbalanced by construction.
using BlockLabeling = std::vector<int>;

/// min(|S delta T|, |S delta Tbar|): symmetric difference up to relabeling.
inline int diamond_distance(const BlockLabeling& a, const BlockLabeling& b) {
    if (a.size() != b.size()) throw DomainError("diamond_distance: length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
    return std::min(d, static_cast<int>(a.size()) - d);
}

enum class RecoveryMethod { Mle, Sdp, Spectral };

inline const char* method_name(RecoveryMethod m) {
    switch (m) {
        case RecoveryMethod::Mle: return "mle";
        case RecoveryMethod::Sdp: return "sdp";
        case RecoveryMethod::Spectral: return "spectral";
    }
    return "?";
}

struct RecoveryResult {
    BlockLabeling labels;
    RecoveryMethod method = RecoveryMethod::Mle;
    std::optional<bool> certificate_psd;
    std::optional<std::size_t> certificate_zero_multiplicity;
    bool certified = false;   // psd certificate with simple kernel held
    double objective = 0.0;   // Tr[C v v^T] at the output labeling
    std::size_t iterations = 0;

    bool balanced() const {
        long long s = 0;
        for (int v : labels) s += v;
        return s == 0;
    }

    Partition to_partition() const {
        if (!balanced()) throw DomainError("RecoveryResult: labeling is not balanced");
        std::vector<std::uint8_t> mem(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) mem[i] = labels[i] > 0 ? 1 : 0;
        return Partition(std::move(mem));
    }
};

// ---------------------------------------------------------------------------
// Laplacian certificate
// ---------------------------------------------------------------------------

/// L_S(C) = diag(C v v^T) - C. Satisfies L_S(C) v = 0 for every C.
inline Matrix laplacian_matrix(const Matrix& c, const BlockLabeling& labels) {
    detail::require_symmetric(c, "laplacian_matrix");
    const std::size_t p = c.rows();
    if (labels.size() != p) throw DomainError("laplacian_matrix: dimension mismatch");
    std::vector<double> cv(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < p; ++j) acc += c(i, j) * static_cast<double>(labels[j]);
        cv[i] = acc;
    }
    Matrix l(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) l(i, j) = -c(i, j);
        l(i, i) += cv[i] * static_cast<double>(labels[i]);
    }
    return l;
}

struct CertificateReport {
    double laplacian_min_eig = 0.0;
    std::size_t zero_multiplicity = 0;
    bool psd = false;
    bool unique = false; // psd with simple kernel: v v^T is the unique elliptope maximizer
};

inline double default_certificate_tol(const Matrix& c) { return 1e-7 * (1.0 + c.max_abs()); }

/// Checks whether v v^T maximizes Tr[CV] over the elliptope: psd status and
/// kernel multiplicity of L_S(C). tol <= 0 selects the scale-aware default.
inline CertificateReport laplacian_certificate(const Matrix& c, const BlockLabeling& labels,
                                               double tol = 0.0) {
    const Matrix l = laplacian_matrix(c, labels);
    if (tol <= 0.0) tol = default_certificate_tol(c);
    const PsdReport r = is_psd(l, tol);
    CertificateReport rep;
    rep.laplacian_min_eig = r.min_eig;
    rep.zero_multiplicity = r.zero_multiplicity;
    rep.psd = r.psd;
    rep.unique = r.psd && r.zero_multiplicity == 1;
    return rep;
}

inline CertificateReport laplacian_certificate(const Matrix& c, const Partition& part,
                                               double tol = 0.0) {
    return laplacian_certificate(c, part.labeling(), tol);
}

// ---------------------------------------------------------------------------
// Brute-force maximum likelihood
// ---------------------------------------------------------------------------

/// Exact maximizer of Tr[Sigma_hat v_S v_S^T] over balanced partitions.
/// Site 1 is fixed inside S (complement symmetry) and ties go to the
/// lexicographically smallest index set, so the identity input returns
/// S = {1,...,m}. Feasible for p <= 16.
inline RecoveryResult mle_bruteforce(const Matrix& sigma_hat) {
    detail::require_symmetric(sigma_hat, "mle_bruteforce");
    const std::size_t p = sigma_hat.rows();
    if (p < 2 || p % 2 != 0) throw DomainError("mle_bruteforce: p must be even and >= 2");
    if (p > 16) throw ResourceError("mle_bruteforce: p > 16 is not tractable");
    const std::size_t m = p / 2;

    std::vector<std::size_t> pick(m - 1); // indices from {1,...,p-1} joining site 0
    for (std::size_t i = 0; i < m - 1; ++i) pick[i] = i + 1;
    std::vector<double> v(p);
    double best = -std::numeric_limits<double>::infinity();
    BlockLabeling best_labels;
    std::size_t candidates = 0;

    for (;;) {
        std::fill(v.begin(), v.end(), -1.0);
        v[0] = 1.0;
        for (std::size_t i : pick) v[i] = 1.0;
        const double obj = sigma_hat.quad_form(v);
        ++candidates;
        if (obj > best) {
            best = obj;
            best_labels.assign(p, -1);
            best_labels[0] = 1;
            for (std::size_t i : pick) best_labels[i] = 1;
        }
        // next (m-1)-combination of {1,...,p-1} in lexicographic order
        if (m == 1) break;
        std::size_t k = m - 1;
        while (k > 0 && pick[k - 1] == p - m + k) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t j = k; j < m - 1; ++j) pick[j] = pick[j - 1] + 1;
    }

    RecoveryResult res;
    res.labels = std::move(best_labels);
    res.method = RecoveryMethod::Mle;
    res.objective = best;
    res.iterations = candidates;
    return res;
}

// ---------------------------------------------------------------------------
// Elliptope SDP via low-rank coordinate ascent
// ---------------------------------------------------------------------------

/// One Burer-Monteiro run: V = R R^T with unit rows, row i repeatedly set to
/// the normalized gradient sum_{j != i} C_ij R_j (the diagonal term is
/// constant on the sphere, so this is the exact row subproblem and the
/// objective never decreases).
struct AscentTrace {
    std::vector<double> r;       // p x rank, row-major
    std::size_t rank = 0;
    std::vector<double> objective_history; // one entry per sweep
    bool converged = false;
};

inline AscentTrace bm_coordinate_ascent(const Matrix& c, std::size_t rank, double tol,
                                        std::size_t max_iters, std::uint64_t seed) {
    detail::require_symmetric(c, "bm_coordinate_ascent");
    const std::size_t p = c.rows();
    if (rank == 0) rank = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * p))) + 1;
    if (max_iters == 0) throw DomainError("bm_coordinate_ascent: max_iters >= 1");

    AscentTrace trace;
    trace.rank = rank;
    trace.r.assign(p * rank, 0.0);
    SplitMix64 rng(derive_stream(seed, 0));
    for (std::size_t i = 0; i < p; ++i) {
        double norm_sq = 0.0;
        for (std::size_t k = 0; k < rank; k += 2) {
            const auto [g1, g2] = rng.normal_pair();
            trace.r[i * rank + k] = g1;
            if (k + 1 < rank) trace.r[i * rank + k + 1] = g2;
        }
        for (std::size_t k = 0; k < rank; ++k) norm_sq += trace.r[i * rank + k] * trace.r[i * rank + k];
        if (norm_sq == 0.0) {
            trace.r[i * rank] = 1.0;
        } else {
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (std::size_t k = 0; k < rank; ++k) trace.r[i * rank + k] *= inv;
        }
    }

    std::vector<double> grad(rank);
    double prev_obj = -std::numeric_limits<double>::infinity();
    for (std::size_t sweep = 0; sweep < max_iters; ++sweep) {
        for (std::size_t i = 0; i < p; ++i) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t j = 0; j < p; ++j) {
                if (j == i) continue;
                const double cij = c(i, j);
                if (cij == 0.0) continue;
                const double* rj = &trace.r[j * rank];
                for (std::size_t k = 0; k < rank; ++k) grad[k] += cij * rj[k];
            }
            double norm_sq = 0.0;
            for (std::size_t k = 0; k < rank; ++k) norm_sq += grad[k] * grad[k];
            if (norm_sq == 0.0) continue; // any unit row is optimal; keep the current one
            const double inv = 1.0 / std::sqrt(norm_sq);
            double* ri = &trace.r[i * rank];
            for (std::size_t k = 0; k < rank; ++k) ri[k] = grad[k] * inv;
        }
        // objective Tr[C R R^T]
        double obj = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double* ri = &trace.r[i * rank];
            for (std::size_t j = 0; j < p; ++j) {
                const double cij = c(i, j);
                if (cij == 0.0) continue;
                const double* rj = &trace.r[j * rank];
                double dot = 0.0;
                for (std::size_t k = 0; k < rank; ++k) dot += ri[k] * rj[k];
                obj += cij * dot;
            }
        }
        trace.objective_history.push_back(obj);
        if (sweep > 0 && std::abs(obj - prev_obj) <= tol * std::max(1.0, std::abs(obj))) {
            trace.converged = true;
            break;
        }
        prev_obj = obj;
    }
    return trace;
}

namespace detail {

/// Sign labeling from the leading eigenvector of R R^T, computed through the
/// rank x rank Gram matrix. First nonzero coordinate positive; exact zeros
/// get +1.
inline BlockLabeling round_low_rank(const std::vector<double>& r, std::size_t p,
                                    std::size_t rank) {
    Matrix gram(rank, rank);
    for (std::size_t a = 0; a < rank; ++a)
        for (std::size_t b = a; b < rank; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p; ++i) acc += r[i * rank + a] * r[i * rank + b];
            gram(a, b) = acc;
            gram(b, a) = acc;
        }
    const Spectrum s = sym_eigen(gram);
    std::vector<double> lead(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < rank; ++k) acc += r[i * rank + k] * s.eigenvectors(k, rank - 1);
        lead[i] = acc;
    }
    for (double x : lead) {
        if (std::abs(x) > 1e-14) {
            if (x < 0.0)
                for (double& y : lead) y = -y;
            break;
        }
    }
    BlockLabeling labels(p);
    for (std::size_t i = 0; i < p; ++i) labels[i] = lead[i] >= 0.0 ? 1 : -1;
    return labels;
}

} // namespace detail

/// Elliptope relaxation max Tr[Gamma_hat V] over {V >= 0, diag V = 1}.
/// Solved by rank-ceil(sqrt(2p))+1 coordinate ascent, rounded by the sign of
/// the top eigenvector of R R^T, then verified with the Laplacian
/// certificate: when the certificate holds the rounded labeling is the exact
/// unique SDP optimum. Non-convergence returns the best iterate uncertified.
inline RecoveryResult sdp_solve(const Matrix& gamma_hat, std::size_t rank = 0,
                                double tol = 1e-7, std::size_t max_iters = 2000,
                                std::uint64_t seed = 0x1b5eedULL) {
    const AscentTrace trace = bm_coordinate_ascent(gamma_hat, rank, tol, max_iters, seed);
    const std::size_t p = gamma_hat.rows();

    RecoveryResult res;
    res.method = RecoveryMethod::Sdp;
    res.labels = detail::round_low_rank(trace.r, p, trace.rank);
    res.iterations = trace.objective_history.size();
    std::vector<double> v(p);
    for (std::size_t i = 0; i < p; ++i) v[i] = static_cast<double>(res.labels[i]);
    res.objective = gamma_hat.quad_form(v);
    if (trace.converged) {
        const CertificateReport rep = laplacian_certificate(gamma_hat, res.labels);
        res.certificate_psd = rep.psd;
        res.certificate_zero_multiplicity = rep.zero_multiplicity;
        res.certified = rep.unique;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Spectral estimator
// ---------------------------------------------------------------------------

/// Sign clustering of the leading unit eigenvector of Gamma_hat. Zero
/// entries are labeled +1. With a degenerate leading eigenspace (no block
/// signal) the labeling is arbitrary but deterministic.
inline RecoveryResult spectral_partition(const Matrix& gamma_hat) {
    detail::require_symmetric(gamma_hat, "spectral_partition");
    const std::size_t p = gamma_hat.rows();
    const Spectrum s = sym_eigen(gamma_hat);
    RecoveryResult res;
    res.method = RecoveryMethod::Spectral;
    res.labels.resize(p);
    for (std::size_t i = 0; i < p; ++i) res.labels[i] = s.eigenvectors(i, p - 1) >= 0.0 ? 1 : -1;
    std::vector<double> v(p);
    for (std::size_t i = 0; i < p; ++i) v[i] = static_cast<double>(res.labels[i]);
    res.objective = gamma_hat.quad_form(v);
    res.iterations = 1;
    return res;
}

} // namespace ibm
