#pragma once

// Shared numerical kernels: log-domain combinatorics, dense symmetric
// eigendecomposition, PSD tests and scalar root finding. Everything here is
// a pure function of its inputs and safe to call from any thread.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ibm/errors.hpp"

namespace ibm {

// ---------------------------------------------------------------------------
// Dense matrices (row-major). Just enough linear algebra for this project;
// p stays in the hundreds, so no blocking or sparsity.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Largest absolute deviation from symmetry (infinite when not square).
    double asymmetry() const {
        if (!square()) return std::numeric_limits<double>::infinity();
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
        return m;
    }

    /// Quadratic form v^T A v.
    double quad_form(std::span<const double> v) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) row += (*this)(i, j) * v[j];
            acc += v[i] * row;
        }
        return acc;
    }

    std::vector<double> multiply(std::span<const double> v) const {
        std::vector<double> out(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) row += (*this)(i, j) * v[j];
            out[i] = row;
        }
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Log-domain combinatorics
// ---------------------------------------------------------------------------

namespace detail {

// ln k! table, grown on demand. Entries come straight from lgamma so no
// cumulative rounding builds up; thread_local keeps queries lock-free.
inline double log_factorial(std::size_t k) {
    thread_local std::vector<double> table;
    if (k >= table.size()) {
        const std::size_t old = table.size();
        table.resize(k + 1);
        for (std::size_t i = old; i <= k; ++i)
            table[i] = std::lgamma(static_cast<double>(i) + 1.0);
    }
    return table[k];
}

} // namespace detail

/// ln C(m, k). O(1) per query after an O(m) table build. The grouping makes
/// the k <-> m-k symmetry exact in floating point.
inline double log_binomial(long long m, long long k) {
    if (m <= 0) throw DomainError("log_binomial: m must be a positive integer");
    if (k < 0 || k > m) throw DomainError("log_binomial: k outside [0, m]");
    return detail::log_factorial(static_cast<std::size_t>(m)) -
           (detail::log_factorial(static_cast<std::size_t>(k)) +
            detail::log_factorial(static_cast<std::size_t>(m - k)));
}

/// ln sum_i exp(v_i), stable for inputs up to +-1e6.
inline double log_sum_exp(std::span<const double> values) {
    if (values.empty()) throw DomainError("log_sum_exp: empty input");
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m; // all -inf (or a stray inf) dominates
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - m);
    return m + std::log(acc);
}

inline double log_sum_exp(const std::vector<double>& values) {
    return log_sum_exp(std::span<const double>(values));
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Full eigendecomposition of a symmetric matrix. Eigenvalues ascending,
/// eigenvector columns paired with them, each column's first nonzero entry
/// made positive so results are reproducible.
struct Spectrum {
    std::vector<double> eigenvalues;
    Matrix eigenvectors; // column k pairs with eigenvalues[k]
};

namespace detail {

inline void require_symmetric(const Matrix& a, const char* who) {
    if (!a.square()) throw DomainError(std::string(who) + ": matrix not square");
    if (a.asymmetry() > 1e-10 * std::max(1.0, a.max_abs()))
        throw DomainError(std::string(who) + ": matrix not symmetric");
}

inline void fix_column_signs(Matrix& v) {
    const std::size_t n = v.rows();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = v(i, k);
            if (std::abs(x) > 1e-14) {
                if (x < 0.0)
                    for (std::size_t r = 0; r < n; ++r) v(r, k) = -v(r, k);
                break;
            }
        }
    }
}

} // namespace detail

inline Spectrum sym_eigen(const Matrix& input) {
    detail::require_symmetric(input, "sym_eigen");
    const std::size_t n = input.rows();
    Matrix a = input;
    // exact symmetry for the sweeps
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = avg;
            a(j, i) = avg;
        }
    Matrix v = Matrix::identity(n);

    const double scale = std::max(a.max_abs(), 1e-300);
    const double stop = 1e-15 * scale;
    for (int sweep = 0; sweep < 64 && n > 1; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
        if (off <= stop) break;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double apq = a(i, j);
                if (std::abs(apq) <= stop * 1e-2) continue;
                const double theta = (a(j, j) - a(i, i)) / (2.0 * apq);
                // stable tangent of the rotation angle
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double aii = a(i, i), ajj = a(j, j);
                a(i, i) = aii - t * apq;
                a(j, j) = ajj + t * apq;
                a(i, j) = 0.0;
                a(j, i) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k != i && k != j) {
                        const double aki = a(k, i), akj = a(k, j);
                        a(k, i) = aki - s * (akj + tau * aki);
                        a(i, k) = a(k, i);
                        a(k, j) = akj + s * (aki - tau * akj);
                        a(j, k) = a(k, j);
                    }
                    const double vki = v(k, i), vkj = v(k, j);
                    v(k, i) = vki - s * (vkj + tau * vki);
                    v(k, j) = vkj + s * (vki - tau * vkj);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    Spectrum out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
    }
    detail::fix_column_signs(out.eigenvectors);
    return out;
}

// ---------------------------------------------------------------------------
// PSD test
// ---------------------------------------------------------------------------

struct PsdReport {
    bool psd = false;
    double min_eig = 0.0;
    std::size_t zero_multiplicity = 0; // eigenvalues within [-tol, tol]
};

/// Scale-aware default PSD tolerance.
inline double default_psd_tol(const Matrix& a) { return 1e-8 * (1.0 + a.max_abs()); }

inline PsdReport is_psd(const Matrix& a, double tol) {
    if (tol <= 0.0) throw DomainError("is_psd: tol must be positive");
    const Spectrum s = sym_eigen(a);
    PsdReport r;
    r.min_eig = s.eigenvalues.front();
    r.psd = r.min_eig >= -tol;
    for (double ev : s.eigenvalues)
        if (std::abs(ev) <= tol) ++r.zero_multiplicity;
    return r;
}

inline PsdReport is_psd(const Matrix& a) { return is_psd(a, default_psd_tol(a)); }

// ---------------------------------------------------------------------------
// Scalar root finding
// ---------------------------------------------------------------------------

/// Bisection on a bracketed sign change of a monotone continuous function.
/// Returns the midpoint of the final bracket, narrowed to width <= tol.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol = 1e-12) {
    if (!(lo < hi)) throw DomainError("bisect_root: need lo < hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw DomainError("bisect_root: no sign change on [lo, hi]");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // bracket at fp resolution
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Chi-square tail bound
// ---------------------------------------------------------------------------

/// Upper bound exp(-t/4) on P(||Z||^2 - 2 >= t) for bivariate standard
/// normal Z, valid for t >= 2.
inline double chi2_tail_bound(double t) {
    if (t < 2.0) throw DomainError("chi2_tail_bound: requires t >= 2");
    return std::exp(-t / 4.0);
}

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature (physicists' weight e^{-x^2})
// ---------------------------------------------------------------------------

struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights; // sum to sqrt(pi)
};

/// Golub-Welsch via the symmetric tridiagonal Jacobi matrix.
inline GaussHermiteRule gauss_hermite_rule(std::size_t n) {
    if (n == 0) throw DomainError("gauss_hermite_rule: need at least one node");
    Matrix j(n, n);
    for (std::size_t k = 1; k < n; ++k) {
        const double b = std::sqrt(static_cast<double>(k) / 2.0);
        j(k - 1, k) = b;
        j(k, k - 1) = b;
    }
    const Spectrum s = sym_eigen(j);
    GaussHermiteRule rule;
    rule.nodes = s.eigenvalues;
    rule.weights.resize(n);
    const double sqrt_pi = std::sqrt(3.14159265358979323846264338327950288);
    for (std::size_t k = 0; k < n; ++k) {
        const double v0 = s.eigenvectors(0, k);
        rule.weights[k] = sqrt_pi * v0 * v0;
    }
    return rule;
}

} // namespace ibm
