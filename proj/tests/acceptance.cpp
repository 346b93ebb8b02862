// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Runs the full pipeline at the tolerances fixed below; exit code is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ibm/bounds.hpp"
#include "ibm/covariance.hpp"
#include "ibm/experiments.hpp"
#include "ibm/free_energy.hpp"
#include "ibm/magnetization.hpp"
#include "ibm/model.hpp"
#include "ibm/recovery.hpp"
#include "ibm/sampler.hpp"
#include "oracles.hpp"

using namespace ibm;

namespace {

constexpr std::uint64_t kMasterSeed = 1; // fixed a priori for all Monte Carlo criteria

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
    void note(const std::string& s) {
        detail << (detail.str().empty() ? "" : "; ") << s;
    }
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: oracle equivalence at p in {4, 6, 8}
// ---------------------------------------------------------------------------
void criterion1(Check& c) {
    const double tol = 1e-10;
    for (auto [a, b] : std::vector<std::pair<double, double>>{
             {-1.0, 1.5}, {0.5, 1.0}, {0.0, 2.5}}) {
        for (std::size_t p : {4u, 6u, 8u}) {
            const ModelParams params(a, b, p);
            const Partition part = Partition::first_half(p);

            const double lnz_grid = log_partition_exact(params);
            const double lnz_enum = oracle::log_partition_enum(part, params);
            c.require(std::abs(lnz_grid - lnz_enum) <= tol, "lnZ mismatch");

            double total = 0.0;
            for (const Configuration& conf : oracle::all_configurations(p))
                total += std::exp(-hamiltonian(conf, part, params) - lnz_grid);
            c.require(std::abs(total - 1.0) <= tol, "density not normalized");

            const MagnetizationLaw law(params);
            for (const auto& [key, prob] : oracle::law_histogram_enum(part, params))
                c.require(std::abs(law.prob(key.first, key.second) - prob) <= tol,
                          "law histogram mismatch");

            const CovarianceSummary s = exact_delta_omega(params);
            c.require(std::abs(s.delta - oracle::pair_correlation_enum(part, params, 0, 1)) <= tol,
                      "Delta mismatch");
            c.require(std::abs(s.omega -
                               oracle::pair_correlation_enum(part, params, 0, p / 2)) <= tol,
                      "Omega mismatch");

            if (a < b) {
                std::vector<std::uint8_t> mem(part.membership());
                std::swap(mem[0], mem[p / 2]); // single swap neighbor
                const Partition t(std::move(mem));
                const double kl_formula = kl_pair(params, s);
                const double kl_enumerated = oracle::kl_enum(t, part, params);
                c.require(std::abs(kl_formula - kl_enumerated) <= tol, "KL mismatch");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 2: partition-function invariance over all 20 subsets at p=6
// ---------------------------------------------------------------------------
void criterion2(Check& c) {
    const ModelParams params(-1.0, 1.5, 6);
    std::vector<double> values;
    for (std::uint32_t mask = 0; mask < 64; ++mask) {
        if (__builtin_popcount(mask) != 3) continue;
        std::vector<std::uint8_t> mem(6, 0);
        for (std::size_t i = 0; i < 6; ++i) mem[i] = (mask >> i) & 1u;
        values.push_back(oracle::log_partition_enum(Partition(std::move(mem)), params));
    }
    c.require(values.size() == 20, "expected 20 balanced subsets");
    double spread = 0.0;
    for (double v : values) spread = std::max(spread, std::abs(v - values.front()));
    c.require(spread <= 1e-12, "lnZ varies with S by " + fmt(spread));
    c.note("lnZ spread " + fmt(spread));
}

// ---------------------------------------------------------------------------
// criterion 3: decomposition identity + quadratic bound on 201x201 grids;
// mean-field root bounds
// ---------------------------------------------------------------------------
void criterion3(Check& c) {
    const std::vector<std::pair<double, double>> points{
        {-1.0, 1.5}, {-6.0, 1.5},            // region I
        {-0.5, 1.0}, {0.5, 1.0}, {0.0, 1.5}, // region II
        {1.0, 2.0},  {0.5, 2.0},             // region III
        {0.0, 2.5}};                         // axis
    for (const auto& [a, b] : points) {
        const ModelParams params(a, b, 4);
        const GroundStateSet gs = ground_states(params);
        const CurvatureConstants cc = curvature_constants(params);
        const double cw_b = 0.5 * (b + a);
        double worst_decomp = 0.0, worst_quad = 0.0;
        for (std::size_t i = 0; i < 201; ++i) {
            const double x = -1.0 + 2.0 * (static_cast<double>(i) + 1.0) / 202.0;
            for (std::size_t j = 0; j < 201; ++j) {
                const double y = -1.0 + 2.0 * (static_cast<double>(j) + 1.0) / 202.0;
                const double g = ibm_free_energy(params, x, y);
                const double decomp = cw_free_energy(cw_b, x) + cw_free_energy(cw_b, y) +
                                      a * (x - y) * (x - y);
                worst_decomp = std::max(worst_decomp, std::abs(g - decomp));
                double dist = 1e300;
                for (const auto& [sx, sy] : gs.states)
                    dist = std::min(dist, std::max(std::abs(x - sx), std::abs(y - sy)));
                const double d = std::min(dist, cc.delta);
                worst_quad = std::max(worst_quad, gs.g_star + 0.5 * cc.kappa_sq * d * d - g);
            }
        }
        c.require(worst_decomp <= 1e-12, "decomposition residual " + fmt(worst_decomp) +
                                             " at (" + fmt(a) + "," + fmt(b) + ")");
        c.require(worst_quad <= 1e-9, "quadratic bound violated by " + fmt(worst_quad) +
                                          " at (" + fmt(a) + "," + fmt(b) + ")");
    }
    for (double b : {1.1, 1.5, 2.0, 3.0, 5.0}) {
        const double xt = mean_field_solve(b);
        const double xsq = xt * xt;
        c.require(xsq > 1.0 - 2.0 * b / (2.0 * b * b + b - 1.0), "x~ lower bound at b=" + fmt(b));
        c.require(xsq < 1.0 - std::exp(-2.0 * b), "x~ upper bound at b=" + fmt(b));
    }
}

// ---------------------------------------------------------------------------
// criterion 4: phase classification vs grid minimization; Hessian eigenpairs
// ---------------------------------------------------------------------------
void criterion4(Check& c) {
    std::vector<std::pair<double, double>> points;
    for (double a : {-4.0, -3.0, -2.0, -1.0, -0.4, 0.0, 0.4, 1.0, 1.6, 2.4, 3.0})
        for (double b : {0.5, 1.0, 1.5, 2.2, 2.8, 3.5}) {
            if (a > b || std::abs(b + std::abs(a) - 2.0) <= 0.05) continue;
            points.emplace_back(a, b);
        }
    c.require(points.size() >= 50, "sweep too small");
    const std::size_t grid_n = 301;
    const double cell = 2.0 / (static_cast<double>(grid_n) + 1.0);
    for (const auto& [a, b] : points) {
        const ModelParams params(a, b, 4);
        const GroundStateSet gs = ground_states(params);
        double best = 1e300, bx = 0.0, by = 0.0;
        for (std::size_t i = 0; i < grid_n; ++i) {
            const double x =
                -1.0 + 2.0 * (static_cast<double>(i) + 1.0) / (static_cast<double>(grid_n) + 1.0);
            for (std::size_t j = 0; j < grid_n; ++j) {
                const double y = -1.0 + 2.0 * (static_cast<double>(j) + 1.0) /
                                            (static_cast<double>(grid_n) + 1.0);
                const double g = ibm_free_energy(params, x, y);
                if (g < best) {
                    best = g;
                    bx = x;
                    by = y;
                }
            }
        }
        double dist = 1e300;
        for (const auto& [sx, sy] : gs.states)
            dist = std::min(dist, std::max(std::abs(sx - bx), std::abs(sy - by)));
        c.require(dist <= 1.5 * cell,
                  "grid argmin off by " + fmt(dist) + " at (" + fmt(a) + "," + fmt(b) + ")");
        c.require(gs.g_star <= best + 1e-9, "reported minimum above grid minimum");

        // closed-form eigenpairs against the numeric decomposition of H
        const HessianInfo info = hessian_at(params, gs.states.front());
        const Spectrum spec = sym_eigen(info.h);
        std::array<double, 2> closed = info.eigenvalues;
        std::sort(closed.begin(), closed.end());
        c.require(std::abs(spec.eigenvalues[0] - closed[0]) <= 1e-8 &&
                      std::abs(spec.eigenvalues[1] - closed[1]) <= 1e-8,
                  "hessian eigenvalues differ at (" + fmt(a) + "," + fmt(b) + ")");
        if (std::abs(info.eigenvalues[0] - info.eigenvalues[1]) > 1e-8) {
            for (int which = 0; which < 2; ++which) {
                const std::size_t col =
                    std::abs(spec.eigenvalues[0] - info.eigenvalues[which]) <= 1e-8 ? 0 : 1;
                const double dot = spec.eigenvectors(0, col) * info.eigenvectors[which][0] +
                                   spec.eigenvectors(1, col) * info.eigenvectors[which][1];
                c.require(std::abs(std::abs(dot) - 1.0) <= 1e-8,
                          "hessian eigenvector misaligned at (" + fmt(a) + "," + fmt(b) + ")");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 5: Gaussian-mixture concentration, phi = |mu|^2 / 2
// ---------------------------------------------------------------------------
void criterion5(Check& c) {
    auto phi = [](double x, double y) { return 0.5 * (x * x + y * y); };
    double prev = 1e300;
    for (std::size_t m : {50u, 100u, 200u, 400u}) {
        const ModelParams params(-1.0, 1.5, 2 * m);
        const double exact = exact_moment(MagnetizationLaw(params), phi);
        const double approx = gaussian_mixture_expectation(params, phi);
        const double rel = std::abs(approx - exact) / std::abs(exact);
        c.require(rel < prev, "relative error not decreasing at m=" + std::to_string(m));
        if (m == 400)
            c.require(rel < 0.05, "relative error " + fmt(rel) + " at m=400 exceeds 5%");
        c.note("m=" + std::to_string(m) + ": " + fmt(rel));
        prev = rel;
    }
}

// ---------------------------------------------------------------------------
// criterion 6: gap asymptotics
// ---------------------------------------------------------------------------
void criterion6(Check& c) {
    const double r100 =
        std::abs(100.0 * exact_delta_omega(ModelParams(-0.5, 1.0, 200)).gap / 3.0 - 1.0);
    const double r800 =
        std::abs(800.0 * exact_delta_omega(ModelParams(-0.5, 1.0, 1600)).gap / 3.0 - 1.0);
    c.require(r800 < r100, "subcritical m*gap/3 not converging");
    c.note("subcritical |m gap/3 - 1|: m=100 " + fmt(r100) + ", m=800 " + fmt(r800));

    const double target = asymptotic_gap(ModelParams(-1.0, 1.5, 800)).gap; // 2 x~^2
    const double gap400 = exact_delta_omega(ModelParams(-1.0, 1.5, 800)).gap;
    const double rel = std::abs(gap400 - target) / target;
    c.require(rel <= 0.03, "polarized gap off asymptote by " + fmt(rel));
    c.note("polarized rel err at m=400: " + fmt(rel));
}

// ---------------------------------------------------------------------------
// criterion 7: population certificates and recovery in every phase
// ---------------------------------------------------------------------------
void criterion7(Check& c) {
    const std::vector<std::pair<double, double>> phases{
        {-1.0, 1.5}, {-0.5, 1.0}, {1.0, 2.0}, {0.0, 2.5}};
    for (const auto& [a, b] : phases) {
        for (std::size_t p : {4u, 10u, 50u, 100u}) {
            const ModelParams params(a, b, p);
            const CovarianceSummary s = exact_delta_omega(params);
            if (s.gap <= 0.0) {
                c.require(false, "gap not positive");
                continue;
            }
            const Partition part = random_balanced_partition(p, derive_stream(kMasterSeed, p));
            const Matrix gamma = population_gamma(s, part);
            const CertificateReport rep = laplacian_certificate(gamma, part.labeling());
            c.require(rep.psd && rep.zero_multiplicity == 1,
                      "population certificate fails at (" + fmt(a) + "," + fmt(b) +
                          "), p=" + std::to_string(p));

            const RecoveryResult sdp = sdp_solve(gamma, 0, 1e-7, 2000, derive_stream(7, p));
            c.require(sdp.certified && diamond_distance(sdp.labels, part.labeling()) == 0,
                      "SDP fails on population Gamma at (" + fmt(a) + "," + fmt(b) +
                          "), p=" + std::to_string(p));

            const RecoveryResult spec = spectral_partition(gamma);
            c.require(diamond_distance(spec.labels, part.labeling()) == 0,
                      "spectral fails on population Gamma at (" + fmt(a) + "," + fmt(b) +
                          "), p=" + std::to_string(p));
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 8: SDP tightness on sampled data
// ---------------------------------------------------------------------------
void criterion8(Check& c) {
    const std::size_t trials = 50;
    std::size_t certified = 0;
    bool certified_exact = true;
    const ModelParams params(-1.0, 1.5, 100);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t seed = derive_stream(kMasterSeed, 800 + t);
        const Partition part = random_balanced_partition(100, derive_stream(seed, 1));
        const SampleBatch batch = sample_configurations(params, part, 60, derive_stream(seed, 2));
        const RecoveryResult res = sdp_solve(empirical_gamma(batch).gamma_hat, 0, 1e-7, 2000,
                                             derive_stream(seed, 3));
        if (res.certified) {
            ++certified;
            if (diamond_distance(res.labels, part.labeling()) != 0) certified_exact = false;
        }
    }
    const double freq = static_cast<double>(certified) / static_cast<double>(trials);
    c.require(freq >= 0.9, "certificate frequency " + fmt(freq) + " < 0.9");
    c.require(certified_exact, "a certified trial missed the planted partition");
    c.note("cert freq " + fmt(freq));

    const ModelParams small(-1.0, 1.5, 10);
    bool matches_mle = true;
    std::size_t certified_small = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t seed = derive_stream(kMasterSeed, 900 + t);
        const Partition part = random_balanced_partition(10, derive_stream(seed, 1));
        const SampleBatch batch = sample_configurations(small, part, 60, derive_stream(seed, 2));
        const EmpiricalGamma eg = empirical_gamma(batch);
        const RecoveryResult sdp =
            sdp_solve(eg.gamma_hat, 0, 1e-7, 2000, derive_stream(seed, 3));
        if (!sdp.certified) continue;
        ++certified_small;
        const RecoveryResult mle = mle_bruteforce(eg.sigma_hat);
        if (diamond_distance(sdp.labels, mle.labels) != 0) matches_mle = false;
    }
    c.require(matches_mle, "certified SDP output differs from brute-force MLE at p=10");
    c.note("p=10 certified trials " + std::to_string(certified_small) + "/50");
}

// ---------------------------------------------------------------------------
// criterion 9: phase-dependent sample complexity (ordering only)
// ---------------------------------------------------------------------------
std::size_t minimal_n(const ExperimentConfig& base, std::size_t p,
                      const std::vector<std::size_t>& grid, double threshold) {
    for (std::size_t n : grid) {
        ExperimentConfig cfg = base;
        cfg.p_list = {p};
        cfg.n_list = {n};
        std::size_t succ = 0;
        for (const TrialRow& row : run_recovery_curve(cfg)) succ += row.success;
        if (static_cast<double>(succ) / static_cast<double>(cfg.trials) >= threshold) return n;
    }
    return 0; // not reached within the grid
}

void criterion9(Check& c) {
    ExperimentConfig base;
    base.alpha = -1.0;
    base.beta = 1.5;
    base.trials = 20;
    base.method = RecoveryMethod::Sdp;
    base.master_seed = kMasterSeed;
    base.p_list = {32};
    base.n_list = {1};

    const std::vector<std::size_t> fine{3,  4,  5,  6,  8,  10, 12, 15,
                                        19, 24, 30, 37, 46, 58, 72, 90};
    const std::size_t n32 = minimal_n(base, 32, fine, 0.95);
    const std::size_t n128 = minimal_n(base, 128, fine, 0.95);
    c.require(n32 > 0 && n128 > 0, "region I threshold not reached on the grid");
    if (n32 > 0 && n128 > 0) {
        const double ratio = static_cast<double>(n128) / static_cast<double>(n32);
        c.require(ratio <= 3.0, "region I n*(128)/n*(32) = " + fmt(ratio) + " > 3");
        c.note("region I n*(32)=" + std::to_string(n32) + ", n*(128)=" + std::to_string(n128));
    }

    // region II at p=128: establish n* >= 5 x region-I n*(128); the search is
    // capped (the true threshold sits in the tens of thousands)
    ExperimentConfig reg2 = base;
    reg2.alpha = 0.5;
    reg2.beta = 1.0;
    const std::vector<std::size_t> coarse{32, 64, 128, 256, 512, 1024, 2048};
    const std::size_t n2 = minimal_n(reg2, 128, coarse, 0.95);
    if (n2 == 0) {
        c.require(2048 >= 5 * n128, "cap below the 5x ordering threshold");
        c.note("region II n*(128) > 2048 (cap), >= 5 x region I");
    } else {
        c.require(n2 >= 5 * n128,
                  "region II n* = " + std::to_string(n2) + " below 5 x region I");
        c.note("region II n*(128) = " + std::to_string(n2));
    }
}

// ---------------------------------------------------------------------------
// criterion 10: spectral partial recovery trend (median diamond/p)
// ---------------------------------------------------------------------------
void criterion10(Check& c) {
    ExperimentConfig cfg;
    cfg.alpha = -1.0;
    cfg.beta = 1.5;
    cfg.p_list = {100};
    cfg.n_list = {10, 40};
    cfg.trials = 50;
    cfg.method = RecoveryMethod::Spectral;
    cfg.master_seed = kMasterSeed;
    std::vector<double> d10, d40;
    for (const TrialRow& row : run_recovery_curve(cfg))
        (row.n == 10 ? d10 : d40).push_back(static_cast<double>(row.diamond) / 100.0);
    const double m10 = median(d10);
    const double m40 = median(d40);
    c.note("median diamond/p: n=10 " + fmt(m10) + ", n=40 " + fmt(m40));
    const double mean10 =
        std::accumulate(d10.begin(), d10.end(), 0.0) / static_cast<double>(d10.size());
    const double mean40 =
        std::accumulate(d40.begin(), d40.end(), 0.0) / static_cast<double>(d40.size());
    c.note("mean diamond/p: n=10 " + fmt(mean10) + ", n=40 " + fmt(mean40));
    c.require(m40 < m10, "median at n=40 not strictly below median at n=10");
}

// ---------------------------------------------------------------------------
// criterion 11: CLI determinism, byte-identical output
// ---------------------------------------------------------------------------
std::string run_cli_capture(const std::string& cli, const std::string& args, int* code) {
    static int counter = 0;
    const std::string out = "/tmp/ibm_acceptance_" + std::to_string(counter++) + ".out";
    const int status = std::system((cli + " " + args + " > " + out + " 2>/dev/null").c_str());
    if (code) *code = WEXITSTATUS(status);
    std::ifstream in(out, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    std::remove(out.c_str());
    return ss.str();
}

void criterion11(Check& c) {
    const char* cli_env = std::getenv("IBM_CLI");
    if (cli_env == nullptr) {
        c.require(false, "IBM_CLI not set (run through ctest)");
        return;
    }
    const std::string cli = cli_env;
    const std::vector<std::string> invocations{
        "sample --alpha -1 --beta 1.5 --p 20 --n 50 --seed 11",
        "law --alpha -1 --beta 1.5 --p 12",
        "contour --alpha -0.5 --beta 2.5 --grid 41",
        "phase-diagram --step 0.5",
        "bounds --alpha -1 --beta 1.5 --p 64 --gamma 0.4 --delta 0.1",
        "recovery-curve --alpha -1 --beta 1.5 --p 16,24 --n 5,15 --trials 5 --method sdp "
        "--seed 3 --threads 1",
        "recovery-curve --alpha -1 --beta 1.5 --p 16,24 --n 5,15 --trials 5 --method "
        "spectral --seed 3 --threads 2",
    };
    for (const std::string& args : invocations) {
        int code1 = 0, code2 = 0;
        const std::string out1 = run_cli_capture(cli, args, &code1);
        const std::string out2 = run_cli_capture(cli, args, &code2);
        c.require(code1 == 0 && code2 == 0, "CLI failed: " + args);
        c.require(out1 == out2 && !out1.empty(), "output not byte-identical: " + args);
    }
    // parallel execution against serial: identical bytes
    const std::string base =
        "recovery-curve --alpha -1 --beta 1.5 --p 32 --n 4,10 --trials 6 --method sdp --seed 9";
    int code = 0;
    const std::string serial = run_cli_capture(cli, base + " --threads 1", &code);
    const std::string parallel = run_cli_capture(cli, base + " --threads 2", &code);
    c.require(!serial.empty() && serial == parallel,
              "parallel run differs from serial recovery-curve output");
}

struct Criterion {
    int number;
    std::string name;
    std::function<void(Check&)> body;
    double budget_seconds; // 0 = no budget
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "oracle equivalence at p in {4,6,8}", criterion1, 10.0},
        {2, "partition-function invariance over subsets", criterion2, 0.0},
        {3, "free-energy decomposition and quadratic bounds", criterion3, 0.0},
        {4, "phase classification and Hessian closed forms", criterion4, 0.0},
        {5, "Gaussian-mixture concentration", criterion5, 60.0},
        {6, "covariance gap asymptotics", criterion6, 0.0},
        {7, "population certificates and recovery", criterion7, 0.0},
        {8, "SDP tightness on sampled data", criterion8, 300.0},
        {9, "phase-dependent sample complexity ordering", criterion9, 0.0},
        {10, "spectral partial recovery trend", criterion10, 0.0},
        {11, "CLI determinism (byte-identical reruns)", criterion11, 0.0},
    };

    int failures = 0;
    for (const Criterion& cr : criteria) {
        Check check;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.budget_seconds > 0.0 && secs > cr.budget_seconds)
            check.require(false, "runtime " + fmt(secs) + "s over budget " +
                                     fmt(cr.budget_seconds) + "s");
        std::cout << (check.pass ? "PASS" : "FAIL") << " criterion " << cr.number << ": "
                  << cr.name << " [" << fmt(secs) << "s]";
        if (!check.detail.str().empty()) std::cout << " -- " << check.detail.str();
        std::cout << "\n" << std::flush;
        if (!check.pass) ++failures;
    }
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures;
}
