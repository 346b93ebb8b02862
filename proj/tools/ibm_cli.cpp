// Command-line front end: exact sampling, free-energy tables, partition
// recovery, recovery curves and sample-complexity bounds.
//
// Exit codes: 0 success, 2 configuration error, 3 resource error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "ibm/bounds.hpp"
#include "ibm/covariance.hpp"
#include "ibm/experiments.hpp"
#include "ibm/free_energy.hpp"
#include "ibm/magnetization.hpp"
#include "ibm/model.hpp"
#include "ibm/recovery.hpp"
#include "ibm/sampler.hpp"

using json = nlohmann::json;

namespace {

ibm::RecoveryMethod parse_method(const std::string& name) {
    if (name == "mle") return ibm::RecoveryMethod::Mle;
    if (name == "sdp") return ibm::RecoveryMethod::Sdp;
    if (name == "spectral") return ibm::RecoveryMethod::Spectral;
    throw ibm::ConfigError("unknown method '" + name + "' (expected mle|sdp|spectral)");
}

// Output stream selection: path or stdout.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw ibm::ConfigError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct ParsedSamples {
    std::vector<ibm::Configuration> configs;
    std::size_t p = 0;
    std::optional<json> header;
};

ParsedSamples read_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ibm::ConfigError("cannot open input file: " + path);
    ParsedSamples out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto brace = line.find('{');
            if (brace != std::string::npos && !out.header) {
                try {
                    out.header = json::parse(line.substr(brace));
                } catch (const json::exception&) {
                    // tolerated: header comment is optional metadata
                }
            }
            continue;
        }
        std::vector<std::int8_t> spins;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const int v = std::stoi(tok);
            if (v != 1 && v != -1) throw ibm::ConfigError("sample file entries must be +-1");
            spins.push_back(static_cast<std::int8_t>(v));
        }
        if (out.p == 0) out.p = spins.size();
        if (spins.size() != out.p || out.p == 0)
            throw ibm::ConfigError("sample file rows must have equal positive length");
        out.configs.emplace_back(std::move(spins));
    }
    if (out.configs.empty()) throw ibm::ConfigError("sample file contains no configurations");
    return out;
}

json result_to_json(const ibm::RecoveryResult& res, const std::optional<int>& diamond) {
    json j;
    j["method"] = ibm::method_name(res.method);
    std::string labels(res.labels.size(), '0');
    for (std::size_t i = 0; i < res.labels.size(); ++i)
        if (res.labels[i] > 0) labels[i] = '1';
    j["labels"] = labels;
    j["balanced"] = res.balanced();
    j["objective"] = res.objective;
    j["iterations"] = res.iterations;
    j["certified"] = res.certified;
    if (res.certificate_psd) j["certificate_psd"] = *res.certificate_psd;
    if (res.certificate_zero_multiplicity)
        j["certificate_zero_multiplicity"] = *res.certificate_zero_multiplicity;
    if (diamond) j["diamond"] = *diamond;
    return j;
}

int run(int argc, char** argv) {
    CLI::App app{"Ising blockmodel simulation and recovery toolkit"};
    app.require_subcommand(1);

    double alpha = -1.0, beta = 1.5;
    std::uint64_t seed = 1;

    // --- sample ---
    auto* sample = app.add_subcommand("sample", "draw i.i.d. configurations as CSV");
    std::size_t sample_p = 10, sample_n = 100;
    std::string sample_out, sample_partition;
    sample->add_option("--alpha", alpha, "cross-block coupling");
    sample->add_option("--beta", beta, "within-block coupling");
    sample->add_option("--p", sample_p, "number of sites (even)");
    sample->add_option("--n", sample_n, "number of draws");
    sample->add_option("--seed", seed, "RNG seed");
    sample->add_option("--partition", sample_partition,
                       "planted partition as 0/1 string (default: seeded random)");
    sample->add_option("--out", sample_out, "output path (default stdout)");

    // --- law ---
    auto* law_cmd = app.add_subcommand("law", "exact magnetization law as CSV");
    std::size_t law_p = 10;
    std::string law_out;
    law_cmd->add_option("--alpha", alpha, "cross-block coupling");
    law_cmd->add_option("--beta", beta, "within-block coupling");
    law_cmd->add_option("--p", law_p, "number of sites (even)");
    law_cmd->add_option("--out", law_out, "output path (default stdout)");

    // --- contour ---
    auto* contour = app.add_subcommand("contour", "free-energy table on a grid of (-1,1)^2");
    std::size_t grid = 101;
    std::string contour_out;
    contour->add_option("--alpha", alpha, "cross-block coupling");
    contour->add_option("--beta", beta, "within-block coupling");
    contour->add_option("--grid", grid, "points per axis");
    contour->add_option("--out", contour_out, "output path (default stdout)");

    // --- phase-diagram ---
    auto* phase = app.add_subcommand("phase-diagram", "region labels over a coupling grid");
    double a_lo = -3.0, a_hi = 3.0, b_lo = 0.0, b_hi = 3.0, step = 0.125;
    std::string phase_out;
    phase->add_option("--alpha-min", a_lo, "alpha range start");
    phase->add_option("--alpha-max", a_hi, "alpha range end");
    phase->add_option("--beta-min", b_lo, "beta range start");
    phase->add_option("--beta-max", b_hi, "beta range end");
    phase->add_option("--step", step, "grid step");
    phase->add_option("--out", phase_out, "output path (default stdout)");

    // --- recover ---
    auto* recover = app.add_subcommand("recover", "estimate the partition from a sample CSV");
    std::string method_str = "sdp", input_path, recover_out, dump_gamma;
    double tol = 1e-7;
    std::size_t max_iters = 2000;
    recover->add_option("--method", method_str, "mle|sdp|spectral");
    recover->add_option("--input", input_path, "CSV of +-1 spin rows")->required();
    recover->add_option("--tol", tol, "SDP relative objective tolerance");
    recover->add_option("--max-iters", max_iters, "SDP sweep budget");
    recover->add_option("--seed", seed, "SDP initialization seed");
    recover->add_option("--dump-gamma", dump_gamma, "also write Gamma_hat as dense CSV");
    recover->add_option("--out", recover_out, "output path (default stdout)");

    // --- recovery-curve ---
    auto* curve = app.add_subcommand("recovery-curve", "Monte Carlo success-rate table");
    std::vector<std::size_t> p_list{32}, n_list{10, 20, 40};
    std::size_t trials = 20, threads = 0;
    std::string curve_out;
    double curve_tol = 1e-7;
    std::size_t curve_iters = 500;
    curve->add_option("--alpha", alpha, "cross-block coupling");
    curve->add_option("--beta", beta, "within-block coupling");
    curve->add_option("--p", p_list, "system sizes (n=0 rows use population Gamma)")
        ->delimiter(',');
    curve->add_option("--n", n_list, "sample sizes")->delimiter(',');
    curve->add_option("--trials", trials, "trials per (p, n)");
    curve->add_option("--method", method_str, "mle|sdp|spectral");
    curve->add_option("--seed", seed, "master seed");
    curve->add_option("--threads", threads, "worker threads (0 = hardware)");
    curve->add_option("--tol", curve_tol, "SDP relative objective tolerance");
    curve->add_option("--max-iters", curve_iters, "SDP sweep budget");
    curve->add_option("--out", curve_out, "output path (default stdout)");

    // --- bounds ---
    auto* bounds = app.add_subcommand("bounds", "sample-complexity report as JSON");
    std::size_t bounds_p = 100;
    double gamma = 0.5, delta = 0.05, c_ab = 0.0;
    std::string bounds_out;
    bounds->add_option("--alpha", alpha, "cross-block coupling");
    bounds->add_option("--beta", beta, "within-block coupling");
    bounds->add_option("--p", bounds_p, "number of sites (even)");
    bounds->add_option("--gamma", gamma, "lower-bound slack in (0, 0.6)");
    bounds->add_option("--delta", delta, "failure probability");
    bounds->add_option("--c-ab", c_ab, "override for C_{alpha,beta} (<=0: p*(Delta-Omega))");
    bounds->add_option("--out", bounds_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    if (sample->parsed()) {
        const ibm::ModelParams params(alpha, beta, sample_p);
        const ibm::Partition part = sample_partition.empty()
                                        ? ibm::random_balanced_partition(sample_p, seed)
                                        : ibm::Partition::parse(sample_partition);
        if (part.size() != sample_p) throw ibm::ConfigError("partition length != p");
        const ibm::SampleBatch batch = ibm::sample_configurations(params, part, sample_n, seed);
        OutputTarget out(sample_out);
        json header;
        header["alpha"] = alpha;
        header["beta"] = beta;
        header["p"] = sample_p;
        header["n"] = sample_n;
        header["seed"] = seed;
        header["partition"] = part.membership_string();
        out.stream() << "# " << header.dump() << "\n";
        for (const ibm::Configuration& c : batch.configs) {
            for (std::size_t i = 0; i < c.spins.size(); ++i)
                out.stream() << (i ? "," : "") << static_cast<int>(c.spins[i]);
            out.stream() << "\n";
        }
    } else if (law_cmd->parsed()) {
        const ibm::ModelParams params(alpha, beta, law_p);
        const ibm::MagnetizationLaw law(params);
        OutputTarget out(law_out);
        ibm::write_law_csv(out.stream(), law);
    } else if (contour->parsed()) {
        const ibm::ModelParams params(alpha, beta, 2);
        OutputTarget out(contour_out);
        ibm::write_contour_csv(out.stream(), ibm::emit_contour(params, grid));
    } else if (phase->parsed()) {
        OutputTarget out(phase_out);
        ibm::write_phase_csv(out.stream(), ibm::emit_phase_diagram(a_lo, a_hi, b_lo, b_hi, step));
    } else if (recover->parsed()) {
        const ibm::RecoveryMethod method = parse_method(method_str);
        const ParsedSamples samples = read_sample_csv(input_path);
        const ibm::EmpiricalGamma eg = ibm::empirical_gamma(samples.configs, samples.p);
        if (!dump_gamma.empty()) {
            OutputTarget gamma_out(dump_gamma);
            ibm::write_matrix_csv(gamma_out.stream(), eg.gamma_hat);
        }
        ibm::RecoveryResult res;
        switch (method) {
            case ibm::RecoveryMethod::Mle:
                res = ibm::mle_bruteforce(eg.sigma_hat);
                break;
            case ibm::RecoveryMethod::Sdp:
                res = ibm::sdp_solve(eg.gamma_hat, 0, tol, max_iters, seed);
                break;
            case ibm::RecoveryMethod::Spectral:
                res = ibm::spectral_partition(eg.gamma_hat);
                break;
        }
        std::optional<int> diamond;
        if (samples.header && samples.header->contains("partition")) {
            const ibm::Partition truth =
                ibm::Partition::parse((*samples.header)["partition"].get<std::string>());
            if (truth.size() == samples.p)
                diamond = ibm::diamond_distance(res.labels, truth.labeling());
        }
        OutputTarget out(recover_out);
        out.stream() << result_to_json(res, diamond).dump() << "\n";
    } else if (curve->parsed()) {
        ibm::ExperimentConfig cfg;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.p_list = p_list;
        cfg.n_list = n_list;
        cfg.trials = trials;
        cfg.method = parse_method(method_str);
        cfg.master_seed = seed;
        cfg.output_path = curve_out;
        cfg.threads = threads;
        cfg.tol = curve_tol;
        cfg.max_iters = curve_iters;
        const std::vector<ibm::TrialRow> rows = ibm::run_recovery_curve(cfg);
        OutputTarget out(curve_out);
        ibm::write_trial_rows_csv(out.stream(), cfg, rows);
    } else if (bounds->parsed()) {
        const ibm::ModelParams params(alpha, beta, bounds_p);
        const ibm::SampleComplexityReport rep =
            ibm::sample_size_bounds(params, gamma, delta, c_ab);
        OutputTarget out(bounds_out);
        ibm::write_report_json(out.stream(), rep);
        out.stream() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ibm::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const ibm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ibm::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
