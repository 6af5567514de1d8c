// phaselab — command-line front end.
//
// Subcommands mirror the library: redundancy, diffraction, commensurability,
// bragg, duality, markov.  Data goes to CSV or JSON (plot-ready, 17
// significant digits); reports are JSON with stable key order.  Every file
// output carries reproducibility metadata: JSON reports embed a manifest,
// CSV files get a .manifest.json sidecar so the data bytes stay reproducible.
//
// Exit codes: 0 success, 2 usage, 3 resource limit, 4 numeric failure.

#include "CLI11.hpp"
#include "json.hpp"

#include "phaselab/coherence.hpp"
#include "phaselab/diffraction.hpp"
#include "phaselab/duality.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/markov.hpp"
#include "phaselab/redundancy.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;
using namespace phaselab;

constexpr const char* kVersion = "phaselab 0.1.0";

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ParsedVector {
    std::vector<double> values;
    std::vector<std::optional<Rational>> exact;
};

// Comma list of numbers; fractions and integers are kept exact, decimals
// stay numeric.
ParsedVector parse_number_list(const std::string& text, const char* what) {
    ParsedVector out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) {
            throw std::invalid_argument(std::string(what) + ": empty entry in list");
        }
        if (auto r = Rational::parse(token)) {
            out.values.push_back(r->to_double());
            out.exact.push_back(*r);
            continue;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(token, &pos);
            if (pos != token.size()) {
                throw std::invalid_argument("");
            }
            out.values.push_back(v);
            out.exact.push_back(std::nullopt);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": cannot parse '" + token + "'");
        }
    }
    if (out.values.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty list");
    }
    return out;
}

struct ManifestInfo {
    std::string command_line;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> qmax;
    std::optional<double> tol;
    std::optional<double> eps;
    double wall_time_seconds = 0.0;
};

json manifest_json(const ManifestInfo& m) {
    json j;
    j["command_line"] = m.command_line;
    if (m.seed) {
        j["seed"] = *m.seed;
    }
    json tolerances = json::object();
    if (m.tol) {
        tolerances["tol"] = *m.tol;
    }
    if (m.eps) {
        tolerances["eps"] = *m.eps;
    }
    j["tolerances"] = tolerances;
    if (m.qmax) {
        j["qmax"] = *m.qmax;
    }
    j["version"] = kVersion;
    j["wall_time_seconds"] = m.wall_time_seconds;
    return j;
}

// Data file + optional manifest sidecar (CSV), or embedded manifest (JSON).
void emit_data(const std::string& out_path, const std::string& format, const std::string& csv,
               json data_report) {
    if (format == "csv") {
        if (out_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) {
                throw std::invalid_argument("cannot open output file: " + out_path);
            }
            f << csv;
            std::ofstream mf(out_path + ".manifest.json", std::ios::binary);
            mf << data_report["manifest"].dump(2) << "\n";
        }
        return;
    }
    const std::string text = data_report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) {
            throw std::invalid_argument("cannot open output file: " + out_path);
        }
        f << text;
    }
}

void emit_report(const std::string& out_path, const json& report) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) {
            throw std::invalid_argument("cannot open output file: " + out_path);
        }
        f << text;
    }
}

json rational_json(const Rational& r) {
    return r.str();
}

json report_of_commensurability(const CommensurabilityReport& rep) {
    json j;
    j["classification"] = to_string(rep.classification);
    j["m0"] = rep.m0 ? json(*rep.m0) : json(nullptr);
    j["fundamental_frequency"] =
        rep.fundamental_frequency ? json(*rep.fundamental_frequency) : json(nullptr);
    json convs = json::array();
    for (const auto& c : rep.convergents_examined) {
        json e;
        e["convergent"] = rational_json(c.convergent);
        e["residual"] = c.residual;
        e["admissible"] = c.admissible;
        convs.push_back(e);
    }
    j["convergents_examined"] = convs;
    j["tolerance_used"] = rep.tolerance_used;
    j["qmax_used"] = rep.qmax_used;
    return j;
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string s;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i) {
            s += ';';
        }
        s += flags[i];
    }
    return s;
}

// ------------------------------------------------------------------ commands

struct CommonOpts {
    std::string out;
    std::string format = "csv";
    std::int64_t qmax = 1000000;
    double tol = 1e-12;
};

int cmd_redundancy(const std::string& cmdline, const std::string& probs_text, std::int64_t n_start,
                   std::int64_t n_end, const std::string& method, std::int64_t m_max,
                   const CommonOpts& common) {
    const auto t0 = std::chrono::steady_clock::now();
    auto parsed = parse_number_list(probs_text, "--probs");
    SourceModel src(ProbabilityVector(parsed.values, parsed.exact));

    RedundancySeriesOptions opts;
    opts.m_max = m_max;
    opts.qmax = common.qmax;
    opts.tol = common.tol;
    if (method == "exact") {
        opts.method = RedundancyMethod::Exact;
    } else if (method == "series") {
        opts.method = RedundancyMethod::TruncatedSeries;
    } else if (method == "asymptotic") {
        opts.method = RedundancyMethod::Asymptotic;
    } else {
        throw std::invalid_argument("--method must be exact|series|asymptotic");
    }
    const RedundancySeries series = redundancy_series(src, n_start, n_end, opts);

    std::string csv = "n,R_n,flags\n";
    json jn = json::array(), jv = json::array(), jf = json::array();
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const std::int64_t n = series.n_start + static_cast<std::int64_t>(i);
        csv += std::to_string(n) + "," + fmt17(series.values[i]) + "," + join_flags(series.flags[i]) + "\n";
        jn.push_back(n);
        jv.push_back(series.values[i]);
        jf.push_back(series.flags[i]);
    }
    ManifestInfo mi;
    mi.command_line = cmdline;
    mi.qmax = common.qmax;
    mi.tol = common.tol;
    mi.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["input"] = {{"probs", probs_text}};
    report["parameters"] = {{"n_start", n_start},
                            {"n_end", n_end},
                            {"method", method},
                            {"m_max", m_max},
                            {"qmax", common.qmax},
                            {"tol", common.tol}};
    report["results"] = {{"n", jn}, {"R_n", jv}, {"flags", jf}};
    report["manifest"] = manifest_json(mi);
    emit_data(common.out, common.format, csv, report);
    return 0;
}

int cmd_diffraction(const std::string& cmdline, const std::string& dist_text,
                    const std::string& probs_text, std::int64_t n, double q_min, double q_max,
                    std::int64_t q_steps, const std::string& method, std::int64_t samples,
                    std::uint64_t seed, const CommonOpts& common) {
    const auto t0 = std::chrono::steady_clock::now();
    auto pd = parse_number_list(dist_text, "--distances");
    auto pp = parse_number_list(probs_text, "--probs");
    HTMedium medium(pd.values, ProbabilityVector(pp.values, pp.exact), "", pd.exact);

    if (q_steps < 1) {
        throw std::invalid_argument("--q-steps must be >= 1");
    }
    std::vector<double> grid(static_cast<std::size_t>(q_steps));
    for (std::int64_t i = 0; i < q_steps; ++i) {
        grid[static_cast<std::size_t>(i)] =
            q_steps == 1 ? q_min
                         : q_min + (q_max - q_min) * static_cast<double>(i) /
                               static_cast<double>(q_steps - 1);
    }

    IntensityProfile profile;
    if (method == "exact") {
        profile = exact_intensity_profile(medium, n, std::move(grid));
    } else if (method == "mc") {
        profile = monte_carlo_intensity(medium, n, std::move(grid), samples, seed);
    } else if (method == "asymptotic") {
        profile = asymptotic_intensity_profile(medium, std::move(grid));
    } else {
        throw std::invalid_argument("--method must be exact|mc|asymptotic");
    }

    const bool has_stderr = profile.stderr_.has_value();
    std::string csv = has_stderr ? "q,intensity,stderr,near_coherent\n" : "q,intensity,near_coherent\n";
    json jq = json::array(), ji = json::array(), js = json::array(), jm = json::array();
    for (std::size_t i = 0; i < profile.q_grid.size(); ++i) {
        const double I = profile.intensity[i];
        const bool masked = std::isnan(I);
        csv += fmt17(profile.q_grid[i]) + ",";
        csv += masked ? "" : fmt17(I);
        if (has_stderr) {
            csv += "," + fmt17((*profile.stderr_)[i]);
        }
        csv += std::string(",") + (profile.near_coherent[i] ? "1" : "0") + "\n";
        jq.push_back(profile.q_grid[i]);
        ji.push_back(masked ? json(nullptr) : json(I));
        if (has_stderr) {
            js.push_back((*profile.stderr_)[i]);
        }
        jm.push_back(static_cast<bool>(profile.near_coherent[i]));
    }
    ManifestInfo mi;
    mi.command_line = cmdline;
    if (method == "mc") {
        mi.seed = seed;
    }
    mi.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["input"] = {{"distances", dist_text}, {"probs", probs_text}};
    report["parameters"] = {{"n", n},       {"q_min", q_min},     {"q_max", q_max},
                            {"q_steps", q_steps}, {"method", method}, {"samples", samples},
                            {"seed", seed}};
    json results = {{"q", jq}, {"intensity", ji}};
    if (has_stderr) {
        results["stderr"] = js;
    }
    results["near_coherent"] = jm;
    report["results"] = results;
    report["manifest"] = manifest_json(mi);
    emit_data(common.out, common.format, csv, report);
    return 0;
}

int cmd_commensurability(const std::string& cmdline, const std::string& values_text,
                         const CommonOpts& common) {
    const auto t0 = std::chrono::steady_clock::now();
    auto parsed = parse_number_list(values_text, "--values");
    PhaseVector alpha(parsed.values, parsed.exact);
    const CommensurabilityReport rep = classify_commensurability(alpha, common.qmax, common.tol);

    ManifestInfo mi;
    mi.command_line = cmdline;
    mi.qmax = common.qmax;
    mi.tol = common.tol;
    mi.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["input"] = {{"values", values_text}};
    report["parameters"] = {{"qmax", common.qmax}, {"tol", common.tol}};
    report["results"] = report_of_commensurability(rep);
    report["manifest"] = manifest_json(mi);
    emit_report(common.out, report);
    return 0;
}

int cmd_bragg(const std::string& cmdline, const std::string& dist_text,
              const std::string& probs_text, std::int64_t peaks, const CommonOpts& common) {
    const auto t0 = std::chrono::steady_clock::now();
    auto pd = parse_number_list(dist_text, "--distances");
    auto pp = parse_number_list(probs_text, "--probs");
    HTMedium medium(pd.values, ProbabilityVector(pp.values, pp.exact), "", pd.exact);
    const BraggPrediction bragg = predict_bragg(medium, common.qmax, common.tol, peaks);

    ManifestInfo mi;
    mi.command_line = cmdline;
    mi.qmax = common.qmax;
    mi.tol = common.tol;
    mi.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["input"] = {{"distances", dist_text}, {"probs", probs_text}};
    report["parameters"] = {{"qmax", common.qmax}, {"tol", common.tol}, {"peaks", peaks}};
    json results;
    results["commensurate"] = bragg.commensurate;
    results["m0"] = bragg.m0 ? json(*bragg.m0) : json(nullptr);
    results["q0"] = bragg.q0 ? json(*bragg.q0) : json(nullptr);
    results["lambda0"] = bragg.lambda0 ? json(*bragg.lambda0) : json(nullptr);
    results["peak_wavenumbers"] = bragg.peak_wavenumbers;
    results["classification"] = report_of_commensurability(bragg.report);
    report["results"] = results;
    report["manifest"] = manifest_json(mi);
    emit_report(common.out, report);
    return 0;
}

int cmd_duality(const std::string& cmdline, const std::string& probs_text, const CommonOpts& common) {
    const auto t0 = std::chrono::steady_clock::now();
    auto pp = parse_number_list(probs_text, "--probs");
    SourceModel src(ProbabilityVector(pp.values, pp.exact));
    const HTMedium medium = conjugate_medium(src, common.qmax, common.tol);
    const CorrespondenceReport corr = correspondence(src, common.qmax, common.tol);

    ManifestInfo mi;
    mi.command_line = cmdline;
    mi.qmax = common.qmax;
    mi.tol = common.tol;
    mi.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["input"] = {{"probs", probs_text}};
    report["parameters"] = {{"qmax", common.qmax}, {"tol", common.tol}};
    json results;
    results["relabeling"] = corr.relabeling;
    results["source"] = {{"classification", to_string(corr.source_classification)},
                         {"m0", corr.source_m0 ? json(*corr.source_m0) : json(nullptr)},
                         {"omega0", corr.omega0 ? json(*corr.omega0) : json(nullptr)}};
    results["medium"] = {{"distances", medium.distances()},
                         {"phase_analysis_only", medium.phase_only()},
                         {"classification", to_string(corr.medium_classification)},
                         {"m0", corr.medium_m0 ? json(*corr.medium_m0) : json(nullptr)},
                         {"q0", corr.q0 ? json(*corr.q0) : json(nullptr)}};
    results["matched"] = corr.matched;
    report["results"] = results;
    report["manifest"] = manifest_json(mi);
    emit_report(common.out, report);
    return 0;
}

int cmd_markov(const std::string& cmdline, const std::string& matrix_file, const std::string& mode_str,
               std::int64_t m_max, double eps, const CommonOpts& common) {
    const auto t0 = std::chrono::steady_clock::now();
    std::ifstream f(matrix_file);
    if (!f) {
        throw std::invalid_argument("cannot open matrix file: " + matrix_file);
    }
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw std::invalid_argument("matrix file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.contains("states") || !doc.contains("rows")) {
        throw std::invalid_argument("matrix file must contain 'states' and 'rows'");
    }
    const std::size_t S = doc["states"].get<std::size_t>();
    std::vector<double> entries;
    entries.reserve(S * S);
    for (const auto& row : doc["rows"]) {
        for (const auto& v : row) {
            entries.push_back(v.get<double>());
        }
    }
    TransitionMatrix P(S, entries);

    WeightMode mode;
    if (mode_str == "source") {
        mode = WeightMode::SourceWeights;
    } else if (mode_str == "medium") {
        mode = WeightMode::MediumWeights;
    } else {
        throw std::invalid_argument("--mode must be source|medium");
    }
    std::optional<DistanceAux> aux;
    if (doc.contains("distances")) {
        DistanceAux a;
        a.states = S;
        for (const auto& row : doc["distances"]) {
            for (const auto& v : row) {
                a.distances.push_back(v.get<double>());
            }
        }
        a.d0 = doc.contains("d0") ? doc["d0"].get<double>() : a.distances.at(0);
        aux = std::move(a);
    }
    if (mode == WeightMode::MediumWeights && !aux.has_value()) {
        throw std::invalid_argument("--mode medium requires a 'distances' matrix in the JSON file");
    }

    const MarkovScanReport scan = classify_markov(P, mode, aux, m_max, eps);

    ManifestInfo mi;
    mi.command_line = cmdline;
    mi.eps = eps;
    mi.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["input"] = {{"matrix", matrix_file}, {"states", S}};
    report["parameters"] = {{"mode", mode_str}, {"m_max", m_max}, {"eps", eps}};
    json results;
    results["classification"] = to_string(scan.classification);
    results["flagged_m"] = scan.flagged_m;
    results["unit_eigenvalue_m"] = scan.unit_eigenvalue_m;
    results["rho"] = scan.rho;
    json evsets = json::array();
    for (const auto& evs : scan.eigenvalue_sets) {
        json set = json::array();
        for (const auto& ev : evs) {
            set.push_back({ev.real(), ev.imag()});
        }
        evsets.push_back(set);
    }
    results["eigenvalues"] = evsets;
    report["results"] = results;
    report["manifest"] = manifest_json(mi);
    emit_report(common.out, report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cmdline;
    for (int i = 0; i < argc; ++i) {
        if (i) {
            cmdline += ' ';
        }
        cmdline += argv[i];
    }

    CLI::App app{"Shannon-code redundancy patterns and layer-disorder diffraction patterns"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string probs_text, dist_text, values_text, matrix_file;
    std::string method = "exact";
    std::string mode_str = "source";
    std::int64_t n_start = 1, n_end = 64, n = 256, q_steps = 101, m_max = 10000, samples = 1000,
                 peaks = 8, markov_m_max = 100;
    double q_min = 0.0, q_max = 4.0 * std::numbers::pi, eps = 1e-9;
    std::uint64_t seed = 12345;

    const auto add_common = [&common](CLI::App* sub, bool with_format) {
        sub->add_option("--out", common.out, "output file (default: stdout)");
        if (with_format) {
            sub->add_option("--format", common.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
        }
        sub->add_option("--qmax", common.qmax, "largest denominator examined");
        sub->add_option("--tol", common.tol, "residual tolerance for rationality");
    };

    auto* red = app.add_subcommand("redundancy", "average redundancy R_n over a block-length range");
    red->add_option("--probs", probs_text, "symbol probabilities (fractions are exact)")->required();
    red->add_option("--n-start", n_start, "first block length");
    red->add_option("--n-end", n_end, "last block length");
    red->add_option("--method", method, "exact|series|asymptotic");
    red->add_option("--m-max", m_max, "series truncation");
    add_common(red, true);

    auto* dif = app.add_subcommand("diffraction", "intensity profile I(q) over a wave-number grid");
    dif->add_option("--distances", dist_text, "layer spacings (fractions are exact)")->required();
    dif->add_option("--probs", probs_text, "selection probabilities")->required();
    dif->add_option("--n", n, "number of layers");
    dif->add_option("--q-min", q_min, "grid start");
    dif->add_option("--q-max", q_max, "grid end");
    dif->add_option("--q-steps", q_steps, "grid points");
    dif->add_option("--method", method, "exact|mc|asymptotic");
    dif->add_option("--samples", samples, "Monte Carlo walks");
    dif->add_option("--seed", seed, "Monte Carlo seed");
    add_common(dif, true);

    auto* com = app.add_subcommand("commensurability", "classify phase values as rational/irrational");
    com->add_option("--values", values_text, "phase values (fractions are exact)")->required();
    add_common(com, false);

    auto* brg = app.add_subcommand("bragg", "predict Bragg peaks of a layer medium");
    brg->add_option("--distances", dist_text, "layer spacings")->required();
    brg->add_option("--probs", probs_text, "selection probabilities")->required();
    brg->add_option("--peaks", peaks, "number of predicted harmonics");
    add_common(brg, false);

    auto* dua = app.add_subcommand("duality", "source <-> conjugate-medium correspondence");
    dua->add_option("--probs", probs_text, "symbol probabilities")->required();
    add_common(dua, false);

    auto* mkv = app.add_subcommand("markov", "spectral-radius scan of a weighted transition matrix");
    mkv->add_option("--matrix", matrix_file, "JSON file: {states, rows, distances?, d0?}")->required();
    mkv->add_option("--mode", mode_str, "source|medium");
    mkv->add_option("--m-max", markov_m_max, "harmonic scan bound");
    mkv->add_option("--eps", eps, "closeness to 1 that counts as coherent");
    add_common(mkv, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (red->parsed()) {
            return cmd_redundancy(cmdline, probs_text, n_start, n_end, method, m_max, common);
        }
        if (dif->parsed()) {
            return cmd_diffraction(cmdline, dist_text, probs_text, n, q_min, q_max, q_steps, method,
                                   samples, seed, common);
        }
        if (com->parsed()) {
            return cmd_commensurability(cmdline, values_text, common);
        }
        if (brg->parsed()) {
            return cmd_bragg(cmdline, dist_text, probs_text, peaks, common);
        }
        if (dua->parsed()) {
            return cmd_duality(cmdline, probs_text, common);
        }
        if (mkv->parsed()) {
            return cmd_markov(cmdline, matrix_file, mode_str, markov_m_max, eps, common);
        }
    } catch (const resource_limit_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
