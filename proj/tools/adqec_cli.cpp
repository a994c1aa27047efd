// Batch experiment driver: gamma sweeps, coefficient fits, criteria reports,
// recovery fixtures, and code-subspace comparison, with CSV/JSON outputs.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adqec/adqec.hpp"

namespace {

using namespace adqec;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;

std::vector<double> parse_gamma_range(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw CLI::ValidationError("--gamma-range", "expected a:b:n");
    const double a = std::stod(spec.substr(0, c1));
    const double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(spec.substr(c2 + 1));
    if (n < 1) throw CLI::ValidationError("--gamma-range", "need n >= 1");
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(n == 1 ? a : a + (b - a) * i / static_cast<double>(n - 1));
    return out;
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

/// Options shared by subcommands; a JSON config file supplies defaults for
/// anything not given on the command line.
struct CommonOpts {
    double gamma = -1.0;
    std::string gamma_range;
    std::uint64_t seed = 0;
    int restarts = 10;
    double tol = 1e-8;
    int max_rounds = 200;
    std::string out;
    std::string format = "csv";
    std::string config;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--gamma", o.gamma, "single damping rate");
    cmd->add_option("--gamma-range", o.gamma_range, "grid a:b:n");
    cmd->add_option("--seed", o.seed, "rng seed");
    cmd->add_option("--restarts", o.restarts, "random restarts");
    cmd->add_option("--tol", o.tol, "solver tolerance");
    cmd->add_option("--max-rounds", o.max_rounds, "alternation cap");
    cmd->add_option("--out", o.out, "output path prefix");
    cmd->add_option("--format", o.format, "stdout format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--config", o.config, "JSON config mirroring the flags");
}

void apply_config(const CLI::App* cmd, CommonOpts& o) {
    if (o.config.empty()) return;
    const json cfg = load_json_file(o.config);
    auto maybe = [&](const char* flag, auto& slot) {
        using T = std::decay_t<decltype(slot)>;
        const std::string key = std::string(flag).substr(2);
        if (cmd->count(flag) == 0 && cfg.contains(key)) slot = cfg.at(key).get<T>();
    };
    maybe("--gamma", o.gamma);
    maybe("--gamma-range", o.gamma_range);
    maybe("--seed", o.seed);
    maybe("--restarts", o.restarts);
    maybe("--tol", o.tol);
    maybe("--max-rounds", o.max_rounds);
    maybe("--out", o.out);
    maybe("--format", o.format);
}

std::vector<double> gammas_from(const CommonOpts& o) {
    if (!o.gamma_range.empty()) return parse_gamma_range(o.gamma_range);
    if (o.gamma >= 0) return {o.gamma};
    throw CLI::ValidationError("gamma", "need --gamma or --gamma-range");
}

SdpSettings settings_from(const CommonOpts& o) {
    SdpSettings s;
    s.tol = o.tol;
    s.seed = o.seed;
    s.restarts = o.restarts;
    s.max_rounds = o.max_rounds;
    return s;
}

void emit(const CommonOpts& o, const std::string& csv, const json& j) {
    if (o.out.empty()) {
        if (o.format == "csv" && !csv.empty()) std::cout << csv;
        else std::cout << j.dump(2) << "\n";
        return;
    }
    if (!csv.empty()) write_text_file(o.out + ".csv", csv);
    write_text_file(o.out + ".json", j.dump(2) + "\n");
}

int run_sweep_cmd(const CommonOpts& o, const std::string& schemes,
                  const std::string& code_file) {
    SweepConfig config;
    config.gammas = gammas_from(o);
    config.schemes = split_csv_list(schemes);
    config.settings = settings_from(o);
    if (!code_file.empty()) config.custom_code = code_from_json(load_json_file(code_file));
    const SweepOutput out = run_sweep(config);

    json j;
    j["records"] = json::array();
    for (const SweepRecord& r : out.records)
        j["records"].push_back({{"gamma", r.gamma},
                                {"scheme", r.scheme},
                                {"fidelity", r.fidelity},
                                {"infidelity", r.infidelity}});
    j["sidecar"] = out.sidecar;
    j["seed"] = o.seed;

    // per-scheme quadratic(+cubic) fits when the grid is big enough
    json fits = json::object();
    for (const std::string& scheme : config.schemes) {
        std::vector<SweepRecord> sub;
        for (const SweepRecord& r : out.records)
            if (r.scheme == scheme && r.gamma > 0) sub.push_back(r);
        if (sub.size() >= 4) {
            const FitResult fit = fit_infidelity(sub);
            fits[scheme] = {{"coefficient", fit.coefficient},
                            {"cubic", fit.cubic},
                            {"residual", fit.residual}};
        }
    }
    j["fits"] = std::move(fits);
    emit(o, sweep_csv(out.records), j);

    for (const auto& side : out.sidecar)
        if (side.contains("detail") && side["detail"].contains("converged") &&
            !side["detail"]["converged"].get<bool>())
            return kExitNoConvergence;
    return kExitOk;
}

int run_optimize_cmd(const CommonOpts& o) {
    const std::vector<double> gs = gammas_from(o);
    if (gs.size() != 1) throw CLI::ValidationError("--gamma", "optimize takes one gamma");
    const OptimizationResult r =
        alternate_optimize(kraus_to_choi(nqubit_ad(gs[0], 4)), settings_from(o));
    json j = to_json(r);
    j["gamma"] = gs[0];
    emit(o, "", j);
    std::cerr << "fidelity " << format_g12(r.fidelity) << " after " << r.rounds
              << " rounds (restart " << r.restart_index << ")\n";
    return r.converged ? kExitOk : kExitNoConvergence;
}

int run_criteria_cmd(const CommonOpts& o, const std::string& code_name,
                     const std::string& code_file, const std::string& subset) {
    const std::vector<double> gs = gammas_from(o);
    if (gs.size() != 1) throw CLI::ValidationError("--gamma", "criteria takes one gamma");
    const double gamma = gs[0];
    CodePair code;
    std::function<CodePair(double)> code_at;
    if (code_name == "optimized") {
        code = optimized_code(gamma);
        code_at = [](double g) { return optimized_code(g); };
    } else if (code_name == "leung") {
        code = leung_code();
        code_at = [](double) { return leung_code(); };
    } else if (code_name == "custom") {
        if (code_file.empty())
            throw CLI::ValidationError("--code-file", "custom code needs a file");
        code = code_from_json(load_json_file(code_file));
        code_at = [code](double) { return code; };
    } else {
        throw CLI::ValidationError("--code", "expected optimized|leung|custom");
    }
    const QecMatrices q = qec_matrices(code, gamma);
    const DeviationReport dev = deviation_max(q);
    const ErrorSubset sub =
        subset == "all" ? ErrorSubset::kAll : ErrorSubset::kUpToFirstOrder;

    json j;
    j["gamma"] = gamma;
    j["code"] = code_name;
    j["error_labels"] = q.error_labels;
    j["m00"] = matrix_to_json(q.m00);
    j["m01"] = matrix_to_json(q.m01);
    j["m11"] = matrix_to_json(q.m11);
    j["deviation"] = {{"max_abs", dev.max_abs},
                      {"delta_m", matrix_to_json(dev.delta_m)}};
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) grid.push_back(0.01 + 0.01 * i);
    const ResidualFit fit = residual_order(code_at, sub, grid);
    j["residual_fit"] = {{"subset", subset},
                         {"exponent", fit.exponent},
                         {"gammas", fit.gammas},
                         {"residuals", fit.residuals}};
    emit(o, "", j);
    return kExitOk;
}

int run_recover_cmd(const CommonOpts& o, const std::string& fixture) {
    const std::vector<double> gs = gammas_from(o);
    if (gs.size() != 1) throw CLI::ValidationError("--gamma", "recover takes one gamma");
    const double gamma = gs[0];
    const RecoveryFixture fix =
        fixture == "fitted" ? fitted_recovery(gamma) : analytical_recovery(gamma);
    const FirstOrderReport rep = verify_first_order(optimized_code(gamma), fix, gamma);

    json j;
    j["label"] = fix.label;
    j["gamma"] = fix.gamma;
    j["completeness_defect"] = fix.completeness_defect;
    j["gamma_in_validity"] = fix.gamma_in_validity;
    j["kraus"] = to_json(fix.channel);
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back({{"error", e.error_label},
                           {"order", e.order},
                           {"min_fidelity", e.min_fidelity},
                           {"max_event_weight", e.weight}});
    j["verification"] = {{"min_first_order_fidelity", rep.min_first_order_fidelity},
                         {"per_error", std::move(entries)}};
    emit(o, "", j);
    return kExitOk;
}

int run_compare_cmd(const CommonOpts& o) {
    const std::vector<OverlapRecord> recs =
        compare_codewords(gammas_from(o), settings_from(o));
    std::string csv = "gamma,overlap,raw_overlap,fidelity,rounds\n";
    json arr = json::array();
    bool all_converged = true;
    for (const OverlapRecord& r : recs) {
        csv += format_g12(r.gamma) + "," + format_g12(r.overlap) + "," +
               format_g12(r.raw_overlap) + "," + format_g12(r.fidelity) + "," +
               std::to_string(r.rounds) + "\n";
        arr.push_back({{"gamma", r.gamma},
                       {"overlap", r.overlap},
                       {"raw_overlap", r.raw_overlap},
                       {"fidelity", r.fidelity},
                       {"rounds", r.rounds},
                       {"converged", r.converged}});
        all_converged = all_converged && r.converged;
    }
    json j;
    j["records"] = std::move(arr);
    j["seed"] = o.seed;
    emit(o, csv, j);
    return all_converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noise-adapted quantum error correction toolkit"};
    app.require_subcommand(1);

    CommonOpts sweep_opts, opt_opts, crit_opts, rec_opts, cmp_opts;
    std::string schemes = "optimized+sdp";
    std::string code_file, code_name = "optimized", subset = "e01", fixture = "analytical";

    CLI::App* sweep = app.add_subcommand("sweep", "fidelity sweep over gamma");
    add_common(sweep, sweep_opts);
    sweep->add_option("--schemes", schemes, "comma list of schemes");
    sweep->add_option("--code-file", code_file, "CodePair JSON for the custom scheme");

    CLI::App* optimize = app.add_subcommand("optimize", "alternating optimization");
    add_common(optimize, opt_opts);

    CLI::App* criteria = app.add_subcommand("criteria", "correctability matrices");
    add_common(criteria, crit_opts);
    criteria->add_option("--code", code_name, "optimized|leung|custom");
    criteria->add_option("--code-file", code_file, "CodePair JSON for custom");
    criteria->add_option("--subset", subset, "e01|all")
        ->check(CLI::IsMember({"e01", "all"}));

    CLI::App* recover = app.add_subcommand("recover", "recovery fixtures");
    add_common(recover, rec_opts);
    recover->add_option("--fixture", fixture, "analytical|fitted")
        ->check(CLI::IsMember({"analytical", "fitted"}));

    CLI::App* compare = app.add_subcommand("compare-codewords",
                                           "optimized subspace vs ansatz");
    add_common(compare, cmp_opts);

    try {
        app.parse(argc, argv);
        if (sweep->parsed()) {
            apply_config(sweep, sweep_opts);
            return run_sweep_cmd(sweep_opts, schemes, code_file);
        }
        if (optimize->parsed()) {
            apply_config(optimize, opt_opts);
            return run_optimize_cmd(opt_opts);
        }
        if (criteria->parsed()) {
            apply_config(criteria, crit_opts);
            return run_criteria_cmd(crit_opts, code_name, code_file, subset);
        }
        if (recover->parsed()) {
            apply_config(recover, rec_opts);
            return run_recover_cmd(rec_opts, fixture);
        }
        if (compare->parsed()) {
            apply_config(compare, cmp_opts);
            return run_compare_cmd(cmp_opts);
        }
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    }
    return kExitValidation;
}
