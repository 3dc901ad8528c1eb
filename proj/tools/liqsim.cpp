// Command line front end: single runs, parameter sweeps, stylized-fact
// validation, and event-log replay over the simulation library.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "liqsim/engine.hpp"
#include "liqsim/metrics.hpp"
#include "liqsim/params.hpp"
#include "liqsim/sweep.hpp"

namespace {

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("LIQSIM_WORKERS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out.good()) throw std::runtime_error("write failed: " + path);
}

void check_days(const liqsim::MarketParams& p) {
    if (p.t_end % p.t_day != 0)
        throw std::invalid_argument("t_end must be a multiple of t_day, got " +
                                    std::to_string(p.t_end) + " and " + std::to_string(p.t_day));
}

// one header plus one row, mirroring print_report for scripting
std::string report_csv(const liqsim::LiquidityReport& r) {
    using liqsim::csv_field;
    std::ostringstream out;
    out << "volume,hft_volume,tightness,resiliency,depth,execution_rate_pct,volatility_pct,"
           "execution_rate_normal_pct,excess_kurtosis,sq_autocorr_1,sq_autocorr_2,sq_autocorr_3,"
           "sq_autocorr_4,sq_autocorr_5,hft_position\n";
    out << r.volume << ',' << r.hft_volume << ',' << csv_field(r.tightness) << ','
        << csv_field(r.resiliency) << ',' << liqsim::format_double(r.depth) << ','
        << csv_field(r.execution_rate, 100.0) << ',' << csv_field(r.volatility, 100.0) << ','
        << csv_field(r.execution_rate_normal_resting, 100.0) << ','
        << csv_field(r.stylized.excess_kurtosis);
    for (const auto& ac : r.stylized.sq_return_autocorr) out << ',' << csv_field(ac);
    out << ',' << r.hft_position << '\n';
    return out.str();
}

liqsim::MarketParams build_params(
    const std::string& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides, double scale) {
    liqsim::MarketParams p;
    if (!config_path.empty()) p = liqsim::read_params_file(config_path, p);
    for (const auto& [name, value] : overrides) liqsim::set_param(p, name, value);
    if (scale != 1.0) {
        if (scale <= 0.0) throw std::invalid_argument("--scale must be > 0");
        p.t_end = std::llround(static_cast<double>(p.t_end) * scale);
    }
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"artificial market simulator: one-share limit orders, learning agents, "
                 "and an optional high-frequency market maker"};
    app.require_subcommand(1);
    // global options may appear after the subcommand name
    app.fallthrough(true);

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    double scale = 1.0;
    int workers_flag = 0;
    app.add_option("--config", config_path, "parameter file of name=value lines");
    for (const auto& field : liqsim::detail::param_fields()) {
        const std::string name = field.name;
        app.add_option_function<std::string>(
               "--" + name,
               [&overrides, name](const std::string& v) { overrides.emplace_back(name, v); },
               "override parameter " + name)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    app.add_option("--scale", scale, "multiply the horizon t_end, leaving everything else fixed");
    app.add_option("--workers", workers_flag,
                   "worker threads (default: LIQSIM_WORKERS, then hardware)");

    auto* run_cmd = app.add_subcommand("run", "simulate one market and print its liquidity report");
    std::string run_log, run_out;
    run_cmd->add_option("--event-log", run_log, "record every order event to this file");
    run_cmd->add_option("--out", run_out, "also write the report as a CSV row");

    auto* sweep_cmd =
        app.add_subcommand("sweep", "vary one parameter across seeded repeated runs");
    std::string sweep_param, sweep_hft = "both", sweep_out, sweep_manifest, sweep_from;
    std::vector<double> sweep_values;
    int sweep_runs = 10;
    uint64_t master_seed = 0;
    bool use_preset = false;
    sweep_cmd->add_option("--param", sweep_param, "parameter to vary");
    sweep_cmd->add_flag("--preset", use_preset, "use the built-in value grid for --param");
    sweep_cmd->add_option("--values", sweep_values, "explicit value grid")->delimiter(',');
    sweep_cmd->add_option("--runs", sweep_runs, "seeded repetitions per cell");
    sweep_cmd->add_option("--hft", sweep_hft, "market maker variants to run")
        ->check(CLI::IsMember({"both", "with", "without"}));
    sweep_cmd->add_option("--out", sweep_out, "CSV destination (default stdout)");
    sweep_cmd->add_option("--manifest", sweep_manifest, "write a reproduction manifest");
    const auto* master_opt = sweep_cmd->add_option(
        "--master-seed", master_seed, "seed for the run-seed schedule (default: the base seed)");
    sweep_cmd->add_option("--from-manifest", sweep_from,
                          "rebuild the whole sweep from a manifest, ignoring other sweep flags");

    auto* validate_cmd = app.add_subcommand(
        "validate", "check for heavy return tails and volatility clustering without the maker");
    int validate_runs = 10;
    validate_cmd->add_option("--runs", validate_runs, "independent runs to average");

    auto* replay_cmd = app.add_subcommand("replay", "rebuild a run from its event log");
    std::string replay_path, replay_out;
    replay_cmd->add_option("log", replay_path, "event log written by run --event-log")->required();
    replay_cmd->add_option("--out", replay_out, "also write the report as a CSV row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const int workers = resolve_workers(workers_flag);
        const liqsim::MarketParams params = build_params(config_path, overrides, scale);

        if (run_cmd->parsed()) {
            check_days(params);
            std::optional<liqsim::EventLogWriter> log;
            if (!run_log.empty()) log.emplace(run_log);
            const auto trace = liqsim::run_simulation(params, log ? &*log : nullptr);
            if (log) log->close();
            const auto report = liqsim::liquidity_report(trace);
            liqsim::print_report(report, std::cout);
            if (!run_out.empty()) write_file(run_out, report_csv(report));
            return 0;
        }

        if (sweep_cmd->parsed()) {
            liqsim::SweepSpec spec;
            if (!sweep_from.empty()) {
                spec = liqsim::spec_from_manifest(slurp(sweep_from));
            } else {
                if (sweep_param.empty())
                    throw std::invalid_argument("sweep needs --param or --from-manifest");
                spec.param = sweep_param;
                spec.values = use_preset ? liqsim::preset_values(sweep_param) : sweep_values;
                if (spec.values.empty())
                    throw std::invalid_argument("sweep needs --values or --preset");
                spec.runs = sweep_runs;
                spec.base = params;
                spec.master_seed = master_opt->count() > 0 ? master_seed : params.seed;
                spec.run_with = sweep_hft != "without";
                spec.run_without = sweep_hft != "with";
            }
            const auto report = liqsim::run_sweep(spec, workers);
            const auto csv = liqsim::sweep_csv(report);
            if (sweep_out.empty())
                std::cout << csv;
            else
                write_file(sweep_out, csv);
            if (!sweep_manifest.empty()) write_file(sweep_manifest, liqsim::manifest_json(spec));
            return 0;
        }

        if (validate_cmd->parsed()) {
            check_days(params);
            const auto summary =
                liqsim::validate_stylized(params, validate_runs, params.seed, workers);
            std::cout << "excess_kurtosis_mean: " << liqsim::format_optional(summary.mean_kurtosis)
                      << "\n";
            std::cout << "sq_return_autocorr_mean:";
            for (const auto& ac : summary.mean_sq_autocorr)
                std::cout << " " << liqsim::format_optional(ac);
            std::cout << "\n";
            std::cout << "stylized_facts: " << (summary.pass ? "PASS" : "FAIL") << "\n";
            return summary.pass ? 0 : 1;
        }

        // replay is the only subcommand left
        check_days(params);
        const auto records = liqsim::read_event_log(replay_path);
        const auto trace = liqsim::replay_event_log(records, params);
        const auto report = liqsim::liquidity_report(trace);
        liqsim::print_report(report, std::cout);
        if (!replay_out.empty()) write_file(replay_out, report_csv(report));
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
