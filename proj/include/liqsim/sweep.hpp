#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "liqsim/engine.hpp"
#include "liqsim/metrics.hpp"
#include "liqsim/params.hpp"
#include "liqsim/rng.hpp"

namespace liqsim {

// One swept parameter, a value grid, and repeated seeded runs per cell.
// With and without the market maker share run seeds so cells pair up.
struct SweepSpec {
    std::string param;
    std::vector<double> values;
    int runs = 10;
    MarketParams base;
    bool run_with = true;
    bool run_without = true;
    uint64_t master_seed = 1;
};

inline uint64_t sweep_run_seed(uint64_t master_seed, size_t value_index, size_t run_index) {
    return derive_seed(derive_seed(master_seed, "cell", value_index), "run", run_index);
}

// Value grids for the standard liquidity study, keyed by parameter name.
inline std::vector<double> preset_values(const std::string& param) {
    if (param == "delta_p") return {0.01, 0.1, 1.0, 10.0, 100.0};
    if (param == "w1_max" || param == "w2_max") return {1.0, 3.0, 5.0, 8.0, 10.0};
    if (param == "sigma_eps") return {0.02, 0.04, 0.06, 0.08, 0.1};
    if (param == "est") return {0.003, 0.005, 0.01, 0.02, 0.03};
    if (param == "t_c") return {10000.0, 15000.0, 20000.0, 25000.0, 30000.0};
    if (param == "pr_o") return {0.2, 0.4, 0.6, 0.8, 1.0};
    throw std::invalid_argument("no preset value grid for parameter: " + param);
}

struct SweepCell {
    std::string param;
    double value = 0.0;
    bool hft = false;
    std::vector<uint64_t> seeds;        // one per run, shared across variants
    std::vector<LiquidityReport> runs;  // in run order
};

struct SweepReport {
    SweepSpec spec;
    std::vector<SweepCell> cells;  // per value: with-maker first, then without
};

namespace detail {

// fn(i) once per index on a small pool; caller owns disjoint result slots
template <typename Fn>
void parallel_for(size_t count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const size_t pool_size = std::min(static_cast<size_t>(workers), count);
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (size_t w = 0; w < pool_size; ++w) {
        pool.emplace_back([&] {
            for (size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline MarketParams cell_params(const SweepSpec& spec, double value, bool hft, uint64_t seed) {
    MarketParams p = spec.base;
    set_param(p, spec.param, value);
    p.hft_enabled = hft;
    p.seed = seed;
    p.validate();
    // resiliency needs whole days
    if (p.t_end % p.t_day != 0)
        throw std::invalid_argument("t_end must be a multiple of t_day, got " +
                                    std::to_string(p.t_end) + " and " + std::to_string(p.t_day));
    return p;
}

inline SweepReport run_sweep(const SweepSpec& spec, int workers = 1) {
    if (spec.values.empty()) throw std::invalid_argument("sweep needs at least one value");
    if (spec.runs < 1) throw std::invalid_argument("sweep needs at least one run per cell");
    if (!spec.run_with && !spec.run_without)
        throw std::invalid_argument("sweep needs at least one market maker variant");

    SweepReport report;
    report.spec = spec;
    std::vector<bool> variants;
    if (spec.run_with) variants.push_back(true);
    if (spec.run_without) variants.push_back(false);

    for (size_t vi = 0; vi < spec.values.size(); ++vi) {
        for (const bool hft : variants) {
            SweepCell cell;
            cell.param = spec.param;
            cell.value = spec.values[vi];
            cell.hft = hft;
            cell.seeds.reserve(static_cast<size_t>(spec.runs));
            for (size_t ri = 0; ri < static_cast<size_t>(spec.runs); ++ri)
                cell.seeds.push_back(sweep_run_seed(spec.master_seed, vi, ri));
            cell.runs.resize(static_cast<size_t>(spec.runs));
            report.cells.push_back(std::move(cell));
        }
    }
    // fail fast on bad cells before burning simulation time
    for (const auto& cell : report.cells) cell_params(spec, cell.value, cell.hft, cell.seeds[0]);

    const size_t per_cell = static_cast<size_t>(spec.runs);
    detail::parallel_for(report.cells.size() * per_cell, workers, [&](size_t job) {
        auto& cell = report.cells[job / per_cell];
        const size_t ri = job % per_cell;
        const auto params = cell_params(spec, cell.value, cell.hft, cell.seeds[ri]);
        cell.runs[ri] = liquidity_report(run_simulation(params));
    });
    return report;
}

// Mean and standard error of one metric across a cell's runs; runs where the
// metric is undefined are left out.
struct CellStat {
    RunningStat acc;
    void add(const std::optional<double>& v) {
        if (v) acc.add(*v);
    }
    void add(double v) { acc.add(v); }
    std::optional<double> mean() const {
        return acc.n > 0 ? std::optional<double>(acc.mean) : std::nullopt;
    }
    std::optional<double> std_error() const {
        return acc.n > 0 ? std::optional<double>(acc.std_error()) : std::nullopt;
    }
};

struct CellSummary {
    CellStat volume, hft_volume, tightness, resiliency, depth;
    CellStat execution_rate, volatility, execution_rate_normal;
};

inline CellSummary summarize_cell(const SweepCell& cell) {
    CellSummary s;
    for (const auto& r : cell.runs) {
        s.volume.add(static_cast<double>(r.volume));
        s.hft_volume.add(static_cast<double>(r.hft_volume));
        s.tightness.add(r.tightness);
        s.resiliency.add(r.resiliency);
        s.depth.add(r.depth);
        s.execution_rate.add(r.execution_rate);
        s.volatility.add(r.volatility);
        s.execution_rate_normal.add(r.execution_rate_normal_resting);
    }
    return s;
}

inline std::string csv_field(const std::optional<double>& v, double scale = 1.0) {
    return v ? format_double(*v * scale) : std::string("nan");
}

// One row per cell; means first, then the matching standard errors.
inline std::string sweep_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "param,value,hft,runs,volume,hft_volume,tightness,resiliency,depth,"
           "execution_rate_pct,volatility_pct,execution_rate_normal_pct,"
           "volume_se,hft_volume_se,tightness_se,resiliency_se,depth_se,"
           "execution_rate_pct_se,volatility_pct_se,execution_rate_normal_pct_se\n";
    for (const auto& cell : report.cells) {
        const auto s = summarize_cell(cell);
        out << cell.param << ',' << format_double(cell.value) << ',' << (cell.hft ? 1 : 0) << ','
            << cell.runs.size() << ',' << csv_field(s.volume.mean()) << ','
            << csv_field(s.hft_volume.mean()) << ',' << csv_field(s.tightness.mean()) << ','
            << csv_field(s.resiliency.mean()) << ',' << csv_field(s.depth.mean()) << ','
            << csv_field(s.execution_rate.mean(), 100.0) << ','
            << csv_field(s.volatility.mean(), 100.0) << ','
            << csv_field(s.execution_rate_normal.mean(), 100.0) << ','
            << csv_field(s.volume.std_error()) << ',' << csv_field(s.hft_volume.std_error()) << ','
            << csv_field(s.tightness.std_error()) << ',' << csv_field(s.resiliency.std_error())
            << ',' << csv_field(s.depth.std_error()) << ','
            << csv_field(s.execution_rate.std_error(), 100.0) << ','
            << csv_field(s.volatility.std_error(), 100.0) << ','
            << csv_field(s.execution_rate_normal.std_error(), 100.0) << '\n';
    }
    return out.str();
}

// Everything needed to reproduce a sweep byte for byte.
inline std::string manifest_json(const SweepSpec& spec) {
    nlohmann::json j;
    j["format"] = 1;
    j["param"] = spec.param;
    j["values"] = spec.values;
    j["runs"] = spec.runs;
    j["master_seed"] = spec.master_seed;
    j["variants"]["with"] = spec.run_with;
    j["variants"]["without"] = spec.run_without;
    nlohmann::json base;
    for (const auto& field : detail::param_fields()) base[field.name] = field.get(spec.base);
    j["base"] = base;
    return j.dump(2) + "\n";
}

inline SweepSpec spec_from_manifest(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (!j.contains("format") || j.at("format").get<int>() != 1)
        throw std::invalid_argument("manifest: unsupported format");
    SweepSpec spec;
    spec.param = j.at("param").get<std::string>();
    spec.values = j.at("values").get<std::vector<double>>();
    spec.runs = j.at("runs").get<int>();
    spec.master_seed = j.at("master_seed").get<uint64_t>();
    spec.run_with = j.at("variants").at("with").get<bool>();
    spec.run_without = j.at("variants").at("without").get<bool>();
    for (const auto& [key, value] : j.at("base").items())
        set_param(spec.base, key, value.get<std::string>());
    return spec;
}

// Multi-run check that the no-maker market shows heavy return tails and
// volatility clustering at the coarse sampling interval.
struct StylizedSummary {
    std::optional<double> mean_kurtosis;
    std::array<std::optional<double>, 5> mean_sq_autocorr{};
    bool pass = false;
};

inline StylizedSummary validate_stylized(const MarketParams& base, int runs, uint64_t master_seed,
                                         int workers = 1) {
    if (runs < 1) throw std::invalid_argument("validation needs at least one run");
    MarketParams probe = base;
    probe.hft_enabled = false;
    probe.validate();
    std::vector<StylizedFacts> facts(static_cast<size_t>(runs));
    detail::parallel_for(static_cast<size_t>(runs), workers, [&](size_t i) {
        MarketParams p = probe;
        p.seed = derive_seed(master_seed, "validate", i);
        facts[i] = stylized_facts(run_simulation(p));
    });

    StylizedSummary out;
    bool complete = true;
    CellStat kurt;
    std::array<CellStat, 5> acs;
    for (const auto& f : facts) {
        if (!f.excess_kurtosis) complete = false;
        kurt.add(f.excess_kurtosis);
        for (size_t l = 0; l < 5; ++l) {
            if (!f.sq_return_autocorr[l]) complete = false;
            acs[l].add(f.sq_return_autocorr[l]);
        }
    }
    out.mean_kurtosis = kurt.mean();
    out.pass = complete && out.mean_kurtosis && *out.mean_kurtosis > 0.0;
    for (size_t l = 0; l < 5; ++l) {
        out.mean_sq_autocorr[l] = acs[l].mean();
        if (!out.mean_sq_autocorr[l] || *out.mean_sq_autocorr[l] <= 0.0) out.pass = false;
    }
    return out;
}

}  // namespace liqsim
