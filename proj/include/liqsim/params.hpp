#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "liqsim/format.hpp"

namespace liqsim {

// Full configuration of one simulated market.  Defaults are the baseline
// configuration used throughout; sweeps override one field at a time.
struct MarketParams {
    int64_t t_end = 1'000'000;   // number of agent turns
    int32_t n = 1000;            // normal agent count
    double w1_max = 1.0;         // cap of the fundamental strategy weight
    double w2_max = 10.0;        // cap of the technical strategy weight
    double u_max = 1.0;          // cap of the noise weight
    int64_t tau_max = 10'000;    // cap of the technical lookback
    double sigma_eps = 0.06;     // stddev of the noise return term
    double est = 0.003;          // order price dispersion, as a fraction of the expected price
    int64_t t_c = 20'000;        // order lifetime in steps
    double delta_p = 0.1;        // tick size
    double p_f = 10'000.0;       // fundamental price
    double k_l = 4.0;            // learning intensity
    double m = 0.01;             // weight reset probability
    double theta_h = 0.002;      // market maker spread, as a fraction of p_f
    double w_h = 5.0e-8;         // market maker inventory skew coefficient
    double pr_o = 1.0;           // probability a normal agent acts on its turn
    int64_t t_day = 20'000;      // steps per trading day
    bool hft_enabled = false;    // market maker participates
    bool hft_on_abstain = true;  // market maker re-quotes even when the agent abstains
    uint64_t seed = 1;           // master seed of the run
    int64_t lag = 0;             // return lookback; 0 means "use n"
    int64_t vol_sample_interval = 1;  // stride of the volatility return series

    int64_t history_lag() const { return lag > 0 ? lag : n; }

    void validate() const {
        auto fail = [](const std::string& msg) { throw std::invalid_argument("params: " + msg); };
        if (t_end < 0) fail("t_end must be >= 0");
        if (n < 1) fail("n must be >= 1");
        if (w1_max < 0 || w2_max < 0 || u_max < 0) fail("weight caps must be >= 0");
        if (tau_max < 1) fail("tau_max must be >= 1");
        if (sigma_eps < 0) fail("sigma_eps must be >= 0");
        if (est <= 0 || est > 1) fail("est must be in (0, 1]");
        if (t_c < 1) fail("t_c must be >= 1");
        if (delta_p <= 0) fail("delta_p must be > 0");
        if (p_f <= 0) fail("p_f must be > 0");
        if (k_l < 0) fail("k_l must be >= 0");
        if (m < 0 || m > 1) fail("m must be in [0, 1]");
        if (pr_o < 0 || pr_o > 1) fail("pr_o must be in [0, 1]");
        if (t_day < 1) fail("t_day must be >= 1");
        if (hft_enabled && theta_h <= 0) fail("theta_h must be > 0 when the market maker runs");
        if (lag < 0) fail("lag must be >= 0");
        if (vol_sample_interval < 1) fail("vol_sample_interval must be >= 1");
    }
};

namespace detail {

// One row per settable field; shared by file IO and the sweep harness.
struct ParamField {
    const char* name;
    std::function<std::string(const MarketParams&)> get;
    std::function<void(MarketParams&, const std::string&)> set;
};

inline const std::vector<ParamField>& param_fields() {
    static const std::vector<ParamField> fields = {
        {"t_end", [](const MarketParams& p) { return std::to_string(p.t_end); },
         [](MarketParams& p, const std::string& v) { p.t_end = parse_int(v); }},
        {"n", [](const MarketParams& p) { return std::to_string(p.n); },
         [](MarketParams& p, const std::string& v) { p.n = static_cast<int32_t>(parse_int(v)); }},
        {"w1_max", [](const MarketParams& p) { return format_double(p.w1_max); },
         [](MarketParams& p, const std::string& v) { p.w1_max = parse_double(v); }},
        {"w2_max", [](const MarketParams& p) { return format_double(p.w2_max); },
         [](MarketParams& p, const std::string& v) { p.w2_max = parse_double(v); }},
        {"u_max", [](const MarketParams& p) { return format_double(p.u_max); },
         [](MarketParams& p, const std::string& v) { p.u_max = parse_double(v); }},
        {"tau_max", [](const MarketParams& p) { return std::to_string(p.tau_max); },
         [](MarketParams& p, const std::string& v) { p.tau_max = parse_int(v); }},
        {"sigma_eps", [](const MarketParams& p) { return format_double(p.sigma_eps); },
         [](MarketParams& p, const std::string& v) { p.sigma_eps = parse_double(v); }},
        {"est", [](const MarketParams& p) { return format_double(p.est); },
         [](MarketParams& p, const std::string& v) { p.est = parse_double(v); }},
        {"t_c", [](const MarketParams& p) { return std::to_string(p.t_c); },
         [](MarketParams& p, const std::string& v) { p.t_c = parse_int(v); }},
        {"delta_p", [](const MarketParams& p) { return format_double(p.delta_p); },
         [](MarketParams& p, const std::string& v) { p.delta_p = parse_double(v); }},
        {"p_f", [](const MarketParams& p) { return format_double(p.p_f); },
         [](MarketParams& p, const std::string& v) { p.p_f = parse_double(v); }},
        {"k_l", [](const MarketParams& p) { return format_double(p.k_l); },
         [](MarketParams& p, const std::string& v) { p.k_l = parse_double(v); }},
        {"m", [](const MarketParams& p) { return format_double(p.m); },
         [](MarketParams& p, const std::string& v) { p.m = parse_double(v); }},
        {"theta_h", [](const MarketParams& p) { return format_double(p.theta_h); },
         [](MarketParams& p, const std::string& v) { p.theta_h = parse_double(v); }},
        {"w_h", [](const MarketParams& p) { return format_double(p.w_h); },
         [](MarketParams& p, const std::string& v) { p.w_h = parse_double(v); }},
        {"pr_o", [](const MarketParams& p) { return format_double(p.pr_o); },
         [](MarketParams& p, const std::string& v) { p.pr_o = parse_double(v); }},
        {"t_day", [](const MarketParams& p) { return std::to_string(p.t_day); },
         [](MarketParams& p, const std::string& v) { p.t_day = parse_int(v); }},
        {"hft_enabled", [](const MarketParams& p) { return std::string(p.hft_enabled ? "true" : "false"); },
         [](MarketParams& p, const std::string& v) { p.hft_enabled = (v == "true" || v == "1"); }},
        {"hft_on_abstain", [](const MarketParams& p) { return std::string(p.hft_on_abstain ? "true" : "false"); },
         [](MarketParams& p, const std::string& v) { p.hft_on_abstain = (v == "true" || v == "1"); }},
        {"seed", [](const MarketParams& p) { return std::to_string(p.seed); },
         [](MarketParams& p, const std::string& v) { p.seed = parse_uint(v); }},
        {"lag", [](const MarketParams& p) { return std::to_string(p.lag); },
         [](MarketParams& p, const std::string& v) { p.lag = parse_int(v); }},
        {"vol_sample_interval", [](const MarketParams& p) { return std::to_string(p.vol_sample_interval); },
         [](MarketParams& p, const std::string& v) { p.vol_sample_interval = parse_int(v); }},
    };
    return fields;
}

}  // namespace detail

// Assign one field by its config-file name.  Throws on unknown names.
inline void set_param(MarketParams& params, const std::string& name, const std::string& value) {
    for (const auto& f : detail::param_fields()) {
        if (name == f.name) {
            f.set(params, value);
            return;
        }
    }
    throw std::invalid_argument("unknown parameter: '" + name + "'");
}

inline void set_param(MarketParams& params, const std::string& name, double value) {
    set_param(params, name, format_double(value));
}

// Flat key=value config, one pair per line, '#' starts a comment.
inline MarketParams read_params(std::istream& in, MarketParams base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        auto strip = [](std::string s) {
            const auto x = s.find_first_not_of(" \t");
            const auto y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        try {
            set_param(base, key, value);
        } catch (const std::invalid_argument& err) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + err.what());
        }
    }
    return base;
}

inline MarketParams read_params_file(const std::string& path, MarketParams base = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    try {
        return read_params(in, base);
    } catch (const std::invalid_argument& err) {
        throw std::invalid_argument(path + ": " + err.what());
    }
}

inline void write_params(const MarketParams& params, std::ostream& out) {
    for (const auto& f : detail::param_fields()) out << f.name << "=" << f.get(params) << "\n";
}

}  // namespace liqsim
