#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include "liqsim/sweep.hpp"

using namespace liqsim;

namespace {

MarketParams tiny_base(int64_t t_end = 2000) {
    MarketParams p;
    p.t_end = t_end;
    p.n = 20;
    p.tau_max = 100;
    p.t_c = 300;
    p.t_day = 1000;
    return p;
}

SweepSpec tiny_spec() {
    SweepSpec s;
    s.param = "pr_o";
    s.values = {0.2, 1.0};
    s.runs = 2;
    s.base = tiny_base();
    s.master_seed = 99;
    return s;
}

}  // namespace

TEST_CASE("sweep lays out cells value-major with the maker first") {
    const auto report = run_sweep(tiny_spec());
    REQUIRE(report.cells.size() == 4);
    CHECK(report.cells[0].value == 0.2);
    CHECK(report.cells[0].hft);
    CHECK(report.cells[1].value == 0.2);
    CHECK(!report.cells[1].hft);
    CHECK(report.cells[2].value == 1.0);
    CHECK(report.cells[2].hft);
    CHECK(!report.cells[3].hft);
    for (const auto& cell : report.cells) {
        CHECK(cell.param == "pr_o");
        CHECK(cell.runs.size() == 2);
        CHECK(cell.seeds.size() == 2);
    }
}

TEST_CASE("maker and plain variants share run seeds") {
    const auto report = run_sweep(tiny_spec());
    CHECK(report.cells[0].seeds == report.cells[1].seeds);
    CHECK(report.cells[2].seeds == report.cells[3].seeds);
    CHECK(report.cells[0].seeds != report.cells[2].seeds);
    CHECK(report.cells[0].seeds[0] == sweep_run_seed(99, 0, 0));
    CHECK(report.cells[2].seeds[1] == sweep_run_seed(99, 1, 1));
}

TEST_CASE("sweep output repeats byte for byte across worker counts") {
    const auto a = sweep_csv(run_sweep(tiny_spec(), 1));
    const auto b = sweep_csv(run_sweep(tiny_spec(), 1));
    const auto c = sweep_csv(run_sweep(tiny_spec(), 3));
    REQUIRE(a == b);
    REQUIRE(a == c);
    // header plus one row per cell
    CHECK(std::count(a.begin(), a.end(), '\n') == 5);
    CHECK(a.rfind("param,value,hft,runs,volume,", 0) == 0);
    CHECK(a.find("\npr_o,0.2,1,2,") != std::string::npos);
    CHECK(a.find("\npr_o,1,0,2,") != std::string::npos);
}

TEST_CASE("manifest captures a sweep exactly") {
    auto spec = tiny_spec();
    spec.base.sigma_eps = 0.045;
    spec.base.seed = 7;
    spec.run_with = false;
    const auto text = manifest_json(spec);
    const auto loaded = spec_from_manifest(text);
    CHECK(loaded.param == spec.param);
    CHECK(loaded.values == spec.values);
    CHECK(loaded.runs == spec.runs);
    CHECK(loaded.master_seed == spec.master_seed);
    CHECK(loaded.run_with == spec.run_with);
    CHECK(loaded.run_without == spec.run_without);
    CHECK(loaded.base.sigma_eps == spec.base.sigma_eps);
    CHECK(loaded.base.seed == spec.base.seed);
    std::ostringstream from_loaded, from_spec;
    write_params(loaded.base, from_loaded);
    write_params(spec.base, from_spec);
    CHECK(from_loaded.str() == from_spec.str());
    REQUIRE(sweep_csv(run_sweep(loaded)) == sweep_csv(run_sweep(spec)));
}

TEST_CASE("manifest parsing rejects other formats") {
    CHECK_THROWS_AS(spec_from_manifest("{\"format\": 2}"), std::invalid_argument);
    CHECK_THROWS(spec_from_manifest("not json"));
}

TEST_CASE("preset value grids") {
    CHECK(preset_values("delta_p") == std::vector<double>{0.01, 0.1, 1.0, 10.0, 100.0});
    CHECK(preset_values("pr_o").size() == 5);
    CHECK(preset_values("est").front() == 0.003);
    CHECK_THROWS_AS(preset_values("p_f"), std::invalid_argument);
}

TEST_CASE("sweep rejects unusable specs") {
    auto spec = tiny_spec();
    spec.param = "no_such_knob";
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);

    spec = tiny_spec();
    spec.values.clear();
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);

    spec = tiny_spec();
    spec.runs = 0;
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);

    spec = tiny_spec();
    spec.run_with = false;
    spec.run_without = false;
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);

    spec = tiny_spec();
    spec.base.t_day = 700;  // does not tile t_end
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);

    spec = tiny_spec();
    spec.values = {2.0};  // pr_o is a probability
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
}

TEST_CASE("volume grows with the horizon while per-step metrics hold") {
    SweepSpec spec = tiny_spec();
    spec.param = "pr_o";
    spec.values = {1.0};
    spec.runs = 3;
    spec.run_with = false;
    auto longer = spec;
    longer.base.t_end = 4000;

    const auto s1 = summarize_cell(run_sweep(spec).cells[0]);
    const auto s2 = summarize_cell(run_sweep(longer).cells[0]);
    REQUIRE(s1.volume.mean().has_value());
    REQUIRE(s2.volume.mean().has_value());
    const double growth = *s2.volume.mean() / *s1.volume.mean();
    CHECK(growth > 1.5);
    CHECK(growth < 2.5);
    REQUIRE(s1.tightness.mean().has_value());
    REQUIRE(s2.tightness.mean().has_value());
    const double tightness_shift = *s2.tightness.mean() / *s1.tightness.mean();
    CHECK(tightness_shift > 0.5);
    CHECK(tightness_shift < 2.0);
    const double depth_shift = *s2.depth.mean() / *s1.depth.mean();
    CHECK(depth_shift > 0.5);
    CHECK(depth_shift < 2.0);
}

TEST_CASE("stylized fact validation aggregates across runs") {
    const auto summary = validate_stylized(tiny_base(), 2, 5, 2);
    REQUIRE(summary.mean_kurtosis.has_value());
    for (const auto& ac : summary.mean_sq_autocorr) REQUIRE(ac.has_value());
    // the pass flag is only meaningful at full scale; here it just must not crash
    CHECK((summary.pass || !summary.pass));
    CHECK_THROWS_AS(validate_stylized(tiny_base(), 0, 5), std::invalid_argument);
}
