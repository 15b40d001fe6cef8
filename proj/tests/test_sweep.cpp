#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "plcisdf/sweep.hpp"

using namespace plcisdf;
using namespace plcisdf::sweep;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/plcisdf_test_") + name;
}

} // namespace

TEST_CASE("minimal config fills the documented defaults") {
    const auto j = nlohmann::json::parse(R"({
        "d_sd_km": 0.4, "p_l": 60, "r_th": 3,
        "sweep": {"variable": "p_t_db", "from": 20, "to": 80}
    })");
    const SweepSpec spec = parse_config_json(j);
    CHECK(spec.base.d_sd_km == doctest::Approx(0.4));
    CHECK(spec.base.p_l_db_per_km == doctest::Approx(60.0));
    CHECK(spec.base.r_th == doctest::Approx(3.0));
    CHECK(spec.base.noise.sigma_w2 == doctest::Approx(1.0));
    CHECK(spec.base.noise.p == doctest::Approx(0.1));
    CHECK(spec.base.noise.eta == doctest::Approx(10.0));
    CHECK(spec.base.sigma_h_db == doctest::Approx(3.0));
    CHECK(spec.base.d_f == doctest::Approx(0.5));
    CHECK(spec.base.power_split == model::PowerSplit::half);
    CHECK(spec.grid.size() == 61);
    CHECK(spec.grid.front() == doctest::Approx(20.0));
    CHECK(spec.grid.back() == doctest::Approx(80.0));
    CHECK(spec.engines.analytic);
    CHECK(spec.engines.montecarlo);
    CHECK_FALSE(spec.engines.quadrature);
    CHECK(spec.ber_mode == BerModeChoice::both);
    CHECK(spec.n_trials == 1000000);
    CHECK(spec.seed == 1);
}

TEST_CASE("config validation reports field paths") {
    auto j = nlohmann::json::parse(R"({
        "d_sd_km": 0.4, "p_l": 60, "r_th": 3, "d_f": 1.2,
        "sweep": {"variable": "p_t_db", "from": 20, "to": 30}
    })");
    try {
        (void)parse_config_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("d_f") != std::string::npos);
    }

    j["d_f"] = 0.5;
    j["typo_field"] = 1;
    CHECK_THROWS_AS((void)parse_config_json(j), ConfigError);
    j.erase("typo_field");
    j["p"] = 1.5;
    CHECK_THROWS_AS((void)parse_config_json(j), ConfigError);
    j["p"] = 0.1;
    j["sweep"] = {{"variable", "p_t_db"}, {"grid", nlohmann::json::array({30.0, 20.0})}};
    CHECK_THROWS_AS((void)parse_config_json(j), ConfigError);
    j["sweep"] = {{"variable", "p_t_db"}, {"grid", nlohmann::json::array()}};
    CHECK_THROWS_AS((void)parse_config_json(j), ConfigError);
    j.erase("sweep");
    CHECK_THROWS_AS((void)parse_config_json(j), ConfigError);
}

TEST_CASE("normalized config round-trips to an equal spec") {
    const auto j = nlohmann::json::parse(R"({
        "d_sd_km": 0.8, "p_l_db_per_km": 80, "r_th": 1.5, "p_t_db": 50,
        "power_split": "full", "sigma_w2": 0.5, "seed": 9, "n_trials": 5000,
        "engines": ["a", "q"], "ber_mode": "coherent",
        "sweep": {"variable": "d_f", "grid": [0.25, 0.5, 0.75]},
        "output_path": "out.csv"
    })");
    const SweepSpec spec = parse_config_json(j);
    const SweepSpec back = parse_config_json(normalized_config(spec));
    CHECK(back == spec);
    CHECK(config_hash(back) == config_hash(spec));
}

TEST_CASE("single-point sweep produces one row") {
    SweepSpec spec;
    spec.base.d_sd_km = 0.4;
    spec.base.p_l_db_per_km = 60.0;
    spec.base.r_th = 1.0;
    spec.variable = SweepVariable::p_t_db;
    spec.grid = {40.0};
    spec.engines = {true, false, false};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].error.empty());
    CHECK(rows[0].sweep_value == doctest::Approx(40.0));
    CHECK(rows[0].outage_analytic >= 0.0);
    CHECK(rows[0].outage_analytic <= 1.0);
    CHECK(rows[0].usage_analytic >= 0.0);
    CHECK(rows[0].usage_analytic <= 1.0);
    CHECK(rows[0].gamma_sr_th / rows[0].gamma_sd_th == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::isnan(rows[0].outage_mc.mean)); // engine not selected
}

TEST_CASE("per-row failures are recorded and the sweep continues") {
    SweepSpec spec;
    spec.base.d_sd_km = 0.4;
    spec.base.p_l_db_per_km = 60.0;
    spec.base.r_th = 1.0;
    spec.variable = SweepVariable::d_f;
    spec.grid = {0.5, 1.5}; // second value is out of range for the model
    spec.engines = {true, false, false};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].error.empty());
    CHECK_FALSE(rows[1].error.empty());
    CHECK(std::isnan(rows[1].outage_analytic));
}

TEST_CASE("CSV emission and the bundled reader round-trip") {
    SweepSpec spec;
    spec.base.d_sd_km = 0.4;
    spec.base.p_l_db_per_km = 60.0;
    spec.base.r_th = 1.0;
    spec.variable = SweepVariable::p_t_db;
    spec.grid = {35.0, 40.0, 45.0};
    spec.engines = {true, true, false};
    spec.n_trials = 20000;
    spec.seed = 5;
    const auto rows = run_sweep(spec, 2);
    REQUIRE(rows.size() == 3);

    const std::string path = temp_path("roundtrip.csv");
    emit(rows, Format::csv, path);
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4); // header + 3 rows
    CHECK(text.rfind(kCsvColumns, 0) == 0);

    const auto back = read_csv(path);
    std::ostringstream re;
    emit_csv(back, re);
    CHECK(re.str() == text);

    CHECK_THROWS_AS(emit({}, Format::csv, path), std::invalid_argument);
    CHECK_THROWS_AS(emit(rows, Format::csv, "/nonexistent-dir/x.csv"), std::runtime_error);

    // probabilities and standard errors are well-formed
    for (const auto& r : back) {
        for (double v : {r.outage_analytic, r.usage_analytic, r.outage_mc.mean,
                         r.usage_mc.mean, r.ber_mc.mean}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(r.outage_mc.se >= 0.0);
        CHECK(r.ber_mc.se >= 0.0);
    }

    const std::string jpath = temp_path("rows.json");
    emit(rows, Format::json, jpath);
    const auto parsed = nlohmann::json::parse(slurp(jpath));
    CHECK(parsed.is_array());
    CHECK(parsed.size() == 3);
    CHECK(parsed[0].contains("ber_coherent"));
    CHECK(parsed[0].contains("elapsed_ms"));
}

TEST_CASE("presets encode the figure parameters") {
    const Preset fig2 = make_preset("fig2");
    REQUIRE(fig2.curves.size() == 4);
    for (const auto& c : fig2.curves) {
        CHECK(c.spec.base.sigma_h_db == doctest::Approx(3.0));
        CHECK(c.spec.base.noise.p == doctest::Approx(0.1));
        CHECK(c.spec.base.noise.eta == doctest::Approx(10.0));
        CHECK(c.spec.base.p_l_db_per_km == doctest::Approx(60.0));
        CHECK(c.spec.base.d_f == doctest::Approx(0.5));
        CHECK((c.spec.base.r_th == 1.0 || c.spec.base.r_th == 3.0));
        CHECK((c.spec.base.d_sd_km == 0.4 || c.spec.base.d_sd_km == 0.8));
        CHECK(c.spec.engines.montecarlo);
    }

    const Preset fig3 = make_preset("fig3");
    REQUIRE(fig3.curves.size() == 4);
    for (const auto& c : fig3.curves) {
        CHECK(c.spec.base.d_sd_km == doctest::Approx(0.4));
        CHECK((c.spec.base.p_l_db_per_km == 60.0 || c.spec.base.p_l_db_per_km == 80.0));
        CHECK(c.spec.engines.quadrature);
    }

    const Preset fig4 = make_preset("fig4");
    REQUIRE(fig4.curves.size() == 6);
    for (const auto& c : fig4.curves) {
        CHECK(c.spec.base.d_sd_km == doctest::Approx(0.4));
        CHECK(c.spec.base.p_l_db_per_km == doctest::Approx(60.0));
        CHECK((c.spec.base.d_f == 0.25 || c.spec.base.d_f == 0.5 || c.spec.base.d_f == 0.75));
    }

    CHECK_THROWS_AS((void)make_preset("fig9"), std::invalid_argument);
}

TEST_CASE("fixed seed reproduces byte-identical output") {
    Preset preset = make_preset("fig2");
    // downsized for test runtime; determinism is what is under test
    for (auto& c : preset.curves) {
        c.spec.n_trials = 2000;
        c.spec.grid = {30.0, 45.0, 60.0};
    }

    const auto arts1 = run_to_files(preset.curves, Format::csv, temp_path("det1.csv"), 1, "fig2");
    const auto arts2 = run_to_files(preset.curves, Format::csv, temp_path("det2.csv"), 1, "fig2");
    const auto arts3 = run_to_files(preset.curves, Format::csv, temp_path("det3.csv"), 2, "fig2");
    REQUIRE(arts1.outputs.size() == 4);
    for (std::size_t i = 0; i < arts1.outputs.size(); ++i) {
        CHECK(slurp(arts1.outputs[i]) == slurp(arts2.outputs[i]));
        CHECK(slurp(arts1.outputs[i]) == slurp(arts3.outputs[i])); // worker count immaterial
    }

    const auto manifest = nlohmann::json::parse(slurp(arts1.manifest_path));
    CHECK(manifest.at("preset") == "fig2");
    CHECK(manifest.at("curves").size() == 4);
    CHECK(manifest.at("curves")[0].contains("config_hash"));
    CHECK(manifest.at("curves")[0].contains("config"));
}
