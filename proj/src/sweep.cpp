#include "plcisdf/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "plcisdf/analytic.hpp"
#include "plcisdf/rng.hpp"
#include "plcisdf/simulator.hpp"

namespace plcisdf::sweep {

namespace {

const qexp::MixtureFit& shared_fit() {
    static const qexp::MixtureFit fit = qexp::table1_fit();
    return fit;
}

std::string variable_name(SweepVariable v) {
    switch (v) {
    case SweepVariable::p_t_db:
        return "p_t_db";
    case SweepVariable::r_th:
        return "r_th";
    case SweepVariable::d_f:
        return "d_f";
    case SweepVariable::d_sd:
        return "d_sd";
    case SweepVariable::p_l:
        return "p_l";
    }
    return "?";
}

SweepVariable variable_from_name(const std::string& s, std::vector<std::string>& problems) {
    if (s == "p_t_db")
        return SweepVariable::p_t_db;
    if (s == "r_th")
        return SweepVariable::r_th;
    if (s == "d_f")
        return SweepVariable::d_f;
    if (s == "d_sd" || s == "d_sd_km")
        return SweepVariable::d_sd;
    if (s == "p_l" || s == "p_l_db_per_km")
        return SweepVariable::p_l;
    problems.push_back("sweep.variable: unknown variable '" + s + "'");
    return SweepVariable::p_t_db;
}

void apply_sweep_value(model::SystemConfig& cfg, SweepVariable var, double v) {
    switch (var) {
    case SweepVariable::p_t_db:
        cfg.p_t_db = v;
        break;
    case SweepVariable::r_th:
        cfg.r_th = v;
        break;
    case SweepVariable::d_f:
        cfg.d_f = v;
        break;
    case SweepVariable::d_sd:
        cfg.d_sd_km = v;
        break;
    case SweepVariable::p_l:
        cfg.p_l_db_per_km = v;
        break;
    }
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t row) {
    return detail::mix64(detail::mix64(seed) + 0x9e3779b97f4a7c15ULL * (row + 1));
}

SweepRow eval_row(const SweepSpec& spec, std::size_t idx) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.sweep_value = spec.grid[idx];
    try {
        model::SystemConfig cfg = spec.base;
        apply_sweep_value(cfg, spec.variable, row.sweep_value);
        const model::SystemDerived sys = model::derive(cfg);
        row.gamma_sd_th = sys.thr.gamma_sd;
        row.gamma_sr_th = sys.thr.gamma_sr_rd;

        const bool want_literal = spec.ber_mode != BerModeChoice::coherent;
        const bool want_coherent = spec.ber_mode != BerModeChoice::paper_literal;

        if (spec.engines.analytic) {
            row.outage_analytic = analytic::outage_probability(sys);
            row.usage_analytic = analytic::relay_usage(sys);
            if (want_literal)
                row.ber_literal = analytic::average_ber(sys, shared_fit(),
                                                        analytic::BerMode::paper_literal);
            if (want_coherent)
                row.ber_coherent =
                    analytic::average_ber(sys, shared_fit(), analytic::BerMode::coherent);
        }
        if (spec.engines.quadrature) {
            if (want_literal)
                row.ber_quad_literal =
                    analytic::average_ber_exact(sys, analytic::BerMode::paper_literal);
            if (want_coherent)
                row.ber_quad_coherent =
                    analytic::average_ber_exact(sys, analytic::BerMode::coherent);
            // the pinned CSV columns carry the quadrature values when the
            // fit-based engine is off
            if (!spec.engines.analytic) {
                row.outage_analytic = analytic::outage_probability(sys);
                row.usage_analytic = analytic::relay_usage(sys);
                row.ber_literal = row.ber_quad_literal;
                row.ber_coherent = row.ber_quad_coherent;
            }
        }
        if (spec.engines.montecarlo) {
            const sim::McResult mc =
                sim::estimate_all(sys, spec.n_trials, row_seed(spec.seed, idx), 1);
            row.outage_mc = {mc.outage.mean, mc.outage.std_error};
            row.usage_mc = {mc.relay_usage.mean, mc.relay_usage.std_error};
            row.ber_mc = {mc.ber_semianalytic.mean, mc.ber_semianalytic.std_error};
            row.slots_mc = mc.slots.mean;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers) {
    if (spec.grid.empty())
        throw std::invalid_argument("run_sweep: empty grid");
    if (!spec.engines.any())
        throw std::invalid_argument("run_sweep: no engine selected");

    std::vector<SweepRow> rows(spec.grid.size());
    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i] = eval_row(spec, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= rows.size())
                        return;
                    rows[i] = eval_row(spec, i);
                }
            });
        }
        for (auto& th : pool)
            th.join();
    }
    return rows;
}

// ---------------------------------------------------------------------------
// configuration parsing
// ---------------------------------------------------------------------------

namespace {

double require_number(const nlohmann::json& j, const char* key, double fallback, bool& present,
                      std::vector<std::string>& problems) {
    present = j.contains(key);
    if (!present)
        return fallback;
    if (!j.at(key).is_number()) {
        problems.push_back(std::string(key) + ": must be a number");
        return fallback;
    }
    return j.at(key).get<double>();
}

const std::set<std::string> kKnownKeys = {
    "p_t_db", "power_split", "d_sd_km",  "d_f",      "p_l_db_per_km", "p_l",
    "r_th",   "sigma_h_db",  "p",        "eta",      "sigma_w2",      "sweep",
    "engines", "ber_mode",   "n_trials", "seed",     "output_path"};

} // namespace

SweepSpec parse_config_json(const nlohmann::json& j) {
    std::vector<std::string> problems;
    if (!j.is_object())
        throw ConfigError("config: top-level JSON object expected");
    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key))
            problems.push_back(key + ": unknown field");

    SweepSpec spec;
    bool present = false;

    spec.base.p_t_db = require_number(j, "p_t_db", 48.0, present, problems);

    if (j.contains("power_split")) {
        const std::string s = j.at("power_split").is_string() ? j.at("power_split").get<std::string>() : "";
        if (s == "half")
            spec.base.power_split = model::PowerSplit::half;
        else if (s == "full")
            spec.base.power_split = model::PowerSplit::full;
        else
            problems.push_back("power_split: must be \"half\" or \"full\"");
    }

    spec.base.d_sd_km = require_number(j, "d_sd_km", 0.0, present, problems);
    if (!present)
        problems.push_back("d_sd_km: required");
    else if (!(spec.base.d_sd_km > 0.0))
        problems.push_back("d_sd_km: must be > 0");

    spec.base.d_f = require_number(j, "d_f", 0.5, present, problems);
    if (present && !(spec.base.d_f > 0.0 && spec.base.d_f < 1.0))
        problems.push_back("d_f: must be in (0,1)");

    bool pl_present = false;
    spec.base.p_l_db_per_km = require_number(j, "p_l_db_per_km", 0.0, pl_present, problems);
    if (!pl_present)
        spec.base.p_l_db_per_km = require_number(j, "p_l", 0.0, pl_present, problems);
    if (!pl_present)
        problems.push_back("p_l_db_per_km: required");
    else if (!(spec.base.p_l_db_per_km >= 0.0))
        problems.push_back("p_l_db_per_km: must be >= 0");

    spec.base.r_th = require_number(j, "r_th", 0.0, present, problems);
    if (!present)
        problems.push_back("r_th: required");
    else if (!(spec.base.r_th > 0.0))
        problems.push_back("r_th: must be > 0");

    spec.base.sigma_h_db = require_number(j, "sigma_h_db", 3.0, present, problems);
    if (present && !(spec.base.sigma_h_db >= 0.0))
        problems.push_back("sigma_h_db: must be >= 0");

    const double p = require_number(j, "p", 0.1, present, problems);
    if (present && !(p >= 0.0 && p <= 1.0))
        problems.push_back("p: must be in [0,1]");
    const double eta = require_number(j, "eta", 10.0, present, problems);
    if (present && !(eta >= 0.0))
        problems.push_back("eta: must be >= 0");
    const double sigma_w2 = require_number(j, "sigma_w2", 1.0, present, problems);
    if (present && !(sigma_w2 > 0.0))
        problems.push_back("sigma_w2: must be > 0");
    if (p >= 0.0 && p <= 1.0 && eta >= 0.0 && sigma_w2 > 0.0)
        spec.base.noise = model::NoiseModel(p, eta, sigma_w2);

    if (!j.contains("sweep") || !j.at("sweep").is_object()) {
        problems.push_back("sweep: required object");
    } else {
        const auto& sw = j.at("sweep");
        if (!sw.contains("variable") || !sw.at("variable").is_string())
            problems.push_back("sweep.variable: required string");
        else
            spec.variable = variable_from_name(sw.at("variable").get<std::string>(), problems);
        if (sw.contains("grid")) {
            if (!sw.at("grid").is_array() || sw.at("grid").empty()) {
                problems.push_back("sweep.grid: must be a nonempty array");
            } else {
                for (const auto& v : sw.at("grid"))
                    spec.grid.push_back(v.get<double>());
            }
        } else if (sw.contains("from") && sw.contains("to")) {
            const double from = sw.at("from").get<double>();
            const double to = sw.at("to").get<double>();
            const double step = sw.value("step", 1.0);
            if (!(step > 0.0) || to < from) {
                problems.push_back("sweep: need from <= to and step > 0");
            } else {
                const int n = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
                for (int i = 0; i < n; ++i)
                    spec.grid.push_back(from + step * i);
            }
        } else {
            problems.push_back("sweep: needs either grid or from/to[/step]");
        }
        for (std::size_t i = 1; i < spec.grid.size(); ++i)
            if (!(spec.grid[i - 1] < spec.grid[i])) {
                problems.push_back("sweep.grid: must be strictly increasing");
                break;
            }
    }

    if (j.contains("engines")) {
        if (!j.at("engines").is_array()) {
            problems.push_back("engines: must be an array");
        } else {
            spec.engines = {false, false, false};
            for (const auto& e : j.at("engines")) {
                const std::string s = e.is_string() ? e.get<std::string>() : "";
                if (s == "analytic" || s == "a")
                    spec.engines.analytic = true;
                else if (s == "montecarlo" || s == "mc" || s == "m")
                    spec.engines.montecarlo = true;
                else if (s == "quadrature" || s == "q")
                    spec.engines.quadrature = true;
                else
                    problems.push_back("engines: unknown engine '" + s + "'");
            }
            if (!spec.engines.any())
                problems.push_back("engines: at least one engine required");
        }
    }

    if (j.contains("ber_mode")) {
        const std::string s = j.at("ber_mode").is_string() ? j.at("ber_mode").get<std::string>() : "";
        if (s == "paper_literal")
            spec.ber_mode = BerModeChoice::paper_literal;
        else if (s == "coherent")
            spec.ber_mode = BerModeChoice::coherent;
        else if (s == "both")
            spec.ber_mode = BerModeChoice::both;
        else
            problems.push_back("ber_mode: must be paper_literal, coherent, or both");
    }

    if (j.contains("n_trials")) {
        if (!j.at("n_trials").is_number_unsigned() && !j.at("n_trials").is_number_integer())
            problems.push_back("n_trials: must be a positive integer");
        else if (j.at("n_trials").get<std::int64_t>() < 1)
            problems.push_back("n_trials: must be >= 1");
        else
            spec.n_trials = j.at("n_trials").get<std::uint64_t>();
    }
    if (j.contains("seed"))
        spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_path"))
        spec.output_path = j.at("output_path").get<std::string>();

    if (!problems.empty()) {
        std::string msg = "invalid config:";
        for (const auto& s : problems)
            msg += "\n  " + s;
        throw ConfigError(msg);
    }
    return spec;
}

SweepSpec parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config_json(j);
}

nlohmann::json normalized_config(const SweepSpec& spec) {
    nlohmann::json engines = nlohmann::json::array();
    if (spec.engines.analytic)
        engines.push_back("analytic");
    if (spec.engines.montecarlo)
        engines.push_back("montecarlo");
    if (spec.engines.quadrature)
        engines.push_back("quadrature");
    const char* mode = spec.ber_mode == BerModeChoice::paper_literal ? "paper_literal"
                       : spec.ber_mode == BerModeChoice::coherent    ? "coherent"
                                                                     : "both";
    return {{"p_t_db", spec.base.p_t_db},
            {"power_split", spec.base.power_split == model::PowerSplit::half ? "half" : "full"},
            {"d_sd_km", spec.base.d_sd_km},
            {"d_f", spec.base.d_f},
            {"p_l_db_per_km", spec.base.p_l_db_per_km},
            {"r_th", spec.base.r_th},
            {"sigma_h_db", spec.base.sigma_h_db},
            {"p", spec.base.noise.p},
            {"eta", spec.base.noise.eta},
            {"sigma_w2", spec.base.noise.sigma_w2},
            {"sweep", {{"variable", variable_name(spec.variable)}, {"grid", spec.grid}}},
            {"engines", engines},
            {"ber_mode", mode},
            {"n_trials", spec.n_trials},
            {"seed", spec.seed},
            {"output_path", spec.output_path}};
}

std::string config_hash(const SweepSpec& spec) {
    const std::string s = normalized_config(spec).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

namespace {

std::string fmt10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << kCsvColumns << "\n";
    for (const auto& r : rows) {
        os << fmt10(r.sweep_value) << ',' << fmt10(r.gamma_sd_th) << ',' << fmt10(r.gamma_sr_th)
           << ',' << fmt10(r.outage_analytic) << ',' << fmt10(r.outage_mc.mean) << ','
           << fmt10(r.outage_mc.se) << ',' << fmt10(r.usage_analytic) << ','
           << fmt10(r.usage_mc.mean) << ',' << fmt10(r.usage_mc.se) << ',' << fmt10(r.ber_literal)
           << ',' << fmt10(r.ber_coherent) << ',' << fmt10(r.ber_mc.mean) << ','
           << fmt10(r.ber_mc.se) << ',' << fmt10(r.slots_mc) << "\n";
    }
}

void emit_json(const std::vector<SweepRow>& rows, std::ostream& os) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"sweep_value", r.sweep_value},
                       {"gamma_sd_th", r.gamma_sd_th},
                       {"gamma_sr_th", r.gamma_sr_th},
                       {"outage_analytic", r.outage_analytic},
                       {"usage_analytic", r.usage_analytic},
                       {"ber_literal", r.ber_literal},
                       {"ber_coherent", r.ber_coherent},
                       {"ber_quad_literal", r.ber_quad_literal},
                       {"ber_quad_coherent", r.ber_quad_coherent},
                       {"outage_mc", {{"mean", r.outage_mc.mean}, {"se", r.outage_mc.se}}},
                       {"usage_mc", {{"mean", r.usage_mc.mean}, {"se", r.usage_mc.se}}},
                       {"ber_mc", {{"mean", r.ber_mc.mean}, {"se", r.ber_mc.se}}},
                       {"slots_mc", r.slots_mc},
                       {"elapsed_ms", r.elapsed_ms},
                       {"error", r.error}});
    }
    os << arr.dump(2) << "\n";
}

void emit(const std::vector<SweepRow>& rows, Format format, const std::string& path) {
    if (rows.empty())
        throw std::invalid_argument("emit: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("emit: cannot write " + path);
    if (format == Format::csv)
        emit_csv(rows, out);
    else
        emit_json(rows, out);
    if (!out.good())
        throw std::runtime_error("emit: write failed for " + path);
}

std::vector<SweepRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_csv: cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvColumns)
        throw std::runtime_error("read_csv: unexpected header in " + path);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            vals.push_back(std::strtod(cell.c_str(), nullptr));
        if (vals.size() != 14)
            throw std::runtime_error("read_csv: bad row in " + path);
        SweepRow r;
        r.sweep_value = vals[0];
        r.gamma_sd_th = vals[1];
        r.gamma_sr_th = vals[2];
        r.outage_analytic = vals[3];
        r.outage_mc = {vals[4], vals[5]};
        r.usage_analytic = vals[6];
        r.usage_mc = {vals[7], vals[8]};
        r.ber_literal = vals[9];
        r.ber_coherent = vals[10];
        r.ber_mc = {vals[11], vals[12]};
        r.slots_mc = vals[13];
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

namespace {

std::vector<double> uniform_grid(double from, double to, double step) {
    std::vector<double> g;
    const int n = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i)
        g.push_back(from + step * i);
    return g;
}

model::SystemConfig preset_base() {
    model::SystemConfig cfg;
    cfg.power_split = model::PowerSplit::full;
    cfg.noise = model::NoiseModel(0.1, 10.0, 0.5); // total noise power N0 = 1
    cfg.sigma_h_db = 3.0;
    cfg.d_f = 0.5;
    return cfg;
}

std::string trimmed(double v) {
    std::string s = fmt10(v);
    return s;
}

} // namespace

Preset make_preset(const std::string& name) {
    Preset preset;
    preset.name = name;
    std::size_t curve_index = 0;
    const auto add = [&](const std::string& label, SweepSpec spec) {
        spec.seed = 1 + curve_index++;
        preset.curves.push_back({label, std::move(spec)});
    };

    if (name == "fig2") {
        for (double r_th : {1.0, 3.0})
            for (double d_sd : {0.4, 0.8}) {
                SweepSpec spec;
                spec.base = preset_base();
                spec.base.p_l_db_per_km = 60.0;
                spec.base.r_th = r_th;
                spec.base.d_sd_km = d_sd;
                spec.variable = SweepVariable::p_t_db;
                spec.grid = uniform_grid(20.0, 80.0, 2.0);
                spec.engines = {true, true, false};
                spec.output_path = "fig2.csv";
                add("rth" + trimmed(r_th) + "_dsd" + trimmed(d_sd), std::move(spec));
            }
    } else if (name == "fig3") {
        for (double r_th : {1.0, 3.0})
            for (double p_l : {60.0, 80.0}) {
                SweepSpec spec;
                spec.base = preset_base();
                spec.base.d_sd_km = 0.4;
                spec.base.r_th = r_th;
                spec.base.p_l_db_per_km = p_l;
                spec.variable = SweepVariable::p_t_db;
                spec.grid = uniform_grid(20.0, 70.0, 5.0);
                spec.engines = {true, true, true};
                spec.output_path = "fig3.csv";
                add("rth" + trimmed(r_th) + "_pl" + trimmed(p_l), std::move(spec));
            }
    } else if (name == "fig4") {
        for (double r_th : {1.0, 3.0})
            for (double d_f : {0.25, 0.5, 0.75}) {
                SweepSpec spec;
                spec.base = preset_base();
                spec.base.d_sd_km = 0.4;
                spec.base.p_l_db_per_km = 60.0;
                spec.base.r_th = r_th;
                spec.base.d_f = d_f;
                spec.variable = SweepVariable::p_t_db;
                spec.grid = uniform_grid(20.0, 80.0, 1.0);
                spec.engines = {true, false, false};
                spec.output_path = "fig4.csv";
                add("rth" + trimmed(r_th) + "_df" + trimmed(d_f), std::move(spec));
            }
    } else {
        throw std::invalid_argument("unknown preset: " + name +
                                    " (expected fig2, fig3, or fig4)");
    }
    return preset;
}

RunArtifacts run_to_files(const std::vector<PresetCurve>& curves, Format format,
                          const std::string& out_path, int workers,
                          const std::string& preset_name) {
    if (curves.empty())
        throw std::invalid_argument("run_to_files: no curves");

    const std::string ext = format == Format::csv ? ".csv" : ".json";
    std::string base = out_path;
    if (const auto dot = base.rfind('.'); dot != std::string::npos && base.find('/', dot) == std::string::npos)
        base = base.substr(0, dot);

    RunArtifacts artifacts;
    nlohmann::json manifest_curves = nlohmann::json::array();
    for (const auto& curve : curves) {
        const std::string path =
            curves.size() == 1 ? base + ext : base + "__" + curve.label + ext;
        const auto rows = run_sweep(curve.spec, workers);
        emit(rows, format, path);
        for (const auto& r : rows)
            if (!r.error.empty())
                artifacts.any_row_failed = true;
        artifacts.outputs.push_back(path);
        manifest_curves.push_back({{"label", curve.label},
                                   {"output", path},
                                   {"config_hash", config_hash(curve.spec)},
                                   {"config", normalized_config(curve.spec)}});
    }

    nlohmann::json manifest = {{"tool", kToolName},
                               {"version", kToolVersion},
                               {"preset", preset_name},
                               {"format", format == Format::csv ? "csv" : "json"},
                               {"workers", workers},
                               {"csv_columns", kCsvColumns},
                               {"curves", manifest_curves}};
    artifacts.manifest_path = base + ".manifest.json";
    std::ofstream mf(artifacts.manifest_path, std::ios::binary);
    if (!mf)
        throw std::runtime_error("cannot write manifest: " + artifacts.manifest_path);
    mf << manifest.dump(2) << "\n";
    return artifacts;
}

} // namespace plcisdf::sweep
