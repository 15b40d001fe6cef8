#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcisdf/model.hpp"

namespace plcisdf::sweep {

inline constexpr const char* kToolName = "plcisdf";
inline constexpr const char* kToolVersion = "0.1.0";

enum class SweepVariable { p_t_db, r_th, d_f, d_sd, p_l };

struct EngineSet {
    bool analytic = true;
    bool montecarlo = true;
    bool quadrature = false;

    bool any() const { return analytic || montecarlo || quadrature; }
    bool operator==(const EngineSet&) const = default;
};

enum class BerModeChoice { paper_literal, coherent, both };

/// One sweep: a base configuration, the variable/grid to scan, the engines to
/// run, and output settings.
struct SweepSpec {
    model::SystemConfig base;
    SweepVariable variable = SweepVariable::p_t_db;
    std::vector<double> grid;
    EngineSet engines;
    BerModeChoice ber_mode = BerModeChoice::both;
    std::uint64_t n_trials = 1000000;
    std::uint64_t seed = 1;
    std::string output_path = "sweep_results.csv";

    bool operator==(const SweepSpec&) const = default;
};

struct McField {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
};

/// One grid point's results. Fields an engine did not produce stay NaN.
struct SweepRow {
    double sweep_value = 0.0;
    double gamma_sd_th = std::numeric_limits<double>::quiet_NaN();
    double gamma_sr_th = std::numeric_limits<double>::quiet_NaN();
    double outage_analytic = std::numeric_limits<double>::quiet_NaN();
    double usage_analytic = std::numeric_limits<double>::quiet_NaN();
    double ber_literal = std::numeric_limits<double>::quiet_NaN();
    double ber_coherent = std::numeric_limits<double>::quiet_NaN();
    double ber_quad_literal = std::numeric_limits<double>::quiet_NaN();
    double ber_quad_coherent = std::numeric_limits<double>::quiet_NaN();
    McField outage_mc;
    McField usage_mc;
    McField ber_mc; // semianalytic estimator
    double slots_mc = std::numeric_limits<double>::quiet_NaN();
    double elapsed_ms = 0.0;
    std::string error; // nonempty when an engine failed on this row
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses and validates a JSON sweep configuration; unset fields take the
/// documented defaults. Violations are reported with their field paths.
SweepSpec parse_config(const std::string& path);
SweepSpec parse_config_json(const nlohmann::json& j);

/// Canonical JSON form; parse_config_json(normalized_config(s)) == s.
nlohmann::json normalized_config(const SweepSpec& spec);

/// FNV-1a hash of the canonical config, as 16 hex digits.
std::string config_hash(const SweepSpec& spec);

/// Runs every grid point (rows execute concurrently across `workers`; output
/// order follows the grid). Per-row engine failures are recorded in the row
/// and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers = 1);

enum class Format { csv, json };

inline constexpr const char* kCsvColumns =
    "sweep_value,gamma_sd_th,gamma_sr_th,outage_analytic,outage_mc,outage_mc_se,"
    "usage_analytic,usage_mc,usage_mc_se,ber_literal,ber_coherent,ber_mc,ber_mc_se,slots_mc";

void emit(const std::vector<SweepRow>& rows, Format format, const std::string& path);
void emit_csv(const std::vector<SweepRow>& rows, std::ostream& os);
void emit_json(const std::vector<SweepRow>& rows, std::ostream& os);

/// Reads back a CSV produced by emit(); re-emitting the result reproduces the
/// file byte for byte.
std::vector<SweepRow> read_csv(const std::string& path);

struct PresetCurve {
    std::string label;
    SweepSpec spec;
};

struct Preset {
    std::string name;
    std::vector<PresetCurve> curves;
};

/// Named figure-reproduction presets: fig2 (outage vs total power), fig3
/// (average BER vs total power), fig4 (relay-usage fraction vs total power).
/// All encode sigma_h = 3 dB, p = 0.1, eta = 10 and the calibrated operating
/// point (full per-node budget, unit total noise power).
Preset make_preset(const std::string& name);

struct RunArtifacts {
    std::vector<std::string> outputs;
    std::string manifest_path;
    bool any_row_failed = false;
};

/// Runs a set of curves, emits one file per curve (multi-curve runs get a
/// "__<label>" suffix) plus a manifest sufficient to reproduce the outputs.
RunArtifacts run_to_files(const std::vector<PresetCurve>& curves, Format format,
                          const std::string& out_path, int workers,
                          const std::string& preset_name = "");

} // namespace plcisdf::sweep
