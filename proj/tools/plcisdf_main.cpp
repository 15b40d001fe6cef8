#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "plcisdf/sweep.hpp"

namespace {

int worker_count_from_env() {
    if (const char* env = std::getenv("PLCISDF_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

plcisdf::sweep::EngineSet parse_engines(const std::string& arg) {
    plcisdf::sweep::EngineSet engines{false, false, false};
    std::stringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "a" || tok == "analytic")
            engines.analytic = true;
        else if (tok == "m" || tok == "mc" || tok == "montecarlo")
            engines.montecarlo = true;
        else if (tok == "q" || tok == "quadrature")
            engines.quadrature = true;
        else
            throw CLI::ValidationError("--engines", "unknown engine '" + tok + "'");
    }
    if (!engines.any())
        throw CLI::ValidationError("--engines", "at least one engine required");
    return engines;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental selective decode-and-forward power-line link evaluator"};
    app.set_version_flag("--version",
                         std::string(plcisdf::sweep::kToolName) + " " +
                             plcisdf::sweep::kToolVersion);
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a sweep from a config file or a preset");
    std::string config_path;
    std::string preset_name;
    std::string engines_arg;
    std::string out_path;
    std::string format_arg = "csv";
    std::uint64_t trials = 0;
    std::int64_t seed = -1;
    bool strict = false;
    run->add_option("config", config_path, "sweep configuration (JSON)");
    run->add_option("--preset", preset_name, "figure preset: fig2, fig3, or fig4");
    run->add_option("--engines", engines_arg, "comma list: a|analytic, m|montecarlo, q|quadrature");
    run->add_option("--trials", trials, "Monte-Carlo trials per grid point");
    run->add_option("--seed", seed, "base seed");
    run->add_option("--out", out_path, "output path (base name for multi-curve presets)");
    run->add_option("--format", format_arg, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_flag("--strict", strict, "exit nonzero if any engine failed on any row");

    CLI11_PARSE(app, argc, argv);

    try {
        namespace sw = plcisdf::sweep;
        std::vector<sw::PresetCurve> curves;
        if (!preset_name.empty() && !config_path.empty()) {
            std::cerr << "error: give either a config file or --preset, not both\n";
            return 2;
        }
        if (!preset_name.empty()) {
            curves = sw::make_preset(preset_name).curves;
        } else if (!config_path.empty()) {
            sw::SweepSpec spec = sw::parse_config(config_path);
            curves.push_back({"sweep", std::move(spec)});
        } else {
            std::cerr << "error: a config file or --preset is required\n";
            return 2;
        }

        std::string out = out_path;
        if (out.empty())
            out = curves.front().spec.output_path;
        for (auto& curve : curves) {
            if (!engines_arg.empty())
                curve.spec.engines = parse_engines(engines_arg);
            if (trials > 0)
                curve.spec.n_trials = trials;
            if (seed >= 0)
                curve.spec.seed = static_cast<std::uint64_t>(seed) + (&curve - curves.data());
        }

        const sw::Format format = format_arg == "json" ? sw::Format::json : sw::Format::csv;
        const int workers = worker_count_from_env();
        const sw::RunArtifacts artifacts =
            sw::run_to_files(curves, format, out, workers, preset_name);

        for (const auto& f : artifacts.outputs)
            std::cout << "wrote " << f << "\n";
        std::cout << "wrote " << artifacts.manifest_path << "\n";
        if (artifacts.any_row_failed) {
            std::cerr << "warning: at least one row recorded an engine failure\n";
            if (strict)
                return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
