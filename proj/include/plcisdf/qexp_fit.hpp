#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

namespace plcisdf::qexp {

/// One term a * exp(-((t-b)/c)^2) of the Gaussian-mixture approximation.
struct GaussianTerm {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;

    bool operator==(const GaussianTerm&) const = default;
};

struct FitRegion {
    double lo = 0.0;
    double hi = 1.0;

    double span() const { return hi - lo; }
    bool operator==(const FitRegion&) const = default;
};

/// Calibration interval for approximating Q(exp(t)): spans the transition of
/// the target from ~0.5 down to ~3e-3 where the shipped constants keep their
/// advertised accuracy.
inline constexpr FitRegion kCalibrationRegion{-5.0, 1.0};
inline constexpr int kCalibrationGridSize = 1000;

/// M-term Gaussian-mixture approximation of t -> Q(exp(t)) with the region
/// and fit-quality metrics it was evaluated on.
struct MixtureFit {
    std::vector<GaussianTerm> terms;
    FitRegion region = kCalibrationRegion;
    double rmse = 0.0;
    double sse = 0.0;
    int n_grid = 0;

    bool operator==(const MixtureFit&) const = default;
};

/// The target function Q(exp(t)); decreasing, 0.5 at t -> -inf.
double qexp_target(double t);

/// Mixture evaluation; finite for all real t (narrow-term exponents are
/// clamped so they underflow to zero instead of producing NaN).
double mixture_eval(double t, std::span<const GaussianTerm> terms);
double mixture_eval(double t, const MixtureFit& fit);

/// The shipped 7-term constants with metrics evaluated on the calibration grid.
MixtureFit table1_fit();

struct FitMetrics {
    double rmse = 0.0;
    double sse = 0.0;
};

/// Uniform-grid residual metrics of the mixture against Q(exp(t)).
FitMetrics fit_metrics(std::span<const GaussianTerm> terms, FitRegion region, int n_grid);

/// Same metrics against an arbitrary target function.
FitMetrics fit_metrics_against(std::span<const GaussianTerm> terms, FitRegion region, int n_grid,
                               const std::function<double(double)>& target);

/// Largest |mixture - target| over the uniform grid.
double max_abs_error(std::span<const GaussianTerm> terms, FitRegion region, int n_grid);

struct RefitOptions {
    int max_iterations = 400;
    int restarts = 20;
    std::uint64_t seed = 2024;
    double sse_rel_tol = 1e-14;
    int n_grid = kCalibrationGridSize;
    std::function<double(double)> target; // defaults to qexp_target
};

enum class RefitStatus { converged, max_iterations };

struct RefitResult {
    MixtureFit fit;
    RefitStatus status = RefitStatus::converged;
    int restarts_used = 0;
};

/// Least-squares refit of an m-term mixture on the region: damped
/// Gauss-Newton with Marquardt parameter scaling and multiplicative damping,
/// best-of-restarts. With an init supplied the result never has larger sse
/// than the init. Non-convergence is reported in status with the best-found
/// fit attached.
RefitResult refit(int m, FitRegion region, const MixtureFit* init = nullptr,
                  const RefitOptions& options = {});

nlohmann::json to_json(const MixtureFit& fit);
MixtureFit fit_from_json(const nlohmann::json& j);

} // namespace plcisdf::qexp
