#include "plcisdf/qexp_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plcisdf/mathfn.hpp"
#include "plcisdf/rng.hpp"

namespace plcisdf::qexp {

double qexp_target(double t) {
    // exp(t) overflows to +inf for large t; erfc(+inf) = 0, so Q tends to 0.
    return gaussian_q(std::exp(t));
}

double mixture_eval(double t, std::span<const GaussianTerm> terms) {
    double sum = 0.0;
    for (const auto& g : terms) {
        const double u = (t - g.b) / g.c;
        const double u2 = u * u;
        if (u2 < 745.0) // beyond this exp underflows anyway; avoids inf*0
            sum += g.a * std::exp(-u2);
    }
    return sum;
}

double mixture_eval(double t, const MixtureFit& fit) {
    return mixture_eval(t, fit.terms);
}

namespace {

std::vector<double> region_grid(FitRegion region, int n_grid) {
    if (!(region.lo < region.hi))
        throw std::invalid_argument("fit region: lo must be < hi");
    if (n_grid < 2)
        throw std::invalid_argument("fit region: n_grid must be >= 2");
    std::vector<double> t(static_cast<std::size_t>(n_grid));
    const double step = region.span() / (n_grid - 1);
    for (int i = 0; i < n_grid; ++i)
        t[static_cast<std::size_t>(i)] = region.lo + step * i;
    return t;
}

} // namespace

FitMetrics fit_metrics_against(std::span<const GaussianTerm> terms, FitRegion region, int n_grid,
                               const std::function<double(double)>& target) {
    const auto grid = region_grid(region, n_grid);
    double sse = 0.0;
    for (double t : grid) {
        const double r = mixture_eval(t, terms) - target(t);
        sse += r * r;
    }
    return {std::sqrt(sse / n_grid), sse};
}

FitMetrics fit_metrics(std::span<const GaussianTerm> terms, FitRegion region, int n_grid) {
    return fit_metrics_against(terms, region, n_grid,
                               [](double t) { return qexp_target(t); });
}

double max_abs_error(std::span<const GaussianTerm> terms, FitRegion region, int n_grid) {
    const auto grid = region_grid(region, n_grid);
    double worst = 0.0;
    for (double t : grid)
        worst = std::max(worst, std::abs(mixture_eval(t, terms) - qexp_target(t)));
    return worst;
}

MixtureFit table1_fit() {
    MixtureFit fit;
    fit.terms = {
        {0.4665, -5.37, 2.174},  {-0.0007029, -3.674, 0.1178}, {0.0165, -3.141, 0.0004957},
        {0.2831, -2.998, 1.458}, {0.2113, -1.764, 1.06},       {0.1742, -0.8425, 0.837},
        {0.07986, -0.1109, 0.6399}};
    fit.region = kCalibrationRegion;
    fit.n_grid = kCalibrationGridSize;
    const FitMetrics m = fit_metrics(fit.terms, fit.region, fit.n_grid);
    fit.rmse = m.rmse;
    fit.sse = m.sse;
    return fit;
}

namespace {

// Dense symmetric positive-definite solve (Cholesky); returns false if the
// factorization breaks down.
bool solve_spd(std::vector<double>& a, std::vector<double>& rhs, int n) {
    for (int k = 0; k < n; ++k) {
        double d = a[static_cast<std::size_t>(k * n + k)];
        for (int j = 0; j < k; ++j)
            d -= a[static_cast<std::size_t>(k * n + j)] * a[static_cast<std::size_t>(k * n + j)];
        if (!(d > 0.0))
            return false;
        const double lkk = std::sqrt(d);
        a[static_cast<std::size_t>(k * n + k)] = lkk;
        for (int i = k + 1; i < n; ++i) {
            double s = a[static_cast<std::size_t>(i * n + k)];
            for (int j = 0; j < k; ++j)
                s -= a[static_cast<std::size_t>(i * n + j)] * a[static_cast<std::size_t>(k * n + j)];
            a[static_cast<std::size_t>(i * n + k)] = s / lkk;
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = rhs[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j)
            s -= a[static_cast<std::size_t>(i * n + j)] * rhs[static_cast<std::size_t>(j)];
        rhs[static_cast<std::size_t>(i)] = s / a[static_cast<std::size_t>(i * n + i)];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j)
            s -= a[static_cast<std::size_t>(j * n + i)] * rhs[static_cast<std::size_t>(j)];
        rhs[static_cast<std::size_t>(i)] = s / a[static_cast<std::size_t>(i * n + i)];
    }
    return true;
}

double sse_of(const std::vector<double>& params, const std::vector<double>& grid,
              const std::vector<double>& target) {
    const std::size_t m = params.size() / 3;
    double sse = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double u = (grid[i] - params[3 * k + 1]) / params[3 * k + 2];
            const double u2 = u * u;
            if (u2 < 745.0)
                v += params[3 * k] * std::exp(-u2);
        }
        const double r = v - target[i];
        sse += r * r;
    }
    return sse;
}

struct LmOutcome {
    std::vector<double> params;
    double sse = 0.0;
    bool converged = false;
};

// Damped Gauss-Newton with Marquardt scaling on the 3m mixture parameters.
LmOutcome levenberg_marquardt(std::vector<double> params, const std::vector<double>& grid,
                              const std::vector<double>& target, int max_iterations,
                              double sse_rel_tol) {
    const int np = static_cast<int>(params.size());
    const std::size_t m = params.size() / 3;
    const std::size_t n = grid.size();
    std::vector<double> jac(n * static_cast<std::size_t>(np));
    std::vector<double> resid(n);
    std::vector<double> hess(static_cast<std::size_t>(np * np));
    std::vector<double> step(static_cast<std::size_t>(np));

    double sse = sse_of(params, grid, target);
    double lambda = 1e-3;
    bool converged = false;

    for (int iter = 0; iter < max_iterations; ++iter) {
        // residuals and analytic Jacobian
        std::fill(jac.begin(), jac.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double a = params[3 * k];
                const double c = params[3 * k + 2];
                const double u = (grid[i] - params[3 * k + 1]) / c;
                const double u2 = u * u;
                if (u2 >= 745.0)
                    continue;
                const double e = std::exp(-u2);
                v += a * e;
                jac[i * static_cast<std::size_t>(np) + 3 * k] = e;
                jac[i * static_cast<std::size_t>(np) + 3 * k + 1] = a * e * 2.0 * u / c;
                jac[i * static_cast<std::size_t>(np) + 3 * k + 2] = a * e * 2.0 * u2 / c;
            }
            resid[i] = v - target[i];
        }

        std::vector<double> grad(static_cast<std::size_t>(np), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &jac[i * static_cast<std::size_t>(np)];
            for (int r = 0; r < np; ++r) {
                grad[static_cast<std::size_t>(r)] += row[r] * resid[i];
                for (int s = 0; s <= r; ++s)
                    hess[static_cast<std::size_t>(r * np + s)] += row[r] * row[s];
            }
        }
        for (int r = 0; r < np; ++r)
            for (int s = r + 1; s < np; ++s)
                hess[static_cast<std::size_t>(r * np + s)] =
                    hess[static_cast<std::size_t>(s * np + r)];

        bool stepped = false;
        for (int attempt = 0; attempt < 16 && !stepped; ++attempt) {
            std::vector<double> a = hess;
            for (int r = 0; r < np; ++r) {
                const std::size_t d = static_cast<std::size_t>(r * np + r);
                a[d] += lambda * std::max(hess[d], 1e-12);
            }
            step.assign(grad.begin(), grad.end());
            if (!solve_spd(a, step, np)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> trial = params;
            for (int r = 0; r < np; ++r)
                trial[static_cast<std::size_t>(r)] -= step[static_cast<std::size_t>(r)];
            const double trial_sse = sse_of(trial, grid, target);
            if (trial_sse < sse) {
                const double gain = sse - trial_sse;
                params = std::move(trial);
                if (gain <= sse_rel_tol * std::max(sse, 1e-300))
                    converged = true;
                sse = trial_sse;
                lambda = std::max(lambda * 0.3, 1e-14);
                stepped = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!stepped || converged) {
            converged = converged || !stepped; // stalled steps: local minimum
            break;
        }
    }
    return {std::move(params), sse, converged};
}

std::vector<double> flatten(const std::vector<GaussianTerm>& terms) {
    std::vector<double> p;
    p.reserve(terms.size() * 3);
    for (const auto& g : terms) {
        p.push_back(g.a);
        p.push_back(g.b);
        p.push_back(g.c);
    }
    return p;
}

std::vector<GaussianTerm> unflatten(const std::vector<double>& p) {
    std::vector<GaussianTerm> terms(p.size() / 3);
    for (std::size_t k = 0; k < terms.size(); ++k)
        terms[k] = {p[3 * k], p[3 * k + 1], std::abs(p[3 * k + 2])}; // c sign is arbitrary
    return terms;
}

} // namespace

RefitResult refit(int m, FitRegion region, const MixtureFit* init, const RefitOptions& options) {
    if (m < 1)
        throw std::invalid_argument("refit: m must be >= 1");
    if (!(region.lo < region.hi) || !std::isfinite(region.lo) || !std::isfinite(region.hi))
        throw std::invalid_argument("refit: region must be finite with lo < hi");

    const auto target_fn =
        options.target ? options.target : std::function<double(double)>(
                                              [](double t) { return qexp_target(t); });
    std::vector<double> grid(static_cast<std::size_t>(options.n_grid));
    std::vector<double> target(grid.size());
    const double step = region.span() / (options.n_grid - 1);
    for (int i = 0; i < options.n_grid; ++i) {
        grid[static_cast<std::size_t>(i)] = region.lo + step * i;
        target[static_cast<std::size_t>(i)] = target_fn(grid[static_cast<std::size_t>(i)]);
    }

    const std::size_t um = static_cast<std::size_t>(m);
    std::vector<std::vector<double>> inits;
    if (init && init->terms.size() == um)
        inits.push_back(flatten(init->terms));
    {
        // structured start: centers spread across the region, widths ~ span/m
        std::vector<double> p;
        for (int k = 0; k < m; ++k) {
            const double b = region.lo + region.span() * (k + 0.5) / m;
            p.push_back(target_fn(b) / std::max(1, m / 2));
            p.push_back(b);
            p.push_back(region.span() / m);
        }
        inits.push_back(std::move(p));
    }
    Rng rng(options.seed);
    while (static_cast<int>(inits.size()) < options.restarts) {
        std::vector<double> p;
        for (int k = 0; k < m; ++k) {
            p.push_back(0.5 * rng.uniform01());
            p.push_back(region.lo + region.span() * rng.uniform01());
            p.push_back(region.span() * (0.05 + 0.45 * rng.uniform01()));
        }
        inits.push_back(std::move(p));
    }

    LmOutcome best;
    best.sse = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    int used = 0;
    for (const auto& p0 : inits) {
        LmOutcome out =
            levenberg_marquardt(p0, grid, target, options.max_iterations, options.sse_rel_tol);
        ++used;
        any_converged = any_converged || out.converged;
        if (out.sse < best.sse)
            best = std::move(out);
        // with a supplied init the first polish usually lands at the optimum;
        // keep restarting only while the fit is still poor
        if (best.sse / options.n_grid < 1e-10 && used >= 2)
            break;
    }
    // never report worse than the supplied init
    if (init && init->terms.size() == um) {
        const double init_sse = sse_of(flatten(init->terms), grid, target);
        if (init_sse < best.sse) {
            best.params = flatten(init->terms);
            best.sse = init_sse;
        }
    }

    RefitResult result;
    result.fit.terms = unflatten(best.params);
    std::sort(result.fit.terms.begin(), result.fit.terms.end(),
              [](const GaussianTerm& x, const GaussianTerm& y) { return x.b < y.b; });
    result.fit.region = region;
    result.fit.n_grid = options.n_grid;
    const FitMetrics fm = fit_metrics_against(result.fit.terms, region, options.n_grid, target_fn);
    result.fit.rmse = fm.rmse;
    result.fit.sse = fm.sse;
    result.status = any_converged ? RefitStatus::converged : RefitStatus::max_iterations;
    result.restarts_used = used;
    return result;
}

nlohmann::json to_json(const MixtureFit& fit) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& g : fit.terms)
        terms.push_back({{"a", g.a}, {"b", g.b}, {"c", g.c}});
    return {{"terms", terms},
            {"region", {fit.region.lo, fit.region.hi}},
            {"rmse", fit.rmse},
            {"sse", fit.sse},
            {"n_grid", fit.n_grid}};
}

MixtureFit fit_from_json(const nlohmann::json& j) {
    MixtureFit fit;
    for (const auto& t : j.at("terms"))
        fit.terms.push_back({t.at("a").get<double>(), t.at("b").get<double>(),
                             t.at("c").get<double>()});
    if (fit.terms.empty())
        throw std::invalid_argument("mixture fit: needs at least one term");
    for (const auto& g : fit.terms)
        if (g.c == 0.0)
            throw std::invalid_argument("mixture fit: c must be nonzero");
    fit.region = {j.at("region").at(0).get<double>(), j.at("region").at(1).get<double>()};
    fit.rmse = j.at("rmse").get<double>();
    fit.sse = j.at("sse").get<double>();
    fit.n_grid = j.value("n_grid", 0);
    return fit;
}

} // namespace plcisdf::qexp
