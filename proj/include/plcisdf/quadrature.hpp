#pragma once

#include <cmath>
#include <cstdint>

namespace plcisdf::numeric {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    int panels = 0;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
inline void gauss_kronrod_15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = kKronrodWeights[7] * fc;
    double resg = kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double x = h * kKronrodNodes[i];
        const double fsum = f(c - x) + f(c + x);
        resk += kKronrodWeights[i] * fsum;
        if (i % 2 == 1)
            resg += kGaussWeights[i / 2] * fsum;
    }
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

template <typename F>
inline void adapt(const F& f, double a, double b, double tol, int depth, QuadratureResult& out) {
    double v, e;
    gauss_kronrod_15(f, a, b, v, e);
    ++out.panels;
    if (e <= tol || depth <= 0) {
        out.value += v;
        out.error_estimate += e;
        if (e > tol)
            out.converged = false;
        return;
    }
    const double m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1, out);
    adapt(f, m, b, 0.5 * tol, depth - 1, out);
}

} // namespace detail

/// Adaptive bisection with a Gauss-Kronrod 15(7) rule per panel, absolute
/// tolerance. converged=false when the error estimate exceeds abs_tol after
/// max_depth subdivisions.
template <typename F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                                    int max_depth = 48) {
    QuadratureResult out;
    if (a == b)
        return out;
    detail::adapt(f, a, b, abs_tol, max_depth, out);
    return out;
}

} // namespace plcisdf::numeric
