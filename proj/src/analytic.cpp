#include "plcisdf/analytic.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "plcisdf/mathfn.hpp"
#include "plcisdf/quadrature.hpp"

namespace plcisdf::analytic {

namespace {

// Pr[gamma < G] for the log-normal SNR, written through the upper tail so the
// deep-tail cases keep precision. Degenerate sigma = 0 is a step at exp(mu).
double prob_below(double threshold, const model::LinkModel& link) {
    if (threshold <= 0.0)
        return 0.0;
    if (link.sigma_gamma == 0.0)
        return std::exp(link.mu_gamma) < threshold ? 1.0 : 0.0;
    return gaussian_q((link.mu_gamma - std::log(threshold)) / link.sigma_gamma);
}

double prob_above(double threshold, const model::LinkModel& link) {
    if (threshold <= 0.0)
        return 1.0;
    if (link.sigma_gamma == 0.0)
        return std::exp(link.mu_gamma) >= threshold ? 1.0 : 0.0;
    return gaussian_q((std::log(threshold) - link.mu_gamma) / link.sigma_gamma);
}

void check_interval(double y1, double y2) {
    if (y1 < 0.0 || y1 > y2)
        throw std::invalid_argument("partial BER: need 0 <= y1 <= y2");
}

} // namespace

double outage_probability(const model::SystemDerived& sys) {
    const double sd_fail = prob_below(sys.thr.gamma_sd, sys.sd);
    const double sr_fail = prob_below(sys.thr.gamma_sr_rd, sys.sr);
    const double sr_pass = prob_above(sys.thr.gamma_sr_rd, sys.sr);
    const double rd_fail = prob_below(sys.thr.gamma_sr_rd, sys.rd);
    return sd_fail * sr_fail + sd_fail * sr_pass * rd_fail;
}

double relay_usage(const model::SystemDerived& sys) {
    return prob_below(sys.thr.gamma_sd, sys.sd) * prob_above(sys.thr.gamma_sr_rd, sys.sr);
}

double instantaneous_ber(double gamma, const model::NoiseModel& noise) {
    if (gamma < 0.0)
        throw std::invalid_argument("instantaneous_ber: negative SNR");
    return noise.weight1() * gaussian_q(std::sqrt(noise.alpha1() * gamma)) +
           noise.weight2() * gaussian_q(std::sqrt(noise.alpha2() * gamma));
}

PartialBer partial_ber_closed(const model::LinkModel& link, double y1, double y2,
                              const qexp::MixtureFit& fit, const model::NoiseModel& noise) {
    check_interval(y1, y2);
    PartialBer out{0.0, y1, y2};
    if (y1 == y2)
        return out;

    const double sg = link.sigma_gamma;
    if (sg == 0.0) { // point mass at exp(mu)
        const double g = std::exp(link.mu_gamma);
        if (g > y1 && g <= y2)
            out.value = instantaneous_ber(g, noise);
        return out;
    }

    const double weights[2] = {noise.weight1(), noise.weight2()};
    const double alphas[2] = {noise.alpha1(), noise.alpha2()};
    const double inv_sg2 = 1.0 / (sg * sg);
    double total = 0.0;
    for (const auto& g : fit.terms) {
        const double inv_c2 = 1.0 / (g.c * g.c);
        const double big_a = std::sqrt(inv_c2 + 2.0 * inv_sg2);
        for (int j = 0; j < 2; ++j) {
            const double log_alpha_mu = std::log(alphas[j]) + link.mu_gamma;
            const double big_b = g.b * inv_c2 + log_alpha_mu * inv_sg2;
            const double big_c = g.b * g.b * inv_c2 + log_alpha_mu * log_alpha_mu * 0.5 * inv_sg2;
            const double coef = 2.0 * weights[j] * g.a / (sg * std::numbers::sqrt2 * big_a) *
                                std::exp(-(big_c - (big_b / big_a) * (big_b / big_a)));
            const double q_lo =
                y1 <= 0.0 ? 1.0
                          : gaussian_q(std::numbers::sqrt2 *
                                       (big_a * 0.5 * std::log(alphas[j] * y1) - big_b / big_a));
            const double q_hi =
                std::isinf(y2) ? 0.0
                               : gaussian_q(std::numbers::sqrt2 *
                                            (big_a * 0.5 * std::log(alphas[j] * y2) - big_b / big_a));
            total += coef * (q_lo - q_hi);
        }
    }
    out.value = total;
    return out;
}

PartialBer partial_ber_quadrature(const model::LinkModel& link, double y1, double y2,
                                  const model::NoiseModel& noise, double abs_tol) {
    check_interval(y1, y2);
    PartialBer out{0.0, y1, y2};
    if (y1 == y2)
        return out;

    const double mu = link.mu_gamma;
    const double sg = link.sigma_gamma;
    if (sg == 0.0) {
        const double g = std::exp(mu);
        if (g > y1 && g <= y2)
            out.value = instantaneous_ber(g, noise);
        return out;
    }

    // Integrate on t = ln(gamma); mass beyond +-8 sigma is below 1e-15 of the
    // 0.5 BER cap, far inside the requested tolerance.
    const double lo = std::max(y1 > 0.0 ? std::log(y1) : mu - 8.0 * sg, mu - 8.0 * sg);
    const double hi = std::min(std::isinf(y2) ? mu + 8.0 * sg : std::log(y2), mu + 8.0 * sg);
    if (hi <= lo)
        return out;

    const auto integrand = [&](double t) {
        const double z = (t - mu) / sg;
        return instantaneous_ber(std::exp(t), noise) * gaussian_pdf(z) / sg;
    };
    const auto res = numeric::integrate_adaptive(integrand, lo, hi, abs_tol);
    if (!res.converged)
        throw std::runtime_error("partial_ber_quadrature: tolerance not met");
    out.value = res.value;
    return out;
}

namespace {

using PartialFn = std::function<double(const model::LinkModel&, double, double)>;
constexpr double kInf = std::numeric_limits<double>::infinity();

double assemble_ber(const model::SystemDerived& sys, BerMode mode, const PartialFn& partial) {
    const double g_sd = sys.thr.gamma_sd;
    const double g_sr = sys.thr.gamma_sr_rd;
    const double sd_fail = prob_below(g_sd, sys.sd);
    const double sr_pass = prob_above(g_sr, sys.sr);

    // direct detection when the first slot clears, or when both the first
    // slot and the relay gate miss
    const double t1 = partial(sys.sd, g_sd, kInf);
    const double t2 = (1.0 - sr_pass) * partial(sys.sd, 0.0, g_sd);

    double t3 = 0.0;
    if (mode == BerMode::coherent) {
        // relayed event: exactly one of {relay decode, second hop} errs,
        // with the relay-hop error normalized on its decode condition
        if (sr_pass > 0.0) {
            const double q_sr = partial(sys.sr, g_sr, kInf) / sr_pass;
            const double q_rd = partial(sys.rd, 0.0, kInf);
            t3 = sd_fail * sr_pass * (q_sr * (1.0 - q_rd) + (1.0 - q_sr) * q_rd);
        }
    } else {
        // printed form: full-range link averages, decode probability applied
        // to the second-hop factor only
        const double s_sr = partial(sys.sr, 0.0, kInf);
        const double s_rd = partial(sys.rd, 0.0, kInf);
        t3 = sd_fail * ((1.0 - s_sr) * (s_rd * sr_pass) + s_sr * (1.0 - s_rd * sr_pass));
    }
    return t1 + t2 + t3;
}

} // namespace

double average_ber(const model::SystemDerived& sys, const qexp::MixtureFit& fit, BerMode mode) {
    const auto& noise = sys.config.noise;
    return assemble_ber(sys, mode, [&](const model::LinkModel& link, double y1, double y2) {
        return partial_ber_closed(link, y1, y2, fit, noise).value;
    });
}

double average_ber_exact(const model::SystemDerived& sys, BerMode mode, double abs_tol) {
    const auto& noise = sys.config.noise;
    return assemble_ber(sys, mode, [&](const model::LinkModel& link, double y1, double y2) {
        return partial_ber_quadrature(link, y1, y2, noise, abs_tol).value;
    });
}

} // namespace plcisdf::analytic
