#pragma once

#include <cmath>

#include "plcisdf/mathfn.hpp"

namespace plcisdf::model {

/// Bernoulli-Gaussian noise: background Gaussian plus an impulsive Gaussian
/// component gated by a Bernoulli(p) variable. eta is the impulsive-to-
/// background power ratio.
struct NoiseModel {
    double p = 0.1;        // impulsive occurrence probability, in [0,1]
    double eta = 10.0;     // impulsive-to-background power ratio, >= 0
    double sigma_w2 = 1.0; // background variance, > 0 (linear power)

    NoiseModel() = default;
    NoiseModel(double p_, double eta_, double sigma_w2_) : p(p_), eta(eta_), sigma_w2(sigma_w2_) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("NoiseModel: p must be in [0,1]");
        if (!(eta >= 0.0))
            throw std::invalid_argument("NoiseModel: eta must be >= 0");
        if (!(sigma_w2 > 0.0))
            throw std::invalid_argument("NoiseModel: sigma_w2 must be > 0");
    }

    double sigma_i2() const { return eta * sigma_w2; }
    /// Average noise power N0 = sigma_w2 * (1 + p*eta).
    double average_power() const { return sigma_w2 * (1.0 + p * eta); }

    // Two-component mixture view: weights and per-component variances.
    double weight1() const { return 1.0 - p; }
    double weight2() const { return p; }
    double var1() const { return sigma_w2; }
    double var2() const { return sigma_w2 + sigma_i2(); }

    // Capacity/BER scale factors of the mixture components.
    double alpha1() const { return (1.0 + p * eta) / 2.0; }
    double alpha2() const { return (1.0 + p * eta) / (2.0 * (1.0 + eta)); }

    bool operator==(const NoiseModel&) const = default;
};

/// One hop's statistical description: log-normal channel gain with unit
/// energy (E[h^2]=1 forces mu_h = -sigma_h^2) plus the derived log-normal
/// SNR parameters for a given received power and noise floor.
struct LinkModel {
    double d_km = 0.0;
    double sigma_h_db = 0.0; // fading spread in dB
    double sigma_h = 0.0;    // std of ln(h)
    double mu_h = 0.0;       // mean of ln(h)
    double p_r = 1.0;        // received power, linear
    double mu_gamma = 0.0;   // mean of ln(SNR)
    double sigma_gamma = 0.0;
};

struct SnrParams {
    double mu_gamma;
    double sigma_gamma;
};

/// dB fading spread -> natural-log std of ln(h).
inline double sigma_h_from_db(double sigma_h_db) {
    return sigma_h_db * std::numbers::ln10 / 10.0;
}

/// Received power (linear) after distance-proportional cable loss.
inline double received_power(double p_tx_db, double d_km, double p_l_db_per_km) {
    if (d_km < 0.0)
        throw std::invalid_argument("received_power: negative distance");
    if (p_l_db_per_km < 0.0)
        throw std::invalid_argument("received_power: negative path-loss factor");
    return db_to_linear(p_tx_db - d_km * p_l_db_per_km);
}

/// Log-normal SNR parameters: mu = 2*mu_h + ln(p_r/N0), sigma = 2*sigma_h.
inline SnrParams snr_params(double p_r, double mu_h, double sigma_h, const NoiseModel& noise) {
    if (!(p_r > 0.0))
        throw std::invalid_argument("snr_params: received power must be > 0");
    const double n0 = noise.average_power();
    return {2.0 * mu_h + std::log(p_r / n0), 2.0 * sigma_h};
}

/// Builds a link from physical parameters; fills channel and SNR fields.
inline LinkModel make_link(double d_km, double sigma_h_db, double p_tx_node_db,
                           double p_l_db_per_km, const NoiseModel& noise) {
    LinkModel link;
    link.d_km = d_km;
    link.sigma_h_db = sigma_h_db;
    link.sigma_h = sigma_h_from_db(sigma_h_db);
    link.mu_h = -link.sigma_h * link.sigma_h;
    link.p_r = received_power(p_tx_node_db, d_km, p_l_db_per_km);
    const SnrParams sp = snr_params(link.p_r, link.mu_h, link.sigma_h, noise);
    link.mu_gamma = sp.mu_gamma;
    link.sigma_gamma = sp.sigma_gamma;
    return link;
}

/// Synthetic link with given SNR distribution parameters (for evaluators that
/// only need the distribution, e.g. randomized validation studies).
inline LinkModel link_from_snr(double mu_gamma, double sigma_gamma) {
    LinkModel link;
    link.mu_gamma = mu_gamma;
    link.sigma_gamma = sigma_gamma;
    link.sigma_h = sigma_gamma / 2.0;
    link.mu_h = -link.sigma_h * link.sigma_h;
    link.sigma_h_db = link.sigma_h * 10.0 / std::numbers::ln10;
    return link;
}

/// CDF of the log-normal instantaneous SNR: 1 - Q((ln w - mu)/sigma).
/// Degenerate sigma_gamma = 0 yields the right-continuous step at exp(mu).
inline double snr_cdf(double w, double mu_gamma, double sigma_gamma) {
    if (w < 0.0)
        throw std::invalid_argument("snr_cdf: negative SNR");
    if (w == 0.0)
        return 0.0;
    if (sigma_gamma == 0.0)
        return w >= std::exp(mu_gamma) ? 1.0 : 0.0;
    return 1.0 - gaussian_q((std::log(w) - mu_gamma) / sigma_gamma);
}

inline double snr_cdf(double w, const LinkModel& link) {
    return snr_cdf(w, link.mu_gamma, link.sigma_gamma);
}

/// Instantaneous mixture capacity in bits/sec/Hz.
inline double capacity(double gamma, const NoiseModel& noise) {
    if (gamma < 0.0)
        throw std::invalid_argument("capacity: negative SNR");
    return noise.weight1() * std::log2(1.0 + noise.alpha1() * gamma) +
           noise.weight2() * std::log2(1.0 + noise.alpha2() * gamma);
}

/// SNR thresholds for the rate target: the direct link must support r_th,
/// the relayed hops twice that (two-slot protocol).
struct Thresholds {
    double gamma_sd;    // linear
    double gamma_sr_rd; // linear, = gamma_sd * 2^r_th
};

inline Thresholds thresholds(double r_th, const NoiseModel& noise) {
    if (!(r_th > 0.0))
        throw std::invalid_argument("thresholds: rate target must be > 0");
    const double base =
        std::pow(noise.alpha1(), -noise.weight1()) * std::pow(noise.alpha2(), -noise.weight2());
    const double g_sd = base * std::pow(2.0, r_th);
    return {g_sd, base * std::pow(2.0, 2.0 * r_th)};
}

enum class PowerSplit { half, full };

/// Full S/R/D topology and budget; the single source of truth for every
/// evaluator. Relay sits at fraction d_f of the end-to-end cable.
struct SystemConfig {
    double p_t_db = 48.0;
    PowerSplit power_split = PowerSplit::half;
    double d_sd_km = 0.4;
    double d_f = 0.5;
    double p_l_db_per_km = 60.0;
    double r_th = 3.0;
    double sigma_h_db = 3.0;
    NoiseModel noise{};

    bool operator==(const SystemConfig&) const = default;
};

/// Per-node transmit power in dB under the configured budget split.
inline double node_power_db(const SystemConfig& cfg) {
    return cfg.power_split == PowerSplit::half ? cfg.p_t_db - 10.0 * std::log10(2.0) : cfg.p_t_db;
}

inline void validate(const SystemConfig& cfg) {
    if (!(cfg.d_sd_km > 0.0))
        throw std::invalid_argument("SystemConfig: d_sd_km must be > 0");
    if (!(cfg.d_f > 0.0 && cfg.d_f < 1.0))
        throw std::invalid_argument("SystemConfig: d_f must be in (0,1)");
    if (!(cfg.p_l_db_per_km >= 0.0))
        throw std::invalid_argument("SystemConfig: p_l_db_per_km must be >= 0");
    if (!(cfg.r_th > 0.0))
        throw std::invalid_argument("SystemConfig: r_th must be > 0");
    if (!(cfg.sigma_h_db >= 0.0))
        throw std::invalid_argument("SystemConfig: sigma_h_db must be >= 0");
}

/// Everything the evaluators and the simulator consume, derived once.
struct SystemDerived {
    SystemConfig config;
    LinkModel sd, sr, rd;
    Thresholds thr{0.0, 0.0};
    double n0 = 1.0;
};

inline SystemDerived derive(const SystemConfig& cfg) {
    validate(cfg);
    SystemDerived sys;
    sys.config = cfg;
    const double node_db = node_power_db(cfg);
    sys.sd = make_link(cfg.d_sd_km, cfg.sigma_h_db, node_db, cfg.p_l_db_per_km, cfg.noise);
    sys.sr = make_link(cfg.d_f * cfg.d_sd_km, cfg.sigma_h_db, node_db, cfg.p_l_db_per_km, cfg.noise);
    sys.rd = make_link((1.0 - cfg.d_f) * cfg.d_sd_km, cfg.sigma_h_db, node_db, cfg.p_l_db_per_km,
                       cfg.noise);
    sys.thr = thresholds(cfg.r_th, cfg.noise);
    sys.n0 = cfg.noise.average_power();
    return sys;
}

} // namespace plcisdf::model
