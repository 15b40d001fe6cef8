#pragma once

#include "plcisdf/model.hpp"
#include "plcisdf/rng.hpp"

namespace plcisdf::model {

/// Log-normal channel gain h = exp(mu_h + sigma_h * g). One normal draw.
inline double sample_channel_gain(Rng& rng, const LinkModel& link) {
    return std::exp(link.mu_h + link.sigma_h * rng.standard_normal());
}

/// Bernoulli-Gaussian noise sample z = z_W + z_B * z_I. Always consumes three
/// draws (two normals, one uniform) so streams stay aligned across samples.
inline double sample_noise(Rng& rng, const NoiseModel& noise) {
    const double z_w = std::sqrt(noise.sigma_w2) * rng.standard_normal();
    const double z_i = std::sqrt(noise.sigma_i2()) * rng.standard_normal();
    const bool impulsive = rng.bernoulli(noise.p);
    return z_w + (impulsive ? z_i : 0.0);
}

/// Instantaneous SNR gamma = p_r * h^2 / N0 for one channel realization.
inline double sample_snr(Rng& rng, const LinkModel& link, double n0) {
    const double h = sample_channel_gain(rng, link);
    return link.p_r * h * h / n0;
}

} // namespace plcisdf::model
