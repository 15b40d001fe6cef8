#pragma once

#include <cstdint>

#include "plcisdf/model.hpp"
#include "plcisdf/rng.hpp"

namespace plcisdf::sim {

/// One simulated protocol round at the SNR/event level.
struct TrialOutcome {
    double gamma_sd = 0.0;
    double gamma_sr = 0.0;
    double gamma_rd = 0.0;
    bool relay_used = false; // direct missed its threshold AND relay decoded
    bool outage = false;
    bool bit_error = false;
    int slots_used = 1; // 2 iff the relay transmitted
};

/// Samples three independent link SNRs and applies the protocol events.
/// Direct paths draw a bit error with the instantaneous error probability of
/// the direct SNR; the relayed path errs iff exactly one of the relay decode
/// and the second hop errs.
TrialOutcome run_trial(Rng& rng, const model::SystemDerived& sys);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_trials = 0;
    std::uint64_t seed = 0;
};

enum class Metric { outage, relay_usage, ber, slots };

/// All estimators from one pass over the trials. `ber_indicator` counts
/// simulated bit errors; `ber_semianalytic` averages the exact per-trial
/// error probability implied by the sampled SNRs (unbiased for the same
/// quantity, lower variance). Results are bit-identical for a fixed
/// (seed, n_trials) regardless of worker count: trials own hash-derived
/// substreams and partial sums reduce in fixed block order.
struct McResult {
    McEstimate outage;
    McEstimate relay_usage;
    McEstimate ber_indicator;
    McEstimate ber_semianalytic;
    McEstimate slots;
};

McResult estimate_all(const model::SystemDerived& sys, std::uint64_t n_trials, std::uint64_t seed,
                      int workers = 1);

McEstimate estimate(const model::SystemDerived& sys, Metric metric, std::uint64_t n_trials,
                    std::uint64_t seed, int workers = 1);

McEstimate estimate_ber_semianalytic(const model::SystemDerived& sys, std::uint64_t n_trials,
                                     std::uint64_t seed, int workers = 1);

} // namespace plcisdf::sim
