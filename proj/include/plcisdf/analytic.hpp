#pragma once

#include "plcisdf/model.hpp"
#include "plcisdf/qexp_fit.hpp"

namespace plcisdf::analytic {

/// End-to-end outage probability of the incremental selective relaying
/// scheme: direct and source-relay both miss their thresholds, or the direct
/// misses, the relay decodes, and the relay-destination hop misses.
double outage_probability(const model::SystemDerived& sys);

/// Fraction of rounds in which the relay transmits:
/// Pr[direct fails] * Pr[source-relay clears its threshold]. Always < 1.
double relay_usage(const model::SystemDerived& sys);

/// Instantaneous BPSK error probability under the two-component noise
/// mixture: sum_j p_j Q(sqrt(alpha_j * gamma)). Equals 0.5 at gamma = 0.
double instantaneous_ber(double gamma, const model::NoiseModel& noise);

/// Unnormalized expectation of the instantaneous BER over an SNR interval
/// (carries the interval probability; summing over a partition of (0,inf)
/// reproduces the unconditional average).
struct PartialBer {
    double value = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
};

/// Closed-form partial BER via the Gaussian-mixture approximation: a double
/// sum over mixture terms and noise components with Gaussian-product algebra.
/// y2 = inf drops the upper Q term; y1 = 0 fixes the lower one at 1.
PartialBer partial_ber_closed(const model::LinkModel& link, double y1, double y2,
                              const qexp::MixtureFit& fit, const model::NoiseModel& noise);

/// Independent numeric evaluation of the same integral (adaptive
/// Gauss-Kronrod on the log-SNR axis); ground truth for the closed form.
/// Throws if the requested absolute tolerance cannot be met.
PartialBer partial_ber_quadrature(const model::LinkModel& link, double y1, double y2,
                                  const model::NoiseModel& noise, double abs_tol = 1e-12);

/// Average BER assembly semantics. `paper_literal` reproduces the printed
/// closed-form term by term (the relayed-error block uses full-range link
/// averages and scales only the relay-destination factor by the decode
/// probability). `coherent` assembles the three disjoint protocol events with
/// normalized conditional error probabilities; it is the reading that the
/// event-level simulation estimates.
enum class BerMode { paper_literal, coherent };

/// Average BER with partial expectations evaluated through the mixture fit.
double average_ber(const model::SystemDerived& sys, const qexp::MixtureFit& fit, BerMode mode);

/// Average BER with partial expectations evaluated by quadrature: same event
/// assembly without curve-fit error.
double average_ber_exact(const model::SystemDerived& sys, BerMode mode, double abs_tol = 1e-12);

} // namespace plcisdf::analytic
