#include "plcisdf/simulator.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "plcisdf/analytic.hpp"
#include "plcisdf/sampling.hpp"

namespace plcisdf::sim {

TrialOutcome run_trial(Rng& rng, const model::SystemDerived& sys) {
    TrialOutcome t;
    t.gamma_sd = model::sample_snr(rng, sys.sd, sys.n0);
    t.gamma_sr = model::sample_snr(rng, sys.sr, sys.n0);
    t.gamma_rd = model::sample_snr(rng, sys.rd, sys.n0);

    const bool sd_ok = t.gamma_sd >= sys.thr.gamma_sd;
    const bool sr_ok = t.gamma_sr >= sys.thr.gamma_sr_rd;
    const bool rd_ok = t.gamma_rd >= sys.thr.gamma_sr_rd;

    t.relay_used = !sd_ok && sr_ok;
    t.slots_used = t.relay_used ? 2 : 1;
    t.outage = !sd_ok && (!sr_ok || !rd_ok);

    const auto& noise = sys.config.noise;
    if (!t.relay_used) {
        // detection from the first slot (direct pass, or relay gate closed)
        t.bit_error = rng.bernoulli(analytic::instantaneous_ber(t.gamma_sd, noise));
    } else {
        const bool decode_err = rng.bernoulli(analytic::instantaneous_ber(t.gamma_sr, noise));
        const bool hop_err = rng.bernoulli(analytic::instantaneous_ber(t.gamma_rd, noise));
        t.bit_error = decode_err != hop_err;
    }
    return t;
}

namespace {

constexpr std::uint64_t kBlockSize = 1 << 16;

struct BlockSums {
    std::uint64_t n = 0;
    std::uint64_t outage = 0;
    std::uint64_t relay = 0;
    std::uint64_t bit_error = 0;
    double pe_sum = 0.0;
    double pe_sum2 = 0.0;
};

BlockSums process_block(const model::SystemDerived& sys, std::uint64_t seed,
                        std::uint64_t first_trial, std::uint64_t last_trial) {
    BlockSums s;
    const auto& noise = sys.config.noise;
    for (std::uint64_t i = first_trial; i < last_trial; ++i) {
        Rng rng = Rng::substream(seed, i);
        const TrialOutcome t = run_trial(rng, sys);
        ++s.n;
        s.outage += t.outage ? 1 : 0;
        s.relay += t.relay_used ? 1 : 0;
        s.bit_error += t.bit_error ? 1 : 0;
        double pe;
        if (!t.relay_used) {
            pe = analytic::instantaneous_ber(t.gamma_sd, noise);
        } else {
            const double pe_sr = analytic::instantaneous_ber(t.gamma_sr, noise);
            const double pe_rd = analytic::instantaneous_ber(t.gamma_rd, noise);
            pe = pe_sr * (1.0 - pe_rd) + (1.0 - pe_sr) * pe_rd;
        }
        s.pe_sum += pe;
        s.pe_sum2 += pe * pe;
    }
    return s;
}

McEstimate indicator_estimate(std::uint64_t count, std::uint64_t n, std::uint64_t seed) {
    McEstimate e;
    e.n_trials = n;
    e.seed = seed;
    e.mean = static_cast<double>(count) / static_cast<double>(n);
    e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
    return e;
}

} // namespace

McResult estimate_all(const model::SystemDerived& sys, std::uint64_t n_trials, std::uint64_t seed,
                      int workers) {
    if (n_trials == 0)
        throw std::invalid_argument("estimate_all: n_trials must be >= 1");

    const std::uint64_t n_blocks = (n_trials + kBlockSize - 1) / kBlockSize;
    std::vector<BlockSums> blocks(n_blocks);

    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(n_blocks)));
    if (n_workers == 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b)
            blocks[b] = process_block(sys, seed, b * kBlockSize,
                                      std::min(n_trials, (b + 1) * kBlockSize));
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::uint64_t b = next.fetch_add(1);
                    if (b >= n_blocks)
                        return;
                    blocks[b] = process_block(sys, seed, b * kBlockSize,
                                              std::min(n_trials, (b + 1) * kBlockSize));
                }
            });
        }
        for (auto& th : pool)
            th.join();
    }

    // fixed-order reduction keeps double sums identical for any worker count
    BlockSums total;
    for (const auto& b : blocks) {
        total.n += b.n;
        total.outage += b.outage;
        total.relay += b.relay;
        total.bit_error += b.bit_error;
        total.pe_sum += b.pe_sum;
        total.pe_sum2 += b.pe_sum2;
    }

    McResult r;
    r.outage = indicator_estimate(total.outage, n_trials, seed);
    r.relay_usage = indicator_estimate(total.relay, n_trials, seed);
    r.ber_indicator = indicator_estimate(total.bit_error, n_trials, seed);

    const double n = static_cast<double>(n_trials);
    r.ber_semianalytic.n_trials = n_trials;
    r.ber_semianalytic.seed = seed;
    r.ber_semianalytic.mean = total.pe_sum / n;
    const double var = n > 1.0
                           ? std::max(0.0, (total.pe_sum2 - n * r.ber_semianalytic.mean *
                                                                r.ber_semianalytic.mean) /
                                               (n - 1.0))
                           : 0.0;
    r.ber_semianalytic.std_error = std::sqrt(var / n);

    // slots per symbol = 1 + relay fraction
    r.slots = r.relay_usage;
    r.slots.mean += 1.0;
    return r;
}

McEstimate estimate(const model::SystemDerived& sys, Metric metric, std::uint64_t n_trials,
                    std::uint64_t seed, int workers) {
    const McResult r = estimate_all(sys, n_trials, seed, workers);
    switch (metric) {
    case Metric::outage:
        return r.outage;
    case Metric::relay_usage:
        return r.relay_usage;
    case Metric::ber:
        return r.ber_indicator;
    case Metric::slots:
        return r.slots;
    }
    throw std::logic_error("estimate: unknown metric");
}

McEstimate estimate_ber_semianalytic(const model::SystemDerived& sys, std::uint64_t n_trials,
                                     std::uint64_t seed, int workers) {
    return estimate_all(sys, n_trials, seed, workers).ber_semianalytic;
}

} // namespace plcisdf::sim
