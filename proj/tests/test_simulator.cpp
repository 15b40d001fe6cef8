#include <doctest.h>

#include <cmath>
#include <limits>

#include "plcisdf/analytic.hpp"
#include "plcisdf/simulator.hpp"

using namespace plcisdf;
using namespace plcisdf::model;
using namespace plcisdf::sim;

namespace {

SystemDerived reference_system(double p_t_db = 40.0, double r_th = 1.0) {
    SystemConfig cfg;
    cfg.p_t_db = p_t_db;
    cfg.power_split = PowerSplit::full;
    cfg.d_sd_km = 0.4;
    cfg.d_f = 0.5;
    cfg.p_l_db_per_km = 60.0;
    cfg.r_th = r_th;
    cfg.sigma_h_db = 3.0;
    cfg.noise = NoiseModel(0.1, 10.0, 0.5);
    return derive(cfg);
}

} // namespace

TEST_CASE("trial outcomes respect the protocol contract") {
    const SystemDerived sys = reference_system();
    for (std::uint64_t i = 0; i < 20000; ++i) {
        Rng rng = Rng::substream(42, i);
        const TrialOutcome t = run_trial(rng, sys);
        const bool sd_fail = t.gamma_sd < sys.thr.gamma_sd;
        const bool sr_pass = t.gamma_sr >= sys.thr.gamma_sr_rd;
        const bool rd_fail = t.gamma_rd < sys.thr.gamma_sr_rd;
        CHECK(t.relay_used == (sd_fail && sr_pass));
        CHECK(t.slots_used == (t.relay_used ? 2 : 1));
        CHECK(t.outage == (sd_fail && (!sr_pass || rd_fail)));
        if (t.outage)
            CHECK(sd_fail);
        CHECK(t.gamma_sd > 0.0);
    }
}

TEST_CASE("degenerate threshold configurations") {
    SUBCASE("zero direct threshold: relay never used, one slot") {
        SystemDerived sys = reference_system();
        sys.thr.gamma_sd = 0.0;
        for (std::uint64_t i = 0; i < 5000; ++i) {
            Rng rng = Rng::substream(7, i);
            const TrialOutcome t = run_trial(rng, sys);
            CHECK_FALSE(t.relay_used);
            CHECK(t.slots_used == 1);
            CHECK_FALSE(t.outage);
        }
    }

    SUBCASE("unreachable relay gate: outage iff the direct link fails") {
        SystemDerived sys = reference_system();
        sys.thr.gamma_sr_rd = std::numeric_limits<double>::infinity();
        for (std::uint64_t i = 0; i < 5000; ++i) {
            Rng rng = Rng::substream(8, i);
            const TrialOutcome t = run_trial(rng, sys);
            CHECK_FALSE(t.relay_used);
            CHECK(t.outage == (t.gamma_sd < sys.thr.gamma_sd));
        }
    }
}

TEST_CASE("estimators match the closed forms") {
    const SystemDerived sys = reference_system();
    const std::uint64_t n = 1000000;
    const McResult mc = estimate_all(sys, n, 2024, 2);

    const double po = analytic::outage_probability(sys);
    CHECK(std::abs(mc.outage.mean - po) <=
          3.0 * std::max(mc.outage.std_error, std::sqrt(po * (1.0 - po) / double(n))));

    const double usage = analytic::relay_usage(sys);
    CHECK(std::abs(mc.relay_usage.mean - usage) <=
          3.0 * std::max(mc.relay_usage.std_error,
                         std::sqrt(usage * (1.0 - usage) / double(n))));

    const double ber = analytic::average_ber_exact(sys, analytic::BerMode::coherent);
    CHECK(std::abs(mc.ber_semianalytic.mean - ber) <= 3.0 * mc.ber_semianalytic.std_error);
    CHECK(std::abs(mc.ber_indicator.mean - ber) <= 3.0 * mc.ber_indicator.std_error);

    // event containment: outage is at least the both-gates-fail probability
    Rng rng(1);
    std::uint64_t both_fail = 0;
    for (std::uint64_t i = 0; i < 200000; ++i) {
        Rng tr = Rng::substream(2024, i);
        const TrialOutcome t = run_trial(tr, sys);
        if (t.gamma_sd < sys.thr.gamma_sd && t.gamma_sr < sys.thr.gamma_sr_rd)
            ++both_fail;
    }
    CHECK(mc.outage.mean >= double(both_fail) / 200000.0 - 3.0 * mc.outage.std_error);
}

TEST_CASE("semianalytic estimator: agreement and variance reduction") {
    const SystemDerived sys = reference_system();
    const std::uint64_t n = 400000;
    const McResult mc = estimate_all(sys, n, 99, 2);

    const double combined = std::hypot(mc.ber_indicator.std_error, mc.ber_semianalytic.std_error);
    CHECK(std::abs(mc.ber_indicator.mean - mc.ber_semianalytic.mean) <= 3.0 * combined);
    CHECK(mc.ber_semianalytic.std_error < mc.ber_indicator.std_error);

    // direct-only configuration collapses to the mean instantaneous BER
    SystemDerived direct = sys;
    direct.thr.gamma_sd = 0.0;
    const McEstimate semi = estimate_ber_semianalytic(direct, 100000, 5);
    double manual = 0.0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        Rng rng = Rng::substream(5, i);
        const TrialOutcome t = run_trial(rng, direct);
        manual += analytic::instantaneous_ber(t.gamma_sd, direct.config.noise);
    }
    CHECK(semi.mean == doctest::Approx(manual / 100000.0).epsilon(1e-12));
}

TEST_CASE("slots per symbol") {
    const SystemDerived sys = reference_system();
    const McResult mc = estimate_all(sys, 200000, 31);
    CHECK(mc.slots.mean == doctest::Approx(1.0 + mc.relay_usage.mean).epsilon(1e-15));
    CHECK(mc.slots.mean >= 1.0);
    CHECK(mc.slots.mean < 2.0);
    CHECK(mc.relay_usage.mean < 1.0);
}

TEST_CASE("determinism and seeding") {
    const SystemDerived sys = reference_system();

    const McResult a = estimate_all(sys, 100000, 123, 1);
    const McResult b = estimate_all(sys, 100000, 123, 1);
    CHECK(a.outage.mean == b.outage.mean);
    CHECK(a.ber_semianalytic.mean == b.ber_semianalytic.mean);
    CHECK(a.ber_semianalytic.std_error == b.ber_semianalytic.std_error);

    // worker count does not change the result (blocked reduction)
    const McResult c = estimate_all(sys, 100000, 123, 2);
    CHECK(c.outage.mean == a.outage.mean);
    CHECK(c.ber_semianalytic.mean == a.ber_semianalytic.mean);
    CHECK(c.ber_semianalytic.std_error == a.ber_semianalytic.std_error);

    const McResult d = estimate_all(sys, 100000, 124, 1);
    CHECK(d.outage.mean != a.outage.mean);

    CHECK(a.outage.seed == 123);
    CHECK(a.outage.n_trials == 100000);
}

TEST_CASE("estimate dispatch and validation") {
    const SystemDerived sys = reference_system();
    CHECK_THROWS_AS((void)estimate_all(sys, 0, 1), std::invalid_argument);

    const McEstimate outage = estimate(sys, Metric::outage, 50000, 9);
    const McEstimate slots = estimate(sys, Metric::slots, 50000, 9);
    const McResult all = estimate_all(sys, 50000, 9);
    CHECK(outage.mean == all.outage.mean);
    CHECK(slots.mean == all.slots.mean);
    CHECK(outage.mean >= 0.0);
    CHECK(outage.mean <= 1.0);
    CHECK(outage.std_error >= 0.0);
}
