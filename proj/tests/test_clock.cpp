#include <catch2/catch_amalgamated.hpp>

#include "dtsync/clock.hpp"
#include "oracles.hpp"

using namespace dtsync;

TEST_CASE("identity clock maps true time to itself") {
    ClockState c;
    CHECK(local_time(c, 1.0) == 1.0);
    CHECK(local_time(c, 0.0) == 0.0);
}

TEST_CASE("static bias is additive") {
    ClockState c;
    c.static_bias = 40e-9;
    CHECK(local_time(c, 1.0) == Catch::Approx(1.000000040).epsilon(1e-15));
}

TEST_CASE("software correction enters local time") {
    ClockState c;
    c.software_correction = 25e-12;
    CHECK(local_time(c, 2.0) == Catch::Approx(2.0 + 25e-12).margin(1e-18));
}

TEST_CASE("zero diffusion leaves dynamic bias unchanged") {
    ClockState c;
    RngStream rng(7);
    advance(c, 0.5, rng);
    CHECK(c.dynamic_bias == 0.0);
}

TEST_CASE("advance rejects non-positive dt") {
    ClockState c;
    RngStream rng(7);
    CHECK_THROWS_AS(advance(c, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(advance(c, -1.0, rng), std::invalid_argument);
}

TEST_CASE("random-walk increment std matches closed form") {
    // dt = 0.5 s, diffusion 4e-24 s^2/s: increment std = sqrt(2e-24) ~ 1.414 ps
    RngStream rng(11);
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) {
        ClockState c;
        c.drift_diffusion = 4e-24;
        advance(c, 0.5, rng);
        draws.push_back(c.dynamic_bias);
    }
    const double expect = std::sqrt(2e-24);
    CHECK(oracles::sample_std(draws) == Catch::Approx(expect).epsilon(0.03));
    CHECK(std::abs(oracles::mean(draws)) < 3.0 * expect / std::sqrt(20000.0));
}

TEST_CASE("dynamic-bias variance grows linearly with elapsed time") {
    // std of zeta after 200 ms at 1e-24 s^2/s is sqrt(2e-25) ~ 0.447 ps
    RngStream rng(13);
    std::vector<double> final_bias;
    for (int i = 0; i < 10000; ++i) {
        ClockState c;
        c.drift_diffusion = 1e-24;
        for (int k = 0; k < 4; ++k) advance(c, 0.05, rng);
        final_bias.push_back(c.dynamic_bias);
    }
    CHECK(oracles::sample_std(final_bias) == Catch::Approx(std::sqrt(2e-25)).epsilon(0.04));
}

TEST_CASE("two half steps match one full step in distribution") {
    RngStream rng_a(17), rng_b(19);
    std::vector<double> split, whole;
    for (int i = 0; i < 20000; ++i) {
        ClockState a, b;
        a.drift_diffusion = b.drift_diffusion = 1e-22;
        advance(a, 0.1, rng_a);
        advance(a, 0.1, rng_a);
        advance(b, 0.2, rng_b);
        split.push_back(a.dynamic_bias);
        whole.push_back(b.dynamic_bias);
    }
    const double ratio = oracles::sample_std(split) / oracles::sample_std(whole);
    CHECK(ratio == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("true offset is exactly antisymmetric") {
    RngStream rng(23);
    for (int i = 0; i < 200; ++i) {
        ClockState a, b;
        a.static_bias = rng.uniform(-5e-8, 5e-8);
        b.static_bias = rng.uniform(-5e-8, 5e-8);
        a.dynamic_bias = rng.uniform(-1e-10, 1e-10);
        b.dynamic_bias = rng.uniform(-1e-10, 1e-10);
        a.software_correction = rng.uniform(-1e-9, 1e-9);
        CHECK(true_offset(a, b) + true_offset(b, a) == 0.0);
    }
}

TEST_CASE("true offset of identical clocks is zero, biased pair is the bias gap") {
    ClockState a, b;
    CHECK(true_offset(a, b) == 0.0);
    b.static_bias = 10e-9;
    CHECK(true_offset(a, b) == Catch::Approx(10e-9));
}

TEST_CASE("noiseless clock is an exact affine map of true time") {
    ClockState c;
    c.static_bias = 3e-9;
    c.freq_scale = 1.0 + 2e-9;  // residual frequency offset in ppb
    for (double t : {0.0, 0.25, 1.0, 100.0}) {
        CHECK(local_time(c, t) == c.freq_scale * t + c.static_bias);
        CHECK(true_time_at_local(c, local_time(c, t)) == Catch::Approx(t).margin(1e-15));
    }
}

TEST_CASE("jitter draws come from the supplied stream and are reproducible") {
    ClockState c;
    c.jitter_std = 1e-12;
    RngStream r1(99), r2(99);
    CHECK(local_time(c, 1.0, &r1) == local_time(c, 1.0, &r2));
    CHECK(local_time(c, 1.0, &r1) != local_time(c, 1.0));  // jitter is nonzero a.s.
}
