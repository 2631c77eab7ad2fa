#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "dtsync/simulator.hpp"
#include "oracles.hpp"

using namespace dtsync;

namespace {

// small, fast signal-mode configuration: 400-sample pulse in a 2048 window
ExperimentConfig small_signal() {
    ExperimentConfig cfg;
    cfg.pulse_duration_s = 2e-6;
    cfg.window_len = 2048;
    cfg.lut_grid = 64;
    cfg.iterations = 3;
    cfg.trials = 2;
    cfg.drift_diffusion = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("config validation names the offending key") {
    ExperimentConfig cfg;
    cfg.nodes = 1;
    CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("nodes"));
    cfg = ExperimentConfig{};
    cfg.window_len = 1000;  // not a power of two
    CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("window_len"));
    cfg = ExperimentConfig{};
    cfg.measurement = "psychic";
    CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("measurement"));
    cfg = ExperimentConfig{};
    cfg.topology = "edges:0-1;banana";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(ExperimentConfig{}.validate());
}

TEST_CASE("explicit edge lists and positions resolve correctly") {
    ExperimentConfig cfg;
    cfg.topology = "edges:0-1;1-2;2-3;0-3";
    const auto g = cfg.resolve_topology();
    CHECK(g.edges.size() == 4);
    CHECK(g.has_edge(0, 3));

    // default square: 3 m sides, ~10 ns per side link
    CHECK(cfg.link_delay(0, 1) == Catch::Approx(3.0 / kSpeedOfLight).epsilon(1e-12));
    CHECK(cfg.link_delay(0, 2) == Catch::Approx(std::sqrt(18.0) / kSpeedOfLight).epsilon(1e-12));
    cfg.prop_delay_s = 10e-9;
    CHECK(cfg.link_delay(0, 2) == Catch::Approx(10e-9));

    cfg = ExperimentConfig{};
    cfg.positions = "0,0; 1,1";
    CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("positions"));
}

TEST_CASE("ideal measurement mode reproduces plain weighted averaging") {
    ExperimentConfig cfg;
    cfg.measurement = "ideal";
    cfg.drift_diffusion = 0.0;
    cfg.iterations = 15;
    cfg.trials = 1;
    const auto rec = run_experiment(cfg);
    const auto& tr = rec.trials.front();

    // reconstruct the initial corrections from the iteration-0 measurements
    // (edge (a,b) measures clock_b - clock_a before any update)
    auto edge_val = [&](int a, int b, std::size_t k) {
        for (std::size_t e = 0; e < tr.edge_list.size(); ++e)
            if (tr.edge_list[e] == std::make_pair(a, b)) return tr.measured[k][e];
        REQUIRE(false);
        return 0.0;
    };
    std::vector<double> x{0.0, edge_val(0, 1, 0), edge_val(0, 1, 0) + edge_val(1, 2, 0),
                          edge_val(0, 3, 0)};
    const auto w = metropolis_hastings_weights(topology_preset("4conn-ring"));

    for (std::size_t k = 0; k + 1 < tr.measured.size(); ++k) {
        x = oracles::matrix_iterate(w.w, x, 1);
        // iteration k truth (after update k) equals the oracle differences
        for (std::size_t p = 0; p < tr.pair_list.size(); ++p) {
            const auto [a, b] = tr.pair_list[p];
            CHECK(tr.truth[k][p] ==
                  Catch::Approx(x[std::size_t(b)] - x[std::size_t(a)]).margin(1e-18));
        }
        // and the next iteration's edge measurements agree with the truth
        for (std::size_t e = 0; e < tr.edge_list.size(); ++e) {
            const auto [a, b] = tr.edge_list[e];
            CHECK(tr.measured[k + 1][e] ==
                  Catch::Approx(x[std::size_t(b)] - x[std::size_t(a)]).margin(1e-18));
        }
    }
}

TEST_CASE("ideal drift-free runs converge and stay converged") {
    ExperimentConfig cfg;
    cfg.measurement = "ideal";
    cfg.drift_diffusion = 0.0;
    cfg.iterations = 40;
    cfg.trials = 3;
    const auto rec = run_experiment(cfg);
    for (const auto& tr : rec.trials) {
        const auto cross = trial_convergence_iteration(tr, 10e-12);
        REQUIRE(cross.has_value());
        CHECK(*cross <= 12);
        // final disagreement is numerically zero
        for (double d : tr.measured.back()) CHECK(std::abs(d) < 1e-15);
    }
}

TEST_CASE("same seed gives identical results, different seeds differ") {
    auto cfg = small_signal();
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    cfg.seed = 2;
    const auto c = run_experiment(cfg);
    REQUIRE(a.trials.size() == b.trials.size());
    bool any_diff_c = false;
    for (std::size_t t = 0; t < a.trials.size(); ++t) {
        REQUIRE(a.trials[t].measured == b.trials[t].measured);
        if (a.trials[t].measured != c.trials[t].measured) any_diff_c = true;
    }
    CHECK(any_diff_c);
}

TEST_CASE("results are independent of the number of worker threads") {
    auto cfg = small_signal();
    cfg.trials = 3;
    const auto serial = run_experiment(cfg);
    cfg.jobs = 3;
    const auto parallel = run_experiment(cfg);
    for (std::size_t t = 0; t < serial.trials.size(); ++t) {
        CHECK(serial.trials[t].measured == parallel.trials[t].measured);
        CHECK(serial.trials[t].truth == parallel.trials[t].truth);
    }
}

TEST_CASE("signal-mode measurements track the true offsets") {
    auto cfg = small_signal();
    cfg.snr_db = 80.0;  // near-noiseless link
    cfg.lut_grid = 128;
    cfg.iterations = 14;
    cfg.trials = 1;
    const auto rec = run_experiment(cfg);
    const auto& tr = rec.trials.front();
    // after the updates settle the measured offsets must be within estimator
    // error of zero, like the truth
    for (std::size_t e = 0; e < tr.edge_list.size(); ++e) {
        CHECK(tr.valid.back()[e] == 1);
        CHECK(std::abs(tr.measured.back()[e]) < 10e-12);
    }
}

TEST_CASE("transmissions never overlap in true time") {
    auto cfg = small_signal();
    cfg.iterations = 4;
    cfg.trials = 1;
    const auto rec = run_experiment(cfg);
    auto iv = rec.trials.front().tx_intervals;
    REQUIRE(iv.size() >= 8);
    std::sort(iv.begin(), iv.end());
    for (std::size_t k = 0; k + 1 < iv.size(); ++k) CHECK(iv[k].second <= iv[k + 1].first);
}

TEST_CASE("free-running clocks drift apart once updates stop") {
    ExperimentConfig cfg;
    cfg.measurement = "ideal";
    cfg.sync_disable_after = 1;
    cfg.bias_range_s = 0.0;  // start aligned so the readout is pure drift
    cfg.drift_diffusion = 1e-20;
    cfg.iterations = 60;
    cfg.trials = 4;
    const auto rec = run_experiment(cfg);
    double early = 0.0, late = 0.0;
    for (const auto& tr : rec.trials) {
        const auto m = convergence_metrics(tr.truth);
        early += m.max_abs_offset[2];
        late += m.max_abs_offset[59];
    }
    CHECK(late > early);
}

TEST_CASE("precision and accuracy reduce injected statistics correctly") {
    ExperimentRecord rec;
    rec.config.settle_iteration = 1;
    rec.trials.resize(3);
    for (std::size_t t = 0; t < 3; ++t) {
        auto& tr = rec.trials[t];
        tr.edge_list = {{0, 1}};
        tr.pair_list = {{0, 1}};
        // iteration 0: values 1,2,3 ps; iteration 1: values -1,0,1 ps
        tr.measured = {{double(t + 1) * 1e-12}, {double(t) * 1e-12 - 1e-12}};
    }
    const auto pa = precision_accuracy(rec);
    REQUIRE(pa.defined);
    REQUIRE(pa.precision.size() == 2);
    CHECK(pa.precision[0] == Catch::Approx(1e-12).margin(1e-20));
    CHECK(pa.accuracy[0] == Catch::Approx(3e-12).margin(1e-20));  // std 1 + |mean| 2
    CHECK(pa.precision[1] == Catch::Approx(1e-12).margin(1e-20));
    CHECK(pa.accuracy[1] == Catch::Approx(1e-12).margin(1e-20));  // zero-mean iteration
    CHECK(pa.worst_precision_after_settle == Catch::Approx(1e-12).margin(1e-20));

    rec.trials.resize(1);
    CHECK(!precision_accuracy(rec).defined);
}

TEST_CASE("per-trial seeds differ between trials but not between runs") {
    auto cfg = small_signal();
    const auto rec = run_experiment(cfg);
    CHECK(rec.trials[0].trial_seed != rec.trials[1].trial_seed);
    CHECK(rec.trials[0].trial_seed == derive_seed(cfg.seed, 0x7121A1, 0));
}
