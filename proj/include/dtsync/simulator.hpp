#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtsync/channel.hpp"
#include "dtsync/clock.hpp"
#include "dtsync/consensus.hpp"
#include "dtsync/estimation.hpp"
#include "dtsync/twtt.hpp"
#include "dtsync/waveform.hpp"

namespace dtsync {

inline constexpr double kSpeedOfLight = 299792458.0;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Full description of one experiment. Defaults reproduce the reference
// bench parameters: 1.9 GHz carrier, 10 us pulse, 5 ns rise/fall, 500 ms
// resynchronization period, 200 MSa/s.
struct ExperimentConfig {
    int nodes = 4;
    std::string topology = "4conn-ring";  // preset name or "edges:0-1;1-2;..."
    double snr_db = 36.0;
    double snr_spread_db = 0.0;  // per-link SNR drawn uniform in +/- spread
    double tone_separation_hz = 40e6;
    double pulse_duration_s = 10e-6;
    double rise_fall_s = 5e-9;
    double sample_rate_hz = 200e6;
    double carrier_freq_hz = 1.9e9;
    double resync_period_s = 0.5;  // epoch spacing on the true timeline
    double epoch_duration_s = 0.2;  // clock drift applied per iteration
    int iterations = 100;
    int trials = 10;
    std::uint64_t seed = 1;
    double bias_range_s = 50e-9;     // initial static bias uniform in +/- range
    double drift_diffusion = 1e-23;  // s^2/s
    double jitter_std_s = 0.0;
    double prop_delay_s = -1.0;  // < 0: derive from positions
    std::string positions = "0,0; 3,0; 3,3; 0,3";  // meters
    std::string measurement = "signal";  // "signal" or "ideal"
    int sync_disable_after = -1;  // consensus updates stop after this iteration; -1 = never
    int window_len = 8192;        // receive window, samples (power of two)
    double processing_gap_s = 1e-4;
    int lut_grid = 256;
    double convergence_threshold_ps = 10.0;
    int settle_iteration = 40;  // summaries report worst precision after this
    std::string sweep_separations_hz;  // comma list; empty = no sweep
    std::string sweep_snr_db;
    int jobs = 1;

    void validate() const {
        auto fail = [](const std::string& key, const std::string& why) {
            throw ConfigError("config key '" + key + "': " + why);
        };
        if (nodes < 2) fail("nodes", "need at least 2 nodes");
        if (!(tone_separation_hz >= 0) || tone_separation_hz >= sample_rate_hz)
            fail("tone_separation_hz", "must lie inside Nyquist");
        if (!(pulse_duration_s > 2 * rise_fall_s))
            fail("pulse_duration_s", "must exceed twice rise_fall_s");
        if (!(sample_rate_hz > 0)) fail("sample_rate_hz", "must be > 0");
        if (iterations < 1) fail("iterations", "must be >= 1");
        if (trials < 1) fail("trials", "must be >= 1");
        if (!(epoch_duration_s > 0)) fail("epoch_duration_s", "must be > 0");
        if (!(resync_period_s > 0)) fail("resync_period_s", "must be > 0");
        if (window_len < 16 || (window_len & (window_len - 1)) != 0)
            fail("window_len", "must be a power of two >= 16");
        if (std::size_t(window_len) <
            std::size_t(std::llround(pulse_duration_s * sample_rate_hz)) + 64)
            fail("window_len", "too short for the pulse");
        if (measurement != "signal" && measurement != "ideal")
            fail("measurement", "must be 'signal' or 'ideal'");
        if (lut_grid < 16) fail("lut_grid", "must be >= 16");
        if (jobs < 1) fail("jobs", "must be >= 1");
        if (drift_diffusion < 0) fail("drift_diffusion", "must be >= 0");
        if (jitter_std_s < 0) fail("jitter_std_s", "must be >= 0");
        resolve_topology();  // throws on malformed edge lists
        if (prop_delay_s < 0) parse_positions();
    }

    TopologyGraph resolve_topology() const {
        if (topology.rfind("edges:", 0) == 0) {
            TopologyGraph g;
            g.n = nodes;
            std::istringstream ss(topology.substr(6));
            std::string tok;
            while (std::getline(ss, tok, ';')) {
                if (tok.empty()) continue;
                const auto dash = tok.find('-');
                if (dash == std::string::npos)
                    throw ConfigError("config key 'topology': bad edge '" + tok + "'");
                g.add_edge(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
            }
            if (g.edges.empty()) throw ConfigError("config key 'topology': empty edge list");
            return g;
        }
        TopologyGraph g = topology_preset(topology);
        if (g.n != nodes) throw ConfigError("config key 'topology': preset is for 4 nodes");
        return g;
    }

    std::vector<std::pair<double, double>> parse_positions() const {
        std::vector<std::pair<double, double>> pos;
        std::istringstream ss(positions);
        std::string tok;
        while (std::getline(ss, tok, ';')) {
            const auto comma = tok.find(',');
            if (comma == std::string::npos)
                throw ConfigError("config key 'positions': bad entry '" + tok + "'");
            pos.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
        }
        if (int(pos.size()) < nodes)
            throw ConfigError("config key 'positions': fewer entries than nodes");
        return pos;
    }

    double link_delay(int a, int b) const {
        if (prop_delay_s >= 0) return prop_delay_s;
        const auto pos = parse_positions();
        const double dx = pos[std::size_t(a)].first - pos[std::size_t(b)].first;
        const double dy = pos[std::size_t(a)].second - pos[std::size_t(b)].second;
        return std::sqrt(dx * dx + dy * dy) / kSpeedOfLight;
    }
};

// Everything recorded for one trial. Iteration indexing is identical for the
// measured and ground-truth series.
struct TrialRecord {
    std::uint64_t trial_seed = 0;
    std::vector<std::pair<int, int>> edge_list;   // lexicographic
    std::vector<std::pair<int, int>> pair_list;   // all i<j pairs
    std::vector<double> link_snr_db;              // configured per edge
    // iterations x edges: measured Delta_{ba} for edge (a,b), a < b
    std::vector<std::vector<double>> measured;
    std::vector<std::vector<std::uint8_t>> valid;
    std::vector<std::vector<double>> snr_estimate_db;
    // iterations x pairs: ground-truth offset clock_b - clock_a after the
    // epoch's consensus update (the simulated external verification readout)
    std::vector<std::vector<double>> truth;
    // true-time transmit intervals, for TDMA exclusivity checks
    std::vector<std::pair<double, double>> tx_intervals;
};

struct ExperimentRecord {
    ExperimentConfig config;
    std::vector<TrialRecord> trials;
};

namespace detail {

struct TrialState {
    std::vector<ClockState> clocks;
    std::vector<RngStream> node_rng;
    RngStream chan_rng{0};
    std::vector<LinkChannel> channels;  // aligned with edge_list
    TopologyGraph graph;
    MixingMatrix mixing;
    ExchangeContext ctx;
};

inline TrialState init_trial(const ExperimentConfig& cfg, const BiasLut& lut,
                             std::uint64_t trial_seed, TrialRecord& rec) {
    TrialState st;
    st.graph = cfg.resolve_topology();
    st.mixing = metropolis_hastings_weights(st.graph);
    rec.edge_list = st.graph.sorted_edges();
    for (int a = 0; a < cfg.nodes; ++a)
        for (int b = a + 1; b < cfg.nodes; ++b) rec.pair_list.emplace_back(a, b);

    RngStream init_rng(derive_seed(trial_seed, 0xC0FFEE));
    st.chan_rng = RngStream(derive_seed(trial_seed, 0x5EA));
    for (int i = 0; i < cfg.nodes; ++i) {
        ClockState c;
        c.node_id = i;
        c.static_bias = init_rng.uniform(-cfg.bias_range_s, cfg.bias_range_s);
        c.drift_diffusion = cfg.drift_diffusion;
        c.jitter_std = cfg.jitter_std_s;
        st.clocks.push_back(c);
        st.node_rng.emplace_back(derive_seed(trial_seed, 0xA0DE, std::uint64_t(i)));
    }
    for (const auto& [a, b] : rec.edge_list) {
        LinkChannel ch;
        ch.node_a = a;
        ch.node_b = b;
        ch.propagation_delay = cfg.link_delay(a, b);
        ch.snr_db = cfg.snr_db + init_rng.uniform(-cfg.snr_spread_db, cfg.snr_spread_db);
        ch.carrier_freq = cfg.carrier_freq_hz;
        st.channels.push_back(ch);
        rec.link_snr_db.push_back(ch.snr_db);
    }
    if (cfg.measurement == "signal") {
        auto w = generate_two_tone(cfg.tone_separation_hz, cfg.pulse_duration_s,
                                   cfg.rise_fall_s, cfg.sample_rate_hz);
        st.ctx = ExchangeContext(std::move(w), lut, std::size_t(cfg.window_len),
                                 cfg.processing_gap_s);
    }
    return st;
}

}  // namespace detail

// One synchronization epoch: a half-duplex exchange per edge in fixed
// lexicographic order, one synchronous consensus update, then one epoch of
// clock drift. The channel and clock biases are frozen within the epoch.
inline void run_epoch(detail::TrialState& st, const ExperimentConfig& cfg, int iteration,
                      TrialRecord& rec) {
    const int n = cfg.nodes;
    const double epoch_start = double(iteration) * cfg.resync_period_s;
    const bool signal = cfg.measurement == "signal";
    const double slot_pitch =
        signal ? 2.0 * (st.ctx.window_span() + cfg.processing_gap_s) : 0.0;

    std::vector<std::vector<double>> delta(std::size_t(n), std::vector<double>(std::size_t(n), 0.0));
    std::vector<double> measured(rec.edge_list.size(), 0.0);
    std::vector<std::uint8_t> valid(rec.edge_list.size(), 0);
    std::vector<double> snr_est(rec.edge_list.size(), 0.0);

    for (std::size_t e = 0; e < rec.edge_list.size(); ++e) {
        const auto [a, b] = rec.edge_list[e];
        if (!signal) {
            const double d = true_offset(st.clocks[std::size_t(a)], st.clocks[std::size_t(b)]);
            measured[e] = d;
            valid[e] = 1;
            snr_est[e] = cfg.snr_db;
            delta[std::size_t(b)][std::size_t(a)] = d;
            delta[std::size_t(a)][std::size_t(b)] = -d;
            continue;
        }
        const double slot = epoch_start + double(e) * slot_pitch;
        const auto res = exchange(st.clocks[std::size_t(a)], st.clocks[std::size_t(b)],
                                  st.channels[e], st.ctx, slot, st.chan_rng);
        if (!res.valid) continue;  // missed pulse: edge idle this iteration
        const double d = compute_offset(res.quad);
        measured[e] = d;
        valid[e] = 1;
        snr_est[e] = (res.snr_estimate_i_db + res.snr_estimate_j_db) / 2.0;
        delta[std::size_t(b)][std::size_t(a)] = d;
        delta[std::size_t(a)][std::size_t(b)] = -d;
        const double pulse_len = cfg.pulse_duration_s;
        rec.tx_intervals.emplace_back(slot + st.ctx.pre_margin(),
                                      slot + st.ctx.pre_margin() + pulse_len);
        rec.tx_intervals.emplace_back(slot + st.ctx.window_span() + cfg.processing_gap_s +
                                          st.ctx.pre_margin(),
                                      slot + st.ctx.window_span() + cfg.processing_gap_s +
                                          st.ctx.pre_margin() + pulse_len);
    }

    const bool apply = cfg.sync_disable_after < 0 || iteration < cfg.sync_disable_after;
    if (apply) {
        std::vector<double> corr(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) corr[std::size_t(i)] = st.clocks[std::size_t(i)].software_correction;
        corr = consensus_step(corr, delta, st.mixing);
        for (int i = 0; i < n; ++i) st.clocks[std::size_t(i)].software_correction = corr[std::size_t(i)];
    }

    rec.measured.push_back(std::move(measured));
    rec.valid.push_back(std::move(valid));
    rec.snr_estimate_db.push_back(std::move(snr_est));
    std::vector<double> truth;
    truth.reserve(rec.pair_list.size());
    for (const auto& [a, b] : rec.pair_list)
        truth.push_back(true_offset(st.clocks[std::size_t(a)], st.clocks[std::size_t(b)]));
    rec.truth.push_back(std::move(truth));

    for (int i = 0; i < n; ++i)
        advance(st.clocks[std::size_t(i)], cfg.epoch_duration_s, st.node_rng[std::size_t(i)]);
}

inline TrialRecord run_trial(const ExperimentConfig& cfg, const BiasLut& lut, int trial_index) {
    TrialRecord rec;
    rec.trial_seed = derive_seed(cfg.seed, 0x7121A1, std::uint64_t(trial_index));
    auto st = detail::init_trial(cfg, lut, rec.trial_seed, rec);
    for (int k = 0; k < cfg.iterations; ++k) run_epoch(st, cfg, k, rec);
    return rec;
}

inline BiasLut lut_for_config(const ExperimentConfig& cfg) {
    if (cfg.measurement != "signal") return BiasLut{};
    auto w = generate_two_tone(cfg.tone_separation_hz, cfg.pulse_duration_s, cfg.rise_fall_s,
                               cfg.sample_rate_hz);
    return build_bias_lut(w, std::size_t(cfg.lut_grid));
}

// Runs `trials` independent trials with derived per-trial seeds. Trials fan
// out over `jobs` threads; each owns its clocks and RNG streams, so results
// are identical regardless of parallelism.
inline ExperimentRecord run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentRecord rec;
    rec.config = cfg;
    rec.trials.resize(std::size_t(cfg.trials));
    const BiasLut lut = lut_for_config(cfg);

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1 || cfg.trials == 1) {
        for (int t = 0; t < cfg.trials; ++t) rec.trials[std::size_t(t)] = run_trial(cfg, lut, t);
        return rec;
    }
    std::vector<std::future<void>> futs;
    for (int w = 0; w < jobs; ++w) {
        futs.push_back(std::async(std::launch::async, [&, w] {
            for (int t = w; t < cfg.trials; t += jobs)
                rec.trials[std::size_t(t)] = run_trial(cfg, lut, t);
        }));
    }
    for (auto& f : futs) f.get();
    return rec;
}

// Across-trial summary series. Precision is the mean over edges of the
// across-trial standard deviation of the measured offsets; accuracy adds the
// mean absolute across-trial bias.
struct PrecisionAccuracy {
    bool defined = false;  // requires >= 2 trials
    std::vector<double> precision;  // per iteration, seconds
    std::vector<double> accuracy;
    double worst_precision_after_settle = 0.0;
    double worst_accuracy_after_settle = 0.0;
};

inline PrecisionAccuracy precision_accuracy(const ExperimentRecord& rec) {
    PrecisionAccuracy out;
    const std::size_t trials = rec.trials.size();
    if (trials < 2) return out;  // std across trials undefined
    out.defined = true;
    const std::size_t iters = rec.trials.front().measured.size();
    const std::size_t edges = rec.trials.front().edge_list.size();
    for (std::size_t k = 0; k < iters; ++k) {
        double prec = 0.0, bias = 0.0;
        for (std::size_t e = 0; e < edges; ++e) {
            double mean = 0.0;
            for (const auto& tr : rec.trials) mean += tr.measured[k][e];
            mean /= double(trials);
            double var = 0.0;
            for (const auto& tr : rec.trials) {
                const double d = tr.measured[k][e] - mean;
                var += d * d;
            }
            var /= double(trials - 1);
            prec += std::sqrt(var);
            bias += std::abs(mean);
        }
        out.precision.push_back(prec / double(edges));
        out.accuracy.push_back(prec / double(edges) + bias / double(edges));
    }
    const std::size_t settle = std::size_t(std::max(rec.config.settle_iteration, 0));
    for (std::size_t k = settle; k < iters; ++k) {
        out.worst_precision_after_settle = std::max(out.worst_precision_after_settle,
                                                    out.precision[k]);
        out.worst_accuracy_after_settle = std::max(out.worst_accuracy_after_settle,
                                                   out.accuracy[k]);
    }
    return out;
}

// Per-trial convergence iteration on the measured offsets.
inline std::optional<std::size_t> trial_convergence_iteration(const TrialRecord& tr,
                                                              double threshold_s) {
    const auto m = convergence_metrics(tr.measured);
    return threshold_crossing(m.max_abs_offset, threshold_s);
}

}  // namespace dtsync
