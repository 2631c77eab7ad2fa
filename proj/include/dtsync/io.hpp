#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtsync/config.hpp"
#include "dtsync/simulator.hpp"

namespace dtsync {

inline constexpr const char* kArtifactVersion = "1.0.0";

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write output file: " + p.string());
    f.precision(17);
    return f;
}

inline double dbps(double offset_s) {
    return 10.0 * std::log10(std::max(std::abs(offset_s), 1e-30) / 1e-12);
}

}  // namespace detail

// Measured per-edge offsets plus the matching ground truth, one row per
// trial/iteration/edge.
inline void write_offsets_csv(const ExperimentRecord& rec, const std::filesystem::path& path) {
    auto f = detail::open_out(path);
    f << "trial,iteration,node_i,node_j,measured_offset_s,measured_offset_dbps,"
         "truth_offset_s,valid,link_snr_db,snr_estimate_db\n";
    for (std::size_t t = 0; t < rec.trials.size(); ++t) {
        const auto& tr = rec.trials[t];
        for (std::size_t k = 0; k < tr.measured.size(); ++k) {
            for (std::size_t e = 0; e < tr.edge_list.size(); ++e) {
                const auto [a, b] = tr.edge_list[e];
                // pair index of (a,b) in the all-pairs list
                std::size_t p = 0;
                while (tr.pair_list[p] != std::make_pair(a, b)) ++p;
                f << t << ',' << k << ',' << a << ',' << b << ',' << tr.measured[k][e] << ','
                  << detail::dbps(tr.measured[k][e]) << ',' << tr.truth[k][p] << ','
                  << int(tr.valid[k][e]) << ',' << tr.link_snr_db[e] << ','
                  << tr.snr_estimate_db[k][e] << '\n';
            }
        }
    }
}

// Ground-truth offsets for every node pair (connected or not).
inline void write_truth_csv(const ExperimentRecord& rec, const std::filesystem::path& path) {
    auto f = detail::open_out(path);
    f << "trial,iteration,node_i,node_j,truth_offset_s,truth_offset_dbps\n";
    for (std::size_t t = 0; t < rec.trials.size(); ++t) {
        const auto& tr = rec.trials[t];
        for (std::size_t k = 0; k < tr.truth.size(); ++k)
            for (std::size_t p = 0; p < tr.pair_list.size(); ++p)
                f << t << ',' << k << ',' << tr.pair_list[p].first << ','
                  << tr.pair_list[p].second << ',' << tr.truth[k][p] << ','
                  << detail::dbps(tr.truth[k][p]) << '\n';
    }
}

// Per-iteration aggregates per trial.
inline void write_iterations_csv(const ExperimentRecord& rec,
                                 const std::filesystem::path& path) {
    auto f = detail::open_out(path);
    f << "trial,iteration,max_abs_measured_s,max_abs_measured_dbps,max_abs_truth_s\n";
    for (std::size_t t = 0; t < rec.trials.size(); ++t) {
        const auto& tr = rec.trials[t];
        const auto m = convergence_metrics(tr.measured);
        const auto g = convergence_metrics(tr.truth);
        for (std::size_t k = 0; k < m.max_abs_offset.size(); ++k)
            f << t << ',' << k << ',' << m.max_abs_offset[k] << ',' << m.max_abs_dbps[k] << ','
              << g.max_abs_offset[k] << '\n';
    }
}

// Per-link delay-estimation bounds for the configured waveform.
inline void write_crlb_csv(const ExperimentRecord& rec, const std::filesystem::path& path) {
    auto f = detail::open_out(path);
    f << "node_i,node_j,link_snr_db,crlb_variance_s2,crlb_std_s\n";
    const auto& cfg = rec.config;
    const auto w = generate_two_tone(cfg.tone_separation_hz, cfg.pulse_duration_s,
                                     cfg.rise_fall_s, cfg.sample_rate_hz);
    const double msb = mean_square_bandwidth(w);
    const auto& tr = rec.trials.front();
    std::vector<double> vars;
    for (std::size_t e = 0; e < tr.edge_list.size(); ++e) {
        const double v = crlb_variance(
            msb, es_over_n0_from_snr(tr.link_snr_db[e], cfg.pulse_duration_s,
                                     cfg.sample_rate_hz));
        vars.push_back(v);
        f << tr.edge_list[e].first << ',' << tr.edge_list[e].second << ','
          << tr.link_snr_db[e] << ',' << v << ',' << std::sqrt(v) << '\n';
    }
    const double net = network_crlb(vars);
    f << "-1,-1," << cfg.snr_db << ',' << net << ',' << std::sqrt(net) << "  # network average\n";
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
    return nlohmann::json{{"nodes", c.nodes},
                          {"topology", c.topology},
                          {"snr_db", c.snr_db},
                          {"snr_spread_db", c.snr_spread_db},
                          {"tone_separation_hz", c.tone_separation_hz},
                          {"pulse_duration_s", c.pulse_duration_s},
                          {"rise_fall_s", c.rise_fall_s},
                          {"sample_rate_hz", c.sample_rate_hz},
                          {"carrier_freq_hz", c.carrier_freq_hz},
                          {"resync_period_s", c.resync_period_s},
                          {"epoch_duration_s", c.epoch_duration_s},
                          {"iterations", c.iterations},
                          {"trials", c.trials},
                          {"seed", c.seed},
                          {"bias_range_s", c.bias_range_s},
                          {"drift_diffusion", c.drift_diffusion},
                          {"jitter_std_s", c.jitter_std_s},
                          {"prop_delay_s", c.prop_delay_s},
                          {"positions", c.positions},
                          {"measurement", c.measurement},
                          {"sync_disable_after", c.sync_disable_after},
                          {"window_len", c.window_len},
                          {"processing_gap_s", c.processing_gap_s},
                          {"lut_grid", c.lut_grid},
                          {"convergence_threshold_ps", c.convergence_threshold_ps},
                          {"settle_iteration", c.settle_iteration},
                          {"sweep_separations_hz", c.sweep_separations_hz},
                          {"sweep_snr_db", c.sweep_snr_db},
                          {"jobs", c.jobs}};
}

inline void write_summary_json(const ExperimentRecord& rec, const std::filesystem::path& path) {
    const auto pa = precision_accuracy(rec);
    nlohmann::json j;
    j["config"] = config_json(rec.config);
    j["precision_defined"] = pa.defined;
    if (pa.defined) {
        j["precision_s"] = pa.precision;
        j["accuracy_s"] = pa.accuracy;
        j["worst_precision_after_settle_s"] = pa.worst_precision_after_settle;
        j["worst_accuracy_after_settle_s"] = pa.worst_accuracy_after_settle;
    }
    const double thr = rec.config.convergence_threshold_ps * 1e-12;
    nlohmann::json conv = nlohmann::json::array();
    for (const auto& tr : rec.trials) {
        const auto c = trial_convergence_iteration(tr, thr);
        conv.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
    }
    j["convergence_iteration_per_trial"] = conv;
    j["convergence_threshold_ps"] = rec.config.convergence_threshold_ps;
    auto f = detail::open_out(path);
    f << j.dump(2) << '\n';
}

struct RunManifest {
    ExperimentConfig config;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
};

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    nlohmann::json j;
    j["artifact_version"] = kArtifactVersion;
    j["seed"] = m.seed;
    j["config"] = config_json(m.config);
    j["outputs"] = m.outputs;
    j["wall_seconds"] = m.wall_seconds;
    auto f = detail::open_out(path);
    f << j.dump(2) << '\n';
}

}  // namespace dtsync
