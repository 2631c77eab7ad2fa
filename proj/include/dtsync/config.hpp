#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dtsync/simulator.hpp"

namespace dtsync {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
}

inline int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    return int(x);
}

}  // namespace detail

// Apply one key=value setting. Throws ConfigError naming the offending key.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key,
                          const std::string& value) {
    using detail::to_double;
    using detail::to_int;
    if (key == "nodes") cfg.nodes = to_int(key, value);
    else if (key == "topology") cfg.topology = value;
    else if (key == "snr_db") cfg.snr_db = to_double(key, value);
    else if (key == "snr_spread_db") cfg.snr_spread_db = to_double(key, value);
    else if (key == "tone_separation_hz") cfg.tone_separation_hz = to_double(key, value);
    else if (key == "pulse_duration_s") cfg.pulse_duration_s = to_double(key, value);
    else if (key == "rise_fall_s") cfg.rise_fall_s = to_double(key, value);
    else if (key == "sample_rate_hz") cfg.sample_rate_hz = to_double(key, value);
    else if (key == "carrier_freq_hz") cfg.carrier_freq_hz = to_double(key, value);
    else if (key == "resync_period_s") cfg.resync_period_s = to_double(key, value);
    else if (key == "epoch_duration_s") cfg.epoch_duration_s = to_double(key, value);
    else if (key == "iterations") cfg.iterations = to_int(key, value);
    else if (key == "trials") cfg.trials = to_int(key, value);
    else if (key == "seed") cfg.seed = std::uint64_t(std::stoull(value));
    else if (key == "bias_range_s") cfg.bias_range_s = to_double(key, value);
    else if (key == "drift_diffusion") cfg.drift_diffusion = to_double(key, value);
    else if (key == "jitter_std_s") cfg.jitter_std_s = to_double(key, value);
    else if (key == "prop_delay_s") cfg.prop_delay_s = to_double(key, value);
    else if (key == "positions") cfg.positions = value;
    else if (key == "measurement") cfg.measurement = value;
    else if (key == "sync_disable_after") cfg.sync_disable_after = to_int(key, value);
    else if (key == "window_len") cfg.window_len = to_int(key, value);
    else if (key == "processing_gap_s") cfg.processing_gap_s = to_double(key, value);
    else if (key == "lut_grid") cfg.lut_grid = to_int(key, value);
    else if (key == "convergence_threshold_ps") cfg.convergence_threshold_ps = to_double(key, value);
    else if (key == "settle_iteration") cfg.settle_iteration = to_int(key, value);
    else if (key == "sweep_separations_hz") cfg.sweep_separations_hz = value;
    else if (key == "sweep_snr_db") cfg.sweep_snr_db = value;
    else if (key == "jobs") cfg.jobs = to_int(key, value);
    else throw ConfigError("config key '" + key + "': unknown key");
}

// Flat key = value format; '#' starts a comment.
inline ExperimentConfig parse_config_text(const std::string& text,
                                          ExperimentConfig base = ExperimentConfig{}) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line without '=': '" + line + "'");
        apply_setting(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline ExperimentConfig parse_config_file(const std::string& path,
                                          ExperimentConfig base = ExperimentConfig{}) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), base);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& csv) {
    std::vector<double> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        if (!tok.empty()) out.push_back(detail::to_double(key, tok));
    }
    return out;
}

struct Preset {
    std::string description;
    std::string settings;
};

// Figure-reproduction presets. Output is numeric series; plotting is external.
inline const std::map<std::string, Preset>& preset_catalog() {
    static const std::map<std::string, Preset> cat = {
        {"fig9-cabled",
         {"Cabled ring, 36 dB SNR, 40 MHz separation, 60 iterations x 10 trials",
          "topology = 4conn-ring\nsnr_db = 36\nsnr_spread_db = 0\nprop_delay_s = 10e-9\n"
          "iterations = 60\ntrials = 10\nsettle_iteration = 32\n"}},
        {"cabled-spread",
         {"Cabled ring with the 33 +/- 3 dB link SNR spread of the bench setup",
          "topology = 4conn-ring\nsnr_db = 33\nsnr_spread_db = 3\nprop_delay_s = 10e-9\n"
          "iterations = 60\ntrials = 10\nsettle_iteration = 32\n"}},
        {"fig11-wireless",
         {"Wireless ring, 36 dB SNR, 40 MHz separation, 60 iterations x 10 trials",
          "topology = 4conn-ring\nsnr_db = 36\niterations = 60\ntrials = 10\n"
          "settle_iteration = 20\n"}},
        {"wireless-spread",
         {"Wireless ring with the 32 +/- 4 dB link SNR spread",
          "topology = 4conn-ring\nsnr_db = 32\nsnr_spread_db = 4\niterations = 60\n"
          "trials = 10\nsettle_iteration = 20\n"}},
        {"topo-3conn",
         {"Three-connection (path) wireless topology, 100 iterations",
          "topology = 3conn\nsnr_db = 36\niterations = 100\ntrials = 10\n"}},
        {"topo-4conn-ring",
         {"Four-connection (ring) wireless topology, 100 iterations",
          "topology = 4conn-ring\nsnr_db = 36\niterations = 100\ntrials = 10\n"}},
        {"topo-5conn",
         {"Five-connection wireless topology, 100 iterations",
          "topology = 5conn\nsnr_db = 36\niterations = 100\ntrials = 10\n"}},
        {"topo-full",
         {"Fully connected wireless topology, 100 iterations",
          "topology = full\nsnr_db = 36\niterations = 100\ntrials = 10\n"}},
        {"fig14-free-drift",
         {"Converge for 40 iterations, then free-running drift readout for 60 s",
          "topology = 4conn-ring\nsnr_db = 36\nsync_disable_after = 40\niterations = 340\n"
          "trials = 5\n"}},
        {"fig15-locked",
         {"Continuous time synchronization over the same horizon",
          "topology = 4conn-ring\nsnr_db = 36\niterations = 340\ntrials = 5\n"}},
        {"fig16-bw-sweep",
         {"Tone-separation sweep 10-50 MHz at fixed 36 dB SNR (drift-free links)",
          "topology = 4conn-ring\nsnr_db = 36\ndrift_diffusion = 0\niterations = 60\n"
          "trials = 10\nsweep_separations_hz = 10e6, 20e6, 25e6, 40e6, 50e6\n"}},
        {"fig18-snr-sweep",
         {"Average-SNR sweep 14-36 dB at 40 MHz separation (drift-free links)",
          "topology = 4conn-ring\nsnr_spread_db = 4\ndrift_diffusion = 0\niterations = 60\n"
          "trials = 10\nsweep_snr_db = 14, 18, 22, 26, 30, 33, 36\n"}},
    };
    return cat;
}

inline ExperimentConfig preset_config(const std::string& name) {
    const auto& cat = preset_catalog();
    const auto it = cat.find(name);
    if (it == cat.end()) throw ConfigError("unknown preset: " + name);
    return parse_config_text(it->second.settings);
}

}  // namespace dtsync
