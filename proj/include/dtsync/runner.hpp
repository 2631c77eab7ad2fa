#pragma once

#include <chrono>
#include <filesystem>

#include "dtsync/io.hpp"

namespace dtsync {

struct SweepPoint {
    double axis_value = 0.0;  // Hz or dB
    double precision_s = 0.0;  // worst across-trial precision after settling
    double bound_std_s = 0.0;  // network-average delay-estimation bound
};

// One sweep point: run the full experiment at the given config and reduce it
// to a precision value plus the matching theoretical bound.
inline SweepPoint evaluate_sweep_point(const ExperimentConfig& cfg, double axis_value) {
    SweepPoint p;
    p.axis_value = axis_value;
    const auto rec = run_experiment(cfg);
    const auto pa = precision_accuracy(rec);
    p.precision_s = pa.defined ? pa.worst_precision_after_settle : 0.0;

    const auto w = generate_two_tone(cfg.tone_separation_hz, cfg.pulse_duration_s,
                                     cfg.rise_fall_s, cfg.sample_rate_hz);
    const double msb = mean_square_bandwidth(w);
    std::vector<double> vars;
    for (const auto& tr : rec.trials)
        for (double snr : tr.link_snr_db)
            vars.push_back(crlb_variance(
                msb, es_over_n0_from_snr(snr, cfg.pulse_duration_s, cfg.sample_rate_hz)));
    p.bound_std_s = std::sqrt(network_crlb(vars));
    return p;
}

inline std::vector<SweepPoint> run_bandwidth_sweep(const ExperimentConfig& base) {
    std::vector<SweepPoint> pts;
    for (double sep : parse_list("sweep_separations_hz", base.sweep_separations_hz)) {
        ExperimentConfig cfg = base;
        cfg.tone_separation_hz = sep;
        cfg.sweep_separations_hz.clear();
        pts.push_back(evaluate_sweep_point(cfg, sep));
    }
    return pts;
}

inline std::vector<SweepPoint> run_snr_sweep(const ExperimentConfig& base) {
    std::vector<SweepPoint> pts;
    for (double snr : parse_list("sweep_snr_db", base.sweep_snr_db)) {
        ExperimentConfig cfg = base;
        cfg.snr_db = snr;
        cfg.sweep_snr_db.clear();
        pts.push_back(evaluate_sweep_point(cfg, snr));
    }
    return pts;
}

inline void write_sweep_csv(const std::vector<SweepPoint>& pts, const std::string& axis_name,
                            const std::filesystem::path& path) {
    auto f = detail::open_out(path);
    f << axis_name << ",precision_s,bound_std_s\n";
    for (const auto& p : pts)
        f << p.axis_value << ',' << p.precision_s << ',' << p.bound_std_s << '\n';
}

// Run a config and emit the full artifact set into out_dir. Sweep axes, when
// present, replace the per-iteration outputs with a sweep table.
inline RunManifest run_and_write(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.config = cfg;
    manifest.seed = cfg.seed;

    auto emit = [&](const std::string& name, auto&& writer) {
        writer(out_dir / name);
        manifest.outputs.push_back(name);
    };

    if (!cfg.sweep_separations_hz.empty()) {
        const auto pts = run_bandwidth_sweep(cfg);
        emit("sweep_bandwidth.csv",
             [&](const std::filesystem::path& p) { write_sweep_csv(pts, "tone_separation_hz", p); });
    } else if (!cfg.sweep_snr_db.empty()) {
        const auto pts = run_snr_sweep(cfg);
        emit("sweep_snr.csv",
             [&](const std::filesystem::path& p) { write_sweep_csv(pts, "average_snr_db", p); });
    } else {
        const auto rec = run_experiment(cfg);
        emit("offsets.csv", [&](const std::filesystem::path& p) { write_offsets_csv(rec, p); });
        emit("truth.csv", [&](const std::filesystem::path& p) { write_truth_csv(rec, p); });
        emit("iterations.csv",
             [&](const std::filesystem::path& p) { write_iterations_csv(rec, p); });
        if (cfg.measurement == "signal")
            emit("crlb.csv", [&](const std::filesystem::path& p) { write_crlb_csv(rec, p); });
        emit("summary.json",
             [&](const std::filesystem::path& p) { write_summary_json(rec, p); });
    }

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

}  // namespace dtsync
