#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtsync/channel.hpp"
#include "dtsync/fft.hpp"
#include "dtsync/waveform.hpp"

namespace dtsync {

// Detection threshold above the estimated noise-floor mean, in dB.
inline constexpr double kDetectionThresholdDb = 13.0;

// Conjugate spectrum of the template at the correlation FFT size, cached by
// callers that run many estimates against one template.
struct MatchedFilterPlan {
    std::size_t fft_len = 0;
    std::size_t template_len = 0;
    std::vector<cplx> conj_spectrum;

    MatchedFilterPlan() = default;
    MatchedFilterPlan(const TwoToneWaveform& w, std::size_t rx_len) {
        template_len = w.samples.size();
        fft_len = fft::next_pow2(rx_len + template_len);
        conj_spectrum = template_spectrum(w, fft_len);
        for (auto& x : conj_spectrum) x = std::conj(x);
    }
};

// |cross-correlation| of rx against the template, valid lags 0..len(rx)-N.
inline std::vector<double> matched_filter(const std::vector<cplx>& rx,
                                          const MatchedFilterPlan& plan) {
    if (rx.size() < plan.template_len)
        throw std::invalid_argument("matched_filter: template longer than rx");
    std::vector<cplx> a(plan.fft_len, cplx(0.0, 0.0));
    std::copy(rx.begin(), rx.end(), a.begin());
    fft::transform(a, false);
    for (std::size_t k = 0; k < plan.fft_len; ++k) a[k] *= plan.conj_spectrum[k];
    fft::transform(a, true);
    const std::size_t n_valid = rx.size() - plan.template_len + 1;
    std::vector<double> mag(n_valid);
    for (std::size_t k = 0; k < n_valid; ++k) mag[k] = std::abs(a[k]);
    return mag;
}

inline std::vector<double> matched_filter(const std::vector<cplx>& rx,
                                          const TwoToneWaveform& w) {
    return matched_filter(rx, MatchedFilterPlan(w, rx.size()));
}

// Quadratic least-squares refinement: parabola through the peak and its two
// neighbors; returns the sub-sample correction in seconds, clamped to
// [-Ts/2, Ts/2]. A flat triple is degenerate and yields 0.
inline double qls_refine(const std::vector<double>& mf, std::size_t n_max, double ts,
                         bool* degenerate = nullptr) {
    if (n_max < 1 || n_max + 1 >= mf.size())
        throw std::invalid_argument("qls_refine: peak at window edge");
    const double ym = mf[n_max - 1], y0 = mf[n_max], yp = mf[n_max + 1];
    if (degenerate != nullptr) *degenerate = false;
    const double den = ym - 2.0 * y0 + yp;
    if (den == 0.0) {
        if (degenerate != nullptr) *degenerate = true;
        return 0.0;
    }
    const double tau = (ts / 2.0) * (ym - yp) / den;
    return std::clamp(tau, -ts / 2.0, ts / 2.0);
}

// Residual QLS bias versus true fractional delay, tabulated on a uniform grid
// over [-0.5, 0.5) sample. Valid only for the waveform it was built from.
struct BiasLut {
    std::vector<double> residual_bias;  // seconds, grid point m at -0.5 + m/size
    double tone_separation = 0.0;
    double sample_rate = 0.0;
    double pulse_duration = 0.0;
    double rise_fall_time = 0.0;

    std::size_t size() const { return residual_bias.size(); }

    bool matches(const TwoToneWaveform& w) const {
        return tone_separation == w.tone_separation && sample_rate == w.sample_rate &&
               pulse_duration == w.pulse_duration && rise_fall_time == w.rise_fall_time;
    }

    // Linear interpolation at a fractional delay in [-0.5, 0.5); the grid is
    // periodic in one sample.
    double bias_at(double frac) const {
        const double n = double(size());
        double pos = (frac + 0.5) * n;
        double i0 = std::floor(pos);
        const double a = pos - i0;
        const auto idx = [&](long i) {
            long m = i % long(size());
            if (m < 0) m += long(size());
            return std::size_t(m);
        };
        return (1.0 - a) * residual_bias[idx(long(i0))] + a * residual_bias[idx(long(i0) + 1)];
    }
};

struct ToaEstimate {
    double toa = 0.0;            // seconds from window start
    std::size_t peak_index = 0;  // sample
    double peak_value = 0.0;     // matched-filter magnitude
    double snr_estimate_db = 0.0;
};

namespace detail {

// Noise-floor mean of the matched-filter power, from the median over lags with
// no template overlap with the peak. Returns false when no such lags exist.
inline bool noise_floor(const std::vector<double>& mf, std::size_t peak,
                        std::size_t template_len, double* floor_mean) {
    std::vector<double> off;
    off.reserve(mf.size());
    for (std::size_t k = 0; k < mf.size(); ++k) {
        if (k + template_len <= peak || k >= peak + template_len) off.push_back(mf[k] * mf[k]);
    }
    if (off.size() < 32) return false;
    std::nth_element(off.begin(), off.begin() + off.size() / 2, off.end());
    const double median = off[off.size() / 2];
    *floor_mean = median / std::log(2.0);  // exponential power distribution
    return true;
}

}  // namespace detail

// Two-stage time-of-arrival estimate: matched-filter peak, QLS refinement,
// LUT de-biasing. Returns nullopt on a missed pulse (no peak above the
// detection threshold, or peak unusable at the window edge).
inline std::optional<ToaEstimate> estimate_toa(const std::vector<cplx>& rx,
                                               const TwoToneWaveform& w, const BiasLut& lut,
                                               const MatchedFilterPlan& plan) {
    if (!lut.matches(w)) throw std::invalid_argument("estimate_toa: LUT/waveform mismatch");
    const auto mf = matched_filter(rx, plan);
    const std::size_t n_max =
        std::size_t(std::max_element(mf.begin(), mf.end()) - mf.begin());
    if (n_max < 1 || n_max + 1 >= mf.size()) return std::nullopt;

    double floor_mean = 0.0;
    const double peak_power = mf[n_max] * mf[n_max];
    if (!detail::noise_floor(mf, n_max, w.samples.size(), &floor_mean)) return std::nullopt;
    if (floor_mean > 0.0 &&
        peak_power < floor_mean * std::pow(10.0, kDetectionThresholdDb / 10.0))
        return std::nullopt;

    const double ts = w.sample_interval();
    const double dt = qls_refine(mf, n_max, ts);
    ToaEstimate est;
    est.peak_index = n_max;
    est.peak_value = mf[n_max];
    est.toa = double(n_max) * ts + dt - lut.bias_at(dt / ts);
    // Per-sample SNR: post-filter peak-to-floor ratio minus the processing
    // gain E/P (effective pulse length in samples).
    const double gain = sample_energy(w) / pulse_power(w);
    est.snr_estimate_db =
        10.0 * std::log10(peak_power / std::max(floor_mean, 1e-300)) - 10.0 * std::log10(gain);
    return est;
}

inline std::optional<ToaEstimate> estimate_toa(const std::vector<cplx>& rx,
                                               const TwoToneWaveform& w, const BiasLut& lut) {
    return estimate_toa(rx, w, lut, MatchedFilterPlan(w, rx.size()));
}

// Build the residual-bias table by sweeping noiseless fractional delays
// through the full matched-filter + QLS chain.
inline BiasLut build_bias_lut(const TwoToneWaveform& w, std::size_t grid_size = 256) {
    if (grid_size < 16) throw std::invalid_argument("build_bias_lut: grid too small");
    BiasLut lut;
    lut.tone_separation = w.tone_separation;
    lut.sample_rate = w.sample_rate;
    lut.pulse_duration = w.pulse_duration;
    lut.rise_fall_time = w.rise_fall_time;
    lut.residual_bias.resize(grid_size);

    const double ts = w.sample_interval();
    const std::size_t window = fft::next_pow2(w.samples.size() + 256);
    const std::size_t base = 64;
    LinkChannel ch;  // noiseless, baseband
    const auto spectrum = template_spectrum(w, window);
    MatchedFilterPlan plan(w, window);

    for (std::size_t m = 0; m < grid_size; ++m) {
        const double frac = -0.5 + double(m) / double(grid_size);
        const double truth = (double(base) + frac) * ts;
        const auto rx = delayed_window(spectrum, truth, w.sample_rate, 0.0);
        const auto mf = matched_filter(rx, plan);
        const std::size_t n_max =
            std::size_t(std::max_element(mf.begin(), mf.end()) - mf.begin());
        const double raw = double(n_max) * ts + qls_refine(mf, n_max, ts);
        lut.residual_bias[m] = raw - truth;
    }
    return lut;
}

// Flat CSV cache for the LUT, keyed by the waveform descriptor.
inline void save_bias_lut(const BiasLut& lut, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_bias_lut: cannot open " + path);
    f.precision(17);
    f << "# tone_separation_hz,sample_rate_hz,pulse_duration_s,rise_fall_s,grid_size\n";
    f << lut.tone_separation << ',' << lut.sample_rate << ',' << lut.pulse_duration << ','
      << lut.rise_fall_time << ',' << lut.size() << '\n';
    f << "fractional_delay_sample,residual_bias_s\n";
    for (std::size_t m = 0; m < lut.size(); ++m)
        f << (-0.5 + double(m) / double(lut.size())) << ',' << lut.residual_bias[m] << '\n';
}

inline std::optional<BiasLut> load_bias_lut(const std::string& path,
                                            const TwoToneWaveform& expected) {
    std::ifstream f(path);
    if (!f) return std::nullopt;
    std::string line;
    if (!std::getline(f, line)) return std::nullopt;  // comment header
    if (!std::getline(f, line)) return std::nullopt;
    BiasLut lut;
    std::size_t grid = 0;
    {
        std::istringstream ss(line);
        char c;
        if (!(ss >> lut.tone_separation >> c >> lut.sample_rate >> c >> lut.pulse_duration >>
              c >> lut.rise_fall_time >> c >> grid))
            return std::nullopt;
    }
    if (!lut.matches(expected)) return std::nullopt;
    if (!std::getline(f, line)) return std::nullopt;  // column header
    lut.residual_bias.reserve(grid);
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        double frac = 0.0, bias = 0.0;
        char c;
        if (ss >> frac >> c >> bias) lut.residual_bias.push_back(bias);
    }
    if (lut.size() != grid) return std::nullopt;
    return lut;
}

}  // namespace dtsync
