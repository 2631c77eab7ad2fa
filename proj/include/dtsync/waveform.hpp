#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dtsync/fft.hpp"

namespace dtsync {

using cplx = std::complex<double>;

// Pulsed two-tone delay-estimation waveform: two equal-power complex tones at
// +/- tone_separation/2 under a unit-peak envelope with raised-cosine edges.
struct TwoToneWaveform {
    std::vector<cplx> samples;
    double sample_rate = 0.0;      // Hz
    double tone_separation = 0.0;  // Hz, spacing between the two tones
    double pulse_duration = 0.0;   // seconds
    double rise_fall_time = 0.0;   // seconds
    double phase = 0.0;            // radians

    double sample_interval() const { return 1.0 / sample_rate; }

    bool same_descriptor(const TwoToneWaveform& o) const {
        return sample_rate == o.sample_rate && tone_separation == o.tone_separation &&
               pulse_duration == o.pulse_duration && rise_fall_time == o.rise_fall_time;
    }
};

inline TwoToneWaveform generate_two_tone(double tone_separation, double pulse_duration,
                                         double rise_fall, double sample_rate,
                                         double phase = 0.0) {
    if (!(tone_separation >= 0.0) || !(tone_separation < sample_rate))
        throw std::invalid_argument("two-tone: tone separation must lie inside Nyquist");
    if (!(pulse_duration > 2.0 * rise_fall))
        throw std::invalid_argument("two-tone: pulse duration must exceed twice the rise/fall time");
    if (!(sample_rate > 0.0)) throw std::invalid_argument("two-tone: sample rate must be > 0");

    const std::size_t n = std::size_t(std::llround(pulse_duration * sample_rate));
    const double pi = 3.14159265358979323846;
    const double ts = 1.0 / sample_rate;
    const double f = tone_separation / 2.0;

    TwoToneWaveform w;
    w.sample_rate = sample_rate;
    w.tone_separation = tone_separation;
    w.pulse_duration = pulse_duration;
    w.rise_fall_time = rise_fall;
    w.phase = phase;
    w.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = double(k) * ts;
        double env = 1.0;
        if (rise_fall > 0.0) {
            if (t < rise_fall)
                env = 0.5 * (1.0 - std::cos(pi * t / rise_fall));
            else if (t > pulse_duration - rise_fall)
                env = 0.5 * (1.0 - std::cos(pi * (pulse_duration - t) / rise_fall));
        }
        // (1/2)(e^{j(-2pi f t + phi)} + e^{j(2pi f t + phi)}) = e^{j phi} cos(2pi f t)
        w.samples[k] = env * std::polar(1.0, phase) * std::cos(2.0 * pi * f * t);
    }
    return w;
}

// Sum of |s[n]|^2 (sample-domain energy).
inline double sample_energy(const TwoToneWaveform& w) {
    double e = 0.0;
    for (const auto& s : w.samples) e += std::norm(s);
    return e;
}

// Mean power over the pulse duration; the per-sample SNR is referenced to this.
inline double pulse_power(const TwoToneWaveform& w) {
    if (w.samples.empty()) throw std::invalid_argument("pulse_power: empty waveform");
    return sample_energy(w) / double(w.samples.size());
}

// Mean-squared bandwidth: second moment of the power spectrum about DC,
//   zeta^2 = sum (2 pi f_k)^2 |S_k|^2 / sum |S_k|^2   [rad^2/s^2]
inline double mean_square_bandwidth(const TwoToneWaveform& w) {
    if (w.samples.empty()) throw std::invalid_argument("mean_square_bandwidth: empty waveform");
    const std::size_t n = fft::next_pow2(w.samples.size());
    std::vector<cplx> a(n, cplx(0.0, 0.0));
    std::copy(w.samples.begin(), w.samples.end(), a.begin());
    fft::transform(a, false);
    const double pi = 3.14159265358979323846;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = std::norm(a[k]);
        const double wk = 2.0 * pi * fft::bin_freq(k, n, w.sample_rate);
        num += wk * wk * p;
        den += p;
    }
    if (den <= 0.0) throw std::invalid_argument("mean_square_bandwidth: all-zero waveform");
    return num / den;
}

// Delay-estimation variance bound 1/(2 zeta^2 Es/N0)  [s^2].
inline double crlb_variance(double mean_sq_bandwidth, double es_over_n0) {
    if (!(mean_sq_bandwidth > 0.0) || !(es_over_n0 > 0.0))
        throw std::invalid_argument("crlb_variance: arguments must be > 0");
    return 1.0 / (2.0 * mean_sq_bandwidth * es_over_n0);
}

// Matched-filter energy ratio for a per-sample SNR: Es/N0 = SNR * Tp * fs.
inline double es_over_n0_from_snr(double snr_db, double pulse_duration, double sample_rate) {
    return std::pow(10.0, snr_db / 10.0) * pulse_duration * sample_rate;
}

// Network bound: mean of the per-link variances.
inline double network_crlb(const std::vector<double>& link_variances) {
    if (link_variances.empty()) throw std::invalid_argument("network_crlb: empty link set");
    double s = 0.0;
    for (double v : link_variances) s += v;
    return s / double(link_variances.size());
}

}  // namespace dtsync
