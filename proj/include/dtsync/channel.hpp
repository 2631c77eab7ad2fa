#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dtsync/fft.hpp"
#include "dtsync/rng.hpp"
#include "dtsync/waveform.hpp"

namespace dtsync {

// Reciprocal quasi-static link between a node pair: both directions of one
// exchange see the same delay and SNR, with independent noise realizations.
struct LinkChannel {
    int node_a = 0;
    int node_b = 0;
    double propagation_delay = 0.0;  // seconds, >= 0
    double snr_db = 0.0;             // per-sample SNR at the receiver
    double carrier_freq = 0.0;       // Hz
};

struct WindowOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FFT of the template zero-padded to `n` points.
inline std::vector<cplx> template_spectrum(const TwoToneWaveform& w, std::size_t n) {
    if (n < w.samples.size())
        throw std::invalid_argument("template_spectrum: window shorter than template");
    std::vector<cplx> a(n, cplx(0.0, 0.0));
    std::copy(w.samples.begin(), w.samples.end(), a.begin());
    fft::transform(a, false);
    return a;
}

// Delay the padded template by `delay` seconds (integer plus fractional sample)
// via a frequency-domain linear phase ramp, exact for the band-limited signal.
// `spectrum` is template_spectrum(w, window_len). Carrier rotation
// e^{-j 2 pi fc delay} is applied uniformly.
inline std::vector<cplx> delayed_window(const std::vector<cplx>& spectrum, double delay,
                                        double sample_rate, double carrier_freq) {
    const std::size_t n = spectrum.size();
    const double pi = 3.14159265358979323846;
    std::vector<cplx> a(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = fft::bin_freq(k, n, sample_rate);
        a[k] = spectrum[k] * std::polar(1.0, -2.0 * pi * f * delay);
    }
    fft::transform(a, true);
    if (carrier_freq != 0.0) {
        const cplx rot = std::polar(1.0, -2.0 * pi * carrier_freq * delay);
        for (auto& x : a) x *= rot;
    }
    return a;
}

inline void add_awgn(std::vector<cplx>& rx, double noise_power, RngStream& rng) {
    const double s = std::sqrt(noise_power / 2.0);
    for (auto& x : rx) x += cplx(rng.gaussian(0.0, s), rng.gaussian(0.0, s));
}

// Received window for a transmission arriving `delay` seconds after window
// start. Noise power is set from the per-sample SNR against the pulse power.
// Throws WindowOverflowError when the pulse would not fit in the window
// (coarse-alignment failure).
inline std::vector<cplx> propagate(const TwoToneWaveform& w, const LinkChannel& ch, double delay,
                                   std::size_t window_len, RngStream* rng,
                                   bool add_noise = true) {
    const double ts = w.sample_interval();
    const double delay_samples = delay / ts;
    if (delay_samples < 0.0 ||
        delay_samples + double(w.samples.size()) + 1.0 > double(window_len))
        throw WindowOverflowError("propagate: pulse outside receive window");

    auto rx = delayed_window(template_spectrum(w, window_len), delay, w.sample_rate,
                             ch.carrier_freq);
    if (add_noise) {
        if (rng == nullptr) throw std::invalid_argument("propagate: rng required for noise");
        add_awgn(rx, pulse_power(w) / std::pow(10.0, ch.snr_db / 10.0), *rng);
    }
    return rx;
}

inline double noise_power_for(const TwoToneWaveform& w, double snr_db) {
    return pulse_power(w) / std::pow(10.0, snr_db / 10.0);
}

}  // namespace dtsync
