#pragma once

#include <cmath>
#include <stdexcept>

#include "dtsync/rng.hpp"

namespace dtsync {

// Linear local-clock model. The local time is
//   T_i(t) = freq_scale * t + static_bias + dynamic_bias + software_correction + jitter
// where dynamic_bias evolves as a random walk with variance rate drift_diffusion.
// Consensus corrections are applied in software only; the underlying clock is
// never rewritten.
struct ClockState {
    int node_id = 0;
    double static_bias = 0.0;          // seconds
    double dynamic_bias = 0.0;         // seconds, random walk
    double drift_diffusion = 0.0;      // seconds^2 per second
    double jitter_std = 0.0;           // seconds, per-reading noise
    double freq_scale = 1.0;           // dimensionless, 1 under ideal syntonization
    double software_correction = 0.0;  // seconds, accumulated consensus updates
};

// Deterministic part of the clock offset (no jitter).
inline double clock_offset(const ClockState& c) {
    return c.static_bias + c.dynamic_bias + c.software_correction;
}

// Local reading of true time t. Draws fresh jitter when a stream is supplied.
inline double local_time(const ClockState& c, double t_true, RngStream* rng = nullptr) {
    double jitter = 0.0;
    if (rng != nullptr && c.jitter_std > 0.0) jitter = rng->gaussian(0.0, c.jitter_std);
    return c.freq_scale * t_true + clock_offset(c) + jitter;
}

// True time at which the local clock reads `t_local`. The same per-reading
// jitter model applies: the realized event is perturbed by one draw.
inline double true_time_at_local(const ClockState& c, double t_local, RngStream* rng = nullptr) {
    double jitter = 0.0;
    if (rng != nullptr && c.jitter_std > 0.0) jitter = rng->gaussian(0.0, c.jitter_std);
    return (t_local - clock_offset(c) - jitter) / c.freq_scale;
}

// Advance the dynamic bias by dt_true seconds of true time.
inline void advance(ClockState& c, double dt_true, RngStream& rng) {
    if (!(dt_true > 0.0)) throw std::invalid_argument("clock advance: dt_true must be > 0");
    if (c.drift_diffusion > 0.0)
        c.dynamic_bias += rng.gaussian(0.0, std::sqrt(c.drift_diffusion * dt_true));
}

// Ground-truth offset between two clocks: local_j - local_i, jitter excluded.
// Antisymmetric by construction. Only meaningful for syntonized clocks
// (identical freq_scale), where the difference is time-independent.
inline double true_offset(const ClockState& ci, const ClockState& cj) {
    return clock_offset(cj) - clock_offset(ci);
}

}  // namespace dtsync
