#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "dtsync/channel.hpp"
#include "dtsync/clock.hpp"
#include "dtsync/estimation.hpp"
#include "dtsync/waveform.hpp"

namespace dtsync {

// The four timestamps of one two-way exchange, each in its own node's local
// clock. Node i transmits first.
struct TimestampQuad {
    double t_tx_i = 0.0;
    double t_rx_j = 0.0;
    double t_tx_j = 0.0;
    double t_rx_i = 0.0;
};

// Clock offset of node j relative to node i. Positive when clock j reads
// ahead. The reciprocal propagation delay cancels exactly.
inline double compute_offset(const TimestampQuad& q) {
    return ((q.t_rx_j - q.t_tx_i) - (q.t_rx_i - q.t_tx_j)) / 2.0;
}

// Propagation delay from the mean apparent time of flight.
inline double compute_propagation_delay(const TimestampQuad& q) {
    return ((q.t_rx_j - q.t_tx_i) + (q.t_rx_i - q.t_tx_j)) / 2.0;
}

// A delay estimate can be slightly negative under noise; beyond tolerance it
// indicates a protocol fault.
inline bool is_protocol_fault(double propagation_delay, double tolerance) {
    return propagation_delay < -tolerance;
}

struct ExchangeResult {
    bool valid = false;
    TimestampQuad quad;
    double snr_estimate_i_db = 0.0;  // measured at node i (reverse pulse)
    double snr_estimate_j_db = 0.0;  // measured at node j (forward pulse)
};

// Shared immutable state for exchanges against one waveform: template spectra
// at the window and correlation sizes, and the residual-bias LUT.
struct ExchangeContext {
    TwoToneWaveform waveform;
    BiasLut lut;
    std::size_t window_len = 8192;
    double processing_gap = 1e-4;  // seconds between the two directions
    std::vector<cplx> window_spectrum;
    MatchedFilterPlan plan;

    ExchangeContext() = default;
    ExchangeContext(TwoToneWaveform w, BiasLut l, std::size_t win, double gap)
        : waveform(std::move(w)), lut(std::move(l)), window_len(win), processing_gap(gap) {
        if (!lut.matches(waveform))
            throw std::invalid_argument("ExchangeContext: LUT/waveform mismatch");
        window_spectrum = template_spectrum(waveform, window_len);
        plan = MatchedFilterPlan(waveform, window_len);
    }

    double window_span() const { return double(window_len) * waveform.sample_interval(); }
    // Receive windows open this long before the scheduled transmit tick.
    double pre_margin() const { return double(window_len / 4) * waveform.sample_interval(); }
};

namespace detail {

inline double ceil_tick(double t_local, double ts) { return std::ceil(t_local / ts) * ts; }
inline double floor_tick(double t_local, double ts) { return std::floor(t_local / ts) * ts; }

// One direction: tx node transmits on a local clock edge at or after
// slot_time + pre_margin (local reading); rx node opens its window at the
// local tick nearest slot_time. Returns the rx timestamp (window start plus
// estimated TOA) or nullopt on a missed pulse.
struct OneWay {
    double t_tx_local = 0.0;
    double t_rx_local = 0.0;
    double snr_estimate_db = 0.0;
};

inline std::optional<OneWay> one_way(const ClockState& tx, const ClockState& rx,
                                     const LinkChannel& ch, const ExchangeContext& ctx,
                                     double slot_time, RngStream& rng) {
    const double ts = ctx.waveform.sample_interval();
    OneWay out;
    out.t_tx_local = ceil_tick(slot_time + ctx.pre_margin(), ts);
    const double t_win_local = floor_tick(slot_time, ts);

    const double t_emit_true = true_time_at_local(tx, out.t_tx_local, &rng);
    const double t_window_true = true_time_at_local(rx, t_win_local, &rng);
    const double arrival = t_emit_true + ch.propagation_delay - t_window_true;

    auto window = delayed_window(ctx.window_spectrum, arrival, ctx.waveform.sample_rate,
                                 ch.carrier_freq);
    add_awgn(window, noise_power_for(ctx.waveform, ch.snr_db), rng);
    const auto est = estimate_toa(window, ctx.waveform, ctx.lut, ctx.plan);
    if (!est) return std::nullopt;
    out.t_rx_local = t_win_local + est->toa;
    out.snr_estimate_db = est->snr_estimate_db;
    return out;
}

}  // namespace detail

// One half-duplex two-way exchange between nodes i and j over a reciprocal
// channel. TX times are quantized to local sample ticks; the processing gap
// between the two directions is arbitrary and cancels in compute_offset.
// slot_time is the nominal schedule time of this edge's TDMA slot.
inline ExchangeResult exchange(const ClockState& node_i, const ClockState& node_j,
                               const LinkChannel& ch, const ExchangeContext& ctx,
                               double slot_time, RngStream& rng) {
    if (node_i.node_id == node_j.node_id)
        throw std::invalid_argument("exchange: a node cannot exchange with itself");

    ExchangeResult res;
    const auto fwd = detail::one_way(node_i, node_j, ch, ctx, slot_time, rng);
    if (!fwd) return res;
    const double reply_slot = slot_time + ctx.window_span() + ctx.processing_gap;
    const auto rev = detail::one_way(node_j, node_i, ch, ctx, reply_slot, rng);
    if (!rev) return res;

    res.valid = true;
    res.quad.t_tx_i = fwd->t_tx_local;
    res.quad.t_rx_j = fwd->t_rx_local;
    res.quad.t_tx_j = rev->t_tx_local;
    res.quad.t_rx_i = rev->t_rx_local;
    res.snr_estimate_j_db = fwd->snr_estimate_db;
    res.snr_estimate_i_db = rev->snr_estimate_db;
    return res;
}

}  // namespace dtsync
