#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "naer/recording.hpp"

namespace naer {

/// Asynchronous delta modulator parameters. Thresholds are input-referred
/// volts; total_gain defaults to 1 so no separate amplifier model is needed.
/// v_cm doubles as the comparator reference (the reset level).
struct AdmConfig {
    double th_on = 0.0;    // > 0
    double th_off = 0.0;   // < 0
    double refractory_s = 0.0;
    double total_gain = 1.0;
    double v_cm = 0.0;
    int max_burst = 16;    // events per sample when refractory is 0

    void validate() const;
};

/// Dual-threshold operation: Th_High = +/- k1 * V_spike_max until an event
/// fires, then Th_Low = +/- k2 * V_spike_max for timer_s.
struct DualThresholdConfig {
    double k1 = 0.6;
    double k2 = 0.3;
    double timer_s = 1e-3;

    void validate() const;
};

struct ChannelEvent {
    int64_t t_ns = 0;
    int8_t polarity = 0;   // +1 ON, -1 OFF
    /// Signed reconstruction step in volts (th_on or th_off that was active
    /// when the event fired). Needed to rebuild dual-threshold streams.
    double step_v = 0.0;
};

struct ChannelEventTrain {
    uint32_t channel = 0;
    std::vector<ChannelEvent> events;
};

/// Eq.-style threshold calibration: V_spike_max is the 99.9th percentile of
/// |x| over the calibration window, Th = +/- k * V_spike_max.
/// Throws std::runtime_error("no dynamic range") on a flat segment.
double estimate_spike_max(std::span<const float> calibration_segment);

AdmConfig calibrate_threshold(std::span<const float> calibration_segment,
                              double k);

/// Per-channel calibration over the first calibration_s seconds of each trace.
std::vector<AdmConfig> calibrate_thresholds(const SampledRecording& rec,
                                            double k,
                                            double calibration_s = 5.0);

ChannelEventTrain encode_channel(std::span<const float> signal, double fs_hz,
                                 const AdmConfig& cfg, uint32_t channel = 0);

ChannelEventTrain encode_dual_threshold(std::span<const float> signal,
                                        double fs_hz, const AdmConfig& base,
                                        const DualThresholdConfig& dual,
                                        double v_spike_max,
                                        uint32_t channel = 0);

}  // namespace naer
