#pragma once

#include <span>
#include <vector>

#include "naer/stream.hpp"

namespace naer {

struct RecoveredSignal {
    double fs_hz = 0.0;
    std::vector<std::vector<float>> channels;
    bool drift_removed = false;
};

struct ChannelThresholds {
    double th_on = 0.0;
    double th_off = 0.0;
};

struct FidelityReport {
    std::vector<double> rmse_per_channel;
    std::vector<double> cc_per_channel;
    double rmse = 0.0;  // aggregate (mean over channels)
    double cc = 0.0;
};

/// Stair-step reconstruction. APM: add th_on per +1 and th_off per -1 at the
/// event's sample instant. PCM: apply the net bin update at bin end. Zero
/// order hold between updates, sampled at fs_hz over num_samples.
RecoveredSignal reconstruct(const EventStream& stream,
                            const std::vector<ChannelThresholds>& thresholds,
                            size_t num_samples);

/// Reconstruction from annotated event trains (carries per-event step, so it
/// also covers dual-threshold streams).
std::vector<float> reconstruct_train(const ChannelEventTrain& train,
                                     double fs_hz, size_t num_samples);

/// Single-pole high-pass per channel; removes the open-loop ADM drift.
RecoveredSignal remove_drift(const RecoveredSignal& sig, double cutoff_hz);
void remove_drift_inplace(std::span<float> channel, double fs_hz,
                          double cutoff_hz);

/// RMSE / (max(ref) - min(ref)), clamped to [0, 1].
/// Throws std::runtime_error("zero range") on a flat reference.
double rmse_normalized(std::span<const float> ref, std::span<const float> rec);

/// Sample Pearson correlation; throws on constant input.
double pearson_cc(std::span<const float> ref, std::span<const float> rec);

FidelityReport score_fidelity(const SampledRecording& ref,
                              const RecoveredSignal& rec);

}  // namespace naer
