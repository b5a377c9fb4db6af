#pragma once

#include <span>
#include <vector>

#include "naer/recording.hpp"

namespace naer {

enum class DetectionMethod { AbsoluteThreshold, Neo };

struct DetectionConfig {
    DetectionMethod method = DetectionMethod::AbsoluteThreshold;
    /// Detection threshold (volts for AT, NEO units for NEO). 0 = auto:
    /// AT uses 4 * median(|x|) / 0.6745, NEO uses
    /// neo_factor * median(NEO(x)) over the calibration segment.
    double th_spd = 0.0;
    double tolerance_s = 0.5e-3;  // match window half-width
    double neo_factor = 8.0;
    double at_factor = 4.0;
    double calibration_s = 5.0;
};

struct ChannelScore {
    uint64_t tp = 0, fp = 0, fn = 0;
    double sensitivity = 0.0;  // S  = TP / (TP + FN)
    double fdr = 0.0;          // FP / (TP + FP)
    double accuracy = 0.0;     // TP / (TP + FP + FN)
};

struct DetectionResult {
    std::vector<std::vector<double>> detections_s;  // per channel
    std::vector<ChannelScore> per_channel;
    ChannelScore aggregate;
};

/// Upward crossings of |x| over the threshold, with a lockout of one
/// tolerance window (2 * tolerance_s) to avoid duplicates per spike.
std::vector<double> detect_at(std::span<const float> signal, double fs_hz,
                              const DetectionConfig& cfg);

/// NEO(x)[n] = x[n]^2 - x[n-1] * x[n+1]; threshold crossings with lockout.
std::vector<double> detect_neo(std::span<const float> signal, double fs_hz,
                               const DetectionConfig& cfg);

/// Greedy nearest-neighbor one-to-one matching within +/- tolerance_s.
ChannelScore score_channel(const std::vector<double>& detections,
                           const std::vector<double>& truth,
                           double tolerance_s);

DetectionResult score_detections(
    const std::vector<std::vector<double>>& detections,
    const SpikeGroundTruth& truth, double tolerance_s);

}  // namespace naer
