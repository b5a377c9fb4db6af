#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "naer/recording.hpp"

namespace naer {

/// Configuration for the synthetic single-unit recording generator.
/// noise_sigma is expressed as a fraction of the unit spike peak.
struct SynthConfig {
    double fs_hz = 24000.0;
    double duration_s = 10.0;
    double firing_rate_hz = 60.0;   // f_neu
    double noise_sigma = 0.05;
    double spike_duration_ms_min = 1.0;
    double spike_duration_ms_max = 2.0;
    int template_id = 0;
    uint64_t seed = 0;
};

/// Unit-peak biphasic spike template sampled at fs_hz.
/// peak_offset receives the index of the positive peak within the template.
std::vector<float> spike_template(int template_id, double duration_s,
                                  double fs_hz, size_t& peak_offset);

/// Poisson firing with refractory = max spike duration, unit-peak templates,
/// additive white Gaussian noise. Ground-truth timestamps are the positive
/// template peaks. Deterministic for a given seed.
std::pair<SampledRecording, SpikeGroundTruth>
generate_synthetic(const SynthConfig& cfg);

/// Replicate a single-channel recording (and its ground truth) onto n
/// identical channels mapped to a near-square geometry.
std::pair<SampledRecording, SpikeGroundTruth>
replicate_channels(const SampledRecording& rec, const SpikeGroundTruth& truth,
                   uint32_t n);

}  // namespace naer
