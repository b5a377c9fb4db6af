#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "naer/geometry.hpp"

namespace naer {

/// Per-channel sorted spike timestamps in seconds.
struct SpikeGroundTruth {
    std::vector<std::vector<double>> spike_times_s;

    bool empty() const;
    size_t total_spikes() const;
};

/// Multichannel, uniformly sampled voltage traces (input-referred volts).
struct SampledRecording {
    double fs_hz = 0.0;
    ArrayGeometry geometry;
    std::vector<std::vector<float>> channels;  // all equal length

    size_t num_channels() const { return channels.size(); }
    size_t samples_per_channel() const
    {
        return channels.empty() ? 0 : channels.front().size();
    }
    double duration_s() const
    {
        return fs_hz > 0 ? double(samples_per_channel()) / fs_hz : 0.0;
    }

    /// Throws std::invalid_argument if channel lengths differ or fs_hz <= 0.
    void validate() const;
};

enum class RecordingFormat { RawF32, Csv };

/// Raw binary: little-endian float32, channel-major, with a sidecar text
/// header "<path>.hdr" carrying fs, channel count and scale.
void save_recording(const SampledRecording& rec, const std::string& path,
                    RecordingFormat format = RecordingFormat::RawF32,
                    double scale_to_volts = 1.0);

SampledRecording load_recording(const std::string& path, RecordingFormat format,
                                double fs_hz = 0.0, ArrayGeometry geometry = {},
                                double scale_to_volts = 1.0);

}  // namespace naer
