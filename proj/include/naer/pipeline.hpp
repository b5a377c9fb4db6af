#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naer/adm.hpp"
#include "naer/arbiter.hpp"
#include "naer/event_filter.hpp"
#include "naer/rate_model.hpp"
#include "naer/reconstruct.hpp"
#include "naer/spike_detect.hpp"
#include "naer/stream.hpp"
#include "naer/synth.hpp"

namespace naer {

/// Full-pipeline configuration. Exactly one dataset source: either synthetic
/// parameters or an input file.
struct PipelineConfig {
    // dataset
    bool use_synthetic = true;
    SynthConfig synth;
    uint32_t replicate = 1;  // worst-case channel replication
    std::string input_path;
    RecordingFormat input_format = RecordingFormat::RawF32;
    double input_fs_hz = 0.0;
    ArrayGeometry input_geometry;

    // encoder
    double k = 0.3;
    double refractory_s = 0.0;
    bool dual_threshold = false;
    DualThresholdConfig dual;

    // arbitration
    ArbiterConfig arbiter;

    // transport
    StreamMode mode = StreamMode::Apm;
    uint16_t bin_width_n = 1;

    // optional event filter
    bool filter_events = false;
    FilterConfig filter;

    // recovery + detection
    double drift_cutoff_hz = 10.0;
    DetectionConfig detection;
    double spd_k = 0.45;  // Th_SPD = spd_k * V_spike_max when th_spd is auto
    int b_adc = 10;

    uint64_t seed = 1;
    std::string output_dir;
};

struct RateReport {
    double tdr_measured_bps = 0.0;
    double tdr_full_sample_bps = 0.0;
    double alpha_b = -1.0;  // PCM only, -1 = not applicable
    CrReport crs;
};

struct RunReport {
    PipelineConfig config;
    size_t channels = 0;
    double duration_s = 0.0;
    uint64_t total_events = 0;
    FidelityReport fidelity;
    std::optional<DetectionResult> detection;  // empty when no ground truth
    RateReport rates;
    CollisionStats collisions;
    double filter_gain = 1.0;
    bool detection_skipped = false;
};

RunReport run_pipeline(const PipelineConfig& cfg);

/// CSV tables (fidelity, detection, rates, collisions) plus a JSON summary,
/// written into a fresh timestamped subdirectory of cfg.output_dir.
/// Returns the directory that was written.
std::string emit_report(const RunReport& report, const std::string& output_dir);

/// key = value config file (# comments, blank lines ignored).
PipelineConfig parse_config_file(const std::string& path);
PipelineConfig parse_config_map(const std::map<std::string, std::string>& kv);

}  // namespace naer
