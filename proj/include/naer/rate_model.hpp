#pragma once

#include <string>
#include <vector>

#include "naer/adm.hpp"
#include "naer/arbiter.hpp"
#include "naer/geometry.hpp"
#include "naer/recording.hpp"

namespace naer {

enum class TransmissionMode { Apm, Pcm, Spdwor, FullSample };

/// Inputs of the analytical transmission data rate model.
struct RateModelParams {
    ArrayGeometry geometry;
    double f_neu = 0.0;          // spikes / s / channel
    double n_ap = 0.0;           // average pulses per spike
    double r_noise = 0.0;        // background pulses / s / channel
    double alpha_b = 0.0;        // PCM non-empty bin probability
    double bins_per_s = 0.0;     // PCM bins / s / channel
    double pcm_count_bits = 0.0; // expected n_on + n_off per non-empty bin
    int b_adc = 10;              // ADC bits (SPDWOR, full-sample)
    double n_spike = 0.0;        // samples per spike (SPDWOR)
    double fs_hz = 0.0;          // sample rate (full-sample)
    /// Eq. applies address bits to every mode, but the raw-digitization
    /// baseline usually excludes them; default off for full-sample.
    bool full_sample_address_bits = false;

    void validate() const;
};

struct CrReport {
    double tdr_fs = 0.0, tdr_spk = 0.0;
    double tdr_apm = 0.0, tdr_pcm1 = 0.0, tdr_pcm4 = 0.0;
    double cr1 = 0.0, cr2 = 0.0, cr3 = 0.0, cr4 = 0.0;
};

/// TDR = (N_r * N_c) * R_p * (n_b + address bits), with per-mode R_p / n_b.
double tdr_theoretical(const RateModelParams& params, TransmissionMode mode);

CrReport compression_ratios(double tdr_fs, double tdr_spk, double tdr_apm,
                            double tdr_pcm1, double tdr_pcm4);

struct ModelValidation {
    double apm_relative_error = 0.0;
    double pcm1_relative_error = 0.0;
    double tdr_apm_measured = 0.0, tdr_apm_theory = 0.0;
    double tdr_pcm1_measured = 0.0, tdr_pcm1_theory = 0.0;
    RateModelParams fitted;
};

struct ValidateConfig {
    double k = 0.3;
    double refractory_s = 0.0;
    int64_t t_arb_ns = 10;
    /// Optional override: corrupt fitted f_neu by this factor (negative
    /// controls in tests). 1 = use the fitted value.
    double f_neu_scale = 1.0;
};

/// Runs encode -> arbitrate -> packetize, fits f_neu / N_AP / R_noise /
/// alpha_b from the simulation, and compares theoretical vs measured TDR.
ModelValidation validate_model(const SampledRecording& rec,
                               const SpikeGroundTruth& truth,
                               const ValidateConfig& cfg);

enum class SweepAxis { FiringRate, Noise, Channels };

struct SweepPoint {
    double axis_value = 0.0;
    CrReport rates;
};

struct SweepConfig {
    double fs_hz = 24000.0;
    double duration_s = 5.0;
    double noise_sigma = 0.1;
    double firing_rate_hz = 60.0;
    uint32_t channels = 100;
    double k = 0.3;
    int b_adc = 10;
    uint64_t seed = 1;
};

/// One simulated pipeline run per axis point; CSV-ready table.
std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& values,
                              const SweepConfig& cfg);

void write_sweep_csv(const std::vector<SweepPoint>& table,
                     const std::string& path);

}  // namespace naer
