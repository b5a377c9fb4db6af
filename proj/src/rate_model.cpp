#include "naer/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "naer/stream.hpp"
#include "naer/synth.hpp"

namespace naer {

void RateModelParams::validate() const
{
    if (f_neu < 0 || n_ap < 0 || r_noise < 0 || alpha_b < 0 ||
        bins_per_s < 0 || pcm_count_bits < 0 || n_spike < 0 || fs_hz < 0 ||
        b_adc < 0) {
        throw std::invalid_argument("rate model parameters must be >= 0");
    }
    if (alpha_b > 1) throw std::invalid_argument("alpha_b must be <= 1");
}

double tdr_theoretical(const RateModelParams& params, TransmissionMode mode)
{
    params.validate();
    const double channels = params.geometry.capacity();
    const double addr = params.geometry.address_bits();
    switch (mode) {
        case TransmissionMode::Apm: {
            const double r_p = params.f_neu * params.n_ap + params.r_noise;
            return channels * r_p * (1.0 + addr);
        }
        case TransmissionMode::Pcm: {
            const double r_bin = params.alpha_b * params.bins_per_s;
            return channels * r_bin * (params.pcm_count_bits + addr);
        }
        case TransmissionMode::Spdwor: {
            const double r_p = params.f_neu * params.n_spike;
            return channels * r_p * (params.b_adc + addr);
        }
        case TransmissionMode::FullSample: {
            const double per_sample =
                params.full_sample_address_bits ? params.b_adc + addr
                                                : double(params.b_adc);
            return channels * params.fs_hz * per_sample;
        }
    }
    throw std::invalid_argument("unknown transmission mode");
}

CrReport compression_ratios(double tdr_fs, double tdr_spk, double tdr_apm,
                            double tdr_pcm1, double tdr_pcm4)
{
    if (tdr_fs <= 0 || tdr_spk <= 0 || tdr_apm <= 0 || tdr_pcm1 <= 0 ||
        tdr_pcm4 <= 0) {
        throw std::invalid_argument("compression ratio needs positive TDRs");
    }
    CrReport report;
    report.tdr_fs = tdr_fs;
    report.tdr_spk = tdr_spk;
    report.tdr_apm = tdr_apm;
    report.tdr_pcm1 = tdr_pcm1;
    report.tdr_pcm4 = tdr_pcm4;
    report.cr1 = tdr_fs / tdr_spk;
    report.cr2 = tdr_fs / tdr_apm;
    report.cr3 = tdr_fs / tdr_pcm1;
    report.cr4 = tdr_fs / tdr_pcm4;
    return report;
}

namespace {

struct SimulatedRates {
    double tdr_apm = 0.0;
    double tdr_pcm1 = 0.0;
    double tdr_pcm4 = 0.0;
    double alpha_b_pcm1 = 0.0;
    double pcm1_count_bits = 0.0;
    uint64_t total_events = 0;
    uint64_t spike_events = 0;
    double n_spike_samples = 0.0;
};

/// Encode -> arbitrate -> packetize; splits events into spike / background
/// using the ground truth spike windows.
SimulatedRates simulate_rates(const SampledRecording& rec,
                              const SpikeGroundTruth& truth, double k,
                              double refractory_s, int64_t t_arb_ns)
{
    rec.validate();
    const auto cfgs = calibrate_thresholds(rec, k);
    std::vector<ChannelEventTrain> trains;
    trains.reserve(rec.num_channels());
    for (size_t c = 0; c < rec.num_channels(); ++c) {
        AdmConfig cfg = cfgs[c];
        cfg.refractory_s = refractory_s;
        // Replicated arrays carry identical traces; reuse the first train.
        if (c > 0 && rec.channels[c] == rec.channels[0] &&
            cfgs[c].th_on == cfgs[0].th_on) {
            ChannelEventTrain train = trains[0];
            train.channel = uint32_t(c);
            trains.push_back(std::move(train));
            continue;
        }
        trains.push_back(
            encode_channel(rec.channels[c], rec.fs_hz, cfg, uint32_t(c)));
    }
    ArbiterConfig arb;
    arb.t_arb_ns = t_arb_ns;
    const auto events = arbitrate(trains, rec.geometry, arb);

    SimulatedRates rates;
    rates.total_events = events.size();
    const double spike_half_window_s = 1.25e-3;
    for (const auto& ev : events) {
        const auto ch = rec.geometry.channel_of(ev.x, ev.y);
        if (ch >= truth.spike_times_s.size()) continue;
        const auto& times = truth.spike_times_s[ch];
        const double t_s = double(ev.ideal_t_ns) * 1e-9;
        auto it = std::lower_bound(times.begin(), times.end(),
                                   t_s - spike_half_window_s);
        if (it != times.end() && *it <= t_s + spike_half_window_s) {
            ++rates.spike_events;
        }
    }

    const double duration = rec.duration_s();
    const auto apm =
        packetize_apm(events, rec.geometry, rec.fs_hz, duration);
    const auto pcm1 =
        packetize_pcm(events, rec.geometry, 1, rec.fs_hz, duration);
    const auto pcm4 =
        packetize_pcm(events, rec.geometry, 4, rec.fs_hz, duration);
    rates.tdr_apm = measure_tdr(apm);
    rates.tdr_pcm1 = measure_tdr(pcm1);
    rates.tdr_pcm4 = measure_tdr(pcm4);
    rates.alpha_b_pcm1 = measure_bin_occupancy(pcm1);
    rates.pcm1_count_bits = mean_pcm_count(pcm1);
    return rates;
}

}  // namespace

ModelValidation validate_model(const SampledRecording& rec,
                               const SpikeGroundTruth& truth,
                               const ValidateConfig& cfg)
{
    rec.validate();
    const double duration = rec.duration_s();
    const double channels = double(rec.num_channels());
    const auto sim =
        simulate_rates(rec, truth, cfg.k, cfg.refractory_s, cfg.t_arb_ns);

    ModelValidation v;
    RateModelParams p;
    p.geometry = rec.geometry;
    p.fs_hz = rec.fs_hz;

    const auto n_spikes = double(truth.total_spikes());
    p.f_neu = n_spikes / (channels * duration) * cfg.f_neu_scale;
    p.n_ap = n_spikes > 0 ? double(sim.spike_events) / n_spikes : 0.0;
    p.r_noise = double(sim.total_events - sim.spike_events) /
                (channels * duration);
    p.alpha_b = sim.alpha_b_pcm1;
    p.bins_per_s = rec.fs_hz;
    p.pcm_count_bits = sim.pcm1_count_bits;
    v.fitted = p;

    v.tdr_apm_measured = sim.tdr_apm;
    v.tdr_apm_theory = tdr_theoretical(p, TransmissionMode::Apm);
    v.tdr_pcm1_measured = sim.tdr_pcm1;
    v.tdr_pcm1_theory = tdr_theoretical(p, TransmissionMode::Pcm);

    const auto rel_err = [](double theory, double measured) {
        if (measured == 0) return theory == 0 ? 0.0 : 1.0;
        return std::fabs(theory - measured) / measured;
    };
    v.apm_relative_error = rel_err(v.tdr_apm_theory, v.tdr_apm_measured);
    v.pcm1_relative_error = rel_err(v.tdr_pcm1_theory, v.tdr_pcm1_measured);
    return v;
}

std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& values,
                              const SweepConfig& cfg)
{
    std::vector<SweepPoint> table;
    table.reserve(values.size());

    for (double value : values) {
        SynthConfig synth;
        synth.fs_hz = cfg.fs_hz;
        synth.duration_s = cfg.duration_s;
        synth.firing_rate_hz = cfg.firing_rate_hz;
        synth.noise_sigma = cfg.noise_sigma;
        synth.seed = cfg.seed;
        uint32_t channels = cfg.channels;
        switch (axis) {
            case SweepAxis::FiringRate: synth.firing_rate_hz = value; break;
            case SweepAxis::Noise: synth.noise_sigma = value; break;
            case SweepAxis::Channels: channels = uint32_t(value); break;
        }

        auto [single, truth1] = generate_synthetic(synth);
        auto [rec, truth] = replicate_channels(single, truth1, channels);
        const auto sim = simulate_rates(rec, truth, cfg.k, 0.0, 10);

        RateModelParams p;
        p.geometry = rec.geometry;
        p.fs_hz = rec.fs_hz;
        p.b_adc = cfg.b_adc;
        p.n_spike = synth.spike_duration_ms_max * 1e-3 * cfg.fs_hz;
        p.f_neu = double(truth.total_spikes()) /
                  (double(channels) * rec.duration_s());
        const double tdr_fs = tdr_theoretical(p, TransmissionMode::FullSample);
        const double tdr_spk = tdr_theoretical(p, TransmissionMode::Spdwor);

        SweepPoint point;
        point.axis_value = value;
        point.rates = compression_ratios(tdr_fs, tdr_spk, sim.tdr_apm,
                                         sim.tdr_pcm1, sim.tdr_pcm4);
        table.push_back(point);
    }
    return table;
}

void write_sweep_csv(const std::vector<SweepPoint>& table,
                     const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "axis,tdr_fs,tdr_spk,tdr_apm,tdr_pcm1,tdr_pcm4,cr1,cr2,cr3,cr4\n";
    for (const auto& p : table) {
        out << p.axis_value << "," << p.rates.tdr_fs << "," << p.rates.tdr_spk
            << "," << p.rates.tdr_apm << "," << p.rates.tdr_pcm1 << ","
            << p.rates.tdr_pcm4 << "," << p.rates.cr1 << "," << p.rates.cr2
            << "," << p.rates.cr3 << "," << p.rates.cr4 << "\n";
    }
}

}  // namespace naer
