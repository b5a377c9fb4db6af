#include "naer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace naer {

ArrayGeometry ArrayGeometry::near_square(uint32_t n)
{
    if (n == 0) throw std::invalid_argument("empty geometry");
    auto rows = uint32_t(std::ceil(std::sqrt(double(n))));
    auto cols = uint32_t((n + rows - 1) / rows);
    if (rows > 0xffff || cols > 0xffff) {
        throw std::invalid_argument("channel count too large for geometry");
    }
    return {uint16_t(rows), uint16_t(cols)};
}

std::vector<float> spike_template(int template_id, double duration_s,
                                  double fs_hz, size_t& peak_offset)
{
    const auto len = std::max<size_t>(3, size_t(std::lround(duration_s * fs_hz)));
    std::vector<float> tpl(len);

    // Biphasic difference of Gaussians. Lobe placement varies a little
    // between templates; all are normalized to a unit positive peak.
    double pos_center = 0.35, pos_sigma = 0.10;
    double neg_center = 0.65, neg_sigma = 0.16, neg_amp = 0.5;
    switch (template_id % 3) {
        case 0: break;
        case 1:
            pos_center = 0.30;
            neg_center = 0.60;
            neg_amp = 0.6;
            break;
        case 2:
            pos_center = 0.40;
            pos_sigma = 0.12;
            neg_center = 0.72;
            neg_amp = 0.4;
            break;
    }

    for (size_t i = 0; i < len; ++i) {
        const double u = double(i) / double(len - 1);
        const double pos = std::exp(-0.5 * std::pow((u - pos_center) / pos_sigma, 2));
        const double neg = std::exp(-0.5 * std::pow((u - neg_center) / neg_sigma, 2));
        tpl[i] = float(pos - neg_amp * neg);
    }

    const auto peak_it = std::max_element(tpl.begin(), tpl.end());
    const float peak = *peak_it;
    peak_offset = size_t(peak_it - tpl.begin());
    for (auto& v : tpl) v /= peak;
    return tpl;
}

std::pair<SampledRecording, SpikeGroundTruth>
generate_synthetic(const SynthConfig& cfg)
{
    if (cfg.fs_hz <= 0 || cfg.duration_s <= 0) {
        throw std::invalid_argument("fs_hz and duration_s must be positive");
    }
    if (cfg.firing_rate_hz < 0 || cfg.noise_sigma < 0) {
        throw std::invalid_argument("negative firing rate or noise sigma");
    }
    if (cfg.spike_duration_ms_min <= 0 ||
        cfg.spike_duration_ms_max < cfg.spike_duration_ms_min) {
        throw std::invalid_argument("bad spike duration range");
    }
    const double refractory_s = cfg.spike_duration_ms_max * 1e-3;
    if (cfg.firing_rate_hz > 0 && cfg.firing_rate_hz * refractory_s >= 1.0) {
        throw std::invalid_argument(
            "firing rate incompatible with refractory period");
    }

    const auto n = size_t(std::lround(cfg.duration_s * cfg.fs_hz));
    SampledRecording rec;
    rec.fs_hz = cfg.fs_hz;
    rec.geometry = {1, 1};
    rec.channels.assign(1, std::vector<float>(n, 0.0f));
    SpikeGroundTruth truth;
    truth.spike_times_s.assign(1, {});

    std::mt19937_64 rng(cfg.seed);
    auto& sig = rec.channels[0];

    if (cfg.firing_rate_hz > 0) {
        // Poisson firing with dead time: exponential gaps at the rate that
        // yields firing_rate_hz overall once the refractory is added back.
        const double gap_rate =
            cfg.firing_rate_hz / (1.0 - cfg.firing_rate_hz * refractory_s);
        std::exponential_distribution<double> gap(gap_rate);
        std::uniform_real_distribution<double> dur_ms(
            cfg.spike_duration_ms_min, cfg.spike_duration_ms_max);

        double t = refractory_s + gap(rng);  // no template clipped at t = 0
        while (true) {
            const double duration = dur_ms(rng) * 1e-3;
            size_t peak_offset = 0;
            const auto tpl =
                spike_template(cfg.template_id, duration, cfg.fs_hz, peak_offset);
            const auto start = size_t(std::lround(t * cfg.fs_hz));
            if (start + tpl.size() > n) break;
            for (size_t i = 0; i < tpl.size(); ++i) sig[start + i] += tpl[i];
            truth.spike_times_s[0].push_back(
                double(start + peak_offset) / cfg.fs_hz);
            t += refractory_s + gap(rng);
        }
    }

    if (cfg.noise_sigma > 0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
        for (auto& v : sig) v += float(noise(rng));
    }
    return {std::move(rec), std::move(truth)};
}

std::pair<SampledRecording, SpikeGroundTruth>
replicate_channels(const SampledRecording& rec, const SpikeGroundTruth& truth,
                   uint32_t n)
{
    rec.validate();
    if (rec.num_channels() != 1) {
        throw std::invalid_argument("replicate_channels expects 1 channel");
    }
    if (n == 0) throw std::invalid_argument("need at least one channel");

    SampledRecording out;
    out.fs_hz = rec.fs_hz;
    out.geometry = ArrayGeometry::near_square(n);
    out.channels.assign(n, rec.channels[0]);

    SpikeGroundTruth out_truth;
    const auto& src = truth.spike_times_s.empty() ? std::vector<double>{}
                                                  : truth.spike_times_s[0];
    out_truth.spike_times_s.assign(n, src);
    return {std::move(out), std::move(out_truth)};
}

}  // namespace naer
