#include "naer/adm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace naer {

void AdmConfig::validate() const
{
    if (!(th_on > 0) || !(th_off < 0)) {
        throw std::invalid_argument("need th_on > 0 > th_off");
    }
    if (refractory_s < 0) throw std::invalid_argument("negative refractory");
    if (max_burst < 1) throw std::invalid_argument("max_burst must be >= 1");
}

void DualThresholdConfig::validate() const
{
    if (!(k1 > k2 && k2 > 0)) throw std::invalid_argument("need k1 > k2 > 0");
    if (!(timer_s > 0)) throw std::invalid_argument("timer_s must be positive");
}

double estimate_spike_max(std::span<const float> seg)
{
    if (seg.empty()) throw std::runtime_error("no dynamic range");
    const auto [lo, hi] = std::minmax_element(seg.begin(), seg.end());
    if (*lo == *hi) throw std::runtime_error("no dynamic range");
    std::vector<float> mag(seg.size());
    std::transform(seg.begin(), seg.end(), mag.begin(),
                   [](float v) { return std::fabs(v); });
    const auto idx = size_t(0.999 * double(mag.size() - 1));
    std::nth_element(mag.begin(), mag.begin() + long(idx), mag.end());
    const double v = mag[idx];
    if (v <= 0) throw std::runtime_error("no dynamic range");
    return v;
}

AdmConfig calibrate_threshold(std::span<const float> seg, double k)
{
    if (!(k > 0)) throw std::invalid_argument("k must be positive");
    const double v_spike_max = estimate_spike_max(seg);
    AdmConfig cfg;
    cfg.th_on = k * v_spike_max;
    cfg.th_off = -k * v_spike_max;
    return cfg;
}

std::vector<AdmConfig> calibrate_thresholds(const SampledRecording& rec,
                                            double k, double calibration_s)
{
    rec.validate();
    const auto window =
        std::min(rec.samples_per_channel(),
                 size_t(std::lround(calibration_s * rec.fs_hz)));
    std::vector<AdmConfig> cfgs;
    cfgs.reserve(rec.num_channels());
    for (const auto& ch : rec.channels) {
        cfgs.push_back(
            calibrate_threshold(std::span(ch.data(), window), k));
    }
    return cfgs;
}

namespace {

int64_t sample_time_ns(size_t i, double fs_hz)
{
    return int64_t(std::llround(double(i) * 1e9 / fs_hz));
}

}  // namespace

ChannelEventTrain encode_channel(std::span<const float> signal, double fs_hz,
                                 const AdmConfig& cfg, uint32_t channel)
{
    cfg.validate();
    if (fs_hz <= 0) throw std::invalid_argument("fs_hz must be positive");

    ChannelEventTrain train;
    train.channel = channel;
    if (signal.empty()) return train;

    const int64_t refractory_ns =
        int64_t(std::llround(cfg.refractory_s * 1e9));
    double v_mod = cfg.v_cm;
    double prev = signal[0];
    int64_t reset_until_ns = -1;

    for (size_t i = 1; i < signal.size(); ++i) {
        const double x = signal[i];
        if (std::isnan(x)) throw std::runtime_error("NaN sample");
        const int64_t t_ns = sample_time_ns(i, fs_hz);
        if (t_ns < reset_until_ns) {
            prev = x;  // held in reset, changes during refractory are lost
            continue;
        }
        v_mod += cfg.total_gain * (x - prev);
        prev = x;

        int burst = 0;
        while (burst < cfg.max_burst) {
            if (v_mod - cfg.v_cm >= cfg.th_on) {
                train.events.push_back({t_ns, +1, cfg.th_on});
                v_mod -= cfg.th_on;
            } else if (v_mod - cfg.v_cm <= cfg.th_off) {
                train.events.push_back({t_ns, -1, cfg.th_off});
                v_mod -= cfg.th_off;
            } else {
                break;
            }
            ++burst;
            if (refractory_ns > 0) {
                v_mod = cfg.v_cm;  // hard reset, residual discarded
                reset_until_ns = t_ns + refractory_ns;
                break;
            }
        }
    }
    return train;
}

ChannelEventTrain encode_dual_threshold(std::span<const float> signal,
                                        double fs_hz, const AdmConfig& base,
                                        const DualThresholdConfig& dual,
                                        double v_spike_max, uint32_t channel)
{
    base.validate();
    dual.validate();
    if (fs_hz <= 0) throw std::invalid_argument("fs_hz must be positive");
    if (!(v_spike_max > 0)) throw std::invalid_argument("bad v_spike_max");

    const double th_high = dual.k1 * v_spike_max;
    const double th_low = dual.k2 * v_spike_max;
    const int64_t timer_ns = int64_t(std::llround(dual.timer_s * 1e9));
    const int64_t refractory_ns =
        int64_t(std::llround(base.refractory_s * 1e9));

    ChannelEventTrain train;
    train.channel = channel;
    if (signal.empty()) return train;

    double v_mod = base.v_cm;
    double prev = signal[0];
    int64_t reset_until_ns = -1;
    int64_t fine_until_ns = -1;  // exclusive end of the Th_Low window

    for (size_t i = 1; i < signal.size(); ++i) {
        const double x = signal[i];
        if (std::isnan(x)) throw std::runtime_error("NaN sample");
        const int64_t t_ns = sample_time_ns(i, fs_hz);
        if (t_ns < reset_until_ns) {
            prev = x;
            continue;
        }
        v_mod += base.total_gain * (x - prev);
        prev = x;

        int burst = 0;
        while (burst < base.max_burst) {
            const bool fine = t_ns < fine_until_ns;
            const double th = fine ? th_low : th_high;
            if (v_mod - base.v_cm >= th) {
                train.events.push_back({t_ns, +1, th});
                v_mod -= th;
            } else if (v_mod - base.v_cm <= -th) {
                train.events.push_back({t_ns, -1, -th});
                v_mod += th;
            } else {
                break;
            }
            if (!fine) fine_until_ns = t_ns + timer_ns;  // fixed, not extended
            ++burst;
            if (refractory_ns > 0) {
                v_mod = base.v_cm;
                reset_until_ns = t_ns + refractory_ns;
                break;
            }
        }
    }
    return train;
}

}  // namespace naer
