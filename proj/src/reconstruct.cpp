#include "naer/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace naer {

namespace {

size_t sample_index(int64_t t_ns, double fs_hz, size_t num_samples)
{
    auto idx = size_t(std::llround(double(t_ns) * fs_hz * 1e-9));
    return std::min(idx, num_samples - 1);
}

void prefix_sum(std::vector<double>& deltas, std::vector<float>& out)
{
    double acc = 0.0;
    for (size_t i = 0; i < deltas.size(); ++i) {
        acc += deltas[i];
        out[i] = float(acc);
    }
}

}  // namespace

RecoveredSignal reconstruct(const EventStream& stream,
                            const std::vector<ChannelThresholds>& thresholds,
                            size_t num_samples)
{
    if (num_samples == 0) throw std::invalid_argument("empty reconstruction");
    const auto n_ch = stream.geometry.capacity();
    if (thresholds.size() != n_ch) {
        throw std::invalid_argument("threshold/channel mismatch");
    }

    RecoveredSignal out;
    out.fs_hz = stream.fs_hz;
    out.channels.assign(n_ch, std::vector<float>(num_samples, 0.0f));

    // Bucket packets per channel, then fill channels one at a time through a
    // reusable delta buffer (keeps peak memory flat for large arrays).
    std::vector<std::vector<uint32_t>> by_channel(n_ch);
    const size_t n_packets = stream.packet_count();
    for (size_t i = 0; i < n_packets; ++i) {
        const auto& [x, y] = stream.mode == StreamMode::Apm
                                 ? std::pair{stream.apm_packets[i].x,
                                             stream.apm_packets[i].y}
                                 : std::pair{stream.pcm_packets[i].x,
                                             stream.pcm_packets[i].y};
        by_channel[stream.geometry.channel_of(x, y)].push_back(uint32_t(i));
    }

    std::vector<double> deltas(num_samples, 0.0);
    for (uint32_t c = 0; c < n_ch; ++c) {
        std::fill(deltas.begin(), deltas.end(), 0.0);
        for (uint32_t i : by_channel[c]) {
            if (stream.mode == StreamMode::Apm) {
                const auto& p = stream.apm_packets[i];
                const auto s = sample_index(p.t_ns, stream.fs_hz, num_samples);
                deltas[s] += p.polarity > 0 ? thresholds[c].th_on
                                            : thresholds[c].th_off;
            } else {
                // Bin contents are only known at bin close: apply the net
                // update at the first sample after the bin ends.
                const auto& p = stream.pcm_packets[i];
                const auto end_sample = std::min(
                    num_samples - 1,
                    size_t(p.bin_index + 1) * stream.bin_width_n);
                deltas[end_sample] += thresholds[c].th_on * p.n_on +
                                      thresholds[c].th_off * p.n_off;
            }
        }
        prefix_sum(deltas, out.channels[c]);
    }
    return out;
}

std::vector<float> reconstruct_train(const ChannelEventTrain& train,
                                     double fs_hz, size_t num_samples)
{
    if (num_samples == 0) throw std::invalid_argument("empty reconstruction");
    std::vector<double> deltas(num_samples, 0.0);
    for (const auto& ev : train.events) {
        deltas[sample_index(ev.t_ns, fs_hz, num_samples)] += ev.step_v;
    }
    std::vector<float> out(num_samples);
    prefix_sum(deltas, out);
    return out;
}

void remove_drift_inplace(std::span<float> channel, double fs_hz,
                          double cutoff_hz)
{
    if (cutoff_hz <= 0 || cutoff_hz >= fs_hz / 2) {
        throw std::invalid_argument("cutoff must lie in (0, fs/2)");
    }
    if (channel.empty()) return;
    const double rc = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
    const double alpha = rc / (rc + 1.0 / fs_hz);
    double prev_x = channel[0];
    double prev_y = 0.0;
    channel[0] = 0.0f;
    for (size_t i = 1; i < channel.size(); ++i) {
        const double x = channel[i];
        prev_y = alpha * (prev_y + x - prev_x);
        prev_x = x;
        channel[i] = float(prev_y);
    }
}

RecoveredSignal remove_drift(const RecoveredSignal& sig, double cutoff_hz)
{
    RecoveredSignal out = sig;
    for (auto& ch : out.channels) {
        remove_drift_inplace(ch, out.fs_hz, cutoff_hz);
    }
    out.drift_removed = true;
    return out;
}

double rmse_normalized(std::span<const float> ref, std::span<const float> rec)
{
    if (ref.size() != rec.size() || ref.empty()) {
        throw std::invalid_argument("length mismatch");
    }
    const auto [mn, mx] = std::minmax_element(ref.begin(), ref.end());
    const double range = double(*mx) - double(*mn);
    if (range <= 0) throw std::runtime_error("zero range");
    double sum_sq = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
        const double d = double(ref[i]) - rec[i];
        sum_sq += d * d;
    }
    const double rmse = std::sqrt(sum_sq / double(ref.size()));
    return std::clamp(rmse / range, 0.0, 1.0);
}

double pearson_cc(std::span<const float> ref, std::span<const float> rec)
{
    if (ref.size() != rec.size() || ref.size() < 2) {
        throw std::invalid_argument("length mismatch");
    }
    const double n = double(ref.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < ref.size(); ++i) {
        sx += ref[i];
        sy += rec[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < ref.size(); ++i) {
        const double dx = ref[i] - mx, dy = rec[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0 || syy <= 0) {
        throw std::runtime_error("constant input has no correlation");
    }
    return sxy / std::sqrt(sxx * syy);
}

FidelityReport score_fidelity(const SampledRecording& ref,
                              const RecoveredSignal& rec)
{
    if (ref.num_channels() > rec.channels.size()) {
        throw std::invalid_argument("channel count mismatch");
    }
    FidelityReport report;
    double rmse_sum = 0, cc_sum = 0;
    for (size_t c = 0; c < ref.num_channels(); ++c) {
        const double r = rmse_normalized(ref.channels[c], rec.channels[c]);
        const double cc = pearson_cc(ref.channels[c], rec.channels[c]);
        report.rmse_per_channel.push_back(r);
        report.cc_per_channel.push_back(cc);
        rmse_sum += r;
        cc_sum += cc;
    }
    const auto n = double(ref.num_channels());
    report.rmse = rmse_sum / n;
    report.cc = cc_sum / n;
    return report;
}

}  // namespace naer
