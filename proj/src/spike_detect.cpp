#include "naer/spike_detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace naer {

namespace {

double median(std::vector<double>& v)
{
    if (v.empty()) return 0.0;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + long(mid), v.end());
    return v[mid];
}

std::vector<double> crossings_with_lockout(const std::vector<double>& metric,
                                           double threshold, double fs_hz,
                                           double lockout_s)
{
    std::vector<double> out;
    const auto lockout = size_t(std::lround(lockout_s * fs_hz));
    size_t next_allowed = 0;
    for (size_t i = 1; i < metric.size(); ++i) {
        if (i < next_allowed) continue;
        if (metric[i] >= threshold && metric[i - 1] < threshold) {
            out.push_back(double(i) / fs_hz);
            next_allowed = i + std::max<size_t>(lockout, 1);
        }
    }
    return out;
}

size_t calibration_samples(std::span<const float> signal, double fs_hz,
                           double calibration_s)
{
    return std::min(signal.size(),
                    size_t(std::lround(calibration_s * fs_hz)));
}

}  // namespace

std::vector<double> detect_at(std::span<const float> signal, double fs_hz,
                              const DetectionConfig& cfg)
{
    if (fs_hz <= 0) throw std::invalid_argument("fs_hz must be positive");
    if (signal.empty()) return {};

    std::vector<double> mag(signal.size());
    std::transform(signal.begin(), signal.end(), mag.begin(),
                   [](float v) { return std::fabs(double(v)); });

    double th = cfg.th_spd;
    if (th <= 0) {
        // Robust noise estimate: sigma ~= median(|x|) / 0.6745.
        auto window = std::vector<double>(
            mag.begin(),
            mag.begin() + long(calibration_samples(signal, fs_hz,
                                                   cfg.calibration_s)));
        th = cfg.at_factor * median(window) / 0.6745;
    }
    if (th <= 0) return {};
    return crossings_with_lockout(mag, th, fs_hz, 2 * cfg.tolerance_s);
}

std::vector<double> detect_neo(std::span<const float> signal, double fs_hz,
                               const DetectionConfig& cfg)
{
    if (fs_hz <= 0) throw std::invalid_argument("fs_hz must be positive");
    if (signal.size() < 3) return {};

    std::vector<double> neo(signal.size(), 0.0);
    for (size_t i = 1; i + 1 < signal.size(); ++i) {
        neo[i] = double(signal[i]) * signal[i] -
                 double(signal[i - 1]) * signal[i + 1];
    }

    double th = cfg.th_spd;
    if (th <= 0) {
        auto window = std::vector<double>(
            neo.begin(),
            neo.begin() + long(calibration_samples(signal, fs_hz,
                                                   cfg.calibration_s)));
        th = cfg.neo_factor * median(window);
    }
    if (th <= 0) return {};
    return crossings_with_lockout(neo, th, fs_hz, 2 * cfg.tolerance_s);
}

ChannelScore score_channel(const std::vector<double>& detections,
                           const std::vector<double>& truth,
                           double tolerance_s)
{
    ChannelScore score;
    // Greedy merge over the two sorted lists; one-to-one within tolerance.
    size_t i = 0, j = 0;
    while (i < detections.size() && j < truth.size()) {
        const double d = detections[i] - truth[j];
        if (std::fabs(d) <= tolerance_s) {
            ++score.tp;
            ++i;
            ++j;
        } else if (d < 0) {
            ++score.fp;
            ++i;
        } else {
            ++score.fn;
            ++j;
        }
    }
    score.fp += detections.size() - i;
    score.fn += truth.size() - j;

    const auto div = [](uint64_t num, uint64_t den) {
        return den ? double(num) / double(den) : 0.0;
    };
    score.sensitivity = div(score.tp, score.tp + score.fn);
    score.fdr = div(score.fp, score.tp + score.fp);
    score.accuracy = div(score.tp, score.tp + score.fp + score.fn);
    return score;
}

DetectionResult score_detections(
    const std::vector<std::vector<double>>& detections,
    const SpikeGroundTruth& truth, double tolerance_s)
{
    if (tolerance_s <= 0) throw std::invalid_argument("tolerance must be > 0");
    if (detections.size() != truth.spike_times_s.size()) {
        throw std::invalid_argument("channel count mismatch");
    }
    DetectionResult result;
    result.detections_s = detections;
    uint64_t tp = 0, fp = 0, fn = 0;
    for (size_t c = 0; c < detections.size(); ++c) {
        const auto score =
            score_channel(detections[c], truth.spike_times_s[c], tolerance_s);
        result.per_channel.push_back(score);
        tp += score.tp;
        fp += score.fp;
        fn += score.fn;
    }
    result.aggregate.tp = tp;
    result.aggregate.fp = fp;
    result.aggregate.fn = fn;
    const auto div = [](uint64_t num, uint64_t den) {
        return den ? double(num) / double(den) : 0.0;
    };
    result.aggregate.sensitivity = div(tp, tp + fn);
    result.aggregate.fdr = div(fp, tp + fp);
    result.aggregate.accuracy = div(tp, tp + fp + fn);
    return result;
}

}  // namespace naer
