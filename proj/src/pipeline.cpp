#include "naer/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace naer {

namespace {

using nlohmann::json;

struct Dataset {
    SampledRecording rec;
    SpikeGroundTruth truth;
    bool has_truth = false;
};

Dataset load_dataset(const PipelineConfig& cfg)
{
    Dataset ds;
    if (cfg.use_synthetic) {
        auto [rec, truth] = generate_synthetic(cfg.synth);
        if (cfg.replicate > 1) {
            std::tie(ds.rec, ds.truth) =
                replicate_channels(rec, truth, cfg.replicate);
        } else {
            ds.rec = std::move(rec);
            ds.truth = std::move(truth);
        }
        ds.has_truth = !ds.truth.empty();
    } else {
        if (cfg.input_path.empty()) {
            throw std::invalid_argument("pipeline needs a dataset source");
        }
        ds.rec = load_recording(cfg.input_path, cfg.input_format,
                                cfg.input_fs_hz, cfg.input_geometry);
        ds.truth.spike_times_s.assign(ds.rec.num_channels(), {});
        ds.has_truth = false;
    }
    return ds;
}

/// Per-channel stair-step reconstruction buffers built from a stream, kept
/// one channel at a time so worst-case replication stays in memory budget.
class ChannelReconstructor {
public:
    ChannelReconstructor(const EventStream& stream, size_t num_samples)
        : stream_(stream),
          num_samples_(num_samples),
          by_channel_(stream.geometry.capacity())
    {
        const size_t n = stream.packet_count();
        for (size_t i = 0; i < n; ++i) {
            uint16_t x, y;
            if (stream.mode == StreamMode::Apm) {
                x = stream.apm_packets[i].x;
                y = stream.apm_packets[i].y;
            } else {
                x = stream.pcm_packets[i].x;
                y = stream.pcm_packets[i].y;
            }
            by_channel_[stream.geometry.channel_of(x, y)].push_back(
                uint32_t(i));
        }
    }

    std::vector<float> channel(uint32_t c, const ChannelThresholds& th) const
    {
        std::vector<double> deltas(num_samples_, 0.0);
        for (uint32_t i : by_channel_[c]) {
            if (stream_.mode == StreamMode::Apm) {
                const auto& p = stream_.apm_packets[i];
                auto s = size_t(
                    std::llround(double(p.t_ns) * stream_.fs_hz * 1e-9));
                s = std::min(s, num_samples_ - 1);
                deltas[s] += p.polarity > 0 ? th.th_on : th.th_off;
            } else {
                const auto& p = stream_.pcm_packets[i];
                const auto s =
                    std::min(num_samples_ - 1,
                             size_t(p.bin_index + 1) * stream_.bin_width_n);
                deltas[s] += th.th_on * p.n_on + th.th_off * p.n_off;
            }
        }
        std::vector<float> out(num_samples_);
        double acc = 0.0;
        for (size_t i = 0; i < num_samples_; ++i) {
            acc += deltas[i];
            out[i] = float(acc);
        }
        return out;
    }

private:
    const EventStream& stream_;
    size_t num_samples_;
    std::vector<std::vector<uint32_t>> by_channel_;
};

}  // namespace

RunReport run_pipeline(const PipelineConfig& cfg)
{
    RunReport report;
    report.config = cfg;

    Dataset ds = load_dataset(cfg);
    ds.rec.validate();
    report.channels = ds.rec.num_channels();
    report.duration_s = ds.rec.duration_s();
    const size_t num_samples = ds.rec.samples_per_channel();
    const double duration = ds.rec.duration_s();

    // Calibration. A flat recording has no dynamic range: report zero events
    // and mark the downstream metrics skipped instead of failing the run.
    std::vector<AdmConfig> adm_cfgs;
    std::vector<double> v_spike_max(report.channels, 0.0);
    bool flat = false;
    try {
        adm_cfgs = calibrate_thresholds(ds.rec, cfg.k);
        for (size_t c = 0; c < report.channels; ++c) {
            adm_cfgs[c].refractory_s = cfg.refractory_s;
            v_spike_max[c] = adm_cfgs[c].th_on / cfg.k;
        }
    } catch (const std::runtime_error&) {
        flat = true;
    }
    if (flat) {
        report.detection_skipped = true;
        RateModelParams p;
        p.geometry = ds.rec.geometry;
        p.fs_hz = ds.rec.fs_hz;
        p.b_adc = cfg.b_adc;
        report.rates.tdr_full_sample_bps =
            tdr_theoretical(p, TransmissionMode::FullSample);
        return report;
    }

    // Encode.
    std::vector<ChannelEventTrain> trains;
    trains.reserve(report.channels);
    for (size_t c = 0; c < report.channels; ++c) {
        if (c > 0 && ds.rec.channels[c] == ds.rec.channels[0] &&
            adm_cfgs[c].th_on == adm_cfgs[0].th_on) {
            ChannelEventTrain train = trains[0];
            train.channel = uint32_t(c);
            trains.push_back(std::move(train));
            continue;
        }
        if (cfg.dual_threshold) {
            trains.push_back(encode_dual_threshold(
                ds.rec.channels[c], ds.rec.fs_hz, adm_cfgs[c], cfg.dual,
                v_spike_max[c], uint32_t(c)));
        } else {
            trains.push_back(encode_channel(ds.rec.channels[c], ds.rec.fs_hz,
                                            adm_cfgs[c], uint32_t(c)));
        }
    }

    // Arbitrate.
    auto events = arbitrate(trains, ds.rec.geometry, cfg.arbiter);
    trains.clear();
    trains.shrink_to_fit();
    report.collisions = collision_stats(
        events, ds.has_truth ? &ds.truth : nullptr, &ds.rec.geometry);

    // Optional event filter.
    if (cfg.filter_events) {
        auto filtered =
            filter_spike_events(events, ds.rec.geometry, cfg.filter);
        report.filter_gain = filtered.gain;
        events = std::move(filtered.events);
    }
    report.total_events = events.size();

    // Packetize all modes for the rate report; the configured mode also
    // feeds reconstruction.
    const auto apm =
        packetize_apm(events, ds.rec.geometry, ds.rec.fs_hz, duration);
    const auto pcm1 =
        packetize_pcm(events, ds.rec.geometry, 1, ds.rec.fs_hz, duration);
    const auto pcm4 =
        packetize_pcm(events, ds.rec.geometry, 4, ds.rec.fs_hz, duration);
    const EventStream* selected = &apm;
    EventStream selected_pcm;
    if (cfg.mode == StreamMode::Pcm) {
        if (cfg.bin_width_n == 1) {
            selected = &pcm1;
        } else if (cfg.bin_width_n == 4) {
            selected = &pcm4;
        } else {
            selected_pcm = packetize_pcm(events, ds.rec.geometry,
                                         cfg.bin_width_n, ds.rec.fs_hz,
                                         duration);
            selected = &selected_pcm;
        }
    }

    RateModelParams base;
    base.geometry = ds.rec.geometry;
    base.fs_hz = ds.rec.fs_hz;
    base.b_adc = cfg.b_adc;
    base.n_spike = cfg.synth.spike_duration_ms_max * 1e-3 * ds.rec.fs_hz;
    base.f_neu = ds.has_truth ? double(ds.truth.total_spikes()) /
                                    (double(report.channels) * duration)
                              : cfg.synth.firing_rate_hz;
    report.rates.tdr_full_sample_bps =
        tdr_theoretical(base, TransmissionMode::FullSample);
    report.rates.tdr_measured_bps =
        report.total_events == 0 ? 0.0 : measure_tdr(*selected);
    if (selected->mode == StreamMode::Pcm && report.total_events > 0) {
        report.rates.alpha_b = measure_bin_occupancy(*selected);
    }
    if (report.total_events > 0 && base.f_neu > 0) {
        const double tdr_spk =
            tdr_theoretical(base, TransmissionMode::Spdwor);
        report.rates.crs = compression_ratios(
            report.rates.tdr_full_sample_bps, tdr_spk, measure_tdr(apm),
            measure_tdr(pcm1), measure_tdr(pcm4));
    }

    if (report.total_events == 0) {
        report.detection_skipped = true;
        return report;
    }

    // Reconstruct, drift-remove and score channel by channel.
    ChannelReconstructor recon(*selected, num_samples);
    std::vector<std::vector<double>> detections(report.channels);
    double rmse_sum = 0, cc_sum = 0;
    for (uint32_t c = 0; c < report.channels; ++c) {
        ChannelThresholds th{adm_cfgs[c].th_on, adm_cfgs[c].th_off};
        auto recovered = recon.channel(c, th);
        remove_drift_inplace(recovered, ds.rec.fs_hz, cfg.drift_cutoff_hz);

        const double rmse = rmse_normalized(ds.rec.channels[c], recovered);
        const double cc = pearson_cc(ds.rec.channels[c], recovered);
        report.fidelity.rmse_per_channel.push_back(rmse);
        report.fidelity.cc_per_channel.push_back(cc);
        rmse_sum += rmse;
        cc_sum += cc;

        DetectionConfig det = cfg.detection;
        if (det.th_spd <= 0 && cfg.spd_k > 0 &&
            det.method == DetectionMethod::AbsoluteThreshold) {
            det.th_spd = cfg.spd_k * v_spike_max[c];
        }
        detections[c] = det.method == DetectionMethod::Neo
                            ? detect_neo(recovered, ds.rec.fs_hz, det)
                            : detect_at(recovered, ds.rec.fs_hz, det);
    }
    report.fidelity.rmse = rmse_sum / double(report.channels);
    report.fidelity.cc = cc_sum / double(report.channels);

    if (ds.has_truth) {
        report.detection = score_detections(detections, ds.truth,
                                            cfg.detection.tolerance_s);
    } else {
        report.detection_skipped = true;
    }
    return report;
}

namespace {

std::string mode_name(const PipelineConfig& cfg)
{
    if (cfg.mode == StreamMode::Apm) return "APM";
    return "PCM" + std::to_string(cfg.bin_width_n);
}

json report_to_json(const RunReport& r)
{
    json j;
    j["dataset"] = r.config.use_synthetic
                       ? "synthetic(sigma=" +
                             std::to_string(r.config.synth.noise_sigma) + ")"
                       : r.config.input_path;
    j["channels"] = r.channels;
    j["duration_s"] = r.duration_s;
    j["mode"] = mode_name(r.config);
    j["seed"] = r.config.seed;
    j["k"] = r.config.k;
    j["total_events"] = r.total_events;
    j["fidelity"] = {{"rmse", r.fidelity.rmse}, {"cc", r.fidelity.cc}};
    if (r.detection) {
        j["detection"] = {{"accuracy", r.detection->aggregate.accuracy},
                          {"sensitivity", r.detection->aggregate.sensitivity},
                          {"fdr", r.detection->aggregate.fdr},
                          {"tp", r.detection->aggregate.tp},
                          {"fp", r.detection->aggregate.fp},
                          {"fn", r.detection->aggregate.fn}};
    } else {
        j["detection"] = nullptr;
    }
    j["detection_skipped"] = r.detection_skipped;
    j["rates"] = {{"tdr_bps", r.rates.tdr_measured_bps},
                  {"tdr_full_sample_bps", r.rates.tdr_full_sample_bps},
                  {"alpha_b", r.rates.alpha_b},
                  {"cr1", r.rates.crs.cr1},
                  {"cr2", r.rates.crs.cr2},
                  {"cr3", r.rates.crs.cr3},
                  {"cr4", r.rates.crs.cr4}};
    j["collisions"] = {{"mean", r.collisions.mean_group_size},
                       {"sd", r.collisions.sd_group_size},
                       {"min", r.collisions.min_group_size},
                       {"max", r.collisions.max_group_size},
                       {"instants", r.collisions.collision_instants},
                       {"spike_fraction", r.collisions.spike_fraction}};
    j["filter_gain"] = r.filter_gain;
    return j;
}

}  // namespace

std::string emit_report(const RunReport& report, const std::string& output_dir)
{
    namespace fs = std::filesystem;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(now).count();
    fs::path dir;
    for (int attempt = 0;; ++attempt) {
        std::ostringstream name;
        name << "run_" << ns + attempt;
        dir = fs::path(output_dir) / name.str();
        if (!fs::exists(dir)) break;
    }
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "fidelity.csv");
        out << "dataset,channels,mode,RMSE,CC,A,S,FDR,DR_Mbps\n";
        const auto j = report_to_json(report);
        out << j["dataset"].get<std::string>() << "," << report.channels << ","
            << mode_name(report.config) << ",";
        if (report.total_events > 0) {
            out << report.fidelity.rmse << "," << report.fidelity.cc << ",";
        } else {
            out << ",,";
        }
        if (report.detection) {
            out << report.detection->aggregate.accuracy << ","
                << report.detection->aggregate.sensitivity << ","
                << report.detection->aggregate.fdr << ",";
        } else {
            out << ",,,";
        }
        out << report.rates.tdr_measured_bps / 1e6 << "\n";
    }
    {
        std::ofstream out(dir / "detection.csv");
        out << "channel,tp,fp,fn,sensitivity,fdr,accuracy\n";
        if (report.detection) {
            for (size_t c = 0; c < report.detection->per_channel.size(); ++c) {
                const auto& s = report.detection->per_channel[c];
                out << c << "," << s.tp << "," << s.fp << "," << s.fn << ","
                    << s.sensitivity << "," << s.fdr << "," << s.accuracy
                    << "\n";
            }
        }
    }
    {
        std::ofstream out(dir / "rates.csv");
        out << "tdr_bps,tdr_full_sample_bps,alpha_b,cr1,cr2,cr3,cr4,"
               "filter_gain\n";
        out << report.rates.tdr_measured_bps << ","
            << report.rates.tdr_full_sample_bps << "," << report.rates.alpha_b
            << "," << report.rates.crs.cr1 << "," << report.rates.crs.cr2
            << "," << report.rates.crs.cr3 << "," << report.rates.crs.cr4
            << "," << report.filter_gain << "\n";
    }
    {
        std::ofstream out(dir / "collisions.csv");
        out << "mean_group,sd_group,min_group,max_group,instants,"
               "spike_fraction\n";
        out << report.collisions.mean_group_size << ","
            << report.collisions.sd_group_size << ","
            << report.collisions.min_group_size << ","
            << report.collisions.max_group_size << ","
            << report.collisions.collision_instants << ","
            << report.collisions.spike_fraction << "\n";
    }
    {
        std::ofstream out(dir / "summary.json");
        out << report_to_json(report).dump(2) << "\n";
    }
    return dir.string();
}

namespace {

double to_double(const std::string& v) { return std::stod(v); }

}  // namespace

PipelineConfig parse_config_map(const std::map<std::string, std::string>& kv)
{
    PipelineConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "dataset") {
            cfg.use_synthetic = value == "synthetic";
            if (!cfg.use_synthetic) cfg.input_path = value;
        } else if (key == "fs_hz") {
            cfg.synth.fs_hz = to_double(value);
            cfg.input_fs_hz = to_double(value);
        } else if (key == "duration_s") cfg.synth.duration_s = to_double(value);
        else if (key == "firing_rate_hz") cfg.synth.firing_rate_hz = to_double(value);
        else if (key == "noise_sigma") cfg.synth.noise_sigma = to_double(value);
        else if (key == "template_id") cfg.synth.template_id = std::stoi(value);
        else if (key == "replicate") cfg.replicate = uint32_t(std::stoul(value));
        else if (key == "k") cfg.k = to_double(value);
        else if (key == "refractory_s") cfg.refractory_s = to_double(value);
        else if (key == "dual_threshold") cfg.dual_threshold = value == "true" || value == "1";
        else if (key == "k1") cfg.dual.k1 = to_double(value);
        else if (key == "k2") cfg.dual.k2 = to_double(value);
        else if (key == "timer_s") cfg.dual.timer_s = to_double(value);
        else if (key == "t_arb_ns") cfg.arbiter.t_arb_ns = std::stoll(value);
        else if (key == "fairness_seed") cfg.arbiter.fairness_seed = std::stoull(value);
        else if (key == "mode") {
            if (value == "apm") cfg.mode = StreamMode::Apm;
            else if (value.rfind("pcm", 0) == 0) {
                cfg.mode = StreamMode::Pcm;
                cfg.bin_width_n = uint16_t(std::stoul(value.substr(3)));
            } else throw std::invalid_argument("bad mode: " + value);
        }
        else if (key == "filter_events") cfg.filter_events = value == "true" || value == "1";
        else if (key == "filter_window_s") cfg.filter.window_s = to_double(value);
        else if (key == "filter_min_events") cfg.filter.min_events = uint32_t(std::stoul(value));
        else if (key == "filter_hold_s") cfg.filter.hold_s = to_double(value);
        else if (key == "drift_cutoff_hz") cfg.drift_cutoff_hz = to_double(value);
        else if (key == "detection_method") {
            cfg.detection.method = value == "neo" ? DetectionMethod::Neo
                                                  : DetectionMethod::AbsoluteThreshold;
        }
        else if (key == "th_spd") cfg.detection.th_spd = to_double(value);
        else if (key == "spd_k") cfg.spd_k = to_double(value);
        else if (key == "tolerance_s") cfg.detection.tolerance_s = to_double(value);
        else if (key == "b_adc") cfg.b_adc = std::stoi(value);
        else if (key == "seed") {
            cfg.seed = std::stoull(value);
            cfg.synth.seed = cfg.seed;
        }
        else if (key == "output_dir") cfg.output_dir = value;
        else throw std::invalid_argument("unknown config key: " + key);
    }
    return cfg;
}

PipelineConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{}
                                          : s.substr(b, e - b + 1);
        };
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return parse_config_map(kv);
}

}  // namespace naer
