// Command-line front end for the neuromorphic compression simulator.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "naer/pipeline.hpp"

namespace {

using namespace naer;

void add_common_synth(CLI::App* cmd, SynthConfig& synth)
{
    cmd->add_option("--fs", synth.fs_hz, "Sampling rate (Hz)");
    cmd->add_option("--duration", synth.duration_s, "Duration (s)");
    cmd->add_option("--firing-rate", synth.firing_rate_hz,
                    "Neural firing rate (Hz)");
    cmd->add_option("--noise-sigma", synth.noise_sigma,
                    "Noise s.d. (fraction of unit spike peak)");
    cmd->add_option("--template", synth.template_id, "Spike template id");
    cmd->add_option("--seed", synth.seed, "RNG seed");
}

int cmd_synth(const SynthConfig& synth, const std::string& out,
              const std::string& format)
{
    auto [rec, truth] = generate_synthetic(synth);
    save_recording(rec, out,
                   format == "csv" ? RecordingFormat::Csv
                                   : RecordingFormat::RawF32);
    std::cout << "wrote " << out << " (" << rec.num_channels() << " ch, "
              << rec.duration_s() << " s, " << truth.total_spikes()
              << " spikes)\n";
    return 0;
}

int cmd_run(PipelineConfig cfg, const std::string& config_path)
{
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    const auto report = run_pipeline(cfg);
    std::cout << "channels " << report.channels << ", events "
              << report.total_events << "\n";
    if (report.total_events > 0) {
        std::cout << "RMSE " << report.fidelity.rmse << ", CC "
                  << report.fidelity.cc << "\n";
    }
    if (report.detection) {
        const auto& d = report.detection->aggregate;
        std::cout << "A " << d.accuracy << ", S " << d.sensitivity << ", FDR "
                  << d.fdr << "\n";
    } else {
        std::cout << "detection skipped\n";
    }
    std::cout << "TDR " << report.rates.tdr_measured_bps / 1e6 << " Mbps, CR2 "
              << report.rates.crs.cr2 << ", CR3 " << report.rates.crs.cr3
              << ", CR4 " << report.rates.crs.cr4 << "\n";
    if (!cfg.output_dir.empty()) {
        std::cout << "report: " << emit_report(report, cfg.output_dir) << "\n";
    }
    return 0;
}

int cmd_inspect(const std::string& path)
{
    const auto stream = read_stream(path);
    std::cout << "mode " << (stream.mode == StreamMode::Apm
                                 ? "APM"
                                 : "PCM" + std::to_string(stream.bin_width_n))
              << "\n"
              << "geometry " << stream.geometry.n_rows << "x"
              << stream.geometry.n_cols << "\n"
              << "fs " << stream.fs_hz << " Hz, duration "
              << stream.duration_s << " s\n"
              << "packets " << stream.packet_count() << ", bits "
              << stream.total_bits() << "\n"
              << "TDR " << measure_tdr(stream) / 1e6 << " Mbps\n";
    if (stream.mode == StreamMode::Pcm) {
        std::cout << "alpha_b " << measure_bin_occupancy(stream) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Neuromorphic event compression simulator"};
    app.require_subcommand(1);

    // synth
    SynthConfig synth;
    std::string synth_out = "synthetic.f32";
    std::string synth_format = "raw";
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a synthetic recording");
    add_common_synth(synth_cmd, synth);
    synth_cmd->add_option("-o,--output", synth_out, "Output path");
    synth_cmd->add_option("--format", synth_format, "raw|csv");

    // encode: recording -> .naer stream
    PipelineConfig enc;
    std::string enc_out = "stream.naer";
    auto* encode_cmd =
        app.add_subcommand("encode", "Encode a recording into a .naer stream");
    add_common_synth(encode_cmd, enc.synth);
    encode_cmd->add_option("--input", enc.input_path,
                           "Raw .f32 recording (omit to use synthetic)");
    encode_cmd->add_option("--replicate", enc.replicate,
                           "Replicate the channel n times");
    encode_cmd->add_option("-k", enc.k, "Threshold factor");
    encode_cmd->add_option("--refractory", enc.refractory_s, "Refractory (s)");
    encode_cmd->add_option("--t-arb", enc.arbiter.t_arb_ns,
                           "Arbitration delay (ns)");
    std::string enc_mode = "apm";
    encode_cmd->add_option("--mode", enc_mode, "apm|pcm1|pcm2|pcm4");
    encode_cmd->add_option("-o,--output", enc_out, "Output stream path");

    // reconstruct
    std::string rc_stream, rc_out = "recovered.f32";
    double rc_th_on = 0.0, rc_th_off = 0.0, rc_cutoff = 10.0;
    double rc_duration = 0.0;
    auto* rc_cmd = app.add_subcommand(
        "reconstruct", "Stair-step reconstruction from a .naer stream");
    rc_cmd->add_option("--stream", rc_stream, "Input .naer stream")
        ->required();
    rc_cmd->add_option("--th-on", rc_th_on, "ON threshold (V)")->required();
    rc_cmd->add_option("--th-off", rc_th_off, "OFF threshold (V, negative)")
        ->required();
    rc_cmd->add_option("--drift-cutoff", rc_cutoff,
                       "High-pass cutoff (Hz), 0 disables");
    rc_cmd->add_option("--duration", rc_duration,
                       "Override output duration (s)");
    rc_cmd->add_option("-o,--output", rc_out, "Output recording path");

    // detect
    std::string det_input;
    DetectionConfig det_cfg;
    std::string det_method = "at";
    std::string det_out = "detections.csv";
    double det_fs = 0.0;
    auto* det_cmd =
        app.add_subcommand("detect", "Spike detection on a raw recording");
    det_cmd->add_option("--input", det_input, "Raw .f32 recording")
        ->required();
    det_cmd->add_option("--method", det_method, "at|neo");
    det_cmd->add_option("--threshold", det_cfg.th_spd,
                        "Detection threshold (0 = auto)");
    det_cmd->add_option("--tolerance", det_cfg.tolerance_s,
                        "Match half-window (s)");
    det_cmd->add_option("--fs", det_fs, "Override sampling rate");
    det_cmd->add_option("-o,--output", det_out, "Output CSV (channel,t_s)");

    // rates
    PipelineConfig rates_cfg;
    auto* rates_cmd = app.add_subcommand(
        "rates", "Measured and theoretical data rates for a synthetic run");
    add_common_synth(rates_cmd, rates_cfg.synth);
    rates_cmd->add_option("--replicate", rates_cfg.replicate, "Channels");
    rates_cmd->add_option("-k", rates_cfg.k, "Threshold factor");
    rates_cmd->add_option("--b-adc", rates_cfg.b_adc, "ADC bits");

    // sweep
    std::string sweep_axis = "firing-rate";
    std::vector<double> sweep_values;
    SweepConfig sweep_cfg;
    std::string sweep_out = "sweep.csv";
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Sweep firing rate / noise / channels");
    sweep_cmd->add_option("--axis", sweep_axis,
                          "firing-rate|noise|channels");
    sweep_cmd->add_option("--values", sweep_values, "Axis values")->required();
    sweep_cmd->add_option("--fs", sweep_cfg.fs_hz, "Sampling rate");
    sweep_cmd->add_option("--duration", sweep_cfg.duration_s, "Duration (s)");
    sweep_cmd->add_option("--noise-sigma", sweep_cfg.noise_sigma, "Noise s.d.");
    sweep_cmd->add_option("--firing-rate", sweep_cfg.firing_rate_hz,
                          "Firing rate (Hz)");
    sweep_cmd->add_option("--channels", sweep_cfg.channels, "Channel count");
    sweep_cmd->add_option("-k", sweep_cfg.k, "Threshold factor");
    sweep_cmd->add_option("--seed", sweep_cfg.seed, "RNG seed");
    sweep_cmd->add_option("-o,--output", sweep_out, "Output CSV");

    // run
    PipelineConfig run_cfg;
    std::string run_config_path;
    std::string run_mode = "apm";
    auto* run_cmd = app.add_subcommand("run", "Full pipeline run");
    add_common_synth(run_cmd, run_cfg.synth);
    run_cmd->add_option("--config", run_config_path,
                        "key = value config file (overrides flags)");
    run_cmd->add_option("--input", run_cfg.input_path,
                        "Raw .f32 recording (omit to use synthetic)");
    run_cmd->add_option("--replicate", run_cfg.replicate, "Channels");
    run_cmd->add_option("-k", run_cfg.k, "Threshold factor");
    run_cmd->add_option("--refractory", run_cfg.refractory_s, "Refractory (s)");
    run_cmd->add_option("--mode", run_mode, "apm|pcm1|pcm2|pcm4");
    run_cmd->add_option("--t-arb", run_cfg.arbiter.t_arb_ns,
                        "Arbitration delay (ns)");
    run_cmd->add_flag("--dual-threshold", run_cfg.dual_threshold,
                      "Dual-threshold encoding");
    run_cmd->add_option("--k1", run_cfg.dual.k1, "High threshold factor");
    run_cmd->add_option("--k2", run_cfg.dual.k2, "Low threshold factor");
    run_cmd->add_option("--timer", run_cfg.dual.timer_s, "Fine window (s)");
    run_cmd->add_flag("--filter", run_cfg.filter_events,
                      "Temporal-density event filter");
    run_cmd->add_option("--drift-cutoff", run_cfg.drift_cutoff_hz,
                        "High-pass cutoff (Hz)");
    run_cmd->add_option("--spd-k", run_cfg.spd_k,
                        "Detection threshold factor of V_spike_max");
    run_cmd->add_option("-O,--output-dir", run_cfg.output_dir,
                        "Report output directory");

    // inspect
    std::string inspect_path;
    auto* inspect_cmd =
        app.add_subcommand("inspect", "Print stream statistics");
    inspect_cmd->add_option("stream", inspect_path, "A .naer stream file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) return cmd_synth(synth, synth_out, synth_format);

        if (*encode_cmd) {
            enc.use_synthetic = enc.input_path.empty();
            enc.seed = enc.synth.seed;
            if (enc_mode != "apm") {
                enc.mode = StreamMode::Pcm;
                enc.bin_width_n = uint16_t(std::stoul(enc_mode.substr(3)));
            }
            // Reuse the pipeline front half, then persist the stream.
            auto cfg = enc;
            auto [rec, truth] = cfg.use_synthetic
                                    ? generate_synthetic(cfg.synth)
                                    : std::pair{load_recording(
                                                    cfg.input_path,
                                                    RecordingFormat::RawF32),
                                                SpikeGroundTruth{}};
            if (cfg.replicate > 1 && rec.num_channels() == 1) {
                std::tie(rec, truth) =
                    replicate_channels(rec, truth, cfg.replicate);
            }
            const auto cfgs = calibrate_thresholds(rec, cfg.k);
            std::vector<ChannelEventTrain> trains;
            for (size_t c = 0; c < rec.num_channels(); ++c) {
                AdmConfig a = cfgs[c];
                a.refractory_s = cfg.refractory_s;
                trains.push_back(encode_channel(rec.channels[c], rec.fs_hz, a,
                                                uint32_t(c)));
            }
            const auto events = arbitrate(trains, rec.geometry, cfg.arbiter);
            const auto stream =
                cfg.mode == StreamMode::Apm
                    ? packetize_apm(events, rec.geometry, rec.fs_hz,
                                    rec.duration_s())
                    : packetize_pcm(events, rec.geometry, cfg.bin_width_n,
                                    rec.fs_hz, rec.duration_s());
            write_stream(stream, enc_out);
            std::cout << "wrote " << enc_out << " (" << stream.packet_count()
                      << " packets, " << stream.total_bits() << " bits)\n";
            return 0;
        }

        if (*rc_cmd) {
            const auto stream = read_stream(rc_stream);
            const double duration =
                rc_duration > 0 ? rc_duration : stream.duration_s;
            const auto n = size_t(std::llround(duration * stream.fs_hz));
            std::vector<ChannelThresholds> th(stream.geometry.capacity(),
                                              {rc_th_on, rc_th_off});
            auto sig = reconstruct(stream, th, n);
            if (rc_cutoff > 0) sig = remove_drift(sig, rc_cutoff);
            SampledRecording rec;
            rec.fs_hz = sig.fs_hz;
            rec.geometry = stream.geometry;
            rec.channels = sig.channels;
            save_recording(rec, rc_out);
            std::cout << "wrote " << rc_out << "\n";
            return 0;
        }

        if (*det_cmd) {
            auto rec = load_recording(det_input, RecordingFormat::RawF32,
                                      det_fs);
            det_cfg.method = det_method == "neo"
                                 ? DetectionMethod::Neo
                                 : DetectionMethod::AbsoluteThreshold;
            std::ofstream out(det_out);
            out << "channel,t_s\n";
            size_t total = 0;
            for (size_t c = 0; c < rec.num_channels(); ++c) {
                const auto det =
                    det_cfg.method == DetectionMethod::Neo
                        ? detect_neo(rec.channels[c], rec.fs_hz, det_cfg)
                        : detect_at(rec.channels[c], rec.fs_hz, det_cfg);
                for (double t : det) out << c << "," << t << "\n";
                total += det.size();
            }
            std::cout << total << " detections -> " << det_out << "\n";
            return 0;
        }

        if (*rates_cmd) {
            auto [single, truth1] = generate_synthetic(rates_cfg.synth);
            auto [rec, truth] =
                replicate_channels(single, truth1, rates_cfg.replicate);
            ValidateConfig vc;
            vc.k = rates_cfg.k;
            const auto v = validate_model(rec, truth, vc);
            std::cout << "APM: measured " << v.tdr_apm_measured / 1e6
                      << " Mbps, theory " << v.tdr_apm_theory / 1e6
                      << " Mbps, error " << v.apm_relative_error * 100
                      << "%\n";
            std::cout << "PCM1: measured " << v.tdr_pcm1_measured / 1e6
                      << " Mbps, theory " << v.tdr_pcm1_theory / 1e6
                      << " Mbps, error " << v.pcm1_relative_error * 100
                      << "%\n";
            return 0;
        }

        if (*sweep_cmd) {
            SweepAxis axis = SweepAxis::FiringRate;
            if (sweep_axis == "noise") axis = SweepAxis::Noise;
            else if (sweep_axis == "channels") axis = SweepAxis::Channels;
            else if (sweep_axis != "firing-rate") {
                std::cerr << "unknown axis: " << sweep_axis << "\n";
                return 1;
            }
            const auto table = sweep(axis, sweep_values, sweep_cfg);
            write_sweep_csv(table, sweep_out);
            std::cout << "wrote " << sweep_out << " (" << table.size()
                      << " rows)\n";
            return 0;
        }

        if (*run_cmd) {
            run_cfg.use_synthetic = run_cfg.input_path.empty();
            run_cfg.seed = run_cfg.synth.seed;
            if (run_mode != "apm") {
                run_cfg.mode = StreamMode::Pcm;
                run_cfg.bin_width_n =
                    uint16_t(std::stoul(run_mode.substr(3)));
            }
            return cmd_run(run_cfg, run_config_path);
        }

        if (*inspect_cmd) return cmd_inspect(inspect_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
