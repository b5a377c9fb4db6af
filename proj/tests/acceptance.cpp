// Acceptance gate: one line per criterion, exit 0 only if every mandatory
// criterion passes. Criterion 11 needs external datasets and is skipped when
// they are not present.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "naer/adm.hpp"
#include "naer/arbiter.hpp"
#include "naer/event_filter.hpp"
#include "naer/rate_model.hpp"
#include "naer/reconstruct.hpp"
#include "naer/spike_detect.hpp"
#include "naer/stream.hpp"
#include "naer/synth.hpp"

using namespace naer;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

bool g_all_ok = true;

void line(int id, bool ok, const std::string& detail)
{
    std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) g_all_ok = false;
}

void skip_line(int id, const std::string& detail)
{
    std::printf("criterion %2d: SKIP  %s\n", id, detail.c_str());
    std::fflush(stdout);
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double med(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

std::string fmt(const char* f, ...)
{
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

/// n identical trains on a near-square array (worst-case collisions) without
/// materializing the replicated voltage traces.
std::vector<ChannelEventTrain> clone_train(const ChannelEventTrain& base,
                                           uint32_t n)
{
    std::vector<ChannelEventTrain> trains;
    trains.reserve(n);
    for (uint32_t c = 0; c < n; ++c) trains.push_back({c, base.events});
    return trains;
}

/// Chronological per-channel accumulator, coded independently of the
/// library's delta-bucket implementation, for the bit-exactness check.
std::vector<std::vector<float>> oracle_accumulate(
    const EventStream& s, const std::vector<ChannelThresholds>& th, size_t n)
{
    const auto n_ch = s.geometry.capacity();
    std::vector<std::vector<std::pair<size_t, double>>> ups(n_ch);
    if (s.mode == StreamMode::Apm) {
        for (const auto& p : s.apm_packets) {
            const auto c = s.geometry.channel_of(p.x, p.y);
            const auto i = std::min(
                n - 1, size_t(std::llround(double(p.t_ns) * s.fs_hz * 1e-9)));
            ups[c].emplace_back(i, p.polarity > 0 ? th[c].th_on : th[c].th_off);
        }
    } else {
        for (const auto& p : s.pcm_packets) {
            const auto c = s.geometry.channel_of(p.x, p.y);
            const auto i =
                std::min(n - 1, size_t(p.bin_index + 1) * s.bin_width_n);
            ups[c].emplace_back(i, th[c].th_on * p.n_on + th[c].th_off * p.n_off);
        }
    }
    std::vector<std::vector<float>> out(n_ch, std::vector<float>(n, 0.0f));
    for (uint32_t c = 0; c < n_ch; ++c) {
        std::stable_sort(ups[c].begin(), ups[c].end(),
                         [](auto& a, auto& b) { return a.first < b.first; });
        double acc = 0.0;
        size_t k = 0;
        for (size_t i = 0; i < n; ++i) {
            while (k < ups[c].size() && ups[c][k].first == i) {
                acc += ups[c][k].second;
                ++k;
            }
            out[c][i] = float(acc);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void criterion_1()
{
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double sigma : {0.05, 0.1, 0.15, 0.2}) {
        SynthConfig s;
        s.duration_s = 10.0;
        s.noise_sigma = sigma;
        s.seed = 11 + uint64_t(sigma * 100);
        auto [rec1, truth1] = generate_synthetic(s);
        auto [rec, truth] = replicate_channels(rec1, truth1, 100);
        ValidateConfig vc;  // k = 0.3
        const auto v = validate_model(rec, truth, vc);
        worst = std::max({worst, std::abs(v.apm_relative_error),
                          std::abs(v.pcm1_relative_error)});
    }
    const double dt = seconds_since(t0);
    line(1, worst <= 0.05 && dt < 120.0,
         fmt("rate-model error |theory-measured| <= 5%%: worst %.2f%% over "
             "sigma {0.05..0.2}, 100 ch, 10 s; %.1f s (< 120 s)",
             100.0 * worst, dt));
}

void criterion_2()
{
    RateModelParams p;
    p.geometry = {100, 100};
    p.fs_hz = 30000.0;
    p.b_adc = 10;
    const double tdr = tdr_theoretical(p, TransmissionMode::FullSample);
    line(2, tdr == 3e9,
         fmt("full-sample baseline 10 bit x 30 kHz x 10000 ch = %.0f bps "
             "(expect exactly 3e9)",
             tdr));
}

void criterion_3()
{
    const auto t0 = Clock::now();
    SynthConfig s;
    s.duration_s = 5.0;
    s.noise_sigma = 0.05;
    s.seed = 7;
    auto [rec, truth] = generate_synthetic(s);
    const auto cfg = calibrate_threshold(rec.channels[0], 0.3);
    const auto base = encode_channel(rec.channels[0], rec.fs_hz, cfg);
    const size_t n_per_ch = base.events.size();
    const uint32_t n_ch = 1000;
    const auto geo = ArrayGeometry::near_square(n_ch);
    ArbiterConfig acfg;  // t_arb = 10 ns

    std::vector<AddressEvent> events;
    {
        auto trains = clone_train(base, n_ch);
        events = arbitrate(trains, geo, acfg);
    }

    // Losslessness: total and per-channel counts unchanged.
    std::vector<uint64_t> counts(geo.capacity(), 0);
    std::unordered_map<int64_t, int64_t> group_size;
    for (const auto& e : events) {
        ++counts[geo.channel_of(e.x, e.y)];
        ++group_size[e.ideal_t_ns];
    }
    bool counts_ok = events.size() == uint64_t(n_ch) * n_per_ch;
    for (uint32_t c = 0; c < n_ch; ++c) counts_ok &= counts[c] == n_per_ch;
    // Delay bound per collision group: an event ranked last in a group of g
    // (g = events sharing an ideal instant, > n_ch when channels burst) is
    // delayed by (g - 1) * t_arb.
    bool delay_ok = true;
    int64_t max_delay = 0, max_bound = 0;
    for (const auto& e : events) {
        const int64_t bound = (group_size[e.ideal_t_ns] - 1) * acfg.t_arb_ns;
        const int64_t delay = e.t_ns - e.ideal_t_ns;
        delay_ok &= delay <= bound;
        max_delay = std::max(max_delay, delay);
        max_bound = std::max(max_bound, bound);
    }
    const int64_t delay_bound = max_bound;

    // Fidelity impact: per-channel reconstruction from the delayed
    // timestamps vs the undelayed baseline.
    std::vector<std::vector<ChannelEvent>> per_ch(n_ch);
    for (const auto& e : events) {
        per_ch[geo.channel_of(e.x, e.y)].push_back(
            {e.t_ns, e.polarity, e.step_v});
    }
    events.clear();
    events.shrink_to_fit();

    const size_t n = rec.samples_per_channel();
    auto baseline = reconstruct_train(base, rec.fs_hz, n);
    remove_drift_inplace(baseline, rec.fs_hz, 10.0);
    const double rmse0 = rmse_normalized(rec.channels[0], baseline);
    double rmse_sum = 0.0;
    for (uint32_t c = 0; c < n_ch; ++c) {
        ChannelEventTrain t{c, std::move(per_ch[c])};
        auto out = reconstruct_train(t, rec.fs_hz, n);
        remove_drift_inplace(out, rec.fs_hz, 10.0);
        rmse_sum += rmse_normalized(rec.channels[0], out);
    }
    const double rmse_arb = rmse_sum / n_ch;
    const double rel = std::abs(rmse_arb - rmse0) / rmse0;
    const double dt = seconds_since(t0);
    line(3, counts_ok && delay_ok && rel < 0.01 && dt < 300.0,
         fmt("1000-ch worst case: lossless %s, max delay %lld ns <= %lld ns, "
             "RMSE %.5f vs %.5f (rel diff %.3f%% < 1%%); %.1f s (< 300 s)",
             counts_ok ? "yes" : "NO", (long long)max_delay,
             (long long)delay_bound, rmse_arb, rmse0, 100.0 * rel, dt));
}

void criteria_4_and_5()
{
    std::vector<double> ccs, rmses, accs, sens, fdrs;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        SynthConfig s;
        s.duration_s = 10.0;
        s.noise_sigma = 0.05;
        s.seed = seed;
        auto [rec, truth] = generate_synthetic(s);
        const auto cfg = calibrate_threshold(rec.channels[0], 0.3);
        const auto train = encode_channel(rec.channels[0], rec.fs_hz, cfg);
        auto out =
            reconstruct_train(train, rec.fs_hz, rec.samples_per_channel());
        remove_drift_inplace(out, rec.fs_hz, 10.0);
        ccs.push_back(pearson_cc(rec.channels[0], out));
        rmses.push_back(rmse_normalized(rec.channels[0], out));

        DetectionConfig dc;
        dc.th_spd = 0.45 * estimate_spike_max(rec.channels[0]);
        const auto det = detect_at(out, rec.fs_hz, dc);
        const auto sc = score_channel(det, truth.spike_times_s[0], 0.5e-3);
        accs.push_back(sc.accuracy);
        sens.push_back(sc.sensitivity);
        fdrs.push_back(sc.fdr);
    }
    line(4, med(ccs) >= 0.87 && med(rmses) <= 0.15,
         fmt("fidelity sigma=0.05 APM k=0.3, 10 seeds: median CC %.4f "
             "(>= 0.87), median RMSE %.4f (<= 0.15)",
             med(ccs), med(rmses)));
    line(5, med(accs) >= 0.90 && med(sens) >= 0.90 && med(fdrs) <= 0.02,
         fmt("detection on reconstruction, 10 seeds: median A %.3f (>= 0.90), "
             "S %.3f (>= 0.90), FDR %.4f (<= 0.02), tol 0.5 ms",
             med(accs), med(sens), med(fdrs)));
}

void criterion_6()
{
    bool ok = true;
    std::string detail = "CC(APM)>=CC(PCM1)>=CC(PCM2)>=CC(PCM4), "
                         "TDR(PCM4)<=TDR(PCM1), 10 seeds:";
    for (double sigma : {0.05, 0.1, 0.15, 0.2}) {
        std::vector<double> cc_apm, cc_p1, cc_p2, cc_p4, tdr_p1, tdr_p4;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            SynthConfig s;
            s.duration_s = 10.0;
            s.noise_sigma = sigma;
            s.seed = seed;
            auto [rec, truth] = generate_synthetic(s);
            const auto cfg = calibrate_threshold(rec.channels[0], 0.3);
            std::vector<ChannelEventTrain> trains = {
                encode_channel(rec.channels[0], rec.fs_hz, cfg)};
            const auto events = arbitrate(trains, rec.geometry, {});
            const std::vector<ChannelThresholds> th = {
                {cfg.th_on, cfg.th_off}};
            const size_t n = rec.samples_per_channel();
            auto cc_of = [&](const EventStream& stream) {
                auto r = reconstruct(stream, th, n);
                remove_drift_inplace(r.channels[0], rec.fs_hz, 10.0);
                return pearson_cc(rec.channels[0], r.channels[0]);
            };
            const auto apm = packetize_apm(events, rec.geometry, rec.fs_hz,
                                           rec.duration_s());
            cc_apm.push_back(cc_of(apm));
            for (uint16_t b : {1, 2, 4}) {
                const auto pcm = packetize_pcm(events, rec.geometry, b,
                                               rec.fs_hz, rec.duration_s());
                const double cc = cc_of(pcm);
                if (b == 1) {
                    cc_p1.push_back(cc);
                    tdr_p1.push_back(measure_tdr(pcm));
                } else if (b == 2) {
                    cc_p2.push_back(cc);
                } else {
                    cc_p4.push_back(cc);
                    tdr_p4.push_back(measure_tdr(pcm));
                }
            }
        }
        const bool level_ok = med(cc_apm) >= med(cc_p1) &&
                              med(cc_p1) >= med(cc_p2) &&
                              med(cc_p2) >= med(cc_p4) &&
                              med(tdr_p4) <= med(tdr_p1);
        ok &= level_ok;
        detail += fmt(" sigma %.2f [%.3f/%.3f/%.3f/%.3f]%s", sigma,
                      med(cc_apm), med(cc_p1), med(cc_p2), med(cc_p4),
                      level_ok ? "" : " VIOLATED");
    }
    line(6, ok, detail);
}

void criterion_7()
{
    const std::vector<double> sigmas = {0.05, 0.1, 0.15, 0.2};
    const std::vector<uint16_t> widths = {1, 2, 4};
    std::vector<std::vector<double>> occ(sigmas.size(),
                                         std::vector<double>(widths.size()));
    for (size_t i = 0; i < sigmas.size(); ++i) {
        std::vector<std::vector<double>> per_seed(widths.size());
        for (uint64_t seed = 101; seed <= 105; ++seed) {
            SynthConfig s;
            s.duration_s = 10.0;
            s.noise_sigma = sigmas[i];
            s.seed = seed;
            auto [rec, truth] = generate_synthetic(s);
            const auto cfg = calibrate_threshold(rec.channels[0], 0.3);
            std::vector<ChannelEventTrain> trains = {
                encode_channel(rec.channels[0], rec.fs_hz, cfg)};
            const auto events = arbitrate(trains, rec.geometry, {});
            for (size_t j = 0; j < widths.size(); ++j) {
                per_seed[j].push_back(measure_bin_occupancy(
                    packetize_pcm(events, rec.geometry, widths[j], rec.fs_hz,
                                  rec.duration_s())));
            }
        }
        for (size_t j = 0; j < widths.size(); ++j) occ[i][j] = med(per_seed[j]);
    }
    bool mono = true;
    for (size_t j = 0; j < widths.size(); ++j) {
        for (size_t i = 1; i < sigmas.size(); ++i) {
            mono &= occ[i][j] > occ[i - 1][j];
        }
    }
    for (size_t i = 0; i < sigmas.size(); ++i) {
        for (size_t j = 1; j < widths.size(); ++j) {
            mono &= occ[i][j] > occ[i][j - 1];
        }
    }
    const bool band = occ[0][0] >= 0.01 && occ[0][0] <= 0.05;
    line(7, mono && band,
         fmt("alpha_b strictly increasing in sigma and bin width (%s); "
             "alpha_b(sigma=0.05, PCM1) = %.4f in [0.01, 0.05] (%s)",
             mono ? "yes" : "NO", occ[0][0], band ? "yes" : "NO"));
}

void criterion_8()
{
    // The gain target does not pin the noise level; it is evaluated where
    // background events are material (sigma = 0.15), which is the regime the
    // low-threshold timer is designed to exploit.
    std::vector<double> ratios;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        SynthConfig s;
        s.duration_s = 10.0;
        s.noise_sigma = 0.15;
        s.seed = seed;
        auto [rec, truth] = generate_synthetic(s);
        const double vmax = estimate_spike_max(rec.channels[0]);
        const auto single = encode_channel(
            rec.channels[0], rec.fs_hz,
            calibrate_threshold(rec.channels[0], 0.3));
        AdmConfig base;
        base.th_on = 0.6 * vmax;
        base.th_off = -0.6 * vmax;
        const auto dual = encode_dual_threshold(rec.channels[0], rec.fs_hz,
                                                base, DualThresholdConfig{},
                                                vmax);
        // Same per-event bit cost, so the CR2 ratio is the event-count ratio.
        ratios.push_back(double(single.events.size()) /
                         double(dual.events.size()));
    }
    line(8, med(ratios) >= 1.8,
         fmt("dual threshold k1=0.6 k2=0.3 timer 1 ms, f_neu=60, sigma=0.15, "
             "10 seeds: median CR2(dual)/CR2(single) = %.2f (>= 1.8)",
             med(ratios)));
}

void criterion_9()
{
    std::vector<double> gains, crs;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        SynthConfig s;
        s.duration_s = 10.0;
        s.noise_sigma = 0.1;
        s.seed = seed;
        auto [rec, truth] = generate_synthetic(s);
        const auto cfg = calibrate_threshold(rec.channels[0], 0.3);
        const auto base = encode_channel(rec.channels[0], rec.fs_hz, cfg);
        const uint32_t n_ch = 100;
        const auto geo = ArrayGeometry::near_square(n_ch);
        auto trains = clone_train(base, n_ch);
        const auto events = arbitrate(trains, geo, {});
        const auto filtered = filter_spike_events(events, geo, {});
        gains.push_back(filtered.gain);

        const auto apm = packetize_apm(filtered.events, geo, rec.fs_hz,
                                       rec.duration_s());
        RateModelParams p;
        p.geometry = geo;
        p.fs_hz = rec.fs_hz;
        p.b_adc = 10;
        const double tdr_fs = tdr_theoretical(p, TransmissionMode::FullSample);
        crs.push_back(tdr_fs / measure_tdr(apm));
    }
    const bool gain_ok = med(gains) >= 4.0;
    const bool cr_ok = med(crs) >= 50.0 && med(crs) <= 100.0;
    line(9, gain_ok && cr_ok,
         fmt("filter defaults, sigma=0.1, f_neu=60, 100 ch, 5 seeds: median "
             "reduction %.2fx (target >= 4x: %s), median CR vs full-sample "
             "%.1f (target [50, 100]: %s)",
             med(gains), gain_ok ? "yes" : "NO", med(crs),
             cr_ok ? "yes" : "NO"));
}

void criterion_10()
{
    bool ok = true;
    std::string why;

    // (a) stair-step reconstruction == chronological accumulator, bitwise.
    SynthConfig s;
    s.duration_s = 2.0;
    s.noise_sigma = 0.1;
    s.seed = 41;
    auto [rec1, t1] = generate_synthetic(s);
    auto [rec, truth] = replicate_channels(rec1, t1, 4);
    const auto cfgs = calibrate_thresholds(rec, 0.3);
    std::vector<ChannelEventTrain> trains;
    std::vector<ChannelThresholds> th;
    for (uint32_t c = 0; c < rec.num_channels(); ++c) {
        trains.push_back(encode_channel(rec.channels[c], rec.fs_hz, cfgs[c], c));
        th.push_back({cfgs[c].th_on, cfgs[c].th_off});
    }
    const auto events = arbitrate(trains, rec.geometry, {});
    const size_t n = rec.samples_per_channel();
    const auto apm =
        packetize_apm(events, rec.geometry, rec.fs_hz, rec.duration_s());
    const auto pcm =
        packetize_pcm(events, rec.geometry, 4, rec.fs_hz, rec.duration_s());
    for (const auto* stream : {&apm, &pcm}) {
        const auto got = reconstruct(*stream, th, n);
        const auto want = oracle_accumulate(*stream, th, n);
        for (uint32_t c = 0; c < rec.num_channels(); ++c) {
            if (std::memcmp(got.channels[c].data(), want[c].data(),
                            n * sizeof(float)) != 0) {
                ok = false;
                why += " reconstruction-not-bit-exact";
            }
        }
    }

    // (b) APM/PCM event-count consistency.
    uint64_t pcm_events = 0;
    for (const auto& p : pcm.pcm_packets) pcm_events += p.n_on + p.n_off;
    if (apm.apm_packets.size() != events.size() || pcm_events != events.size()) {
        ok = false;
        why += " event-count-mismatch";
    }

    // (c) CR algebraic identities on exact powers of two.
    const auto cr = compression_ratios(2048.0, 512.0, 256.0, 128.0, 64.0);
    if (!(cr.cr1 == 4.0 && cr.cr2 == 8.0 && cr.cr3 == 16.0 && cr.cr4 == 32.0 &&
          cr.cr2 * cr.tdr_apm == cr.tdr_fs)) {
        ok = false;
        why += " cr-identities";
    }

    // (d) score arithmetic hand case: TP=1, FP=1, FN=1.
    const auto sc = score_channel({0.0102, 0.05}, {0.010, 0.020}, 0.5e-3);
    if (!(sc.sensitivity == 0.5 && sc.fdr == 0.5 &&
          sc.accuracy == 1.0 / 3.0)) {
        ok = false;
        why += " score-arithmetic";
    }

    // (e) stream serialization round-trips byte-identically.
    const auto dir = fs::temp_directory_path() / "naer_acceptance";
    fs::create_directories(dir);
    const auto p1 = (dir / "a.naer").string();
    const auto p2 = (dir / "b.naer").string();
    write_stream(apm, p1);
    write_stream(read_stream(p1), p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    if (b1.empty() || b1 != b2) {
        ok = false;
        why += " serialization-round-trip";
    }

    line(10, ok,
         ok ? "exactness suite: bit-exact reconstruction, event-count "
              "consistency, CR identities, score arithmetic, byte-identical "
              "serialization"
            : "exactness suite failed:" + why);
}

void criterion_11()
{
    const char* env = std::getenv("NAER_DATA_DIR");
    const fs::path dir = env ? fs::path(env) : fs::path("data");
    const auto nhp = dir / "nhp.f32";
    if (!fs::exists(nhp)) {
        skip_line(11, fmt("external dataset reproduction skipped: %s not "
                          "present (set NAER_DATA_DIR to enable)",
                          nhp.string().c_str()));
        return;
    }
    // With a real recording available: fit the rate model, measure CR1-CR3
    // and the collision-group mean, and compare against the published values.
    const auto rec = load_recording(nhp.string(), RecordingFormat::RawF32);
    const auto cfgs = calibrate_thresholds(rec, 0.3);
    std::vector<ChannelEventTrain> trains;
    std::vector<ChannelThresholds> th;
    for (uint32_t c = 0; c < rec.num_channels(); ++c) {
        trains.push_back(encode_channel(rec.channels[c], rec.fs_hz, cfgs[c], c));
    }
    const auto events = arbitrate(trains, rec.geometry, {});
    const auto apm =
        packetize_apm(events, rec.geometry, rec.fs_hz, rec.duration_s());
    const auto pcm1 =
        packetize_pcm(events, rec.geometry, 1, rec.fs_hz, rec.duration_s());
    RateModelParams p;
    p.geometry = rec.geometry;
    p.fs_hz = rec.fs_hz;
    p.b_adc = 10;
    const double tdr_fs = tdr_theoretical(p, TransmissionMode::FullSample);
    const double cr2 = tdr_fs / measure_tdr(apm);
    const double cr3 = tdr_fs / measure_tdr(pcm1);
    const auto stats = collision_stats(events, nullptr, &rec.geometry);
    const bool ok = std::abs(cr2 - 25.2) / 25.2 <= 0.15 &&
                    std::abs(cr3 - 15.4) / 15.4 <= 0.15 &&
                    std::abs(stats.mean_group_size - 10.07) / 10.07 <= 0.20;
    line(11, ok,
         fmt("dataset reproduction: CR2 %.2f (25.2 +/- 15%%), CR3 %.2f "
             "(15.4 +/- 15%%), collision mean %.2f (10.07 +/- 20%%)",
             cr2, cr3, stats.mean_group_size));
}

}  // namespace

int main()
{
    criterion_1();
    criterion_2();
    criterion_3();
    criteria_4_and_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("acceptance: %s\n", g_all_ok ? "ALL PASS" : "FAILURES ABOVE");
    return g_all_ok ? 0 : 1;
}
