#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "naer/arbiter.hpp"
#include "naer/synth.hpp"

using namespace naer;

namespace {

ChannelEventTrain train_of(uint32_t channel,
                           std::vector<int64_t> times_ns, int8_t pol = 1)
{
    ChannelEventTrain t;
    t.channel = channel;
    for (int64_t ts : times_ns) t.events.push_back({ts, pol, pol * 0.1});
    return t;
}

using EventKey = std::tuple<int64_t, uint16_t, uint16_t, int8_t>;

std::multiset<EventKey> key_set(const std::vector<AddressEvent>& events)
{
    std::multiset<EventKey> keys;
    for (const auto& e : events) {
        keys.insert({e.ideal_t_ns, e.x, e.y, e.polarity});
    }
    return keys;
}

}  // namespace

TEST_CASE("toggle tree ranks are a permutation")
{
    ToggleTree tree(8, 0);
    const auto ranks = tree.rank({0, 3, 5, 7});
    std::vector<uint32_t> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<uint32_t>{0, 1, 2, 3});
}

TEST_CASE("toggle tree alternates between two persistent requesters")
{
    ToggleTree tree(2, 0);
    const auto first = tree.rank({0, 1});
    const auto second = tree.rank({0, 1});
    // Whoever won the first round loses the second: the root toggled.
    CHECK(first[0] != second[0]);
    CHECK(first[1] != second[1]);
}

TEST_CASE("toggle tree is fair in the long run")
{
    ToggleTree tree(4, 42);
    std::vector<uint64_t> rank_sum(4, 0);
    const int rounds = 1000;
    for (int i = 0; i < rounds; ++i) {
        const auto r = tree.rank({0, 1, 2, 3});
        for (size_t c = 0; c < 4; ++c) rank_sum[c] += r[c];
    }
    // Mean rank 1.5 for everyone; allow a small slack.
    for (size_t c = 0; c < 4; ++c) {
        const double mean = double(rank_sum[c]) / rounds;
        CHECK(mean == doctest::Approx(1.5).epsilon(0.1));
    }
}

TEST_CASE("collision-free streams pass through undelayed")
{
    ArrayGeometry geo{2, 2};
    std::vector<ChannelEventTrain> trains = {
        train_of(0, {1000, 3000}),
        train_of(1, {2000, 4000}, -1),
    };
    const auto out = arbitrate(trains, geo, {});
    REQUIRE(out.size() == 4);
    for (const auto& e : out) {
        CHECK(e.t_ns == e.ideal_t_ns);
        CHECK(e.priority == 0);
    }
    CHECK(out[0].t_ns == 1000);
    CHECK(out[3].t_ns == 4000);
}

TEST_CASE("collision group members are spaced by the arbitration delay")
{
    ArrayGeometry geo{2, 2};
    std::vector<ChannelEventTrain> trains = {
        train_of(0, {5000}),
        train_of(1, {5000}),
        train_of(2, {5000}),
    };
    ArbiterConfig cfg;
    cfg.t_arb_ns = 10;
    const auto out = arbitrate(trains, geo, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[0].t_ns == 5000);
    CHECK(out[1].t_ns == 5010);
    CHECK(out[2].t_ns == 5020);
    for (const auto& e : out) {
        CHECK(e.ideal_t_ns == 5000);
        CHECK(e.t_ns == e.ideal_t_ns + int64_t(e.priority) * 10);
    }
}

TEST_CASE("arbitration is lossless and order-preserving per channel")
{
    SynthConfig scfg;
    scfg.duration_s = 2.0;
    scfg.noise_sigma = 0.1;
    scfg.seed = 5;
    auto [rec1, t1] = generate_synthetic(scfg);
    auto [rec, truth] = replicate_channels(rec1, t1, 16);

    std::vector<ChannelEventTrain> trains;
    const auto cfgs = calibrate_thresholds(rec, 0.3);
    for (uint32_t c = 0; c < rec.num_channels(); ++c) {
        trains.push_back(
            encode_channel(rec.channels[c], rec.fs_hz, cfgs[c], c));
    }
    size_t total = 0;
    for (const auto& t : trains) total += t.events.size();
    REQUIRE(total > 0);

    const auto out = arbitrate(trains, rec.geometry, {});
    CHECK(out.size() == total);

    // No event lost or mutated.
    std::multiset<EventKey> want;
    for (const auto& t : trains) {
        uint16_t x = 0, y = 0;
        rec.geometry.address_of(t.channel, x, y);
        for (const auto& e : t.events) {
            want.insert({e.t_ns, x, y, e.polarity});
        }
    }
    CHECK(key_set(out) == want);

    // Output is time sorted; per channel the delayed order matches input.
    for (size_t i = 1; i < out.size(); ++i) {
        CHECK(out[i - 1].t_ns <= out[i].t_ns);
    }
    std::map<uint32_t, int64_t> last_ideal;
    for (const auto& e : out) {
        const auto ch = rec.geometry.channel_of(e.x, e.y);
        auto it = last_ideal.find(ch);
        if (it != last_ideal.end()) CHECK(it->second <= e.ideal_t_ns);
        last_ideal[ch] = e.ideal_t_ns;
    }
}

TEST_CASE("replicated channels collide at every event instant")
{
    SynthConfig scfg;
    scfg.duration_s = 1.0;
    scfg.noise_sigma = 0.05;
    scfg.seed = 2;
    auto [rec1, t1] = generate_synthetic(scfg);
    auto [rec, truth] = replicate_channels(rec1, t1, 9);

    const auto cfgs = calibrate_thresholds(rec, 0.3);
    std::vector<ChannelEventTrain> trains;
    for (uint32_t c = 0; c < rec.num_channels(); ++c) {
        trains.push_back(
            encode_channel(rec.channels[c], rec.fs_hz, cfgs[c], c));
    }
    const auto out = arbitrate(trains, rec.geometry, {});
    const auto stats = collision_stats(out, &truth, &rec.geometry);
    CHECK(stats.total_events == out.size());
    CHECK(stats.colliding_events == out.size());
    // Identical channels always collide in groups that are multiples of 9.
    CHECK(stats.min_group_size >= 9);
    CHECK(stats.mean_group_size >= 9.0);
    CHECK(stats.spike_fraction > 0.0);
    CHECK(stats.spike_fraction <= 1.0);

    // Worst-case bound: last grant in a group of g is delayed (g-1)*t_arb.
    for (const auto& e : out) {
        CHECK(e.t_ns - e.ideal_t_ns <=
              int64_t(stats.max_group_size - 1) * 10);
    }
}

TEST_CASE("collision stats on a hand-built stream")
{
    ArrayGeometry geo{2, 2};
    std::vector<ChannelEventTrain> trains = {
        train_of(0, {100, 200, 300}),
        train_of(1, {100, 300}),
        train_of(2, {100}),
    };
    const auto out = arbitrate(trains, geo, {});
    const auto stats = collision_stats(out);
    // Groups: {100: 3}, {300: 2}; 200 is solo.
    CHECK(stats.collision_instants == 2);
    CHECK(stats.colliding_events == 5);
    CHECK(stats.mean_group_size == doctest::Approx(2.5));
    CHECK(stats.sd_group_size == doctest::Approx(0.5));
    CHECK(stats.min_group_size == 2);
    CHECK(stats.max_group_size == 3);
    CHECK(stats.total_events == 6);
    CHECK(stats.spike_fraction == 0.0);
}

TEST_CASE("arbitration is deterministic for a fixed fairness seed")
{
    ArrayGeometry geo{4, 4};
    std::vector<ChannelEventTrain> trains;
    for (uint32_t c = 0; c < 16; ++c) {
        trains.push_back(train_of(c, {1000, 2000, 3000}));
    }
    ArbiterConfig cfg;
    cfg.fairness_seed = 123;
    const auto a = arbitrate(trains, geo, cfg);
    const auto b = arbitrate(trains, geo, cfg);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t_ns == b[i].t_ns);
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].priority == b[i].priority);
    }
}

TEST_CASE("bad arbiter config is rejected")
{
    ArbiterConfig cfg;
    cfg.t_arb_ns = 0;
    CHECK_THROWS_AS(arbitrate({}, ArrayGeometry{1, 1}, cfg),
                    std::invalid_argument);
}
