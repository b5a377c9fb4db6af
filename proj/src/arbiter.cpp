#include "naer/arbiter.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

namespace naer {

ToggleTree::ToggleTree(uint32_t num_channels, uint64_t seed)
{
    if (num_channels == 0) num_channels = 1;
    leaves_ = 1;
    while (leaves_ < num_channels) leaves_ <<= 1;
    toggle_.assign(leaves_, 0);  // heap layout, nodes 1..leaves_-1 used
    std::mt19937_64 rng(seed);
    for (auto& t : toggle_) t = uint8_t(rng() & 1);
}

std::vector<uint32_t> ToggleTree::rank(const std::vector<uint32_t>& channels)
{
    const size_t n = channels.size();
    std::vector<uint32_t> ranks(n, 0);
    if (n <= 1) return ranks;

    // Pending-request count per tree node, heap indexed (root = 1).
    std::vector<uint32_t> pending(2 * size_t(leaves_), 0);
    for (uint32_t ch : channels) {
        if (ch >= leaves_) throw std::out_of_range("channel outside tree");
        for (size_t node = size_t(leaves_) + ch; node >= 1; node /= 2) {
            ++pending[node];
            if (node == 1) break;
        }
    }
    // Requesters per leaf (simultaneous events from one channel queue up).
    std::vector<std::vector<size_t>> leaf_queue(leaves_);
    for (size_t i = 0; i < n; ++i) leaf_queue[channels[i]].push_back(i);

    // Decisions use the toggle state frozen at group start; every traversed
    // node flips exactly once afterwards. Flipping per grant instead would
    // cancel out over a full group (even number of traversals) and pin the
    // grant order, so repeated colliders would never rotate.
    std::vector<uint8_t> start(toggle_);
    std::vector<uint8_t> traversed(leaves_, 0);

    for (uint32_t r = 0; r < n; ++r) {
        // Grant: descend from the root, preferring the toggled branch.
        size_t node = 1;
        while (node < leaves_) {
            const size_t pref = 2 * node + start[node];
            const size_t next = pending[pref] > 0 ? pref : (pref ^ 1);
            traversed[node] = 1;
            node = next;
        }
        const uint32_t ch = uint32_t(node - leaves_);
        auto& q = leaf_queue[ch];
        ranks[q.back()] = r;
        q.pop_back();
        for (size_t u = node; u >= 1; u /= 2) {
            --pending[u];
            if (u == 1) break;
        }
    }
    for (size_t v = 1; v < leaves_; ++v) {
        if (traversed[v]) toggle_[v] = start[v] ^ 1;
    }
    return ranks;
}

std::vector<AddressEvent> arbitrate(const std::vector<ChannelEventTrain>& trains,
                                    const ArrayGeometry& geometry,
                                    const ArbiterConfig& cfg)
{
    if (cfg.t_arb_ns <= 0) throw std::invalid_argument("t_arb_ns must be > 0");

    std::vector<AddressEvent> events;
    size_t total = 0;
    for (const auto& t : trains) total += t.events.size();
    events.reserve(total);

    for (const auto& train : trains) {
        uint16_t x = 0, y = 0;
        geometry.address_of(train.channel, x, y);
        for (const auto& ev : train.events) {
            AddressEvent ae;
            ae.ideal_t_ns = ev.t_ns;
            ae.t_ns = ev.t_ns;
            ae.x = x;
            ae.y = y;
            ae.polarity = ev.polarity;
            ae.step_v = ev.step_v;
            events.push_back(ae);
        }
    }

    std::sort(events.begin(), events.end(),
              [](const AddressEvent& a, const AddressEvent& b) {
                  return std::tie(a.ideal_t_ns, a.y, a.x) <
                         std::tie(b.ideal_t_ns, b.y, b.x);
              });

    ToggleTree tree(geometry.capacity(), cfg.fairness_seed);
    std::vector<uint32_t> group_channels;
    size_t i = 0;
    while (i < events.size()) {
        size_t j = i + 1;
        while (j < events.size() &&
               events[j].ideal_t_ns == events[i].ideal_t_ns) {
            ++j;
        }
        if (j - i > 1) {
            group_channels.clear();
            for (size_t k = i; k < j; ++k) {
                group_channels.push_back(
                    geometry.channel_of(events[k].x, events[k].y));
            }
            const auto ranks = tree.rank(group_channels);
            for (size_t k = i; k < j; ++k) {
                events[k].priority = ranks[k - i];
                events[k].t_ns =
                    events[k].ideal_t_ns +
                    int64_t(events[k].priority) * cfg.t_arb_ns;
            }
        }
        i = j;
    }

    std::sort(events.begin(), events.end(),
              [](const AddressEvent& a, const AddressEvent& b) {
                  return std::tie(a.t_ns, a.y, a.x) <
                         std::tie(b.t_ns, b.y, b.x);
              });
    return events;
}

CollisionStats collision_stats(const std::vector<AddressEvent>& events,
                               const SpikeGroundTruth* truth,
                               const ArrayGeometry* geometry,
                               double spike_window_s)
{
    CollisionStats stats;
    stats.total_events = events.size();
    if (events.empty()) return stats;

    std::vector<AddressEvent> sorted = events;
    std::sort(sorted.begin(), sorted.end(),
              [](const AddressEvent& a, const AddressEvent& b) {
                  return a.ideal_t_ns < b.ideal_t_ns;
              });

    double sum = 0, sum_sq = 0;
    uint64_t spike_colliding = 0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i + 1;
        while (j < sorted.size() &&
               sorted[j].ideal_t_ns == sorted[i].ideal_t_ns) {
            ++j;
        }
        const auto group = uint32_t(j - i);
        if (group >= 2) {
            ++stats.collision_instants;
            stats.colliding_events += group;
            sum += group;
            sum_sq += double(group) * group;
            stats.min_group_size = stats.min_group_size == 0
                                       ? group
                                       : std::min(stats.min_group_size, group);
            stats.max_group_size = std::max(stats.max_group_size, group);
            if (truth && geometry) {
                for (size_t k = i; k < j; ++k) {
                    const auto ch =
                        geometry->channel_of(sorted[k].x, sorted[k].y);
                    if (ch >= truth->spike_times_s.size()) continue;
                    const auto& times = truth->spike_times_s[ch];
                    const double t_s = double(sorted[k].ideal_t_ns) * 1e-9;
                    auto it = std::lower_bound(times.begin(), times.end(),
                                               t_s - spike_window_s);
                    if (it != times.end() && *it <= t_s + spike_window_s) {
                        ++spike_colliding;
                    }
                }
            }
        }
        i = j;
    }
    if (stats.collision_instants > 0) {
        const double n = double(stats.collision_instants);
        stats.mean_group_size = sum / n;
        const double var = sum_sq / n - stats.mean_group_size * stats.mean_group_size;
        stats.sd_group_size = std::sqrt(std::max(0.0, var));
    }
    if (stats.colliding_events > 0) {
        stats.spike_fraction =
            double(spike_colliding) / double(stats.colliding_events);
    }
    return stats;
}

}  // namespace naer
