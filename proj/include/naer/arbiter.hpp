#pragma once

#include <cstdint>
#include <vector>

#include "naer/adm.hpp"
#include "naer/geometry.hpp"

namespace naer {

/// One arbitrated AER event. Collision-group members are delayed by
/// priority * t_arb_ns relative to their ideal (pre-arbitration) timestamp.
struct AddressEvent {
    int64_t t_ns = 0;
    int64_t ideal_t_ns = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    int8_t polarity = 0;
    uint32_t priority = 0;  // rank within collision group, 0-based
    double step_v = 0.0;
};

struct ArbiterConfig {
    int64_t t_arb_ns = 10;
    uint64_t fairness_seed = 0;  // toggle-state initialization
};

struct CollisionStats {
    double mean_group_size = 0.0;  // over instants with >= 2 requesters
    double sd_group_size = 0.0;
    uint32_t min_group_size = 0;
    uint32_t max_group_size = 0;
    uint64_t collision_instants = 0;
    uint64_t colliding_events = 0;
    uint64_t total_events = 0;
    /// Fraction of colliding events falling inside ground-truth spike
    /// windows; 0 when no ground truth was supplied.
    double spike_fraction = 0.0;
};

/// Fair toggle-tree arbiter model over a full binary tree of the next power
/// of two >= channel count. Each internal node alternates the branch it
/// grants first on successive arbitrations. State persists across collision
/// groups, so long-run ranks are fair.
class ToggleTree {
public:
    ToggleTree(uint32_t num_channels, uint64_t seed);

    /// Rank the given channel set (one event each); returns rank per input
    /// position, a permutation of 0..n-1.
    std::vector<uint32_t> rank(const std::vector<uint32_t>& channels);

private:
    uint32_t leaves_;
    std::vector<uint8_t> toggle_;  // per internal node
};

/// Merge per-channel trains into one globally ordered stream. Events sharing
/// an ideal timestamp form a collision group ranked by the toggle tree; event
/// with rank r is emitted at ideal_t + r * t_arb_ns. Lossless: no event is
/// ever dropped. Output sorted by t_ns with (x, y) tiebreak.
std::vector<AddressEvent> arbitrate(const std::vector<ChannelEventTrain>& trains,
                                    const ArrayGeometry& geometry,
                                    const ArbiterConfig& cfg);

CollisionStats collision_stats(const std::vector<AddressEvent>& events,
                               const SpikeGroundTruth* truth = nullptr,
                               const ArrayGeometry* geometry = nullptr,
                               double spike_window_s = 1e-3);

}  // namespace naer
