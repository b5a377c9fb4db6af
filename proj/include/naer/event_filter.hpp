#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "naer/arbiter.hpp"

namespace naer {

/// Temporal-density event filter: forward only events preceded by a dense
/// burst on the same channel, i.e. events plausibly belonging to spikes.
struct FilterConfig {
    double window_s = 0.5e-3;  // look-back window
    uint32_t min_events = 2;   // events in window (incl. current) to open
    double hold_s = 2e-3;      // once open, pass everything for this long

    void validate() const;
};

struct FilterResult {
    std::vector<AddressEvent> events;  // subsequence of the input
    double gain = 1.0;                 // input events / output events
};

FilterResult filter_spike_events(const std::vector<AddressEvent>& events,
                                 const ArrayGeometry& geometry,
                                 const FilterConfig& cfg);

}  // namespace naer
