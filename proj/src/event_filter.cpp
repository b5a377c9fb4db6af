#include "naer/event_filter.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace naer {

void FilterConfig::validate() const
{
    if (!(window_s > 0)) throw std::invalid_argument("window_s must be > 0");
    if (min_events < 1) throw std::invalid_argument("min_events must be >= 1");
    if (hold_s < 0) throw std::invalid_argument("hold_s must be >= 0");
}

FilterResult filter_spike_events(const std::vector<AddressEvent>& events,
                                 const ArrayGeometry& geometry,
                                 const FilterConfig& cfg)
{
    cfg.validate();
    const auto window_ns = int64_t(std::llround(cfg.window_s * 1e9));
    const auto hold_ns = int64_t(std::llround(cfg.hold_s * 1e9));

    struct ChannelState {
        std::deque<int64_t> recent;  // event times inside the window
        int64_t hold_until_ns = -1;
    };
    std::vector<ChannelState> state(geometry.capacity());

    FilterResult result;
    result.events.reserve(events.size());
    for (const auto& ev : events) {
        auto& st = state[geometry.channel_of(ev.x, ev.y)];
        const int64_t t = ev.ideal_t_ns;
        st.recent.push_back(t);
        while (!st.recent.empty() && st.recent.front() < t - window_ns) {
            st.recent.pop_front();
        }
        bool pass = false;
        if (st.recent.size() >= cfg.min_events) {
            pass = true;
            st.hold_until_ns = t + hold_ns;  // dense again: re-arm the hold
        } else if (t <= st.hold_until_ns) {
            pass = true;
        }
        if (pass) result.events.push_back(ev);
    }
    result.gain = result.events.empty()
                      ? (events.empty() ? 1.0 : double(events.size()))
                      : double(events.size()) / double(result.events.size());
    return result;
}

}  // namespace naer
