#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "naer/arbiter.hpp"
#include "naer/geometry.hpp"

namespace naer {

enum class StreamMode : uint8_t { Apm = 0, Pcm = 1 };

struct ApmPacket {
    int64_t t_ns = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    int8_t polarity = 0;
};

struct PcmBinPacket {
    uint32_t bin_index = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    uint16_t n_on = 0;
    uint16_t n_off = 0;
};

/// Ordered packet sequence with exact bit accounting.
/// APM packets cost 1 + address_bits; PCM packets cost
/// n_on + n_off + address_bits (the paper's unary-cost count accounting).
/// Set fixed_count_bits > 0 to switch PCM count cost to 2 * fixed width.
struct EventStream {
    StreamMode mode = StreamMode::Apm;
    ArrayGeometry geometry;
    double fs_hz = 0.0;
    uint16_t bin_width_n = 0;  // PCM only: bin = bin_width_n / fs_hz
    double duration_s = 0.0;
    int fixed_count_bits = 0;  // 0 = paper's unary-cost accounting
    std::vector<ApmPacket> apm_packets;
    std::vector<PcmBinPacket> pcm_packets;

    uint64_t total_bits() const;
    size_t packet_count() const
    {
        return mode == StreamMode::Apm ? apm_packets.size() : pcm_packets.size();
    }
};

EventStream packetize_apm(const std::vector<AddressEvent>& events,
                          const ArrayGeometry& geometry, double fs_hz,
                          double duration_s);

EventStream packetize_pcm(const std::vector<AddressEvent>& events,
                          const ArrayGeometry& geometry, uint16_t bin_width_n,
                          double fs_hz, double duration_s);

/// total_bits / duration_s.
double measure_tdr(const EventStream& stream);

/// Non-empty bins / total bins (channels x ceil(duration / bin width)).
/// Throws on APM streams.
double measure_bin_occupancy(const EventStream& stream);

/// Mean n_on + n_off over non-empty bins (0 for an empty stream).
double mean_pcm_count(const EventStream& stream);

/// ".naer" container: magic "NAER", version, mode, geometry, fs, bin width,
/// duration, then fixed-width little-endian records. Round trips are
/// byte-identical.
void write_stream(const EventStream& stream, const std::string& path);
EventStream read_stream(const std::string& path);

/// One packet per row, for inspection with external tools.
void write_stream_csv(const EventStream& stream, const std::string& path);

}  // namespace naer
