#include "naer/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace naer {

namespace {

constexpr char kMagic[4] = {'N', 'A', 'E', 'R'};
constexpr uint8_t kVersion = 1;

void check_address(const ArrayGeometry& geometry, uint16_t x, uint16_t y)
{
    if (x >= geometry.n_cols || y >= geometry.n_rows) {
        throw std::invalid_argument("event address outside geometry");
    }
}

template <typename T>
void write_le(std::ofstream& out, T v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated stream file");
    return v;
}

}  // namespace

uint64_t EventStream::total_bits() const
{
    const uint64_t addr = uint64_t(geometry.address_bits());
    if (mode == StreamMode::Apm) {
        return apm_packets.size() * (1 + addr);
    }
    uint64_t bits = 0;
    for (const auto& p : pcm_packets) {
        const uint64_t count_bits =
            fixed_count_bits > 0 ? uint64_t(2 * fixed_count_bits)
                                 : uint64_t(p.n_on) + p.n_off;
        bits += count_bits + addr;
    }
    return bits;
}

EventStream packetize_apm(const std::vector<AddressEvent>& events,
                          const ArrayGeometry& geometry, double fs_hz,
                          double duration_s)
{
    EventStream stream;
    stream.mode = StreamMode::Apm;
    stream.geometry = geometry;
    stream.fs_hz = fs_hz;
    stream.duration_s = duration_s;
    stream.apm_packets.reserve(events.size());
    for (const auto& ev : events) {
        check_address(geometry, ev.x, ev.y);
        stream.apm_packets.push_back({ev.t_ns, ev.x, ev.y, ev.polarity});
    }
    return stream;
}

EventStream packetize_pcm(const std::vector<AddressEvent>& events,
                          const ArrayGeometry& geometry, uint16_t bin_width_n,
                          double fs_hz, double duration_s)
{
    if (bin_width_n == 0) throw std::invalid_argument("bin width must be >= 1");
    if (fs_hz <= 0) throw std::invalid_argument("fs_hz must be positive");

    EventStream stream;
    stream.mode = StreamMode::Pcm;
    stream.geometry = geometry;
    stream.fs_hz = fs_hz;
    stream.bin_width_n = bin_width_n;
    stream.duration_s = duration_s;

    // (channel, bin) -> counts; the map keeps bins channel-then-time ordered.
    std::map<std::pair<uint32_t, uint32_t>, std::pair<uint32_t, uint32_t>> bins;
    for (const auto& ev : events) {
        check_address(geometry, ev.x, ev.y);
        const auto channel = geometry.channel_of(ev.x, ev.y);
        const auto sample =
            uint64_t(std::llround(double(ev.ideal_t_ns) * fs_hz * 1e-9));
        const auto bin = uint32_t(sample / bin_width_n);
        auto& counts = bins[{channel, bin}];
        if (ev.polarity > 0) ++counts.first;
        else ++counts.second;
    }
    stream.pcm_packets.reserve(bins.size());
    for (const auto& [key, counts] : bins) {
        uint16_t x = 0, y = 0;
        stream.geometry.address_of(key.first, x, y);
        stream.pcm_packets.push_back({key.second, x, y,
                                      uint16_t(std::min(counts.first, 0xffffu)),
                                      uint16_t(std::min(counts.second, 0xffffu))});
    }
    // Time-major order for transmission.
    std::stable_sort(stream.pcm_packets.begin(), stream.pcm_packets.end(),
                     [](const PcmBinPacket& a, const PcmBinPacket& b) {
                         return a.bin_index < b.bin_index;
                     });
    return stream;
}

double measure_tdr(const EventStream& stream)
{
    if (stream.duration_s <= 0) {
        throw std::invalid_argument("stream duration must be positive");
    }
    return double(stream.total_bits()) / stream.duration_s;
}

double measure_bin_occupancy(const EventStream& stream)
{
    if (stream.mode != StreamMode::Pcm) {
        throw std::invalid_argument("occupancy undefined for APM streams");
    }
    if (stream.duration_s <= 0 || stream.fs_hz <= 0) {
        throw std::invalid_argument("stream duration must be positive");
    }
    const auto bins_per_channel = uint64_t(
        std::ceil(stream.duration_s * stream.fs_hz / stream.bin_width_n));
    const uint64_t total = bins_per_channel * stream.geometry.capacity();
    if (total == 0) return 0.0;
    return double(stream.pcm_packets.size()) / double(total);
}

double mean_pcm_count(const EventStream& stream)
{
    if (stream.mode != StreamMode::Pcm || stream.pcm_packets.empty()) return 0.0;
    uint64_t sum = 0;
    for (const auto& p : stream.pcm_packets) sum += uint64_t(p.n_on) + p.n_off;
    return double(sum) / double(stream.pcm_packets.size());
}

void write_stream(const EventStream& stream, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(kMagic, 4);
    write_le<uint8_t>(out, kVersion);
    write_le<uint8_t>(out, uint8_t(stream.mode));
    write_le<uint16_t>(out, stream.geometry.n_rows);
    write_le<uint16_t>(out, stream.geometry.n_cols);
    write_le<uint32_t>(out, uint32_t(std::llround(stream.fs_hz)));
    write_le<uint16_t>(out, stream.bin_width_n);
    write_le<uint64_t>(out, uint64_t(std::llround(stream.duration_s * 1e9)));
    if (stream.mode == StreamMode::Apm) {
        for (const auto& p : stream.apm_packets) {
            write_le<uint64_t>(out, uint64_t(p.t_ns));
            write_le<uint16_t>(out, p.x);
            write_le<uint16_t>(out, p.y);
            write_le<int8_t>(out, p.polarity);
        }
    } else {
        for (const auto& p : stream.pcm_packets) {
            write_le<uint32_t>(out, p.bin_index);
            write_le<uint16_t>(out, p.x);
            write_le<uint16_t>(out, p.y);
            write_le<uint16_t>(out, p.n_on);
            write_le<uint16_t>(out, p.n_off);
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

EventStream read_stream(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("bad magic in " + path);
    }
    const auto version = read_le<uint8_t>(in);
    if (version != kVersion) {
        throw std::runtime_error("unsupported stream version");
    }
    EventStream stream;
    const auto mode = read_le<uint8_t>(in);
    if (mode > 1) throw std::runtime_error("bad mode byte");
    stream.mode = StreamMode(mode);
    stream.geometry.n_rows = read_le<uint16_t>(in);
    stream.geometry.n_cols = read_le<uint16_t>(in);
    stream.fs_hz = read_le<uint32_t>(in);
    stream.bin_width_n = read_le<uint16_t>(in);
    stream.duration_s = double(read_le<uint64_t>(in)) * 1e-9;

    while (true) {
        if (in.peek() == std::ifstream::traits_type::eof()) break;
        if (stream.mode == StreamMode::Apm) {
            ApmPacket p;
            p.t_ns = int64_t(read_le<uint64_t>(in));
            p.x = read_le<uint16_t>(in);
            p.y = read_le<uint16_t>(in);
            p.polarity = read_le<int8_t>(in);
            stream.apm_packets.push_back(p);
        } else {
            PcmBinPacket p;
            p.bin_index = read_le<uint32_t>(in);
            p.x = read_le<uint16_t>(in);
            p.y = read_le<uint16_t>(in);
            p.n_on = read_le<uint16_t>(in);
            p.n_off = read_le<uint16_t>(in);
            stream.pcm_packets.push_back(p);
        }
    }
    return stream;
}

void write_stream_csv(const EventStream& stream, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    if (stream.mode == StreamMode::Apm) {
        out << "t_ns,x,y,polarity\n";
        for (const auto& p : stream.apm_packets) {
            out << p.t_ns << "," << p.x << "," << p.y << ","
                << int(p.polarity) << "\n";
        }
    } else {
        out << "bin_index,x,y,n_on,n_off\n";
        for (const auto& p : stream.pcm_packets) {
            out << p.bin_index << "," << p.x << "," << p.y << "," << p.n_on
                << "," << p.n_off << "\n";
        }
    }
}

}  // namespace naer
