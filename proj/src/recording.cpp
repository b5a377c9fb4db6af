#include "naer/recording.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace naer {

bool SpikeGroundTruth::empty() const
{
    for (const auto& ch : spike_times_s) {
        if (!ch.empty()) return false;
    }
    return true;
}

size_t SpikeGroundTruth::total_spikes() const
{
    size_t n = 0;
    for (const auto& ch : spike_times_s) n += ch.size();
    return n;
}

void SampledRecording::validate() const
{
    if (fs_hz <= 0) throw std::invalid_argument("fs_hz must be positive");
    const size_t len = samples_per_channel();
    for (const auto& ch : channels) {
        if (ch.size() != len) {
            throw std::invalid_argument("channel lengths differ");
        }
    }
    if (geometry.capacity() < channels.size()) {
        throw std::invalid_argument("geometry too small for channel count");
    }
}

namespace {

std::string header_path(const std::string& path) { return path + ".hdr"; }

void save_raw(const SampledRecording& rec, const std::string& path,
              double scale)
{
    std::ofstream hdr(header_path(path));
    if (!hdr) throw std::runtime_error("cannot write header: " + path);
    hdr << "fs_hz " << rec.fs_hz << "\n"
        << "channels " << rec.num_channels() << "\n"
        << "samples " << rec.samples_per_channel() << "\n"
        << "scale " << scale << "\n"
        << "rows " << rec.geometry.n_rows << "\n"
        << "cols " << rec.geometry.n_cols << "\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& ch : rec.channels) {
        out.write(reinterpret_cast<const char*>(ch.data()),
                  std::streamsize(ch.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

SampledRecording load_raw(const std::string& path, double scale_override)
{
    std::ifstream hdr(header_path(path));
    if (!hdr) throw std::runtime_error("missing sidecar header: " + path);
    double fs = 0, scale = 1.0;
    size_t channels = 0, samples = 0;
    unsigned rows = 1, cols = 1;
    std::string key;
    while (hdr >> key) {
        if (key == "fs_hz") hdr >> fs;
        else if (key == "channels") hdr >> channels;
        else if (key == "samples") hdr >> samples;
        else if (key == "scale") hdr >> scale;
        else if (key == "rows") hdr >> rows;
        else if (key == "cols") hdr >> cols;
        else throw std::runtime_error("malformed header key: " + key);
    }
    if (fs <= 0 || channels == 0) {
        throw std::runtime_error("malformed header: " + header_path(path));
    }
    if (scale_override != 1.0) scale = scale_override;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    in.seekg(0, std::ios::end);
    const auto bytes = size_t(in.tellg());
    in.seekg(0);
    if (bytes != channels * samples * sizeof(float)) {
        throw std::runtime_error("length mismatch in " + path);
    }

    SampledRecording rec;
    rec.fs_hz = fs;
    rec.geometry = {uint16_t(rows), uint16_t(cols)};
    rec.channels.assign(channels, std::vector<float>(samples));
    for (auto& ch : rec.channels) {
        in.read(reinterpret_cast<char*>(ch.data()),
                std::streamsize(samples * sizeof(float)));
        if (!in) throw std::runtime_error("truncated file: " + path);
        for (auto& v : ch) {
            if (std::isnan(v)) throw std::runtime_error("NaN sample in " + path);
            v = float(v * scale);
        }
    }
    return rec;
}

void save_csv(const SampledRecording& rec, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (size_t c = 0; c < rec.num_channels(); ++c) {
        out << (c ? "," : "") << "ch" << c;
    }
    out << "\n";
    const size_t n = rec.samples_per_channel();
    for (size_t i = 0; i < n; ++i) {
        for (size_t c = 0; c < rec.num_channels(); ++c) {
            if (c) out << ",";
            out << rec.channels[c][i];
        }
        out << "\n";
    }
}

SampledRecording load_csv(const std::string& path, double fs_hz,
                          ArrayGeometry geometry, double scale)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty()) {
        throw std::runtime_error("empty file: " + path);
    }
    size_t channels = 1;
    for (char c : line) {
        if (c == ',') ++channels;
    }
    SampledRecording rec;
    rec.fs_hz = fs_hz;
    rec.geometry = geometry.capacity() >= channels
                       ? geometry
                       : ArrayGeometry::near_square(uint32_t(channels));
    rec.channels.assign(channels, {});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        size_t c = 0;
        while (std::getline(row, cell, ',')) {
            if (c >= channels) {
                throw std::runtime_error("ragged row in " + path);
            }
            const double v = std::stod(cell) * scale;
            if (std::isnan(v)) throw std::runtime_error("NaN sample in " + path);
            rec.channels[c++].push_back(float(v));
        }
        if (c != channels) throw std::runtime_error("ragged row in " + path);
    }
    rec.validate();
    return rec;
}

}  // namespace

void save_recording(const SampledRecording& rec, const std::string& path,
                    RecordingFormat format, double scale_to_volts)
{
    rec.validate();
    if (format == RecordingFormat::RawF32) {
        save_raw(rec, path, scale_to_volts);
    } else {
        save_csv(rec, path);
    }
}

SampledRecording load_recording(const std::string& path, RecordingFormat format,
                                double fs_hz, ArrayGeometry geometry,
                                double scale_to_volts)
{
    if (format == RecordingFormat::RawF32) {
        auto rec = load_raw(path, scale_to_volts);
        if (fs_hz > 0) rec.fs_hz = fs_hz;
        if (geometry.capacity() >= rec.num_channels() &&
            geometry.capacity() > 1) {
            rec.geometry = geometry;
        }
        rec.validate();
        return rec;
    }
    if (fs_hz <= 0) {
        throw std::invalid_argument("CSV loading requires fs_hz");
    }
    return load_csv(path, fs_hz, geometry, scale_to_volts);
}

}  // namespace naer
