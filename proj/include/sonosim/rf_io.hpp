#pragma once

// Raw RF dump: a 32-byte little-endian header followed by float32 samples in
// row-major (line, sample) order.
//
//   offset  size  field
//        0     4  magic "RFv1"
//        4     4  n_lines   (uint32)
//        8     4  n_samples (uint32)
//       12     4  reserved, zero
//       16     8  sampling frequency, Hz (float64)
//       24     8  sound speed, m/s (float64)

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sonosim/beamsim.hpp"
#include "sonosim/error.hpp"

namespace sonosim {

static_assert(std::endian::native == std::endian::little, "RF dump assumes a little-endian host");

inline constexpr std::size_t rf_header_bytes = 32;

struct RfDump {
    std::uint32_t n_lines = 0;
    std::uint32_t n_samples = 0;
    double sampling_frequency = 0.0;
    double sound_speed = 0.0;
    std::vector<float> samples;
};

inline void write_rf_dump(const std::filesystem::path& path, const RfFrame& rf) {
    unsigned char header[rf_header_bytes] = {};
    std::memcpy(header, "RFv1", 4);
    const auto lines = static_cast<std::uint32_t>(rf.n_lines());
    const auto samples = static_cast<std::uint32_t>(rf.n_samples());
    std::memcpy(header + 4, &lines, 4);
    std::memcpy(header + 8, &samples, 4);
    std::memcpy(header + 16, &rf.config.sampling_frequency, 8);
    std::memcpy(header + 24, &rf.config.sound_speed, 8);

    std::vector<float> body(rf.samples.size());
    auto src = rf.samples.pixels();
    for (std::size_t i = 0; i < body.size(); ++i) body[i] = static_cast<float>(src[i]);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(header), rf_header_bytes);
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size() * sizeof(float)));
    if (!out) throw IoError("failed writing " + path.string());
}

inline RfDump read_rf_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    unsigned char header[rf_header_bytes];
    in.read(reinterpret_cast<char*>(header), rf_header_bytes);
    if (!in || std::memcmp(header, "RFv1", 4) != 0) throw IoError(path.string() + ": missing RFv1 header");
    RfDump d;
    std::memcpy(&d.n_lines, header + 4, 4);
    std::memcpy(&d.n_samples, header + 8, 4);
    std::memcpy(&d.sampling_frequency, header + 16, 8);
    std::memcpy(&d.sound_speed, header + 24, 8);
    d.samples.resize(static_cast<std::size_t>(d.n_lines) * d.n_samples);
    in.read(reinterpret_cast<char*>(d.samples.data()), static_cast<std::streamsize>(d.samples.size() * sizeof(float)));
    if (!in) throw IoError(path.string() + ": truncated RF data");
    return d;
}

}  // namespace sonosim
