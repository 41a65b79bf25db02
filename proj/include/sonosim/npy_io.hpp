#pragma once

// Minimal NumPy .npy (format 1.0) reader/writer for little-endian float64 and
// uint8 arrays, used for conformance fixtures.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sonosim/error.hpp"

namespace sonosim::npy {

static_assert(std::endian::native == std::endian::little, "npy writer assumes a little-endian host");

template <typename T>
constexpr const char* descr() {
    if constexpr (std::is_same_v<T, double>) return "<f8";
    else if constexpr (std::is_same_v<T, std::uint8_t>) return "|u1";
    else static_assert(sizeof(T) == 0, "unsupported npy element type");
}

inline std::string shape_tuple(std::span<const std::size_t> shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) s += ",";
        if (i + 1 < shape.size()) s += " ";
    }
    return s + ")";
}

template <typename T>
void write(const std::filesystem::path& path, std::span<const T> data, std::vector<std::size_t> shape) {
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    if (count != data.size()) throw ShapeMismatch("npy::write: shape does not match data length");

    std::string header = std::string("{'descr': '") + descr<T>() + "', 'fortran_order': False, 'shape': " +
                         shape_tuple(shape) + ", }";
    const std::size_t preamble = 10;
    std::size_t total = preamble + header.size() + 1;
    header.append((64 - total % 64) % 64, ' ');
    header += '\n';

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write("\x93NUMPY\x01\x00", 8);
    const auto len = static_cast<std::uint16_t>(header.size());
    out.put(static_cast<char>(len & 0xff));
    out.put(static_cast<char>(len >> 8));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
    if (!out) throw IoError("failed writing " + path.string());
}

template <typename T>
struct Array {
    std::vector<std::size_t> shape;
    std::vector<T> data;
};

template <typename T>
Array<T> read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "\x93NUMPY\x01\x00", 8) != 0) throw IoError(path.string() + ": not an npy 1.0 file");
    unsigned char lenb[2];
    in.read(reinterpret_cast<char*>(lenb), 2);
    std::string header(static_cast<std::size_t>(lenb[0] | (lenb[1] << 8)), '\0');
    in.read(header.data(), static_cast<std::streamsize>(header.size()));
    if (header.find(std::string("'") + descr<T>() + "'") == std::string::npos)
        throw IoError(path.string() + ": unexpected dtype");
    Array<T> arr;
    const auto open = header.find('(', header.find("'shape'"));
    const auto close = header.find(')', open);
    std::string dims = header.substr(open + 1, close - open - 1);
    std::size_t pos = 0, count = 1;
    while (pos < dims.size()) {
        const auto comma = dims.find(',', pos);
        const std::string tok = dims.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (tok.find_first_not_of(' ') != std::string::npos) {
            arr.shape.push_back(std::stoul(tok));
            count *= arr.shape.back();
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    arr.data.resize(count);
    in.read(reinterpret_cast<char*>(arr.data.data()), static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw IoError(path.string() + ": truncated data");
    return arr;
}

}  // namespace sonosim::npy
