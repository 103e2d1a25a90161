// Little-endian float32 stream helpers for the bundle file formats.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

namespace datefrag::detail {

inline void write_f32le(std::ostream& out, std::span<const float> values) {
    std::vector<unsigned char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(values[i]);
        buf[i * 4 + 0] = static_cast<unsigned char>(bits & 0xFF);
        buf[i * 4 + 1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
        buf[i * 4 + 2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
        buf[i * 4 + 3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline bool read_f32le(std::istream& in, std::span<float> values) {
    std::vector<unsigned char> buf(values.size() * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) return false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(buf[i * 4 + 0]) |
                                   (static_cast<std::uint32_t>(buf[i * 4 + 1]) << 8) |
                                   (static_cast<std::uint32_t>(buf[i * 4 + 2]) << 16) |
                                   (static_cast<std::uint32_t>(buf[i * 4 + 3]) << 24);
        values[i] = std::bit_cast<float>(bits);
    }
    return true;
}

} // namespace datefrag::detail
