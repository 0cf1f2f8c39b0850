// Little-endian byte packing helpers shared by the node/bucket/record codecs.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace svx::wire {

inline void put_u8(std::vector<std::byte>& out, std::uint8_t v) {
    out.push_back(static_cast<std::byte>(v));
}

inline void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
    out.push_back(static_cast<std::byte>(v & 0xFF));
    out.push_back(static_cast<std::byte>((v >> 8) & 0xFF));
}

inline void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::vector<std::byte>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_i64(std::vector<std::byte>& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

class Reader {
  public:
    Reader(const std::byte* data, std::size_t size) : p_(data), end_(data + size) {}
    explicit Reader(const std::vector<std::byte>& v) : Reader(v.data(), v.size()) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

    std::uint16_t u16() {
        const std::byte* p = take(2);
        return static_cast<std::uint16_t>(std::to_integer<std::uint16_t>(p[0]) |
                                          (std::to_integer<std::uint16_t>(p[1]) << 8));
    }

    std::uint32_t u32() {
        const std::byte* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(p[i]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        const std::byte* p = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::to_integer<std::uint64_t>(p[i]) << (8 * i);
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    std::string str(std::size_t n) {
        const std::byte* p = take(n);
        return std::string(reinterpret_cast<const char*>(p), n);
    }

    std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

  private:
    const std::byte* take(std::size_t n) {
        if (remaining() < n) throw std::runtime_error("wire: truncated record");
        const std::byte* p = p_;
        p_ += n;
        return p;
    }

    const std::byte* p_;
    const std::byte* end_;
};

}  // namespace svx::wire
