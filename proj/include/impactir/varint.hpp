#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace impactir::varint {

// 7 payload bits per byte, least significant group first; the high bit
// marks a continuation byte.

inline void encode(std::uint64_t value, std::vector<std::uint8_t>& out)
{
    while (value >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(value | 0x80));
        value >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(value));
}

inline std::size_t encoded_size(std::uint64_t value)
{
    std::size_t n = 1;
    while (value >= 0x80) {
        value >>= 7;
        ++n;
    }
    return n;
}

/// Decodes one value starting at `pos` and advances it. Returns nullopt on
/// truncation or on encodings longer than 10 bytes.
inline std::optional<std::uint64_t> decode(std::span<const std::uint8_t> in, std::size_t& pos)
{
    std::uint64_t value = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        if (pos >= in.size()) {
            return std::nullopt;
        }
        const std::uint8_t byte = in[pos++];
        value |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
        if ((byte & 0x80) == 0) {
            return value;
        }
    }
    return std::nullopt;
}

}  // namespace impactir::varint
