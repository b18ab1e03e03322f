#pragma once

// Wire format for transporting encoding symbols.
//
// Every packet is a fixed 30-byte header followed by one symbol payload:
//
//   magic "BFEC" | version u8 | family u8 | k u32 | n u32 | symbol_size u32
//   | esi u32 | spec_hash u64 | payload[symbol_size]
//
// Integers are big-endian.  `spec_hash` is the hash of the canonical code
// spec text, so a decoder can refuse symbols that were produced by a
// different code before XORing them into anything.  The sentinel esi
// 0xFFFFFFFF marks the stream trailer, whose payload begins with the
// big-endian count of padding bytes appended to the original input; all
// other packets carry esi < n.
//
// Parsing never throws on malformed bytes: a reader skips forward to the
// next magic and reports how much it consumed, so a corrupt packet costs
// only itself.

#include <cstdint>
#include <cstring>
#include <optional>
#include <vector>

#include "bandfec/codespec.hpp"

namespace bandfec {

inline constexpr std::uint32_t kTrailerEsi = 0xFFFFFFFFu;
inline constexpr std::size_t kPacketHeaderSize = 30;
inline constexpr char kPacketMagic[4] = {'B', 'F', 'E', 'C'};
inline constexpr std::uint8_t kPacketVersion = 1;

struct SymbolPacket {
    std::uint8_t version = kPacketVersion;
    CodeFamily family = CodeFamily::Band;
    std::uint32_t k = 0;
    std::uint32_t n = 0;
    std::uint32_t symbol_size = 0;
    std::uint32_t esi = 0;
    std::uint64_t spec_hash = 0;
    std::vector<std::uint8_t> payload;

    bool is_trailer() const { return esi == kTrailerEsi; }

    bool operator==(const SymbolPacket&) const = default;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
    out.push_back(static_cast<std::uint8_t>(value >> 24));
    out.push_back(static_cast<std::uint8_t>(value >> 16));
    out.push_back(static_cast<std::uint8_t>(value >> 8));
    out.push_back(static_cast<std::uint8_t>(value));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
    put_u32(out, static_cast<std::uint32_t>(value >> 32));
    put_u32(out, static_cast<std::uint32_t>(value));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline std::uint64_t get_u64(const std::uint8_t* p) {
    return (static_cast<std::uint64_t>(get_u32(p)) << 32) | get_u32(p + 4);
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_packet(const SymbolPacket& packet) {
    if (packet.payload.size() != packet.symbol_size) {
        throw std::invalid_argument("packet payload length must equal symbol_size");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kPacketHeaderSize + packet.payload.size());
    out.insert(out.end(), kPacketMagic, kPacketMagic + 4);
    out.push_back(packet.version);
    out.push_back(static_cast<std::uint8_t>(packet.family));
    detail::put_u32(out, packet.k);
    detail::put_u32(out, packet.n);
    detail::put_u32(out, packet.symbol_size);
    detail::put_u32(out, packet.esi);
    detail::put_u64(out, packet.spec_hash);
    out.insert(out.end(), packet.payload.begin(), packet.payload.end());
    return out;
}

// Parses one packet at `offset`.  Returns nullopt if the bytes there do not
// form a complete, valid packet.
inline std::optional<SymbolPacket> parse_packet(const std::uint8_t* data, std::size_t size,
                                                std::size_t offset = 0) {
    if (offset > size || size - offset < kPacketHeaderSize) return std::nullopt;
    const std::uint8_t* p = data + offset;
    if (std::memcmp(p, kPacketMagic, 4) != 0) return std::nullopt;
    SymbolPacket packet;
    packet.version = p[4];
    if (packet.version != kPacketVersion) return std::nullopt;
    switch (p[5]) {
        case static_cast<std::uint8_t>(CodeFamily::Band):
        case static_cast<std::uint8_t>(CodeFamily::Staircase):
        case static_cast<std::uint8_t>(CodeFamily::Windowed):
            packet.family = static_cast<CodeFamily>(p[5]);
            break;
        default:
            return std::nullopt;
    }
    packet.k = detail::get_u32(p + 6);
    packet.n = detail::get_u32(p + 10);
    packet.symbol_size = detail::get_u32(p + 14);
    packet.esi = detail::get_u32(p + 18);
    packet.spec_hash = detail::get_u64(p + 22);
    if (packet.k == 0 || packet.n < packet.k) return std::nullopt;
    if (packet.symbol_size == 0) return std::nullopt;
    if (packet.esi >= packet.n && !packet.is_trailer()) return std::nullopt;
    if (size - offset - kPacketHeaderSize < packet.symbol_size) return std::nullopt;
    const std::uint8_t* body = p + kPacketHeaderSize;
    packet.payload.assign(body, body + packet.symbol_size);
    return packet;
}

// Forward scanner over a byte buffer.  next() yields each valid packet in
// order; after a corrupt stretch it resynchronizes on the next magic.
class PacketReader {
public:
    PacketReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::optional<SymbolPacket> next() {
        while (offset_ < size_) {
            if (auto packet = parse_packet(data_, size_, offset_)) {
                offset_ += kPacketHeaderSize + packet->symbol_size;
                return packet;
            }
            ++skipped_;
            ++offset_;
            // Hop straight to the next candidate magic byte.
            while (offset_ < size_ && data_[offset_] != kPacketMagic[0]) {
                ++offset_;
                ++skipped_;
            }
        }
        return std::nullopt;
    }

    std::size_t skipped_bytes() const { return skipped_; }

private:
    const std::uint8_t* data_ = nullptr;
    std::size_t size_ = 0;
    std::size_t offset_ = 0;
    std::size_t skipped_ = 0;
};

// True when the packet belongs to this code: same family, geometry, and
// canonical-spec hash.
inline bool packet_matches(const SymbolPacket& packet, const CodeSpec& spec,
                           std::uint64_t spec_hash) {
    return packet.family == spec.family && packet.k == spec.k && packet.n == spec.n &&
           packet.spec_hash == spec_hash;
}

}  // namespace bandfec
