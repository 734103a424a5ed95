#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sol {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

std::string hex_encode(BytesView data);
Bytes hex_decode(std::string_view hex);

// Standard-alphabet Base64 with padding, no line wrapping.
std::string base64_encode(BytesView data);
Bytes base64_decode(std::string_view text);

// Size of base64_encode(data) for a payload of n raw bytes.
constexpr size_t base64_length(size_t n) { return 4 * ((n + 2) / 3); }

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

// Big-endian primitive serialization used by every canonical encoding.
class ByteWriter {
public:
    void u8(uint8_t v) { out_.push_back(v); }
    void u16(uint16_t v);
    void u32(uint32_t v);
    void u64(uint64_t v);
    void raw(BytesView data) { out_.insert(out_.end(), data.begin(), data.end()); }
    void prefixed(BytesView data);  // u32 length + bytes

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

// Throws MalformedEncoding on out-of-bounds reads.
class ByteReader {
public:
    explicit ByteReader(BytesView data) : data_(data) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    Bytes raw(size_t n);
    Bytes prefixed(size_t max_len = SIZE_MAX);

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

private:
    void need(size_t n) const;
    BytesView data_;
    size_t pos_ = 0;
};

}  // namespace sol
