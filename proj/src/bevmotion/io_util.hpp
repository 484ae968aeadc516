#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "bevmotion/error.hpp"

namespace bevmotion {

// Explicit little-endian serialization, independent of host byte order.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        for (int k = 0; k < 2; ++k) buf_.push_back(static_cast<uint8_t>(v >> (8 * k)));
    }
    void u32(uint32_t v) {
        for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<uint8_t>(v >> (8 * k)));
    }
    void u64(uint64_t v) {
        for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<uint8_t>(v >> (8 * k)));
    }
    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void bytes(const void* data, size_t count) {
        const uint8_t* p = static_cast<const uint8_t*>(data);
        buf_.insert(buf_.end(), p, p + count);
    }

    const std::vector<uint8_t>& buffer() const { return buf_; }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<uint8_t>& buf) : buf_(buf) {}

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() {
        const uint8_t* p = take(2);
        return static_cast<uint16_t>(p[0] | (p[1] << 8));
    }
    uint32_t u32() {
        const uint8_t* p = take(4);
        return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
               (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
    }
    uint64_t u64() {
        uint64_t v = 0;
        const uint8_t* p = take(8);
        for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(p[k]) << (8 * k);
        return v;
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void bytes(void* dst, size_t count) { std::memcpy(dst, take(count), count); }

    size_t remaining() const { return buf_.size() - pos_; }

private:
    const uint8_t* take(size_t count) {
        if (pos_ + count > buf_.size()) {
            raise(ErrorKind::io, "truncated input while reading binary data");
        }
        const uint8_t* p = buf_.data() + pos_;
        pos_ += count;
        return p;
    }

    const std::vector<uint8_t>& buf_;
    size_t pos_ = 0;
};

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& data);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// IEEE CRC32 (reflected, poly 0xEDB88320).
uint32_t crc32(const uint8_t* data, size_t count, uint32_t seed = 0);

}  // namespace bevmotion
