#include "bevmotion/io_util.hpp"

#include <array>
#include <cstdio>

namespace bevmotion {

std::vector<uint8_t> read_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) {
        raise(ErrorKind::io, "cannot open file for reading: " + path);
    }
    std::fseek(f, 0, SEEK_END);
    const long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> data(size > 0 ? static_cast<size_t>(size) : 0);
    if (!data.empty() && std::fread(data.data(), 1, data.size(), f) != data.size()) {
        std::fclose(f);
        raise(ErrorKind::io, "short read: " + path);
    }
    std::fclose(f);
    return data;
}

void write_file(const std::string& path, const std::vector<uint8_t>& data) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        raise(ErrorKind::io, "cannot open file for writing: " + path);
    }
    if (!data.empty() && std::fwrite(data.data(), 1, data.size(), f) != data.size()) {
        std::fclose(f);
        raise(ErrorKind::io, "short write: " + path);
    }
    std::fclose(f);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::vector<uint8_t> data(text.begin(), text.end());
    write_file(path, data);
}

std::string read_text_file(const std::string& path) {
    const std::vector<uint8_t> data = read_file(path);
    return std::string(data.begin(), data.end());
}

namespace {

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t n = 0; n < 256; ++n) {
        uint32_t c = n;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
        }
        table[n] = c;
    }
    return table;
}

}  // namespace

uint32_t crc32(const uint8_t* data, size_t count, uint32_t seed) {
    static const std::array<uint32_t, 256> table = make_crc_table();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    for (size_t k = 0; k < count; ++k) {
        c = table[(c ^ data[k]) & 0xFF] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

}  // namespace bevmotion
