#include "fsd/hash.hpp"

#include <openssl/sha.h>

#include <cstring>

#include "fsd/errors.hpp"

namespace fsd {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data) {
    std::array<uint8_t, 32> out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

std::vector<uint8_t> hash_expand(const std::string& domain, std::span<const uint8_t> msg,
                                 size_t out_len) {
    std::vector<uint8_t> block;
    block.reserve(domain.size() + 1 + msg.size() + 4);
    block.insert(block.end(), domain.begin(), domain.end());
    block.push_back(0x00);
    block.insert(block.end(), msg.begin(), msg.end());
    size_t ctr_at = block.size();
    block.resize(block.size() + 4);

    std::vector<uint8_t> out;
    out.reserve(out_len + 32);
    for (uint32_t ctr = 0; out.size() < out_len; ++ctr) {
        block[ctr_at + 0] = static_cast<uint8_t>(ctr >> 24);
        block[ctr_at + 1] = static_cast<uint8_t>(ctr >> 16);
        block[ctr_at + 2] = static_cast<uint8_t>(ctr >> 8);
        block[ctr_at + 3] = static_cast<uint8_t>(ctr);
        auto digest = sha256(block);
        out.insert(out.end(), digest.begin(), digest.end());
    }
    out.resize(out_len);
    return out;
}

std::string hex_encode(std::span<const uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::vector<uint8_t> hex_decode(const std::string& hex) {
    if (hex.size() % 2 != 0) throw Error(Errc::parse, "odd-length hex string");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::vector<uint8_t> out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::parse, "invalid hex digit");
        out[i] = static_cast<uint8_t>((hi << 4) | lo);
    }
    return out;
}

}  // namespace fsd
