#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fsd {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);

// Counter-mode expansion of SHA-256 to an arbitrary output length, with a
// domain tag so different uses cannot collide.
std::vector<uint8_t> hash_expand(const std::string& domain, std::span<const uint8_t> msg,
                                 size_t out_len);

std::string hex_encode(std::span<const uint8_t> data);
std::vector<uint8_t> hex_decode(const std::string& hex);  // throws Errc::parse

}  // namespace fsd
