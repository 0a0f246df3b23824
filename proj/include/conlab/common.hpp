#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace conlab {

using Bytes = std::vector<std::uint8_t>;

// Simulated time is integer microseconds since the start of a run.
using Duration = std::chrono::microseconds;
using SimTime = std::chrono::microseconds;

using Digest = std::array<std::uint8_t, 32>;

using NodeId = std::uint32_t;

std::string to_hex(std::span<const std::uint8_t> bytes);

// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view text);

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

void put_be32(Bytes& out, std::uint32_t v);
void put_be64(Bytes& out, std::uint64_t v);
std::uint64_t get_be64(std::span<const std::uint8_t> in);

// Renders a duration as integer microseconds ("50200").
std::string format_us(Duration d);

}  // namespace conlab
