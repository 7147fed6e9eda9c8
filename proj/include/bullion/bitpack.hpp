#pragma once

#include <bit>
#include <cstdint>
#include <span>

#include "bullion/bytes.hpp"

namespace bullion::bitpack {

/// Bits needed for `v`, with a floor of 1 so all-zero input still gets a slot.
inline std::uint8_t width_for(std::uint64_t max_value) {
  return static_cast<std::uint8_t>(max_value == 0 ? 1 : std::bit_width(max_value));
}

inline std::size_t packed_bytes(std::size_t count, unsigned width) { return (count * width + 7) / 8; }

// Element i occupies bits [i*width, (i+1)*width) of a little-endian bit stream
// (bit k of the stream is bit k%8 of byte k/8).

inline std::uint64_t get(ByteSpan bits, unsigned width, std::size_t i) {
  std::uint64_t v = 0;
  std::size_t bit = i * width;
  for (unsigned done = 0; done < width;) {
    const std::size_t byte = bit / 8;
    const unsigned shift = bit % 8;
    const unsigned take = std::min(8u - shift, width - done);
    const std::uint64_t chunk = (bits[byte] >> shift) & ((1u << take) - 1);
    v |= chunk << done;
    done += take;
    bit += take;
  }
  return v;
}

inline void set(std::span<std::uint8_t> bits, unsigned width, std::size_t i, std::uint64_t v) {
  std::size_t bit = i * width;
  for (unsigned done = 0; done < width;) {
    const std::size_t byte = bit / 8;
    const unsigned shift = bit % 8;
    const unsigned take = std::min(8u - shift, width - done);
    const auto mask = static_cast<std::uint8_t>(((1u << take) - 1) << shift);
    const auto chunk = static_cast<std::uint8_t>(((v >> done) & ((1u << take) - 1)) << shift);
    bits[byte] = static_cast<std::uint8_t>((bits[byte] & ~mask) | chunk);
    done += take;
    bit += take;
  }
}

inline Bytes pack(std::span<const std::uint64_t> values, unsigned width) {
  Bytes out(packed_bytes(values.size(), width), 0);
  for (std::size_t i = 0; i < values.size(); ++i) set(out, width, i, values[i]);
  return out;
}

}  // namespace bullion::bitpack
