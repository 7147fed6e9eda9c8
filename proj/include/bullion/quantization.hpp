#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bullion/bytes.hpp"

namespace bullion::quantization {

enum class QuantTarget : std::uint8_t {
  Fp16 = 1,
  Bf16 = 2,
  Fp8E4M3 = 3,
  Fp8E5M2 = 4,
  IntRehash = 5,
  DualSplit16 = 6,
};

struct QuantSpec {
  QuantTarget target = QuantTarget::Bf16;
  friend bool operator==(const QuantSpec&, const QuantSpec&) = default;
};

std::string_view target_name(QuantTarget target);
/// Accepts the canonical names plus "fp8" as an alias for fp8_e4m3.
std::optional<QuantTarget> target_from_name(std::string_view name);
bool is_float_target(QuantTarget target);
/// Bytes per stored code for the narrow float targets (2 or 1).
std::size_t code_bytes(QuantTarget target);

// Scalar conversions. Narrowing rounds to nearest even. NaN maps to the
// target's canonical quiet NaN with the sign kept. Overflow and infinities go
// to Inf for fp16, bf16 and e5m2; e4m3 has no Inf and saturates to +-448.
std::uint16_t to_fp16(float x);
std::uint16_t to_bf16(float x);
std::uint8_t to_fp8_e4m3(float x);
std::uint8_t to_fp8_e5m2(float x);

float from_fp16(std::uint16_t bits);
float from_bf16(std::uint16_t bits);
float from_fp8_e4m3(std::uint8_t bits);
float from_fp8_e5m2(std::uint8_t bits);

/// Converts one value to the code of a float target, widened to 32 bits.
std::uint32_t quantize_one(float x, QuantTarget target);
float dequantize_one(std::uint32_t code, QuantTarget target);

/// Packed little-endian codes, code_bytes(target) bytes per value.
/// InvalidArgument for non-float targets.
Bytes quantize_floats(std::span<const float> values, const QuantSpec& spec);
/// LengthMismatch when the payload is not a whole number of codes.
std::vector<float> dequantize_floats(ByteSpan payload, const QuantSpec& spec);

struct DualSplit {
  std::vector<std::uint16_t> hi;  // upper half of the fp32 bits, a valid bf16
  std::vector<std::uint16_t> lo;
};

DualSplit split_dual(std::span<const float> values);
/// LengthMismatch when hi and lo differ in length.
std::vector<float> join_dual(std::span<const std::uint16_t> hi, std::span<const std::uint16_t> lo);

struct Rehash {
  std::vector<std::uint32_t> codes;
  std::vector<std::int64_t> table;  // table[code] = original value
  unsigned width = 8;               // 8, 16 or 32
};

/// Codes by first occurrence. DistinctOverflow at 2^32 or more distinct values.
Rehash rehash_ints(std::span<const std::int64_t> values);
/// Smallest of 8, 16, 32 able to index `distinct` codes.
unsigned rehash_width(std::uint64_t distinct);
/// CorruptBlock if a code is outside the table.
std::vector<std::int64_t> invert_rehash(std::span<const std::uint32_t> codes, std::span<const std::int64_t> table);

}  // namespace bullion::quantization
