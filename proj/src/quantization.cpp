#include "bullion/quantization.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "bullion/error.hpp"

namespace bullion::quantization {

namespace {

struct Format {
  int exp_bits;
  int man_bits;
  bool ieee_specials;  // all-ones exponent reserved for Inf/NaN
  std::uint32_t quiet_nan;

  int bias() const { return (1 << (exp_bits - 1)) - 1; }
  int emin() const { return 1 - bias(); }
  int emax() const { return ieee_specials ? bias() : (1 << exp_bits) - 1 - bias(); }
  std::uint32_t max_field() const { return (1u << exp_bits) - 1; }
  std::uint32_t sign_bit() const { return 1u << (exp_bits + man_bits); }
  std::uint32_t inf_bits() const { return max_field() << man_bits; }
  // Largest significand (with the implicit bit) allowed at emax.
  std::uint64_t max_sig_at_emax() const {
    const std::uint64_t full = (std::uint64_t{2} << man_bits) - 1;
    return ieee_specials ? full : full - 1;  // e4m3 reserves S.1111.111 for NaN
  }
  std::uint32_t max_finite_bits() const {
    const auto sig = max_sig_at_emax() - (std::uint64_t{1} << man_bits);
    return (static_cast<std::uint32_t>(emax() + bias()) << man_bits) | static_cast<std::uint32_t>(sig);
  }
};

constexpr Format kFp16{5, 10, true, 0x7E00};
constexpr Format kBf16{8, 7, true, 0x7FC0};
constexpr Format kE4M3{4, 3, false, 0x7F};
constexpr Format kE5M2{5, 2, true, 0x7E};

std::uint32_t narrow(float x, const Format& f) {
  const auto bits = std::bit_cast<std::uint32_t>(x);
  const std::uint32_t sign = (bits >> 31) ? f.sign_bit() : 0;
  const std::uint32_t field = (bits >> 23) & 0xFF;
  const std::uint32_t frac = bits & 0x7FFFFF;

  if (field == 0xFF) {
    if (frac != 0) return sign | f.quiet_nan;
    return sign | (f.ieee_specials ? f.inf_bits() : f.max_finite_bits());
  }
  // value = m * 2^e
  std::uint64_t m = field == 0 ? frac : (frac | 0x800000u);
  const int e = field == 0 ? -149 : static_cast<int>(field) - 150;
  if (m == 0) return sign;

  int exp = static_cast<int>(std::bit_width(m)) - 1 + e;
  if (exp < f.emin()) exp = f.emin();
  const int shift = exp - f.man_bits - e;

  std::uint64_t q;
  if (shift <= 0) {
    q = m << -shift;
  } else if (shift >= 40) {
    q = 0;
  } else {
    q = m >> shift;
    const std::uint64_t rem = m & ((std::uint64_t{1} << shift) - 1);
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    if (rem > half || (rem == half && (q & 1))) ++q;
  }
  if (q == (std::uint64_t{2} << f.man_bits)) {
    q >>= 1;
    ++exp;
  }

  if (exp > f.emax() || (exp == f.emax() && q > f.max_sig_at_emax()))
    return sign | (f.ieee_specials ? f.inf_bits() : f.max_finite_bits());

  const std::uint64_t implicit = std::uint64_t{1} << f.man_bits;
  if (q >= implicit)
    return sign | (static_cast<std::uint32_t>(exp + f.bias()) << f.man_bits) | static_cast<std::uint32_t>(q - implicit);
  return sign | static_cast<std::uint32_t>(q);  // subnormal or zero
}

float widen(std::uint32_t code, const Format& f) {
  const bool negative = code & f.sign_bit();
  const std::uint32_t field = (code >> f.man_bits) & f.max_field();
  const std::uint32_t man = code & ((1u << f.man_bits) - 1);
  float mag;
  if (f.ieee_specials && field == f.max_field()) {
    mag = man ? std::numeric_limits<float>::quiet_NaN() : std::numeric_limits<float>::infinity();
  } else if (!f.ieee_specials && field == f.max_field() && man == (1u << f.man_bits) - 1) {
    mag = std::numeric_limits<float>::quiet_NaN();
  } else if (field == 0) {
    mag = std::ldexp(static_cast<float>(man), f.emin() - f.man_bits);
  } else {
    mag = std::ldexp(static_cast<float>(man | (1u << f.man_bits)), static_cast<int>(field) - f.bias() - f.man_bits);
  }
  return negative ? -mag : mag;
}

const Format& format_of(QuantTarget target) {
  switch (target) {
    case QuantTarget::Fp16:
      return kFp16;
    case QuantTarget::Bf16:
      return kBf16;
    case QuantTarget::Fp8E4M3:
      return kE4M3;
    case QuantTarget::Fp8E5M2:
      return kE5M2;
    default:
      fail(ErrorCode::InvalidArgument, "quantization target is not a float format");
  }
}

}  // namespace

std::string_view target_name(QuantTarget target) {
  switch (target) {
    case QuantTarget::Fp16:
      return "fp16";
    case QuantTarget::Bf16:
      return "bf16";
    case QuantTarget::Fp8E4M3:
      return "fp8_e4m3";
    case QuantTarget::Fp8E5M2:
      return "fp8_e5m2";
    case QuantTarget::IntRehash:
      return "int_rehash";
    case QuantTarget::DualSplit16:
      return "dual_split_16";
  }
  return "unknown";
}

std::optional<QuantTarget> target_from_name(std::string_view name) {
  if (name == "fp8") return QuantTarget::Fp8E4M3;
  for (auto t : {QuantTarget::Fp16, QuantTarget::Bf16, QuantTarget::Fp8E4M3, QuantTarget::Fp8E5M2,
                 QuantTarget::IntRehash, QuantTarget::DualSplit16})
    if (target_name(t) == name) return t;
  return std::nullopt;
}

bool is_float_target(QuantTarget target) {
  return target == QuantTarget::Fp16 || target == QuantTarget::Bf16 || target == QuantTarget::Fp8E4M3 ||
         target == QuantTarget::Fp8E5M2;
}

std::size_t code_bytes(QuantTarget target) {
  const auto& f = format_of(target);
  return f.exp_bits + f.man_bits + 1 > 8 ? 2 : 1;
}

std::uint16_t to_fp16(float x) { return static_cast<std::uint16_t>(narrow(x, kFp16)); }
std::uint16_t to_bf16(float x) { return static_cast<std::uint16_t>(narrow(x, kBf16)); }
std::uint8_t to_fp8_e4m3(float x) { return static_cast<std::uint8_t>(narrow(x, kE4M3)); }
std::uint8_t to_fp8_e5m2(float x) { return static_cast<std::uint8_t>(narrow(x, kE5M2)); }

float from_fp16(std::uint16_t bits) { return widen(bits, kFp16); }
float from_bf16(std::uint16_t bits) { return widen(bits, kBf16); }
float from_fp8_e4m3(std::uint8_t bits) { return widen(bits, kE4M3); }
float from_fp8_e5m2(std::uint8_t bits) { return widen(bits, kE5M2); }

std::uint32_t quantize_one(float x, QuantTarget target) { return narrow(x, format_of(target)); }
float dequantize_one(std::uint32_t code, QuantTarget target) { return widen(code, format_of(target)); }

Bytes quantize_floats(std::span<const float> values, const QuantSpec& spec) {
  const auto& f = format_of(spec.target);
  const auto width = code_bytes(spec.target);
  Bytes out(values.size() * width);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto code = narrow(values[i], f);
    if (width == 2)
      store_le(out.data() + 2 * i, static_cast<std::uint16_t>(code));
    else
      out[i] = static_cast<std::uint8_t>(code);
  }
  return out;
}

std::vector<float> dequantize_floats(ByteSpan payload, const QuantSpec& spec) {
  const auto& f = format_of(spec.target);
  const auto width = code_bytes(spec.target);
  check(payload.size() % width == 0, ErrorCode::LengthMismatch, "quantized payload is not a whole number of codes");
  std::vector<float> out(payload.size() / width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t code = width == 2 ? load_le<std::uint16_t>(payload.data() + 2 * i) : payload[i];
    out[i] = widen(code, f);
  }
  return out;
}

DualSplit split_dual(std::span<const float> values) {
  DualSplit out;
  out.hi.resize(values.size());
  out.lo.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    out.hi[i] = static_cast<std::uint16_t>(bits >> 16);
    out.lo[i] = static_cast<std::uint16_t>(bits);
  }
  return out;
}

std::vector<float> join_dual(std::span<const std::uint16_t> hi, std::span<const std::uint16_t> lo) {
  check(hi.size() == lo.size(), ErrorCode::LengthMismatch,
        "dual split halves differ in length: " + std::to_string(hi.size()) + " vs " + std::to_string(lo.size()));
  std::vector<float> out(hi.size());
  for (std::size_t i = 0; i < hi.size(); ++i)
    out[i] = std::bit_cast<float>((static_cast<std::uint32_t>(hi[i]) << 16) | lo[i]);
  return out;
}

unsigned rehash_width(std::uint64_t distinct) {
  if (distinct <= (1u << 8)) return 8;
  if (distinct <= (1u << 16)) return 16;
  check(distinct < (std::uint64_t{1} << 32), ErrorCode::DistinctOverflow, "too many distinct values to rehash");
  return 32;
}

Rehash rehash_ints(std::span<const std::int64_t> values) {
  Rehash out;
  out.codes.reserve(values.size());
  std::unordered_map<std::int64_t, std::uint32_t> index;
  for (auto v : values) {
    auto [it, inserted] = index.try_emplace(v, 0);
    if (inserted) {
      check(out.table.size() < 0xFFFFFFFFu, ErrorCode::DistinctOverflow, "too many distinct values to rehash");
      it->second = static_cast<std::uint32_t>(out.table.size());
      out.table.push_back(v);
    }
    out.codes.push_back(it->second);
  }
  out.width = rehash_width(out.table.size());
  return out;
}

std::vector<std::int64_t> invert_rehash(std::span<const std::uint32_t> codes, std::span<const std::int64_t> table) {
  std::vector<std::int64_t> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    check(codes[i] < table.size(), ErrorCode::CorruptBlock, "rehash code outside the table");
    out[i] = table[codes[i]];
  }
  return out;
}

}  // namespace bullion::quantization
