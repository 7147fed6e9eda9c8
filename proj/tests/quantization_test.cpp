#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "bullion/error.hpp"
#include "bullion/quantization.hpp"
#include "quant_oracle.hpp"
#include "test_util.hpp"

namespace bullion::quantization {
namespace {

using testing::QuantOracle;
using testing::Rng;

constexpr QuantTarget kFloatTargets[] = {QuantTarget::Fp16, QuantTarget::Bf16, QuantTarget::Fp8E4M3,
                                         QuantTarget::Fp8E5M2};

TEST(Scalar, KnownCodes) {
  EXPECT_EQ(to_fp16(1.0f), 0x3C00);
  EXPECT_EQ(from_fp16(0x3C00), 1.0f);
  EXPECT_EQ(to_fp16(0.1f), 0x2E66);
  EXPECT_NEAR(from_fp16(0x2E66), 0.0999756, 1e-7);
  EXPECT_EQ(to_fp16(65504.0f), 0x7BFF);
  EXPECT_EQ(to_fp16(65520.0f), 0x7C00);  // halfway to the next binade rounds to Inf
  EXPECT_EQ(to_fp16(-1e9f), 0xFC00);
  EXPECT_EQ(to_fp16(std::ldexp(1.0f, -24)), 0x0001);
  EXPECT_EQ(to_fp16(std::ldexp(1.0f, -25)), 0x0000);  // tie to even zero

  EXPECT_EQ(to_bf16(1.0f), 0x3F80);
  EXPECT_EQ(to_bf16(std::bit_cast<float>(0x3F808000u)), 0x3F80);  // tie, even stays
  EXPECT_EQ(to_bf16(std::bit_cast<float>(0x3F818000u)), 0x3F82);  // tie, odd rounds up
  EXPECT_EQ(to_bf16(std::numeric_limits<float>::max()), 0x7F80);

  EXPECT_EQ(to_fp8_e4m3(448.0f), 0x7E);
  EXPECT_EQ(to_fp8_e4m3(1e6f), 0x7E);
  EXPECT_EQ(to_fp8_e4m3(-std::numeric_limits<float>::infinity()), 0xFE);
  EXPECT_EQ(from_fp8_e4m3(0x7E), 448.0f);
  EXPECT_TRUE(std::isnan(from_fp8_e4m3(0x7F)));
  EXPECT_EQ(to_fp8_e4m3(1.0f), 0x38);

  EXPECT_EQ(to_fp8_e5m2(57344.0f), 0x7B);
  EXPECT_EQ(to_fp8_e5m2(std::numeric_limits<float>::infinity()), 0x7C);
  EXPECT_EQ(to_fp8_e5m2(1.0f), 0x3C);
}

TEST(Scalar, NanKeepsSignAndStaysNan) {
  for (auto t : kFloatTargets) {
    const QuantOracle oracle(t);
    for (float nan : {std::numeric_limits<float>::quiet_NaN(), -std::numeric_limits<float>::quiet_NaN(),
                      std::bit_cast<float>(0x7F800001u), std::bit_cast<float>(0xFFC12345u)}) {
      const auto code = quantize_one(nan, t);
      EXPECT_TRUE(oracle.is_nan_code(code)) << target_name(t);
      EXPECT_EQ((code & oracle.sign_bit()) != 0, std::signbit(nan));
      EXPECT_TRUE(std::isnan(dequantize_one(code, t)));
    }
  }
}

TEST(Scalar, MatchesReferenceOracle) {
  Rng rng(11);
  for (auto t : kFloatTargets) {
    const QuantOracle oracle(t);
    for (float x : testing::quant_samples(oracle, rng, 200'000)) {
      const auto got = quantize_one(x, t);
      const auto want = oracle.narrow(x);
      if (want & QuantOracle::kNan) {
        ASSERT_TRUE(oracle.is_nan_code(got)) << target_name(t) << " " << x;
      } else {
        ASSERT_EQ(got, want) << target_name(t) << " x=" << x << " bits=" << std::hex << std::bit_cast<std::uint32_t>(x);
      }
    }
  }
}

TEST(Scalar, WideningIsExactForEveryCode) {
  for (auto t : kFloatTargets) {
    const QuantOracle oracle(t);
    const auto& codes = oracle.codes();
    for (std::size_t i = 0; i < codes.size(); ++i) {
      EXPECT_EQ(static_cast<double>(dequantize_one(codes[i], t)), oracle.values()[i]);
      EXPECT_EQ(static_cast<double>(dequantize_one(codes[i] | oracle.sign_bit(), t)), -oracle.values()[i]);
    }
  }
}

TEST(Scalar, Fp16RelativeErrorBound) {
  // Normal fp16 range is [2^-14, 65504].
  for (int e = -14; e <= 15; ++e) {
    for (int k = 0; k < 4096; ++k) {
      const float x = std::ldexp(1.0f + static_cast<float>(k) / 4096.0f + 1e-5f, e);
      if (x > 65504.0f) continue;
      const float y = from_fp16(to_fp16(x));
      EXPECT_LE(std::fabs(y - x) / x, std::ldexp(1.0, -11)) << x;
    }
  }
}

TEST(Payload, SizesAndIdempotence) {
  Rng rng(3);
  for (auto t : kFloatTargets) {
    const QuantOracle oracle(t);
    auto xs = testing::quant_samples(oracle, rng, 5000);
    const QuantSpec spec{t};
    auto payload = quantize_floats(xs, spec);
    EXPECT_EQ(payload.size() * (code_bytes(t) == 2 ? 2 : 4), xs.size() * sizeof(float));
    auto once = dequantize_floats(payload, spec);
    auto again = quantize_floats(once, spec);
    EXPECT_EQ(again, payload) << target_name(t);
  }
  EXPECT_THROW(quantize_floats(std::vector<float>{1.0f}, QuantSpec{QuantTarget::IntRehash}), Error);
  try {
    dequantize_floats(Bytes{1, 2, 3}, QuantSpec{QuantTarget::Fp16});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(DualSplit, Examples) {
  auto s = split_dual(std::vector<float>{0.3f, 0.0f});
  EXPECT_EQ(std::bit_cast<std::uint32_t>(0.3f), 0x3E99999Au);
  EXPECT_EQ(s.hi, (std::vector<std::uint16_t>{0x3E99, 0x0000}));
  EXPECT_EQ(s.lo, (std::vector<std::uint16_t>{0x999A, 0x0000}));
  auto j = join_dual(s.hi, s.lo);
  EXPECT_EQ(std::bit_cast<std::uint32_t>(j[0]), 0x3E99999Au);

  std::vector<std::uint16_t> hi = {1, 2};
  std::vector<std::uint16_t> lo = {1};
  try {
    join_dual(hi, lo);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(DualSplit, SpecialsAndRandomBitExact) {
  std::vector<std::uint32_t> patterns = {0x00000000, 0x80000000, 0x7F800000, 0xFF800000, 0x7FC00000,
                                         0xFFC00000, 0x7F800001, 0x7FBFFFFF, 0xFFFFFFFF, 0x00000001,
                                         0x807FFFFF, 0x00400000, 0x7F7FFFFF, 0x00800000};
  Rng rng(8);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int i = 0; i < 100'000; ++i) patterns.push_back(bits(rng));
  std::vector<float> xs;
  for (auto p : patterns) xs.push_back(std::bit_cast<float>(p));
  auto s = split_dual(xs);
  auto back = join_dual(s.hi, s.lo);
  for (std::size_t i = 0; i < xs.size(); ++i) ASSERT_EQ(std::bit_cast<std::uint32_t>(back[i]), patterns[i]);

  // hi alone is a bf16 value: joining with zeros equals its bf16 widening.
  std::vector<std::uint16_t> zeros(s.hi.size(), 0);
  auto hi_only = join_dual(s.hi, zeros);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const float w = from_bf16(s.hi[i]);
    if (std::isnan(w)) {
      EXPECT_TRUE(std::isnan(hi_only[i]));
    } else {
      EXPECT_EQ(std::bit_cast<std::uint32_t>(hi_only[i]), std::bit_cast<std::uint32_t>(w));
    }
  }
}

TEST(Rehash, Examples) {
  auto r = rehash_ints(std::vector<std::int64_t>{1'000'000'000'000, 5, 1'000'000'000'000});
  EXPECT_EQ(r.codes, (std::vector<std::uint32_t>{0, 1, 0}));
  EXPECT_EQ(r.table, (std::vector<std::int64_t>{1'000'000'000'000, 5}));
  EXPECT_EQ(r.width, 8u);

  std::vector<std::int64_t> distinct(300);
  for (std::size_t i = 0; i < distinct.size(); ++i) distinct[i] = static_cast<std::int64_t>(i * 7919 + 3);
  EXPECT_EQ(rehash_ints(distinct).width, 16u);

  EXPECT_EQ(rehash_width(256), 8u);
  EXPECT_EQ(rehash_width(257), 16u);
  EXPECT_EQ(rehash_width(65537), 32u);
  try {
    rehash_width(std::uint64_t{1} << 32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DistinctOverflow);
  }
  EXPECT_THROW(invert_rehash(std::vector<std::uint32_t>{2}, r.table), Error);
}

TEST(Rehash, RandomInvertsExactly) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    auto xs = testing::random_ints(rng, static_cast<std::size_t>(testing::uniform_int(rng, 0, 3000)));
    auto r = rehash_ints(xs);
    EXPECT_EQ(invert_rehash(r.codes, r.table), xs);
    EXPECT_EQ(r.width, rehash_width(r.table.size()));
    for (std::size_t i = 0; i < r.table.size(); ++i)
      for (std::size_t k = i + 1; k < std::min<std::size_t>(r.table.size(), i + 4); ++k) EXPECT_NE(r.table[i], r.table[k]);
  }
}

TEST(Names, RoundTrip) {
  for (auto t : {QuantTarget::Fp16, QuantTarget::Bf16, QuantTarget::Fp8E4M3, QuantTarget::Fp8E5M2,
                 QuantTarget::IntRehash, QuantTarget::DualSplit16})
    EXPECT_EQ(target_from_name(target_name(t)), t);
  EXPECT_EQ(target_from_name("fp8"), QuantTarget::Fp8E4M3);
  EXPECT_FALSE(target_from_name("fp4"));
}

}  // namespace
}  // namespace bullion::quantization
