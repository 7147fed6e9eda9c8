#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bullion/values.hpp"

namespace bullion::testing {

using Rng = std::mt19937_64;

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

/// Integer sequences with a mix of shapes: runs, small ranges, wide ranges,
/// negatives, a dominant value with exceptions.
inline std::vector<std::int64_t> random_ints(Rng& rng, std::size_t n) {
  std::vector<std::int64_t> v(n);
  switch (uniform_int(rng, 0, 6)) {
    case 0:
      for (auto& x : v) x = uniform_int(rng, 0, 15);
      break;
    case 1: {
      std::size_t i = 0;
      while (i < n) {
        auto run = static_cast<std::size_t>(uniform_int(rng, 1, 20));
        auto val = uniform_int(rng, -5, 5);
        for (std::size_t k = 0; k < run && i < n; ++k) v[i++] = val;
      }
      break;
    }
    case 2:
      for (auto& x : v) x = uniform_int(rng, std::numeric_limits<std::int64_t>::min(),
                                        std::numeric_limits<std::int64_t>::max());
      break;
    case 3: {
      auto base = uniform_int(rng, -1'000'000'000, 1'000'000'000);
      for (auto& x : v) x = base + uniform_int(rng, 0, 1000);
      break;
    }
    case 4:
      for (auto& x : v) x = uniform_int(rng, 0, 3) == 0 ? uniform_int(rng, -100, 100) : 7;
      break;
    case 5:
      for (auto& x : v) x = uniform_int(rng, 0, (std::int64_t{1} << 40) - 1);
      break;
    default:
      for (auto& x : v) x = uniform_int(rng, -3, 3);
      break;
  }
  return v;
}

inline std::vector<double> random_doubles(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  const bool low_card = uniform_int(rng, 0, 1) == 0;
  for (auto& x : v) x = low_card ? static_cast<double>(uniform_int(rng, 0, 4)) * 0.5
                                 : std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
  return v;
}

inline std::vector<float> random_floats(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  const bool low_card = uniform_int(rng, 0, 1) == 0;
  for (auto& x : v) x = low_card ? static_cast<float>(uniform_int(rng, 0, 4)) * 0.25f
                                 : std::uniform_real_distribution<float>(-1.0f, 1.0f)(rng);
  return v;
}

inline std::vector<std::string> random_strings(Rng& rng, std::size_t n) {
  static const char* words[] = {"alpha", "beta", "gamma", "", "delta-long-string-value", "x"};
  std::vector<std::string> v(n);
  const bool free_text = uniform_int(rng, 0, 2) == 0;
  for (auto& s : v) {
    if (free_text) {
      auto len = uniform_int(rng, 0, 12);
      for (int k = 0; k < len; ++k) s.push_back(static_cast<char>('a' + uniform_int(rng, 0, 25)));
    } else {
      s = words[uniform_int(rng, 0, 5)];
    }
  }
  return v;
}

inline Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
  return out;
}

inline Values random_values(Rng& rng, ValueKind kind, std::size_t n) {
  switch (kind) {
    case ValueKind::Int64: return Values(random_ints(rng, n));
    case ValueKind::Float32: return Values(random_floats(rng, n));
    case ValueKind::Float64: return Values(random_doubles(rng, n));
    case ValueKind::String: return Values(random_strings(rng, n));
  }
  return {};
}

/// Adds nulls at random positions, resetting null slots to the default value.
inline Values with_random_nulls(Rng& rng, Values v) {
  v.validity.assign(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (uniform_int(rng, 0, 3) == 0) {
      v.validity[i] = 0;
      std::visit([&](auto& vec) { vec[i] = typename std::decay_t<decltype(vec)>::value_type{}; }, v.data);
    }
  }
  return v;
}

}  // namespace bullion::testing
