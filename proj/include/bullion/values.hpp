#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace bullion {

/// Physical element type of a flat value sequence.
enum class ValueKind : std::uint8_t { Int64 = 1, Float32 = 2, Float64 = 3, String = 4 };

const char* value_kind_name(ValueKind kind);

using ValueData = std::variant<std::vector<std::int64_t>, std::vector<float>, std::vector<double>,
                               std::vector<std::string>>;

/// A flat, typed sequence with optional null markers.
///
/// `validity` is either empty (no nulls) or holds one byte per element, 1 = present.
/// Null slots carry the default value of the element type so that two equal
/// sequences compare equal regardless of how they were produced.
struct Values {
  ValueData data;
  std::vector<std::uint8_t> validity;

  Values() : data(std::vector<std::int64_t>{}) {}
  Values(std::vector<std::int64_t> v) : data(std::move(v)) {}
  Values(std::vector<float> v) : data(std::move(v)) {}
  Values(std::vector<double> v) : data(std::move(v)) {}
  Values(std::vector<std::string> v) : data(std::move(v)) {}

  static Values empty(ValueKind kind);

  ValueKind kind() const { return static_cast<ValueKind>(data.index() + 1); }
  std::size_t size() const;
  bool has_nulls() const;
  bool is_null(std::size_t i) const { return !validity.empty() && validity[i] == 0; }

  template <typename T>
  const std::vector<T>& as() const { return std::get<std::vector<T>>(data); }
  template <typename T>
  std::vector<T>& as() { return std::get<std::vector<T>>(data); }

  /// Copies element `i` of `src` (same kind) onto the end of this sequence.
  void push_from(const Values& src, std::size_t i);
  /// Subsequence at the given positions (validity carried along).
  Values gather(const std::vector<std::size_t>& positions) const;
  /// Whether elements i and j are equal; floats compare by bit pattern.
  bool element_equal(std::size_t i, const Values& other, std::size_t j) const;

  friend bool operator==(const Values& a, const Values& b);
};

}  // namespace bullion
