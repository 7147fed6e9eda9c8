#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bullion/quantization.hpp"
#include "bullion/values.hpp"

namespace bullion {

enum class LogicalType : std::uint8_t {
  Int64 = 1,
  Float32 = 2,
  Float64 = 3,
  String = 4,
  ListInt64 = 5,
  ListFloat32 = 6,
};

std::string_view logical_type_name(LogicalType type);
std::optional<LogicalType> logical_type_from_name(std::string_view name);
bool is_list(LogicalType type);
bool is_numeric(LogicalType type);
/// Element kind of the flat value stream (list items for list types).
ValueKind element_kind(LogicalType type);

struct ColumnSchema {
  std::string name;
  LogicalType type = LogicalType::Int64;
  bool nullable = true;
  std::optional<quantization::QuantSpec> quantization;
  std::uint8_t compliance_level = 0;  // 0, 1 or 2
  bool is_sparse_sequence = false;

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

struct Schema {
  std::vector<ColumnSchema> columns;

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// SchemaMismatch on duplicate or empty names, bad levels, or option/type
  /// combinations that the writer cannot store.
  void validate() const;

  friend bool operator==(const Schema&, const Schema&) = default;
};

/// One column's data. Scalar columns use `values`; list columns keep one
/// length per row plus the flattened items.
struct ColumnVector {
  LogicalType type = LogicalType::Int64;
  Values values;
  std::vector<std::uint32_t> list_lengths;
  Values list_items;

  static ColumnVector scalar(LogicalType type, Values values);
  static ColumnVector int_lists(const std::vector<std::vector<std::int64_t>>& rows);
  static ColumnVector float_lists(const std::vector<std::vector<float>>& rows);
  static ColumnVector empty(LogicalType type);

  std::size_t size() const { return is_list(type) ? list_lengths.size() : values.size(); }
  /// Copies row `i` of `src` onto the end of this column.
  void push_row(const ColumnVector& src, std::size_t i);
  ColumnVector gather(const std::vector<std::size_t>& rows) const;
  ColumnVector slice(std::size_t begin, std::size_t end) const;
  void append(const ColumnVector& other);
  std::vector<std::vector<std::int64_t>> int_rows() const;

  friend bool operator==(const ColumnVector&, const ColumnVector&) = default;
};

struct RecordBatch {
  Schema schema;
  std::vector<ColumnVector> columns;

  std::size_t num_rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// SchemaMismatch if a column's type or length disagrees with the schema.
  void validate() const;
  const ColumnVector& column(std::string_view name) const;
};

}  // namespace bullion
