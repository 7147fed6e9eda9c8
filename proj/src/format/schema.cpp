#include "bullion/schema.hpp"

#include <unordered_set>

#include "bullion/error.hpp"

namespace bullion {

namespace {

constexpr std::pair<LogicalType, std::string_view> kTypeNames[] = {
    {LogicalType::Int64, "int64"},           {LogicalType::Float32, "float32"},
    {LogicalType::Float64, "float64"},       {LogicalType::String, "string"},
    {LogicalType::ListInt64, "list<int64>"}, {LogicalType::ListFloat32, "list<float32>"},
};

}  // namespace

std::string_view logical_type_name(LogicalType type) {
  for (const auto& [t, name] : kTypeNames)
    if (t == type) return name;
  return "unknown";
}

std::optional<LogicalType> logical_type_from_name(std::string_view name) {
  for (const auto& [t, n] : kTypeNames)
    if (n == name) return t;
  return std::nullopt;
}

bool is_list(LogicalType type) { return type == LogicalType::ListInt64 || type == LogicalType::ListFloat32; }

bool is_numeric(LogicalType type) {
  return type == LogicalType::Int64 || type == LogicalType::Float32 || type == LogicalType::Float64;
}

ValueKind element_kind(LogicalType type) {
  switch (type) {
    case LogicalType::Int64:
    case LogicalType::ListInt64:
      return ValueKind::Int64;
    case LogicalType::Float32:
    case LogicalType::ListFloat32:
      return ValueKind::Float32;
    case LogicalType::Float64:
      return ValueKind::Float64;
    case LogicalType::String:
      return ValueKind::String;
  }
  fail(ErrorCode::UnsupportedType, "unknown logical type");
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

void Schema::validate() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& c : columns) {
    const std::string where = "column '" + c.name + "': ";
    check(!c.name.empty(), ErrorCode::SchemaMismatch, "column names must be non-empty");
    check(seen.insert(c.name).second, ErrorCode::SchemaMismatch, where + "duplicate name");
    check(c.compliance_level <= 2, ErrorCode::SchemaMismatch, where + "compliance level must be 0, 1 or 2");
    if (c.is_sparse_sequence) {
      check(c.type == LogicalType::ListInt64, ErrorCode::SchemaMismatch, where + "sparse sequences must be list<int64>");
      check(!c.quantization, ErrorCode::SchemaMismatch, where + "sparse sequences cannot be quantized");
    }
    if (c.quantization) {
      const auto t = c.quantization->target;
      if (t == quantization::QuantTarget::IntRehash)
        check(c.type == LogicalType::Int64, ErrorCode::SchemaMismatch, where + "int_rehash needs an int64 column");
      else
        check(c.type == LogicalType::Float32, ErrorCode::SchemaMismatch,
              where + std::string(quantization::target_name(t)) + " needs a float32 column");
    }
  }
}

ColumnVector ColumnVector::scalar(LogicalType type, Values values) {
  check(!is_list(type), ErrorCode::SchemaMismatch, "scalar() called with a list type");
  check(values.kind() == element_kind(type), ErrorCode::SchemaMismatch, "value kind does not match column type");
  ColumnVector c;
  c.type = type;
  c.values = std::move(values);
  return c;
}

ColumnVector ColumnVector::int_lists(const std::vector<std::vector<std::int64_t>>& rows) {
  ColumnVector c;
  c.type = LogicalType::ListInt64;
  std::vector<std::int64_t> items;
  for (const auto& r : rows) {
    c.list_lengths.push_back(static_cast<std::uint32_t>(r.size()));
    items.insert(items.end(), r.begin(), r.end());
  }
  c.list_items = Values(std::move(items));
  return c;
}

ColumnVector ColumnVector::float_lists(const std::vector<std::vector<float>>& rows) {
  ColumnVector c;
  c.type = LogicalType::ListFloat32;
  std::vector<float> items;
  for (const auto& r : rows) {
    c.list_lengths.push_back(static_cast<std::uint32_t>(r.size()));
    items.insert(items.end(), r.begin(), r.end());
  }
  c.list_items = Values(std::move(items));
  return c;
}

ColumnVector ColumnVector::empty(LogicalType type) {
  ColumnVector c;
  c.type = type;
  if (is_list(type))
    c.list_items = Values::empty(element_kind(type));
  else
    c.values = Values::empty(element_kind(type));
  return c;
}

void ColumnVector::push_row(const ColumnVector& src, std::size_t i) {
  if (!is_list(type)) {
    values.push_from(src.values, i);
    return;
  }
  std::size_t start = 0;
  for (std::size_t r = 0; r < i; ++r) start += src.list_lengths[r];
  list_lengths.push_back(src.list_lengths[i]);
  for (std::size_t k = 0; k < src.list_lengths[i]; ++k) list_items.push_from(src.list_items, start + k);
}

ColumnVector ColumnVector::gather(const std::vector<std::size_t>& rows) const {
  ColumnVector out = empty(type);
  if (!is_list(type)) {
    out.values = values.gather(rows);
    return out;
  }
  std::vector<std::size_t> starts(list_lengths.size() + 1, 0);
  for (std::size_t r = 0; r < list_lengths.size(); ++r) starts[r + 1] = starts[r] + list_lengths[r];
  std::vector<std::size_t> item_pos;
  for (auto r : rows) {
    out.list_lengths.push_back(list_lengths[r]);
    for (auto k = starts[r]; k < starts[r + 1]; ++k) item_pos.push_back(k);
  }
  out.list_items = list_items.gather(item_pos);
  return out;
}

ColumnVector ColumnVector::slice(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> rows;
  rows.reserve(end - begin);
  for (auto r = begin; r < end; ++r) rows.push_back(r);
  return gather(rows);
}

void ColumnVector::append(const ColumnVector& other) {
  check(other.type == type, ErrorCode::SchemaMismatch, "cannot append columns of different types");
  if (!is_list(type)) {
    for (std::size_t i = 0; i < other.values.size(); ++i) values.push_from(other.values, i);
    return;
  }
  list_lengths.insert(list_lengths.end(), other.list_lengths.begin(), other.list_lengths.end());
  for (std::size_t i = 0; i < other.list_items.size(); ++i) list_items.push_from(other.list_items, i);
}

std::vector<std::vector<std::int64_t>> ColumnVector::int_rows() const {
  check(type == LogicalType::ListInt64, ErrorCode::UnsupportedType, "int_rows() needs a list<int64> column");
  std::vector<std::vector<std::int64_t>> out;
  const auto& items = list_items.as<std::int64_t>();
  std::size_t pos = 0;
  for (auto len : list_lengths) {
    out.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(pos),
                     items.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return out;
}

void RecordBatch::validate() const {
  schema.validate();
  check(columns.size() == schema.columns.size(), ErrorCode::SchemaMismatch,
        "batch has " + std::to_string(columns.size()) + " columns, schema has " + std::to_string(schema.columns.size()));
  const auto rows = num_rows();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& c = columns[i];
    const auto& s = schema.columns[i];
    const std::string where = "column '" + s.name + "': ";
    check(c.type == s.type, ErrorCode::SchemaMismatch, where + "type does not match schema");
    check(c.size() == rows, ErrorCode::SchemaMismatch, where + "row count differs from the first column");
    if (is_list(c.type)) {
      std::size_t total = 0;
      for (auto len : c.list_lengths) total += len;
      check(total == c.list_items.size(), ErrorCode::SchemaMismatch, where + "list lengths do not cover the items");
      check(c.list_items.kind() == element_kind(c.type) && !c.list_items.has_nulls(), ErrorCode::SchemaMismatch,
            where + "list items must be non-null " + value_kind_name(element_kind(c.type)));
    } else {
      check(c.values.kind() == element_kind(c.type), ErrorCode::SchemaMismatch, where + "value kind mismatch");
      check(s.nullable || !c.values.has_nulls(), ErrorCode::SchemaMismatch, where + "nulls in a non-nullable column");
    }
  }
}

const ColumnVector& RecordBatch::column(std::string_view name) const {
  auto idx = schema.index_of(name);
  if (!idx) fail(ErrorCode::ColumnNotFound, "no column named '" + std::string(name) + "'");
  return columns[*idx];
}

}  // namespace bullion
