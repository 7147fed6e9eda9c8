#include "bullion/table_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>

#include "bullion/error.hpp"
#include "bullion/io.hpp"

namespace bullion::table_io {

using nlohmann::json;

namespace {

std::string where(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column '" + std::string(column) + "': ";
}

// ---------------------------------------------------------------------------
// Column accumulation

class ColumnBuilder {
 public:
  explicit ColumnBuilder(const ColumnSchema& schema)
      : schema_(schema), out_(ColumnVector::empty(schema.type)) {}

  void push_null(std::size_t row) {
    check(schema_.nullable && !is_list(schema_.type), ErrorCode::SchemaMismatch,
          where(row, schema_.name) + "null in a non-nullable column");
    validity_.push_back(0);
    std::visit([](auto& vec) { vec.emplace_back(); }, out_.values.data);
  }

  void push_int(std::int64_t v) {
    validity_.push_back(1);
    out_.values.as<std::int64_t>().push_back(v);
  }
  void push_float(double v) {
    validity_.push_back(1);
    if (schema_.type == LogicalType::Float32)
      out_.values.as<float>().push_back(static_cast<float>(v));
    else
      out_.values.as<double>().push_back(v);
  }
  void push_string(std::string v) {
    validity_.push_back(1);
    out_.values.as<std::string>().push_back(std::move(v));
  }
  void push_list(const json& array, std::size_t row) {
    check(array.is_array(), ErrorCode::SchemaMismatch, where(row, schema_.name) + "expected a JSON array");
    out_.list_lengths.push_back(static_cast<std::uint32_t>(array.size()));
    for (const auto& item : array) {
      if (schema_.type == LogicalType::ListInt64) {
        check(item.is_number_integer(), ErrorCode::SchemaMismatch, where(row, schema_.name) + "list item is not an integer");
        out_.list_items.as<std::int64_t>().push_back(item.get<std::int64_t>());
      } else {
        check(item.is_number(), ErrorCode::SchemaMismatch, where(row, schema_.name) + "list item is not a number");
        out_.list_items.as<float>().push_back(item.get<float>());
      }
    }
  }

  /// Parses one CSV cell of text.
  void push_text(std::string_view cell, bool quoted, std::size_t row) {
    if (cell.empty() && !quoted && schema_.type != LogicalType::String) return push_null(row);
    if (cell.empty() && !quoted && schema_.nullable) return push_null(row);
    switch (schema_.type) {
      case LogicalType::Int64: {
        std::int64_t v = 0;
        const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        check(ec == std::errc() && end == cell.data() + cell.size(), ErrorCode::ParseError,
              where(row, schema_.name) + "'" + std::string(cell) + "' is not a 64-bit integer");
        return push_int(v);
      }
      case LogicalType::Float32:
      case LogicalType::Float64: {
        double v = 0;
        const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        check(ec == std::errc() && end == cell.data() + cell.size(), ErrorCode::ParseError,
              where(row, schema_.name) + "'" + std::string(cell) + "' is not a number");
        return push_float(v);
      }
      case LogicalType::String:
        return push_string(std::string(cell));
      case LogicalType::ListInt64:
      case LogicalType::ListFloat32: {
        json parsed;
        try {
          parsed = json::parse(cell);
        } catch (const json::exception& e) {
          fail(ErrorCode::ParseError, where(row, schema_.name) + "list cell is not valid JSON: " + e.what());
        }
        return push_list(parsed, row);
      }
    }
  }

  /// Converts one JSON value.
  void push_json(const json& v, std::size_t row) {
    if (v.is_null()) return push_null(row);
    switch (schema_.type) {
      case LogicalType::Int64:
        check(v.is_number_integer(), ErrorCode::SchemaMismatch, where(row, schema_.name) + "expected an integer");
        return push_int(v.get<std::int64_t>());
      case LogicalType::Float32:
      case LogicalType::Float64:
        check(v.is_number(), ErrorCode::SchemaMismatch, where(row, schema_.name) + "expected a number");
        return push_float(v.get<double>());
      case LogicalType::String:
        check(v.is_string(), ErrorCode::SchemaMismatch, where(row, schema_.name) + "expected a string");
        return push_string(v.get<std::string>());
      case LogicalType::ListInt64:
      case LogicalType::ListFloat32:
        return push_list(v, row);
    }
  }

  ColumnVector finish() {
    if (!is_list(schema_.type) && std::find(validity_.begin(), validity_.end(), 0) != validity_.end())
      out_.values.validity = std::move(validity_);
    return std::move(out_);
  }

 private:
  const ColumnSchema& schema_;
  ColumnVector out_;
  std::vector<std::uint8_t> validity_;
};

RecordBatch finish(const Schema& schema, std::vector<ColumnBuilder>& builders) {
  RecordBatch batch;
  batch.schema = schema;
  for (auto& b : builders) batch.columns.push_back(b.finish());
  batch.validate();
  return batch;
}

// ---------------------------------------------------------------------------
// CSV

struct Cell {
  std::string text;
  bool quoted = false;
};

/// Splits RFC 4180 style records. Quoted fields may span lines.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : text_(text) {}

  bool next(std::vector<Cell>& record) {
    record.clear();
    if (pos_ >= text_.size()) return false;
    ++line_;
    Cell cell;
    bool in_quotes = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            cell.text += '"';
            ++pos_;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          cell.text += c;
        }
        continue;
      }
      if (c == '"' && cell.text.empty() && !cell.quoted) {
        in_quotes = true;
        cell.quoted = true;
      } else if (c == ',') {
        record.push_back(std::move(cell));
        cell = {};
      } else if (c == '\n') {
        break;
      } else if (c != '\r') {
        cell.text += c;
      }
    }
    check(!in_quotes, ErrorCode::ParseError, "line " + std::to_string(line_) + ": unterminated quoted field");
    record.push_back(std::move(cell));
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

bool blank(const std::vector<Cell>& record) {
  return record.size() == 1 && record[0].text.empty() && !record[0].quoted;
}

std::string format_float(double v, bool single) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = single ? std::to_chars(buf, buf + sizeof buf, static_cast<float>(v)) : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && !s.empty()) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json float_json(double v) {
  if (std::isfinite(v)) return v;
  return format_float(v, false);  // JSON has no NaN/Inf literals
}

/// One cell as JSON, or null.
json cell_json(const ColumnVector& col, std::size_t row, std::size_t list_start) {
  if (is_list(col.type)) {
    json arr = json::array();
    for (std::uint32_t k = 0; k < col.list_lengths[row]; ++k) {
      if (col.type == LogicalType::ListInt64)
        arr.push_back(col.list_items.as<std::int64_t>()[list_start + k]);
      else
        arr.push_back(float_json(col.list_items.as<float>()[list_start + k]));
    }
    return arr;
  }
  if (col.values.is_null(row)) return nullptr;
  switch (col.values.kind()) {
    case ValueKind::Int64:
      return col.values.as<std::int64_t>()[row];
    case ValueKind::Float32:
      return float_json(col.values.as<float>()[row]);
    case ValueKind::Float64:
      return float_json(col.values.as<double>()[row]);
    case ValueKind::String:
      return col.values.as<std::string>()[row];
  }
  return nullptr;
}

std::string cell_text(const ColumnVector& col, std::size_t row, std::size_t list_start) {
  if (is_list(col.type)) return csv_quote(cell_json(col, row, list_start).dump());
  if (col.values.is_null(row)) return "";
  switch (col.values.kind()) {
    case ValueKind::Int64:
      return std::to_string(col.values.as<std::int64_t>()[row]);
    case ValueKind::Float32:
      return format_float(col.values.as<float>()[row], true);
    case ValueKind::Float64:
      return format_float(col.values.as<double>()[row], false);
    case ValueKind::String: {
      const auto& s = col.values.as<std::string>()[row];
      return s.empty() ? "\"\"" : csv_quote(s);
    }
  }
  return "";
}

std::vector<std::size_t> list_starts(const ColumnVector& col) {
  std::vector<std::size_t> starts(col.size() + 1, 0);
  if (is_list(col.type))
    for (std::size_t i = 0; i < col.list_lengths.size(); ++i) starts[i + 1] = starts[i] + col.list_lengths[i];
  return starts;
}

}  // namespace

Schema parse_schema(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("schema is not valid JSON: ") + e.what());
  }
  const json* cols = &doc;
  if (doc.is_object()) {
    check(doc.contains("columns"), ErrorCode::ParseError, "schema object needs a \"columns\" array");
    cols = &doc["columns"];
  }
  check(cols->is_array(), ErrorCode::ParseError, "schema columns must be an array");
  Schema schema;
  std::size_t index = 0;
  for (const auto& c : *cols) {
    const auto at = "schema column " + std::to_string(index++) + ": ";
    check(c.is_object(), ErrorCode::ParseError, at + "expected an object");
    check(c.contains("name") && c["name"].is_string(), ErrorCode::ParseError, at + "missing string \"name\"");
    check(c.contains("type") && c["type"].is_string(), ErrorCode::ParseError, at + "missing string \"type\"");
    ColumnSchema col;
    col.name = c["name"].get<std::string>();
    const auto type_name = c["type"].get<std::string>();
    const auto type = logical_type_from_name(type_name);
    check(type.has_value(), ErrorCode::ParseError, at + "unknown type '" + type_name + "'");
    col.type = *type;
    col.nullable = c.value("nullable", !is_list(col.type));
    if (c.contains("quantization") && !c["quantization"].is_null()) {
      const auto q = c["quantization"].get<std::string>();
      const auto target = quantization::target_from_name(q);
      check(target.has_value(), ErrorCode::ParseError, at + "unknown quantization '" + q + "'");
      col.quantization = quantization::QuantSpec{*target};
    }
    const auto level = c.value("compliance_level", 0);
    check(level >= 0 && level <= 2, ErrorCode::ParseError, at + "compliance_level must be 0, 1 or 2");
    col.compliance_level = static_cast<std::uint8_t>(level);
    col.is_sparse_sequence = c.value("sparse_sequence", false);
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

std::string schema_to_json(const Schema& schema) {
  json cols = json::array();
  for (const auto& c : schema.columns) {
    json o{{"name", c.name}, {"type", std::string(logical_type_name(c.type))}, {"nullable", c.nullable}};
    if (c.quantization) o["quantization"] = std::string(quantization::target_name(c.quantization->target));
    if (c.compliance_level) o["compliance_level"] = c.compliance_level;
    if (c.is_sparse_sequence) o["sparse_sequence"] = true;
    cols.push_back(std::move(o));
  }
  return json{{"columns", cols}}.dump(2);
}

RecordBatch read_csv(std::string_view text, const Schema& schema) {
  schema.validate();
  CsvReader reader(text);
  std::vector<Cell> record;
  check(reader.next(record), ErrorCode::ParseError, "CSV input has no header line");
  std::vector<std::size_t> field_of(schema.columns.size(), SIZE_MAX);
  for (std::size_t f = 0; f < record.size(); ++f) {
    const auto idx = schema.index_of(record[f].text);
    check(idx.has_value(), ErrorCode::SchemaMismatch, "CSV header names unknown column '" + record[f].text + "'");
    check(field_of[*idx] == SIZE_MAX, ErrorCode::SchemaMismatch, "CSV header repeats column '" + record[f].text + "'");
    field_of[*idx] = f;
  }
  for (std::size_t c = 0; c < schema.columns.size(); ++c)
    check(field_of[c] != SIZE_MAX, ErrorCode::SchemaMismatch, "CSV header lacks column '" + schema.columns[c].name + "'");

  std::vector<ColumnBuilder> builders(schema.columns.begin(), schema.columns.end());
  std::size_t row = 0;
  while (reader.next(record)) {
    if (blank(record)) continue;
    ++row;
    check(record.size() == field_of.size(), ErrorCode::ParseError,
          "row " + std::to_string(row) + " (line " + std::to_string(reader.line()) + "): expected " +
              std::to_string(field_of.size()) + " fields, found " + std::to_string(record.size()));
    for (std::size_t c = 0; c < builders.size(); ++c) {
      const auto& cell = record[field_of[c]];
      builders[c].push_text(cell.text, cell.quoted, row);
    }
  }
  return finish(schema, builders);
}

RecordBatch read_jsonl(std::string_view text, const Schema& schema) {
  schema.validate();
  std::vector<ColumnBuilder> builders(schema.columns.begin(), schema.columns.end());
  std::size_t row = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    ++row;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, "row " + std::to_string(row) + ": invalid JSON: " + e.what());
    }
    check(obj.is_object(), ErrorCode::ParseError, "row " + std::to_string(row) + ": expected a JSON object");
    for (const auto& [key, value] : obj.items())
      check(schema.index_of(key).has_value(), ErrorCode::SchemaMismatch,
            "row " + std::to_string(row) + ": unknown column '" + key + "'");
    for (std::size_t c = 0; c < builders.size(); ++c) {
      const auto it = obj.find(schema.columns[c].name);
      builders[c].push_json(it == obj.end() ? json(nullptr) : *it, row);
    }
  }
  return finish(schema, builders);
}

RecordBatch read_table_file(const std::string& path, const Schema& schema) {
  const auto bytes = io::read_whole_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const auto ext = path.substr(path.find_last_of('.') == std::string::npos ? path.size() : path.find_last_of('.'));
  if (ext == ".csv") return read_csv(text, schema);
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return read_jsonl(text, schema);
  fail(ErrorCode::InvalidArgument, "cannot tell the input format of '" + path + "' (use .csv or .jsonl)");
}

void apply_quantize_flag(Schema& schema, std::string_view flag) {
  const auto eq = flag.find('=');
  check(eq != std::string_view::npos, ErrorCode::InvalidArgument, "quantize flag must look like column=target");
  const auto name = flag.substr(0, eq);
  const auto target = quantization::target_from_name(flag.substr(eq + 1));
  check(target.has_value(), ErrorCode::InvalidArgument, "unknown quantization target '" + std::string(flag.substr(eq + 1)) + "'");
  const auto idx = schema.index_of(name);
  check(idx.has_value(), ErrorCode::UnknownColumn, "no column named '" + std::string(name) + "'");
  schema.columns[*idx].quantization = quantization::QuantSpec{*target};
}

std::vector<std::string> read_ranking(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.emplace_back(line.substr(b, e - b + 1));
  }
  return out;
}

std::string projection_to_csv(const format::Projection& projection) {
  const bool with_states = !projection.columns.empty() && !projection.columns.front().states.empty();
  std::string out = "_row";
  if (with_states) out += ",_deleted";
  for (const auto& c : projection.columns) out += "," + csv_quote(c.name);
  out += '\n';
  std::vector<std::vector<std::size_t>> starts;
  for (const auto& c : projection.columns) starts.push_back(list_starts(c.data));
  for (std::size_t r = 0; r < projection.row_ids.size(); ++r) {
    out += std::to_string(projection.row_ids[r]);
    if (with_states) {
      bool deleted = false;
      for (const auto& c : projection.columns) deleted |= c.states[r] != format::CellState::Live;
      out += deleted ? ",1" : ",0";
    }
    for (std::size_t c = 0; c < projection.columns.size(); ++c) {
      const auto& col = projection.columns[c];
      out += ',';
      const bool masked = with_states && col.states[r] == format::CellState::Masked;
      const bool as_null = masked && !is_list(col.data.type) && col.data.values.is_null(r);
      if (masked && !as_null)
        out += "MASK";
      else
        out += cell_text(col.data, r, starts[c][r]);
    }
    out += '\n';
  }
  return out;
}

std::string projection_to_json(const format::Projection& projection) {
  json cols = json::object();
  json states = json::object();
  for (const auto& c : projection.columns) {
    const auto starts = list_starts(c.data);
    json arr = json::array();
    for (std::size_t r = 0; r < c.data.size(); ++r) arr.push_back(cell_json(c.data, r, starts[r]));
    cols[c.name] = std::move(arr);
    if (!c.states.empty()) {
      json st = json::array();
      for (auto s : c.states)
        st.push_back(s == format::CellState::Live ? "live" : (s == format::CellState::Deleted ? "deleted" : "masked"));
      states[c.name] = std::move(st);
    }
  }
  json doc{{"rows", projection.row_ids}, {"columns", cols}};
  if (!states.empty()) doc["states"] = states;
  return doc.dump();
}

}  // namespace bullion::table_io
