#pragma once

#include <string>
#include <string_view>

#include "bullion/format.hpp"
#include "bullion/schema.hpp"

/// Text interchange for tables: schema JSON, CSV / JSON-lines ingestion and
/// projection export. Malformed input raises ParseError or SchemaMismatch with
/// the 1-based data row and the column name in the message.
namespace bullion::table_io {

/// Schema document:
///   {"columns": [{"name": "id", "type": "int64", "nullable": false,
///                 "quantization": "bf16", "compliance_level": 2,
///                 "sparse_sequence": true}, ...]}
/// Only "name" and "type" are required. A bare array of column objects is also accepted.
Schema parse_schema(std::string_view json_text);
std::string schema_to_json(const Schema& schema);

/// First line is a header naming every schema column (any order). An unquoted
/// empty cell is null; a quoted empty cell is the empty string. List cells hold
/// a JSON array, e.g. "[1,2,3]".
RecordBatch read_csv(std::string_view text, const Schema& schema);

/// One JSON object per non-blank line; missing keys and null are null.
RecordBatch read_jsonl(std::string_view text, const Schema& schema);

/// Dispatches on the extension: .csv, or .jsonl / .ndjson / .json for JSON lines.
RecordBatch read_table_file(const std::string& path, const Schema& schema);

/// Applies a `column=target` override such as "emb=bf16".
void apply_quantize_flag(Schema& schema, std::string_view flag);

/// Reads a ranking file: one column name per line, blank lines and '#' comments ignored.
std::vector<std::string> read_ranking(std::string_view text);

/// Row-per-line CSV with a leading "_row" column. When the projection carries
/// cell states, a "_deleted" column follows and masked cells print as MASK.
std::string projection_to_csv(const format::Projection& projection);
/// {"rows": [...], "columns": {"name": [...]}, "states": {...}} with nulls as null.
std::string projection_to_json(const format::Projection& projection);

}  // namespace bullion::table_io
