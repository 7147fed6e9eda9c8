#pragma once

#include <string>

#include "bullion/format.hpp"

namespace bullion::format::detail {

/// A column as laid out on disk: one logical column becomes one stored
/// column, or two for a dual split.
struct StoredColumn {
  std::string name;
  LogicalType type = LogicalType::Int64;
  bool nullable = true;
  bool sparse = false;
  std::uint8_t compliance_level = 0;
  std::optional<quantization::QuantTarget> quantization;
  ColumnRole role = ColumnRole::Plain;
  std::uint32_t physical_position = 0;
  Bytes extra;
  std::size_t logical_index = 0;
  ColumnVector storage;  // values in storage_type() form

  ColumnInfo info() const;
};

std::vector<StoredColumn> build_stored_columns(const RecordBatch& batch);

/// Encoding settings for one stored column (level-2 columns stay maskable).
encoding::EncodingConfig column_config(const ColumnInfo& column, const encoding::EncodingConfig& base);

PageBody encode_page_body(const ColumnVector& slice, const ColumnInfo& column, const WriteOptions& options);

/// Empty-safe block encode: an empty stream becomes an empty Trivial block.
encoding::EncodedBlock encode_stream(const Values& values, const encoding::EncodingConfig& config);

struct FooterContent {
  std::uint64_t num_rows = 0;
  std::uint64_t data_end = 0;
  std::vector<std::uint8_t> page_compression_types;
  std::vector<std::uint32_t> rows_per_page;
  std::vector<std::uint64_t> page_offsets;
  std::vector<std::uint32_t> pages_per_group;
  std::vector<std::uint64_t> group_offsets;
  std::vector<std::uint32_t> column_sizes;    // [group * columns + column]
  std::vector<std::uint32_t> column_offsets;  // relative to group start
  std::vector<std::uint64_t> deletion_vec;
  std::vector<std::uint64_t> erased_vec;
  ChecksumTree checksums;
  std::vector<StoredColumn> const* columns = nullptr;
  NameHashFn name_hash = &hash_name;
};

Bytes build_footer(const FooterContent& content);

}  // namespace bullion::format::detail
