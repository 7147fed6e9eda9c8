#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bullion/bytes.hpp"
#include "bullion/checksum.hpp"
#include "bullion/encoding.hpp"
#include "bullion/io.hpp"
#include "bullion/layout.hpp"
#include "bullion/schema.hpp"
#include "bullion/sparse_delta.hpp"

namespace bullion::format {

inline constexpr char kMagic[4] = {'B', 'U', 'L', 'N'};
inline constexpr std::size_t kTailSize = 8;        // footer length + magic
inline constexpr std::size_t kPageHeaderSize = 4;  // live encoded length
inline constexpr std::uint8_t kSparseDeltaPageTag = 0xF0;
inline constexpr std::uint32_t kFormatVersion = 1;

using NameHashFn = std::uint64_t (*)(std::string_view);

/// How a stored column relates to the logical column it came from.
enum class ColumnRole : std::uint8_t {
  Plain = 0,
  DualHi = 1,  // upper 16 bits of a dual-split float32 column, readable as bf16
  DualLo = 2,  // lower 16 bits, raw
};

struct WriteOptions {
  std::uint32_t rows_per_page = 4096;
  /// Pages per column chunk in one row group.
  std::uint32_t pages_per_group = 16;
  layout::RowOrderSpec row_order;
  layout::ColumnOrderSpec column_order;
  encoding::EncodingConfig encoding;
  sparse_delta::Options sparse;
  NameHashFn name_hash = &hash_name;

  void validate() const;
};

struct ColumnWriteStats {
  std::string name;
  std::uint64_t bytes = 0;
  std::uint64_t pages = 0;
  std::map<std::string, std::uint64_t> page_schemes;  // scheme name -> page count
};

struct WriteStats {
  std::uint64_t file_bytes = 0;
  std::uint64_t footer_bytes = 0;
  std::uint64_t num_rows = 0;
  std::uint32_t num_groups = 0;
  std::uint64_t num_pages = 0;
  std::vector<ColumnWriteStats> columns;  // stored columns, schema order
  std::vector<std::size_t> row_permutation;
};

struct WriteResult {
  Bytes bytes;
  WriteStats stats;
};

/// SchemaMismatch when a batch disagrees with `schema`; EmptyInput for no
/// columns or no rows.
WriteResult write_file(const Schema& schema, const std::vector<RecordBatch>& batches, const WriteOptions& options = {});
WriteResult write_file(const RecordBatch& batch, const WriteOptions& options = {});

/// Byte offsets (relative to the footer start) of every footer array,
/// derived from the counts alone.
struct FooterLayout {
  std::uint64_t num_rows = 0;
  std::uint32_t num_columns = 0;
  std::uint32_t num_groups = 0;
  std::uint64_t num_pages = 0;

  std::uint64_t page_compression_types = 0;
  std::uint64_t rows_per_page = 0;
  std::uint64_t page_offsets = 0;
  std::uint64_t pages_per_group = 0;
  std::uint64_t group_offsets = 0;
  std::uint64_t column_sizes = 0;
  std::uint64_t column_offsets = 0;
  std::uint64_t deletion_vec = 0;
  std::uint64_t erased_vec = 0;
  std::uint64_t checksums = 0;
  std::uint64_t schema = 0;
  std::uint64_t name_index = 0;
  std::uint64_t heap = 0;

  std::uint64_t row_words() const { return (num_rows + 63) / 64; }
  std::uint64_t checksum_words() const { return num_pages + num_groups + 1; }

  static FooterLayout compute(std::uint64_t num_rows, std::uint32_t num_columns, std::uint32_t num_groups,
                              std::uint64_t num_pages);
};

inline constexpr std::size_t kFooterHeaderSize = 64;
inline constexpr std::size_t kSchemaEntrySize = 24;
inline constexpr std::size_t kNameIndexEntrySize = 16;

struct ColumnInfo {
  std::string_view name;
  LogicalType type;
  bool nullable;
  bool sparse;
  std::uint8_t compliance_level;
  std::optional<quantization::QuantTarget> quantization;
  ColumnRole role;
  std::uint32_t physical_position;
  ByteSpan extra;  // rehash table for int_rehash columns (int64 LE)
};

/// Read-only view over footer bytes. Every accessor is offset arithmetic on
/// the buffer; opening validates extents only, so cost does not depend on
/// the column count.
class FooterView {
 public:
  FooterView() = default;
  /// View into the bytes of a whole file (memory map or buffer); the caller
  /// keeps them alive. BadMagic / TruncatedFooter on a bad tail.
  static FooterView open(ByteSpan file);
  /// Reads the tail and footer through `file` (two positional reads).
  static FooterView read(io::File& file);

  const FooterLayout& layout() const { return layout_; }
  ByteSpan bytes() const { return footer_; }
  /// File offset where the footer starts.
  std::uint64_t footer_offset() const { return footer_offset_; }
  std::uint64_t data_end() const { return data_end_; }

  std::uint64_t num_rows() const { return layout_.num_rows; }
  std::uint32_t num_columns() const { return layout_.num_columns; }
  std::uint32_t num_groups() const { return layout_.num_groups; }
  std::uint64_t num_pages() const { return layout_.num_pages; }

  std::uint8_t page_compression_type(std::uint64_t page) const;
  std::uint32_t rows_per_page(std::uint64_t page) const;
  std::uint64_t page_offset(std::uint64_t page) const;
  std::uint64_t page_size(std::uint64_t page) const;
  std::uint32_t pages_per_group(std::uint32_t group) const;
  std::uint64_t group_offset(std::uint32_t group) const;
  std::uint32_t column_size(std::uint32_t group, std::uint32_t column) const;
  std::uint32_t column_offset(std::uint32_t group, std::uint32_t column) const;
  std::uint64_t deletion_word(std::uint64_t i) const;
  std::uint64_t erased_word(std::uint64_t i) const;
  bool is_deleted(std::uint64_t row) const;
  bool is_erased(std::uint64_t row) const;
  std::uint64_t page_checksum(std::uint64_t page) const;
  std::uint64_t group_checksum(std::uint32_t group) const;
  std::uint64_t root_checksum() const;
  ColumnInfo column(std::uint32_t index) const;
  std::uint64_t name_hash_at(std::uint32_t i) const;
  std::uint32_t name_column_at(std::uint32_t i) const;

  /// First page ordinal of a group and the number of pages per column chunk in it.
  std::uint64_t first_page_of_group(std::uint32_t group) const;
  std::uint32_t pages_per_chunk(std::uint32_t group) const;
  std::uint64_t first_row_of_group(std::uint32_t group) const;
  std::uint64_t rows_in_group(std::uint32_t group) const;
  /// Page ordinal of page `k` of the chunk of `column` in `group`.
  std::uint64_t page_ordinal(std::uint32_t group, std::uint32_t column, std::uint32_t k) const;
  /// Stored-column order within each row group.
  std::vector<std::uint32_t> physical_order() const;
  std::vector<std::uint32_t> group_page_counts() const;
  ChecksumTree checksum_tree() const;

 private:
  template <typename T>
  T at(std::uint64_t array_offset, std::uint64_t index) const {
    return load_le<T>(footer_.data() + array_offset + index * sizeof(T));
  }
  void parse();

  std::shared_ptr<const Bytes> owned_;
  ByteSpan footer_;
  std::uint64_t footer_offset_ = 0;
  std::uint64_t data_end_ = 0;
  FooterLayout layout_;
};

/// Binary search on the name index by hash, verified against the stored
/// name. ColumnNotFound if absent.
std::uint32_t lookup_column(const FooterView& footer, std::string_view name, NameHashFn hash = &hash_name);
std::optional<std::uint32_t> find_column(const FooterView& footer, std::string_view name, NameHashFn hash = &hash_name);

struct RowLocation {
  std::uint32_t group = 0;
  std::uint32_t page = 0;  // page index within each column chunk of the group
  std::uint32_t offset = 0;
  /// Global page ordinal for the first stored column in physical order;
  /// other columns follow at page_ordinal(group, column, page).
  std::uint64_t first_column_page = 0;
};

/// RowOutOfRange when row_id >= num_rows.
RowLocation locate_row(const FooterView& footer, std::uint64_t row_id);

enum class MaskPolicy { Observable, AsNull };
enum class CellState : std::uint8_t { Live = 0, Deleted = 1, Masked = 2 };

struct ReadOptions {
  /// Return deleted rows too, with per-cell states.
  bool include_deleted = false;
  MaskPolicy mask_policy = MaskPolicy::Observable;
  /// Column-chunk ranges separated by at most this many bytes share one read.
  std::uint64_t coalesce_gap = 64 * 1024;
};

struct ProjectedColumn {
  std::string name;
  ColumnVector data;
  std::vector<CellState> states;  // filled when include_deleted is set
};

struct Projection {
  std::vector<std::uint64_t> row_ids;
  std::vector<ProjectedColumn> columns;

  const ProjectedColumn& column(std::string_view name) const;
};

class Reader {
 public:
  explicit Reader(std::shared_ptr<io::File> file);

  const FooterView& footer() const { return footer_; }
  io::File& file() { return *file_; }

  /// Logical columns: dual-split parts are joined back under the original name.
  std::vector<std::string> column_names() const;
  Projection project(const std::vector<std::string>& names, const ReadOptions& options = {});
  Projection scan(const ReadOptions& options = {});
  Bytes read_page(std::uint64_t page);

 private:
  std::shared_ptr<io::File> file_;
  FooterView footer_;
};

Projection project_columns(std::shared_ptr<io::File> file, const std::vector<std::string>& names,
                           const ReadOptions& options = {});

struct VerifyReport {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_page;
  std::optional<std::uint32_t> first_bad_group;
  bool root_ok = true;
  std::string message;
};

/// Recomputes page leaves and compares them bottom-up with the stored tree.
VerifyReport verify_file(io::File& file);

// Page-level codec shared with the compliance module.

/// Serialized page body for one stored column's slice of rows.
struct PageBody {
  Bytes bytes;
  std::uint8_t compression_type = 0;
};

/// Live rows of a decoded page: either every row, or (after compaction by
/// masking) only the rows whose erased flag is clear.
ColumnVector decode_page_body(ByteSpan body, const ColumnInfo& column, std::uint32_t rows_in_page,
                              const std::vector<bool>& erased_in_page);
/// Body of a page without its header and padding.
ByteSpan page_body(ByteSpan page);

/// The value stream type a stored column is encoded as (codes for quantized columns).
LogicalType storage_type(const ColumnInfo& column);

}  // namespace bullion::format
