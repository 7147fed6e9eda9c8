#include <algorithm>
#include <cstring>

#include "bullion/error.hpp"
#include "bullion/format.hpp"

namespace bullion::format {

FooterView FooterView::open(ByteSpan file) {
  check(file.size() >= kTailSize, ErrorCode::TruncatedFooter, "file is shorter than the footer tail");
  check(std::memcmp(file.data() + file.size() - 4, kMagic, 4) == 0, ErrorCode::BadMagic, "missing BULN magic");
  const auto len = load_le<std::uint32_t>(file.data() + file.size() - kTailSize);
  check(len <= file.size() - kTailSize, ErrorCode::TruncatedFooter, "footer length exceeds the file size");
  FooterView v;
  v.footer_offset_ = file.size() - kTailSize - len;
  v.footer_ = file.subspan(v.footer_offset_, len);
  v.parse();
  return v;
}

FooterView FooterView::read(io::File& file) {
  const auto size = file.size();
  check(size >= kTailSize, ErrorCode::TruncatedFooter, "file is shorter than the footer tail");
  const auto tail = file.read(size - kTailSize, kTailSize);
  check(std::memcmp(tail.data() + 4, kMagic, 4) == 0, ErrorCode::BadMagic, "missing BULN magic");
  const auto len = load_le<std::uint32_t>(tail.data());
  check(len <= size - kTailSize, ErrorCode::TruncatedFooter, "footer length exceeds the file size");
  FooterView v;
  v.footer_offset_ = size - kTailSize - len;
  v.owned_ = std::make_shared<const Bytes>(file.read(v.footer_offset_, len));
  v.footer_ = *v.owned_;
  v.parse();
  return v;
}

void FooterView::parse() {
  const auto size = footer_.size();
  check(size >= kFooterHeaderSize, ErrorCode::TruncatedFooter, "footer shorter than its header");
  const auto* p = footer_.data();
  check(load_le<std::uint32_t>(p) == kFormatVersion, ErrorCode::CorruptBlock, "unsupported footer version");
  check(load_le<std::uint32_t>(p + 4) == kFooterHeaderSize, ErrorCode::CorruptBlock, "unexpected footer header size");
  const auto num_rows = load_le<std::uint64_t>(p + 8);
  const auto num_columns = load_le<std::uint32_t>(p + 16);
  const auto num_groups = load_le<std::uint32_t>(p + 20);
  const auto num_pages = load_le<std::uint64_t>(p + 24);
  data_end_ = load_le<std::uint64_t>(p + 32);
  const auto heap_size = load_le<std::uint32_t>(p + 40);
  // Every count costs at least one footer byte, which bounds the arithmetic below.
  check(num_columns <= size && num_groups <= size && num_pages <= size && num_rows / 64 <= size,
        ErrorCode::TruncatedFooter, "footer counts exceed the footer size");
  layout_ = FooterLayout::compute(num_rows, num_columns, num_groups, num_pages);
  check(layout_.heap + heap_size == size, ErrorCode::TruncatedFooter, "footer size does not match its counts");
  check(data_end_ <= footer_offset_, ErrorCode::CorruptBlock, "data region overlaps the footer");
}

std::uint8_t FooterView::page_compression_type(std::uint64_t page) const {
  return at<std::uint8_t>(layout_.page_compression_types, page);
}
std::uint32_t FooterView::rows_per_page(std::uint64_t page) const { return at<std::uint32_t>(layout_.rows_per_page, page); }
std::uint64_t FooterView::page_offset(std::uint64_t page) const { return at<std::uint64_t>(layout_.page_offsets, page); }

std::uint64_t FooterView::page_size(std::uint64_t page) const {
  const auto begin = page_offset(page);
  const auto end = page + 1 < layout_.num_pages ? page_offset(page + 1) : data_end_;
  check(begin <= end && end <= data_end_, ErrorCode::CorruptBlock, "page offsets are not ascending");
  return end - begin;
}

std::uint32_t FooterView::pages_per_group(std::uint32_t group) const {
  return at<std::uint32_t>(layout_.pages_per_group, group);
}
std::uint64_t FooterView::group_offset(std::uint32_t group) const { return at<std::uint64_t>(layout_.group_offsets, group); }
std::uint32_t FooterView::column_size(std::uint32_t group, std::uint32_t column) const {
  return at<std::uint32_t>(layout_.column_sizes, std::uint64_t{group} * layout_.num_columns + column);
}
std::uint32_t FooterView::column_offset(std::uint32_t group, std::uint32_t column) const {
  return at<std::uint32_t>(layout_.column_offsets, std::uint64_t{group} * layout_.num_columns + column);
}
std::uint64_t FooterView::deletion_word(std::uint64_t i) const { return at<std::uint64_t>(layout_.deletion_vec, i); }
std::uint64_t FooterView::erased_word(std::uint64_t i) const { return at<std::uint64_t>(layout_.erased_vec, i); }
bool FooterView::is_deleted(std::uint64_t row) const { return (deletion_word(row / 64) >> (row % 64)) & 1; }
bool FooterView::is_erased(std::uint64_t row) const { return (erased_word(row / 64) >> (row % 64)) & 1; }
std::uint64_t FooterView::page_checksum(std::uint64_t page) const { return at<std::uint64_t>(layout_.checksums, page); }
std::uint64_t FooterView::group_checksum(std::uint32_t group) const {
  return at<std::uint64_t>(layout_.checksums, layout_.num_pages + group);
}
std::uint64_t FooterView::root_checksum() const {
  return at<std::uint64_t>(layout_.checksums, layout_.num_pages + layout_.num_groups);
}

ColumnInfo FooterView::column(std::uint32_t index) const {
  check(index < layout_.num_columns, ErrorCode::ColumnNotFound, "column index out of range");
  const auto* e = footer_.data() + layout_.schema + std::uint64_t{index} * kSchemaEntrySize;
  const auto heap_size = footer_.size() - layout_.heap;
  const auto name_off = load_le<std::uint32_t>(e);
  const auto name_len = load_le<std::uint16_t>(e + 4);
  const auto extra_off = load_le<std::uint32_t>(e + 16);
  const auto extra_len = load_le<std::uint32_t>(e + 20);
  check(std::uint64_t{name_off} + name_len <= heap_size && std::uint64_t{extra_off} + extra_len <= heap_size,
        ErrorCode::CorruptBlock, "schema entry points outside the string heap");
  check(e[6] >= 1 && e[6] <= 6 && e[8] <= 2 && e[9] <= 6 && e[10] <= 2, ErrorCode::CorruptBlock,
        "invalid schema entry");
  ColumnInfo c;
  c.name = std::string_view(reinterpret_cast<const char*>(footer_.data() + layout_.heap + name_off), name_len);
  c.type = static_cast<LogicalType>(e[6]);
  c.nullable = e[7] & 1;
  c.sparse = e[7] & 2;
  c.compliance_level = e[8];
  if (e[9] != 0) c.quantization = static_cast<quantization::QuantTarget>(e[9]);
  c.role = static_cast<ColumnRole>(e[10]);
  c.physical_position = load_le<std::uint32_t>(e + 12);
  c.extra = footer_.subspan(layout_.heap + extra_off, extra_len);
  return c;
}

std::uint64_t FooterView::name_hash_at(std::uint32_t i) const {
  return load_le<std::uint64_t>(footer_.data() + layout_.name_index + std::uint64_t{i} * kNameIndexEntrySize);
}
std::uint32_t FooterView::name_column_at(std::uint32_t i) const {
  return load_le<std::uint32_t>(footer_.data() + layout_.name_index + std::uint64_t{i} * kNameIndexEntrySize + 8);
}

std::uint64_t FooterView::first_page_of_group(std::uint32_t group) const {
  std::uint64_t first = 0;
  for (std::uint32_t g = 0; g < group; ++g) first += pages_per_group(g);
  return first;
}

std::uint32_t FooterView::pages_per_chunk(std::uint32_t group) const {
  return layout_.num_columns == 0 ? 0 : pages_per_group(group) / layout_.num_columns;
}

std::uint64_t FooterView::rows_in_group(std::uint32_t group) const {
  const auto first = first_page_of_group(group);
  std::uint64_t rows = 0;
  for (std::uint32_t k = 0; k < pages_per_chunk(group); ++k) rows += rows_per_page(first + k);
  return rows;
}

std::uint64_t FooterView::first_row_of_group(std::uint32_t group) const {
  std::uint64_t row = 0;
  std::uint64_t page = 0;
  for (std::uint32_t g = 0; g < group; ++g) {
    for (std::uint32_t k = 0; k < pages_per_chunk(g); ++k) row += rows_per_page(page + k);
    page += pages_per_group(g);
  }
  return row;
}

std::uint64_t FooterView::page_ordinal(std::uint32_t group, std::uint32_t column, std::uint32_t k) const {
  return first_page_of_group(group) + std::uint64_t{this->column(column).physical_position} * pages_per_chunk(group) + k;
}

std::vector<std::uint32_t> FooterView::physical_order() const {
  std::vector<std::uint32_t> order(layout_.num_columns);
  std::vector<bool> seen(layout_.num_columns, false);
  for (std::uint32_t c = 0; c < layout_.num_columns; ++c) {
    const auto pos = column(c).physical_position;
    check(pos < layout_.num_columns && !seen[pos], ErrorCode::CorruptBlock, "physical positions are not a permutation");
    seen[pos] = true;
    order[pos] = c;
  }
  return order;
}

std::vector<std::uint32_t> FooterView::group_page_counts() const {
  std::vector<std::uint32_t> out(layout_.num_groups);
  for (std::uint32_t g = 0; g < layout_.num_groups; ++g) out[g] = pages_per_group(g);
  return out;
}

ChecksumTree FooterView::checksum_tree() const {
  ChecksumTree t;
  t.group_page_counts = group_page_counts();
  t.pages.resize(layout_.num_pages);
  for (std::uint64_t p = 0; p < layout_.num_pages; ++p) t.pages[p] = page_checksum(p);
  t.groups.resize(layout_.num_groups);
  for (std::uint32_t g = 0; g < layout_.num_groups; ++g) t.groups[g] = group_checksum(g);
  t.root = root_checksum();
  return t;
}

std::optional<std::uint32_t> find_column(const FooterView& footer, std::string_view name, NameHashFn hash) {
  const auto h = hash(name);
  std::uint32_t lo = 0;
  std::uint32_t hi = footer.num_columns();
  while (lo < hi) {
    const auto mid = lo + (hi - lo) / 2;
    if (footer.name_hash_at(mid) < h)
      lo = mid + 1;
    else
      hi = mid;
  }
  for (auto i = lo; i < footer.num_columns() && footer.name_hash_at(i) == h; ++i) {
    const auto c = footer.name_column_at(i);
    if (footer.column(c).name == name) return c;
  }
  return std::nullopt;
}

std::uint32_t lookup_column(const FooterView& footer, std::string_view name, NameHashFn hash) {
  auto c = find_column(footer, name, hash);
  if (!c) fail(ErrorCode::ColumnNotFound, "no column named '" + std::string(name) + "'");
  return *c;
}

RowLocation locate_row(const FooterView& footer, std::uint64_t row_id) {
  check(row_id < footer.num_rows(), ErrorCode::RowOutOfRange,
        "row " + std::to_string(row_id) + " is outside [0, " + std::to_string(footer.num_rows()) + ")");
  std::uint64_t row = 0;
  std::uint64_t first = 0;
  for (std::uint32_t g = 0; g < footer.num_groups(); ++g) {
    const auto ppc = footer.pages_per_chunk(g);
    for (std::uint32_t k = 0; k < ppc; ++k) {
      const auto n = footer.rows_per_page(first + k);
      if (row_id < row + n) return RowLocation{g, k, static_cast<std::uint32_t>(row_id - row), first + k};
      row += n;
    }
    first += footer.pages_per_group(g);
  }
  fail(ErrorCode::CorruptBlock, "rows_per_page does not cover num_rows");
}

}  // namespace bullion::format
