#include <algorithm>
#include <map>
#include <set>

#include "bullion/compliance.hpp"
#include "bullion/error.hpp"

namespace bullion::compliance {

using encoding::EncodedBlock;

namespace {

encoding::EncodingConfig mask_config() {
  encoding::EncodingConfig cfg;
  cfg.maskable_only = true;
  cfg.allow_chunked = false;
  return cfg;
}

bool test_bit(const std::vector<std::uint64_t>& words, std::uint64_t i) { return words[i / 64] >> (i % 64) & 1; }
void set_bit(std::vector<std::uint64_t>& words, std::uint64_t i) { words[i / 64] |= std::uint64_t{1} << (i % 64); }

/// Byte ranges of `after` that differ from `before`, at 8-byte granularity,
/// merged when adjacent.
std::vector<std::pair<std::size_t, std::size_t>> dirty_ranges(ByteSpan before, ByteSpan after) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t off = 0; off < after.size(); off += 8) {
    const auto n = std::min<std::size_t>(8, after.size() - off);
    if (std::equal(before.begin() + static_cast<std::ptrdiff_t>(off),
                   before.begin() + static_cast<std::ptrdiff_t>(off + n), after.begin() + static_cast<std::ptrdiff_t>(off)))
      continue;
    if (!out.empty() && out.back().second == off)
      out.back().second = off + n;
    else
      out.emplace_back(off, off + n);
  }
  return out;
}

}  // namespace

Bytes mask_page(ByteSpan page, const format::ColumnInfo& column, std::uint32_t rows,
                const std::vector<bool>& previously_erased, const std::vector<bool>& newly_erased) {
  check(!column.sparse, ErrorCode::UnsupportedEncoding,
        "sparse sequence pages chain each row to the previous one and cannot be masked");
  check(previously_erased.size() == rows && newly_erased.size() == rows, ErrorCode::InvalidArgument,
        "erasure flags must cover the page rows");
  const auto body = format::page_body(page);
  const auto type = format::storage_type(column);

  std::size_t pos = 0;
  std::vector<std::uint32_t> slot_sizes(rows, 1);
  if (is_list(type)) {
    std::size_t used = 0;
    const auto lengths = encoding::decode(EncodedBlock::deserialize(body, ValueKind::Int64, &used));
    check(lengths.size() == rows, ErrorCode::CorruptBlock, "list lengths do not match the page row count");
    for (std::uint32_t r = 0; r < rows; ++r) slot_sizes[r] = static_cast<std::uint32_t>(lengths.as<std::int64_t>()[r]);
    pos = used;
  }
  std::size_t used = 0;
  auto block = EncodedBlock::deserialize(body.subspan(pos), element_kind(type), &used);
  check(pos + used == body.size(), ErrorCode::CorruptBlock, "trailing bytes in page body");

  std::uint64_t total = 0;
  std::uint64_t live = 0;
  for (std::uint32_t r = 0; r < rows; ++r) {
    total += slot_sizes[r];
    if (!previously_erased[r]) live += slot_sizes[r];
  }
  const bool compacted = block.value_count != total;
  check(!compacted || block.value_count == live, ErrorCode::CorruptBlock,
        "page value count matches neither the full nor the surviving rows");

  std::vector<std::uint32_t> offsets;
  std::uint32_t cursor = 0;
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (compacted && previously_erased[r]) continue;
    if (newly_erased[r] && !previously_erased[r])
      for (std::uint32_t k = 0; k < slot_sizes[r]; ++k) offsets.push_back(cursor + k);
    cursor += slot_sizes[r];
  }
  Bytes out(page.begin(), page.end());
  if (offsets.empty()) return out;

  mask_block(block, offsets, mask_config());
  Bytes new_body(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(pos));
  block.serialize_to(new_body);
  check(new_body.size() <= page.size() - format::kPageHeaderSize, ErrorCode::UnsupportedEncoding,
        "masked page would outgrow its slot");
  std::fill(out.begin(), out.end(), 0);
  store_le<std::uint32_t>(out.data(), static_cast<std::uint32_t>(new_body.size()));
  std::copy(new_body.begin(), new_body.end(), out.begin() + format::kPageHeaderSize);
  return out;
}

void update_checksums_incremental(format::ChecksumTree& tree, std::uint64_t page, ByteSpan new_page,
                                  ChecksumReadTrace* trace) {
  check(page < tree.pages.size(), ErrorCode::InvalidArgument, "page index outside the checksum tree");
  tree.pages[page] = format::hash_bytes(new_page);
  const auto g = tree.group_of(page);
  const auto first = tree.first_page_of(g);
  const auto count = tree.group_page_counts[g];
  tree.groups[g] = format::hash_words(std::span(tree.pages).subspan(first, count));
  tree.root = format::hash_words(tree.groups);
  if (trace) {
    trace->page_bytes_hashed += new_page.size();
    for (std::uint64_t p = first; p < first + count; ++p)
      if (p != page) trace->leaf_hashes_read.push_back(p);
    for (std::uint64_t k = 0; k < tree.groups.size(); ++k)
      if (k != g) trace->group_hashes_read.push_back(k);
  }
}

DeleteStats delete_rows(io::File& file, std::span<const std::uint64_t> row_ids, Level level,
                        const DeleteOptions& options) {
  check(file.exclusive(), ErrorCode::ExclusiveAccessRequired, "deletion needs exclusive write access to the file");
  check(level != Level::Plain, ErrorCode::RewriteRequired,
        "level 0 files cannot be edited in place; rewrite the file without the rows");
  const auto footer = format::FooterView::read(file);
  const auto& layout = footer.layout();
  const auto n = footer.num_rows();

  std::vector<std::uint64_t> rows(row_ids.begin(), row_ids.end());
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  for (auto r : rows)
    check(r < n, ErrorCode::RowOutOfRange, "row " + std::to_string(r) + " is outside the file");

  DeleteStats stats;
  stats.file_bytes = file.size();

  std::vector<std::uint32_t> erasable;  // stored columns that get physically masked
  if (level == Level::Erase) {
    for (std::uint32_t c = 0; c < footer.num_columns(); ++c) {
      const auto info = footer.column(c);
      if (info.compliance_level < 2) continue;
      if (info.sparse)
        stats.warnings.push_back("column '" + std::string(info.name) +
                                 "': UnsupportedEncoding: sparse sequence pages cannot be masked; applied level 1");
      else
        erasable.push_back(c);
    }
  }

  std::vector<std::uint64_t> deletion(layout.row_words());
  std::vector<std::uint64_t> erased(layout.row_words());
  for (std::uint64_t w = 0; w < deletion.size(); ++w) {
    deletion[w] = footer.deletion_word(w);
    erased[w] = footer.erased_word(w);
  }
  const auto erased_before = erased;
  std::vector<std::uint64_t> newly_erased;
  for (auto r : rows) {
    bool changed = false;
    if (!test_bit(deletion, r)) {
      set_bit(deletion, r);
      changed = true;
    }
    if (!erasable.empty() && !test_bit(erased, r)) {
      set_bit(erased, r);
      newly_erased.push_back(r);
      changed = true;
    }
    stats.rows_deleted += changed ? 1 : 0;
  }
  if (stats.rows_deleted == 0) return stats;

  // Pages touched, as (group, page within chunk) -> first row of that page.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> touched;
  for (auto r : newly_erased) {
    const auto loc = format::locate_row(footer, r);
    touched.emplace(std::pair{loc.group, loc.page}, r - loc.offset);
  }

  // Mask everything in memory first so a failure leaves the file untouched.
  std::vector<std::pair<std::uint64_t, Bytes>> page_writes;  // page ordinal, new bytes
  for (const auto& [key, first_row] : touched) {
    const auto [g, k] = key;
    for (auto c : erasable) {
      const auto p = footer.page_ordinal(g, c, k);
      const auto count = footer.rows_per_page(p);
      std::vector<bool> before(count), now(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        before[i] = test_bit(erased_before, first_row + i);
        now[i] = test_bit(erased, first_row + i);
      }
      const auto original = file.read(footer.page_offset(p), footer.page_size(p));
      auto masked = mask_page(original, footer.column(c), count, before, now);
      if (masked != original) page_writes.emplace_back(p, std::move(masked));
    }
  }

  auto tree = footer.checksum_tree();
  for (const auto& [p, bytes] : page_writes) update_checksums_incremental(tree, p, bytes);

  Bytes new_footer(footer.bytes().begin(), footer.bytes().end());
  for (std::uint64_t w = 0; w < deletion.size(); ++w) {
    store_le(new_footer.data() + layout.deletion_vec + 8 * w, deletion[w]);
    store_le(new_footer.data() + layout.erased_vec + 8 * w, erased[w]);
  }
  auto* sums = new_footer.data() + layout.checksums;
  for (std::uint64_t p = 0; p < tree.pages.size(); ++p) store_le(sums + 8 * p, tree.pages[p]);
  for (std::uint64_t g = 0; g < tree.groups.size(); ++g) store_le(sums + 8 * (tree.pages.size() + g), tree.groups[g]);
  store_le(sums + 8 * (tree.pages.size() + tree.groups.size()), tree.root);

  for (const auto& [p, bytes] : page_writes) {
    file.write(footer.page_offset(p), bytes);
    ++stats.pages_rewritten;
    stats.bytes_rewritten += bytes.size();
  }

  if (options.footer_update == FooterUpdate::InPlace) {
    for (const auto& [b, e] : dirty_ranges(footer.bytes(), new_footer)) {
      file.write(footer.footer_offset() + b, ByteSpan(new_footer).subspan(b, e - b));
      stats.bytes_rewritten += e - b;
    }
  } else {
    // Data pages never move; the old footer becomes dead space.
    const auto end = file.size();
    Bytes tail((8 - end % 8) % 8, 0);
    tail.insert(tail.end(), new_footer.begin(), new_footer.end());
    const auto len_pos = tail.size();
    tail.resize(len_pos + format::kTailSize);
    store_le<std::uint32_t>(tail.data() + len_pos, static_cast<std::uint32_t>(new_footer.size()));
    std::copy(std::begin(format::kMagic), std::end(format::kMagic), tail.begin() + static_cast<std::ptrdiff_t>(len_pos + 4));
    file.write(end, tail);
    stats.bytes_rewritten += tail.size();
  }
  return stats;
}

DeleteStats delete_rows(const std::string& path, std::span<const std::uint64_t> row_ids, Level level,
                        const DeleteOptions& options) {
  io::PosixFile file(path, io::PosixFile::Mode::ReadWrite);
  return delete_rows(file, row_ids, level, options);
}

}  // namespace bullion::compliance
