#include <algorithm>
#include <bit>
#include <cstring>

#include "bullion/error.hpp"
#include "bullion/format.hpp"
#include "bullion/quantization.hpp"

namespace bullion::format {

namespace {

using quantization::QuantTarget;

Values default_value(ValueKind kind) {
  switch (kind) {
    case ValueKind::Int64:
      return Values(std::vector<std::int64_t>{0});
    case ValueKind::Float32:
      return Values(std::vector<float>{0.0f});
    case ValueKind::Float64:
      return Values(std::vector<double>{0.0});
    case ValueKind::String:
      return Values(std::vector<std::string>{""});
  }
  fail(ErrorCode::UnsupportedType, "unknown value kind");
}

/// Re-expands a stream from which the elements of erased slots were removed.
/// `slot_sizes[i]` is how many elements slot i spans (1 for scalar rows).
Values reinsert(const Values& live, const std::vector<bool>& erased, const std::vector<std::uint32_t>& slot_sizes) {
  const auto def = default_value(live.kind());
  Values out = Values::empty(live.kind());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < erased.size(); ++i) {
    for (std::uint32_t k = 0; k < slot_sizes[i]; ++k) {
      if (erased[i])
        out.push_from(def, 0);
      else
        out.push_from(live, pos++);
    }
  }
  return out;
}

std::size_t count_true(const std::vector<bool>& v) { return static_cast<std::size_t>(std::count(v.begin(), v.end(), true)); }

Values decode_stream(ByteSpan body, std::size_t& pos, ValueKind kind) {
  std::size_t used = 0;
  auto block = encoding::EncodedBlock::deserialize(body.subspan(pos), kind, &used);
  pos += used;
  return encoding::decode(block);
}

}  // namespace

ByteSpan page_body(ByteSpan page) {
  check(page.size() >= kPageHeaderSize, ErrorCode::CorruptBlock, "page shorter than its header");
  const auto live = load_le<std::uint32_t>(page.data());
  check(live <= page.size() - kPageHeaderSize, ErrorCode::CorruptBlock, "live length exceeds the page size");
  return page.subspan(kPageHeaderSize, live);
}

LogicalType storage_type(const ColumnInfo& column) {
  if (column.quantization) return LogicalType::Int64;
  return column.type;
}

ColumnVector decode_page_body(ByteSpan body, const ColumnInfo& column, std::uint32_t rows_in_page,
                              const std::vector<bool>& erased_in_page) {
  const auto type = storage_type(column);
  const std::size_t erased = count_true(erased_in_page);
  ColumnVector out = ColumnVector::empty(type);

  if (column.sparse) {
    auto rows = sparse_delta::decode_sequence_column(sparse_delta::deserialize(body));
    check(rows.size() == rows_in_page, ErrorCode::CorruptBlock, "sparse page row count mismatch");
    return ColumnVector::int_lists(rows);
  }

  std::size_t pos = 0;
  if (is_list(type)) {
    const auto lengths = decode_stream(body, pos, ValueKind::Int64);
    check(lengths.size() == rows_in_page && !lengths.has_nulls(), ErrorCode::CorruptBlock,
          "list lengths do not match the page row count");
    std::size_t total = 0;
    std::size_t live_total = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      const auto len = lengths.as<std::int64_t>()[i];
      check(len >= 0 && len <= 0xFFFFFFFF, ErrorCode::CorruptBlock, "bad list length");
      out.list_lengths.push_back(static_cast<std::uint32_t>(len));
      total += static_cast<std::size_t>(len);
      if (erased_in_page.empty() || !erased_in_page[i]) live_total += static_cast<std::size_t>(len);
    }
    auto items = decode_stream(body, pos, element_kind(type));
    if (items.size() != total) {
      check(!erased_in_page.empty() && items.size() == live_total, ErrorCode::CorruptBlock,
            "list items do not match the lengths");
      items = reinsert(items, erased_in_page, out.list_lengths);
    }
    check(!items.has_nulls(), ErrorCode::CorruptBlock, "list items cannot be null");
    out.list_items = std::move(items);
  } else {
    auto values = decode_stream(body, pos, element_kind(type));
    if (values.size() != rows_in_page) {
      check(!erased_in_page.empty() && values.size() + erased == rows_in_page, ErrorCode::CorruptBlock,
            "page value count does not match its row count");
      values = reinsert(values, erased_in_page, std::vector<std::uint32_t>(rows_in_page, 1));
    }
    out.values = std::move(values);
  }
  check(pos == body.size(), ErrorCode::CorruptBlock, "trailing bytes in page body");
  return out;
}

const ProjectedColumn& Projection::column(std::string_view name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  fail(ErrorCode::ColumnNotFound, "projection has no column '" + std::string(name) + "'");
}

Reader::Reader(std::shared_ptr<io::File> file) : file_(std::move(file)), footer_(FooterView::read(*file_)) {}

std::vector<std::string> Reader::column_names() const {
  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < footer_.num_columns(); ++c) {
    const auto info = footer_.column(c);
    if (info.role == ColumnRole::Plain) names.emplace_back(info.name);
    if (info.role == ColumnRole::DualHi) names.emplace_back(info.name.substr(0, info.name.size() - 3));
  }
  return names;
}

Bytes Reader::read_page(std::uint64_t page) {
  check(page < footer_.num_pages(), ErrorCode::InvalidArgument, "page ordinal out of range");
  return file_->read(footer_.page_offset(page), footer_.page_size(page));
}

namespace {

struct Request {
  std::string name;
  std::vector<std::uint32_t> stored;  // one column, or hi + lo of a split column
};

/// Storage-form values of one stored column across all rows.
ColumnVector read_stored_column(const FooterView& footer, io::File& file, std::uint32_t col,
                                const std::vector<std::vector<std::pair<std::uint64_t, const Bytes*>>>& ranges) {
  (void)file;
  const auto info = footer.column(col);
  ColumnVector acc = ColumnVector::empty(storage_type(info));
  const bool compactable = info.compliance_level == 2 && !info.sparse;
  std::uint64_t row = 0;
  std::uint64_t first = 0;
  for (std::uint32_t g = 0; g < footer.num_groups(); ++g) {
    const auto ppc = footer.pages_per_chunk(g);
    // Locate the buffer holding this chunk.
    const auto chunk_start = footer.group_offset(g) + footer.column_offset(g, col);
    const Bytes* buf = nullptr;
    std::uint64_t buf_start = 0;
    for (const auto& [start, bytes] : ranges[g]) {
      if (start <= chunk_start && chunk_start + footer.column_size(g, col) <= start + bytes->size()) {
        buf = bytes;
        buf_start = start;
        break;
      }
    }
    check(buf != nullptr, ErrorCode::CorruptBlock, "column chunk outside the read ranges");
    for (std::uint32_t k = 0; k < ppc; ++k) {
      const auto p = first + std::uint64_t{info.physical_position} * ppc + k;
      const auto off = footer.page_offset(p);
      const auto size = footer.page_size(p);
      check(off >= buf_start && off + size <= buf_start + buf->size(), ErrorCode::CorruptBlock,
            "page lies outside its column chunk");
      const ByteSpan page(buf->data() + (off - buf_start), size);
      const auto rows = footer.rows_per_page(first + k);
      std::vector<bool> erased;
      if (compactable) {
        erased.resize(rows);
        for (std::uint32_t r = 0; r < rows; ++r) erased[r] = footer.is_erased(row + r);
      }
      acc.append(decode_page_body(page_body(page), info, rows, erased));
      row += rows;
    }
    first += footer.pages_per_group(g);
  }
  check(row == footer.num_rows(), ErrorCode::CorruptBlock, "pages do not cover num_rows");
  return acc;
}

/// Converts storage values (codes) of one stored column to its logical type.
ColumnVector to_logical(const ColumnInfo& info, ColumnVector storage) {
  if (!info.quantization || info.role != ColumnRole::Plain) return storage;
  const auto target = *info.quantization;
  const auto& codes = storage.values.as<std::int64_t>();
  if (quantization::is_float_target(target)) {
    std::vector<float> xs(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i)
      xs[i] = storage.values.is_null(i) ? 0.0f
                                        : quantization::dequantize_one(static_cast<std::uint32_t>(codes[i]), target);
    Values v(std::move(xs));
    v.validity = storage.values.validity;
    return ColumnVector::scalar(LogicalType::Float32, std::move(v));
  }
  // int_rehash
  check(info.extra.size() % 8 == 0, ErrorCode::CorruptBlock, "rehash table is not a whole number of int64");
  const auto table_size = info.extra.size() / 8;
  std::vector<std::int64_t> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (storage.values.is_null(i) && (codes[i] == 0 || table_size == 0)) continue;
    check(codes[i] >= 0 && static_cast<std::uint64_t>(codes[i]) < table_size, ErrorCode::CorruptBlock,
          "rehash code outside the table");
    out[i] = load_le<std::int64_t>(info.extra.data() + 8 * codes[i]);
  }
  Values v(std::move(out));
  v.validity = storage.values.validity;
  return ColumnVector::scalar(LogicalType::Int64, std::move(v));
}

ColumnVector bf16_from_codes(ColumnVector storage) {
  const auto& codes = storage.values.as<std::int64_t>();
  std::vector<float> xs(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) xs[i] = quantization::from_bf16(static_cast<std::uint16_t>(codes[i]));
  Values v(std::move(xs));
  v.validity = storage.values.validity;
  return ColumnVector::scalar(LogicalType::Float32, std::move(v));
}

ColumnVector join_columns(const ColumnVector& hi, const ColumnVector& lo) {
  const auto& h = hi.values.as<std::int64_t>();
  const auto& l = lo.values.as<std::int64_t>();
  std::vector<std::uint16_t> hs(h.begin(), h.end());
  std::vector<std::uint16_t> ls(l.begin(), l.end());
  Values v(quantization::join_dual(hs, ls));
  v.validity = hi.values.validity;
  return ColumnVector::scalar(LogicalType::Float32, std::move(v));
}

/// Replaces the content of masked rows with the typed placeholder (or null).
void apply_mask(ColumnVector& col, const std::vector<bool>& masked, MaskPolicy policy) {
  if (std::find(masked.begin(), masked.end(), true) == masked.end()) return;
  if (!is_list(col.type)) {
    const auto def = default_value(col.values.kind());
    Values out = Values::empty(col.values.kind());
    for (std::size_t i = 0; i < masked.size(); ++i) {
      if (masked[i]) {
        out.push_from(def, 0);
        if (policy == MaskPolicy::AsNull) {
          out.validity.resize(out.size(), 1);
          out.validity.back() = 0;
        }
      } else {
        out.push_from(col.values, i);
      }
    }
    col.values = std::move(out);
    return;
  }
  ColumnVector out = ColumnVector::empty(col.type);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    const auto len = col.list_lengths[i];
    if (masked[i]) {
      out.list_lengths.push_back(0);
    } else {
      out.list_lengths.push_back(len);
      for (std::uint32_t k = 0; k < len; ++k) out.list_items.push_from(col.list_items, pos + k);
    }
    pos += len;
  }
  col = std::move(out);
}

}  // namespace

Projection Reader::project(const std::vector<std::string>& names, const ReadOptions& options) {
  std::vector<Request> requests;
  for (const auto& name : names) {
    Request r{name, {}};
    if (auto c = find_column(footer_, name)) {
      r.stored.push_back(*c);
    } else {
      auto hi = find_column(footer_, name + ".hi");
      auto lo = find_column(footer_, name + ".lo");
      if (!hi || !lo || footer_.column(*hi).role != ColumnRole::DualHi || footer_.column(*lo).role != ColumnRole::DualLo)
        fail(ErrorCode::ColumnNotFound, "no column named '" + name + "'");
      r.stored = {*hi, *lo};
    }
    requests.push_back(std::move(r));
  }

  // One pass of coalesced reads per row group over every requested chunk.
  std::vector<std::uint32_t> needed;
  for (const auto& r : requests) needed.insert(needed.end(), r.stored.begin(), r.stored.end());
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  std::vector<Bytes> buffers;
  buffers.reserve(needed.size() * footer_.num_groups());
  std::vector<std::vector<std::pair<std::uint64_t, const Bytes*>>> ranges(footer_.num_groups());
  for (std::uint32_t g = 0; g < footer_.num_groups(); ++g) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
    for (auto c : needed) {
      const auto start = footer_.group_offset(g) + footer_.column_offset(g, c);
      spans.emplace_back(start, start + footer_.column_size(g, c));
    }
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> merged;
    for (const auto& s : spans) {
      if (!merged.empty() && s.first <= merged.back().second + options.coalesce_gap)
        merged.back().second = std::max(merged.back().second, s.second);
      else
        merged.push_back(s);
    }
    for (const auto& [b, e] : merged) {
      check(e <= footer_.data_end(), ErrorCode::CorruptBlock, "column chunk runs past the data region");
      buffers.push_back(file_->read(b, e - b));
      ranges[g].emplace_back(b, &buffers.back());
    }
  }

  std::vector<std::uint64_t> rows;
  for (std::uint64_t r = 0; r < footer_.num_rows(); ++r)
    if (options.include_deleted || !footer_.is_deleted(r)) rows.push_back(r);
  std::vector<std::size_t> positions(rows.begin(), rows.end());

  Projection out;
  out.row_ids = rows;
  for (const auto& req : requests) {
    const auto info = footer_.column(req.stored[0]);
    ColumnVector data;
    if (req.stored.size() == 2) {
      data = join_columns(read_stored_column(footer_, *file_, req.stored[0], ranges),
                          read_stored_column(footer_, *file_, req.stored[1], ranges));
    } else if (info.role == ColumnRole::DualHi) {
      data = bf16_from_codes(read_stored_column(footer_, *file_, req.stored[0], ranges));
    } else {
      data = to_logical(info, read_stored_column(footer_, *file_, req.stored[0], ranges));
    }

    const bool maskable = info.compliance_level == 2 && !info.sparse;
    std::vector<bool> masked(footer_.num_rows(), false);
    if (maskable)
      for (std::uint64_t r = 0; r < footer_.num_rows(); ++r) masked[r] = footer_.is_erased(r);
    apply_mask(data, masked, options.mask_policy);

    ProjectedColumn pc;
    pc.name = req.name;
    pc.data = rows.size() == footer_.num_rows() ? std::move(data) : data.gather(positions);
    if (options.include_deleted) {
      pc.states.resize(rows.size(), CellState::Live);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (masked[rows[i]])
          pc.states[i] = CellState::Masked;
        else if (footer_.is_deleted(rows[i]))
          pc.states[i] = CellState::Deleted;
      }
    }
    out.columns.push_back(std::move(pc));
  }
  return out;
}

Projection Reader::scan(const ReadOptions& options) { return project(column_names(), options); }

Projection project_columns(std::shared_ptr<io::File> file, const std::vector<std::string>& names,
                           const ReadOptions& options) {
  Reader reader(std::move(file));
  return reader.project(names, options);
}

VerifyReport verify_file(io::File& file) {
  VerifyReport report;
  FooterView footer;
  try {
    footer = FooterView::read(file);
  } catch (const Error& e) {
    report.ok = false;
    report.root_ok = false;
    report.message = e.what();
    return report;
  }
  const auto stored = footer.checksum_tree();
  std::vector<std::uint64_t> leaves(footer.num_pages());
  for (std::uint64_t p = 0; p < footer.num_pages(); ++p) {
    leaves[p] = hash_bytes(file.read(footer.page_offset(p), footer.page_size(p)));
    if (leaves[p] != stored.pages[p] && !report.first_bad_page) report.first_bad_page = p;
  }
  std::vector<std::uint64_t> groups(footer.num_groups());
  std::uint64_t first = 0;
  for (std::uint32_t g = 0; g < footer.num_groups(); ++g) {
    const auto n = footer.pages_per_group(g);
    check(first + n <= leaves.size(), ErrorCode::CorruptBlock, "pages_per_group exceeds the page count");
    groups[g] = hash_words(std::span(leaves).subspan(first, n));
    if (groups[g] != stored.groups[g] && !report.first_bad_group) report.first_bad_group = g;
    first += n;
  }
  report.root_ok = hash_words(groups) == stored.root;
  report.ok = report.root_ok && !report.first_bad_page && !report.first_bad_group;
  if (report.first_bad_page)
    report.message = "page " + std::to_string(*report.first_bad_page) + " does not match its checksum";
  else if (report.first_bad_group)
    report.message = "group " + std::to_string(*report.first_bad_group) + " checksum mismatch";
  else if (!report.root_ok)
    report.message = "root checksum mismatch";
  else
    report.message = "ok";
  return report;
}

}  // namespace bullion::format
