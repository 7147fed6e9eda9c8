#include <algorithm>
#include <bit>
#include <cstring>

#include "bullion/error.hpp"
#include "bullion/format.hpp"
#include "internal.hpp"

namespace bullion::format {

namespace detail {

ColumnInfo StoredColumn::info() const {
  return ColumnInfo{name, type, nullable, sparse, compliance_level, quantization, role, physical_position, extra};
}

namespace {

using quantization::QuantTarget;

Values codes_from_floats(const Values& values, QuantTarget target) {
  const auto& xs = values.as<float>();
  std::vector<std::int64_t> codes(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    codes[i] = values.is_null(i) ? 0 : static_cast<std::int64_t>(quantization::quantize_one(xs[i], target));
  Values out(std::move(codes));
  out.validity = values.validity;
  return out;
}

}  // namespace

std::vector<StoredColumn> build_stored_columns(const RecordBatch& batch) {
  std::vector<StoredColumn> out;
  for (std::size_t i = 0; i < batch.columns.size(); ++i) {
    const auto& s = batch.schema.columns[i];
    const auto& data = batch.columns[i];
    StoredColumn c;
    c.logical_index = i;
    c.name = s.name;
    c.type = s.type;
    c.nullable = s.nullable;
    c.sparse = s.is_sparse_sequence;
    c.compliance_level = s.compliance_level;
    if (s.quantization) c.quantization = s.quantization->target;

    if (!s.quantization) {
      c.storage = data;
    } else if (quantization::is_float_target(s.quantization->target)) {
      c.storage = ColumnVector::scalar(LogicalType::Int64, codes_from_floats(data.values, s.quantization->target));
    } else if (s.quantization->target == QuantTarget::IntRehash) {
      const auto r = quantization::rehash_ints(data.values.as<std::int64_t>());
      std::vector<std::int64_t> codes(r.codes.begin(), r.codes.end());
      Values v(std::move(codes));
      v.validity = data.values.validity;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (v.is_null(k)) v.as<std::int64_t>()[k] = 0;
      c.storage = ColumnVector::scalar(LogicalType::Int64, std::move(v));
      c.extra.resize(r.table.size() * 8);
      if (!r.table.empty()) std::memcpy(c.extra.data(), r.table.data(), c.extra.size());
    } else {  // dual split: two stored columns
      const auto split = quantization::split_dual(data.values.as<float>());
      StoredColumn hi = c;
      StoredColumn lo = c;
      hi.name = s.name + ".hi";
      hi.role = ColumnRole::DualHi;
      lo.name = s.name + ".lo";
      lo.role = ColumnRole::DualLo;
      lo.type = LogicalType::Int64;
      std::vector<std::int64_t> hv(split.hi.begin(), split.hi.end());
      std::vector<std::int64_t> lv(split.lo.begin(), split.lo.end());
      Values hvals(std::move(hv));
      Values lvals(std::move(lv));
      hvals.validity = data.values.validity;
      lvals.validity = data.values.validity;
      for (std::size_t k = 0; k < hvals.size(); ++k)
        if (hvals.is_null(k)) hvals.as<std::int64_t>()[k] = lvals.as<std::int64_t>()[k] = 0;
      hi.storage = ColumnVector::scalar(LogicalType::Int64, std::move(hvals));
      lo.storage = ColumnVector::scalar(LogicalType::Int64, std::move(lvals));
      out.push_back(std::move(hi));
      out.push_back(std::move(lo));
      continue;
    }
    out.push_back(std::move(c));
  }
  return out;
}

encoding::EncodingConfig column_config(const ColumnInfo& column, const encoding::EncodingConfig& base) {
  auto cfg = base;
  if (column.compliance_level == 2) {
    cfg.maskable_only = true;
    cfg.allow_chunked = false;
  }
  return cfg;
}

encoding::EncodedBlock encode_stream(const Values& values, const encoding::EncodingConfig& config) {
  if (values.size() == 0) {
    encoding::EncodedBlock b;
    b.scheme = encoding::SchemeId::Trivial;
    b.kind = values.kind();
    return b;
  }
  return encoding::encode_cascading(values, config);
}

PageBody encode_page_body(const ColumnVector& slice, const ColumnInfo& column, const WriteOptions& options) {
  PageBody body;
  if (column.sparse) {
    const auto block = sparse_delta::encode_sequence_column(slice.int_rows(), options.sparse);
    body.bytes = sparse_delta::serialize(block, options.sparse);
    body.compression_type = kSparseDeltaPageTag;
    return body;
  }
  const auto cfg = column_config(column, options.encoding);
  if (is_list(slice.type)) {
    std::vector<std::int64_t> lengths(slice.list_lengths.begin(), slice.list_lengths.end());
    encode_stream(Values(std::move(lengths)), options.encoding).serialize_to(body.bytes);
    const auto items = encode_stream(slice.list_items, cfg);
    items.serialize_to(body.bytes);
    body.compression_type = static_cast<std::uint8_t>(items.scheme);
    return body;
  }
  const auto block = encode_stream(slice.values, cfg);
  block.serialize_to(body.bytes);
  body.compression_type = static_cast<std::uint8_t>(block.scheme);
  return body;
}

Bytes build_footer(const FooterContent& c) {
  const auto& cols = *c.columns;
  const auto num_columns = static_cast<std::uint32_t>(cols.size());
  const auto num_groups = static_cast<std::uint32_t>(c.pages_per_group.size());
  const auto num_pages = c.page_offsets.size();
  const auto L = FooterLayout::compute(c.num_rows, num_columns, num_groups, num_pages);

  // String heap: names, then extra blobs.
  Bytes heap;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> name_at, extra_at;
  for (const auto& col : cols) {
    check(col.name.size() <= 0xFFFF, ErrorCode::SchemaMismatch, "column name longer than 65535 bytes");
    name_at.emplace_back(static_cast<std::uint32_t>(heap.size()), static_cast<std::uint32_t>(col.name.size()));
    heap.insert(heap.end(), col.name.begin(), col.name.end());
  }
  for (const auto& col : cols) {
    extra_at.emplace_back(static_cast<std::uint32_t>(heap.size()), static_cast<std::uint32_t>(col.extra.size()));
    heap.insert(heap.end(), col.extra.begin(), col.extra.end());
  }
  check(heap.size() <= 0xFFFFFFFFu, ErrorCode::SchemaMismatch, "footer string heap exceeds 4 GiB");

  Bytes out(L.heap + heap.size(), 0);
  auto* p = out.data();
  store_le<std::uint32_t>(p + 0, kFormatVersion);
  store_le<std::uint32_t>(p + 4, static_cast<std::uint32_t>(kFooterHeaderSize));
  store_le<std::uint64_t>(p + 8, c.num_rows);
  store_le<std::uint32_t>(p + 16, num_columns);
  store_le<std::uint32_t>(p + 20, num_groups);
  store_le<std::uint64_t>(p + 24, num_pages);
  store_le<std::uint64_t>(p + 32, c.data_end);
  store_le<std::uint32_t>(p + 40, static_cast<std::uint32_t>(heap.size()));

  auto put_array = [&](std::uint64_t off, const auto& vec) {
    using T = typename std::decay_t<decltype(vec)>::value_type;
    for (std::size_t i = 0; i < vec.size(); ++i) store_le<T>(p + off + i * sizeof(T), vec[i]);
  };
  put_array(L.page_compression_types, c.page_compression_types);
  put_array(L.rows_per_page, c.rows_per_page);
  put_array(L.page_offsets, c.page_offsets);
  put_array(L.pages_per_group, c.pages_per_group);
  put_array(L.group_offsets, c.group_offsets);
  put_array(L.column_sizes, c.column_sizes);
  put_array(L.column_offsets, c.column_offsets);
  put_array(L.deletion_vec, c.deletion_vec);
  put_array(L.erased_vec, c.erased_vec);
  std::vector<std::uint64_t> sums = c.checksums.pages;
  sums.insert(sums.end(), c.checksums.groups.begin(), c.checksums.groups.end());
  sums.push_back(c.checksums.root);
  put_array(L.checksums, sums);

  for (std::uint32_t i = 0; i < num_columns; ++i) {
    const auto& col = cols[i];
    auto* e = p + L.schema + i * kSchemaEntrySize;
    store_le<std::uint32_t>(e + 0, name_at[i].first);
    store_le<std::uint16_t>(e + 4, static_cast<std::uint16_t>(name_at[i].second));
    e[6] = static_cast<std::uint8_t>(col.type);
    e[7] = static_cast<std::uint8_t>((col.nullable ? 1 : 0) | (col.sparse ? 2 : 0));
    e[8] = col.compliance_level;
    e[9] = col.quantization ? static_cast<std::uint8_t>(*col.quantization) : 0;
    e[10] = static_cast<std::uint8_t>(col.role);
    store_le<std::uint32_t>(e + 12, col.physical_position);
    store_le<std::uint32_t>(e + 16, extra_at[i].first);
    store_le<std::uint32_t>(e + 20, extra_at[i].second);
  }

  std::vector<std::pair<std::uint64_t, std::uint32_t>> index;
  index.reserve(num_columns);
  for (std::uint32_t i = 0; i < num_columns; ++i) index.emplace_back(c.name_hash(cols[i].name), i);
  std::sort(index.begin(), index.end());
  for (std::uint32_t i = 0; i < num_columns; ++i) {
    auto* e = p + L.name_index + i * kNameIndexEntrySize;
    store_le<std::uint64_t>(e, index[i].first);
    store_le<std::uint32_t>(e + 8, index[i].second);
  }
  if (!heap.empty()) std::memcpy(p + L.heap, heap.data(), heap.size());
  return out;
}

}  // namespace detail

namespace {

std::uint64_t align8(std::uint64_t v) { return (v + 7) & ~std::uint64_t{7}; }

}  // namespace

FooterLayout FooterLayout::compute(std::uint64_t num_rows, std::uint32_t num_columns, std::uint32_t num_groups,
                                   std::uint64_t num_pages) {
  FooterLayout L;
  L.num_rows = num_rows;
  L.num_columns = num_columns;
  L.num_groups = num_groups;
  L.num_pages = num_pages;
  const std::uint64_t chunks = std::uint64_t{num_groups} * num_columns;
  std::uint64_t off = kFooterHeaderSize;
  L.page_compression_types = off;
  off = align8(off + num_pages);
  L.rows_per_page = off;
  off = align8(off + 4 * num_pages);
  L.page_offsets = off;
  off += 8 * num_pages;
  L.pages_per_group = off;
  off = align8(off + 4 * std::uint64_t{num_groups});
  L.group_offsets = off;
  off += 8 * std::uint64_t{num_groups};
  L.column_sizes = off;
  off = align8(off + 4 * chunks);
  L.column_offsets = off;
  off = align8(off + 4 * chunks);
  L.deletion_vec = off;
  off += 8 * L.row_words();
  L.erased_vec = off;
  off += 8 * L.row_words();
  L.checksums = off;
  off += 8 * L.checksum_words();
  L.schema = off;
  off += kSchemaEntrySize * std::uint64_t{num_columns};
  L.name_index = off;
  off += kNameIndexEntrySize * std::uint64_t{num_columns};
  L.heap = off;
  return L;
}

void WriteOptions::validate() const {
  check(rows_per_page >= 1, ErrorCode::InvalidArgument, "rows_per_page must be >= 1");
  check(pages_per_group >= 1, ErrorCode::InvalidArgument, "pages_per_group must be >= 1");
  check(name_hash != nullptr, ErrorCode::InvalidArgument, "name_hash must be set");
  encoding.validate();
}

WriteResult write_file(const RecordBatch& batch, const WriteOptions& options) {
  return write_file(batch.schema, {batch}, options);
}

WriteResult write_file(const Schema& schema, const std::vector<RecordBatch>& batches, const WriteOptions& options) {
  options.validate();
  schema.validate();
  check(!schema.columns.empty(), ErrorCode::EmptyInput, "schema has no columns");

  RecordBatch all;
  all.schema = schema;
  for (const auto& c : schema.columns) all.columns.push_back(ColumnVector::empty(c.type));
  for (const auto& b : batches) {
    check(b.schema == schema, ErrorCode::SchemaMismatch, "batch schema differs from the file schema");
    b.validate();
    for (std::size_t i = 0; i < b.columns.size(); ++i) all.columns[i].append(b.columns[i]);
  }
  all.validate();
  const std::uint64_t num_rows = all.num_rows();
  check(num_rows > 0, ErrorCode::EmptyInput, "no rows to write");
  check(num_rows <= 0xFFFFFFFFull * options.rows_per_page, ErrorCode::InvalidArgument, "too many rows");

  auto reordered = layout::reorder_rows(all, options.row_order);
  WriteResult result;
  result.stats.row_permutation = std::move(reordered.permutation);

  auto stored = detail::build_stored_columns(reordered.batch);
  const auto logical_order = layout::reorder_columns(schema, options.column_order);
  {
    // Physical position: logical order, with the parts of a split column adjacent.
    std::vector<std::vector<std::size_t>> parts(schema.columns.size());
    for (std::size_t i = 0; i < stored.size(); ++i) parts[stored[i].logical_index].push_back(i);
    std::uint32_t pos = 0;
    for (auto li : logical_order)
      for (auto si : parts[li]) stored[si].physical_position = pos++;
  }
  {
    std::vector<std::string_view> names;
    for (const auto& s : stored) names.push_back(s.name);
    std::sort(names.begin(), names.end());
    check(std::adjacent_find(names.begin(), names.end()) == names.end(), ErrorCode::SchemaMismatch,
          "stored column names collide (a split column's .hi/.lo part matches another column)");
  }
  std::vector<std::uint32_t> by_position(stored.size());
  for (std::uint32_t i = 0; i < stored.size(); ++i) by_position[stored[i].physical_position] = i;

  const std::uint64_t rows_per_group = std::uint64_t{options.rows_per_page} * options.pages_per_group;
  const auto num_groups = static_cast<std::uint32_t>((num_rows + rows_per_group - 1) / rows_per_group);
  const auto num_columns = static_cast<std::uint32_t>(stored.size());

  detail::FooterContent fc;
  fc.num_rows = num_rows;
  fc.columns = &stored;
  fc.name_hash = options.name_hash;
  fc.column_sizes.assign(std::size_t{num_groups} * num_columns, 0);
  fc.column_offsets.assign(std::size_t{num_groups} * num_columns, 0);

  result.stats.columns.resize(stored.size());
  for (std::size_t i = 0; i < stored.size(); ++i) result.stats.columns[i].name = stored[i].name;

  Bytes file;
  std::vector<std::pair<std::size_t, std::size_t>> page_spans;  // offset, size
  for (std::uint32_t g = 0; g < num_groups; ++g) {
    const std::uint64_t g_begin = g * rows_per_group;
    const std::uint64_t g_end = std::min<std::uint64_t>(num_rows, g_begin + rows_per_group);
    const auto ppc = static_cast<std::uint32_t>((g_end - g_begin + options.rows_per_page - 1) / options.rows_per_page);
    fc.group_offsets.push_back(file.size());
    fc.pages_per_group.push_back(ppc * num_columns);
    for (auto ci : by_position) {
      const auto& col = stored[ci];
      const auto info = col.info();
      const std::size_t chunk_start = file.size();
      for (std::uint32_t k = 0; k < ppc; ++k) {
        const std::uint64_t r0 = g_begin + std::uint64_t{k} * options.rows_per_page;
        const std::uint64_t r1 = std::min<std::uint64_t>(g_end, r0 + options.rows_per_page);
        const auto body = detail::encode_page_body(col.storage.slice(r0, r1), info, options);
        check(body.bytes.size() <= 0xFFFFFFFFu - kPageHeaderSize, ErrorCode::InvalidArgument, "page too large");
        const std::size_t page_start = file.size();
        ByteWriter w(file);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(body.bytes.size()));
        w.put_bytes(body.bytes);
        page_spans.emplace_back(page_start, file.size() - page_start);
        fc.page_offsets.push_back(page_start);
        fc.rows_per_page.push_back(static_cast<std::uint32_t>(r1 - r0));
        fc.page_compression_types.push_back(body.compression_type);
        auto& cs = result.stats.columns[ci];
        ++cs.pages;
        const std::string scheme = body.compression_type == kSparseDeltaPageTag
                                       ? "SparseDelta"
                                       : std::string(encoding::scheme_name(
                                             static_cast<encoding::SchemeId>(body.compression_type)));
        ++cs.page_schemes[scheme];
      }
      const auto chunk_size = file.size() - chunk_start;
      const auto rel = chunk_start - fc.group_offsets.back();
      check(chunk_size <= 0xFFFFFFFFu && rel <= 0xFFFFFFFFu, ErrorCode::InvalidArgument,
            "row group exceeds 4 GiB; lower rows_per_page or pages_per_group");
      fc.column_sizes[std::size_t{g} * num_columns + ci] = static_cast<std::uint32_t>(chunk_size);
      fc.column_offsets[std::size_t{g} * num_columns + ci] = static_cast<std::uint32_t>(rel);
      result.stats.columns[ci].bytes += chunk_size;
    }
  }
  fc.data_end = file.size();
  file.resize(align8(file.size()), 0);

  std::vector<ByteSpan> pages;
  pages.reserve(page_spans.size());
  for (auto [off, size] : page_spans) pages.emplace_back(file.data() + off, size);
  fc.checksums = compute_checksum_tree(pages, fc.pages_per_group);
  const auto words = (num_rows + 63) / 64;
  fc.deletion_vec.assign(words, 0);
  fc.erased_vec.assign(words, 0);

  const Bytes footer = detail::build_footer(fc);
  check(footer.size() <= 0xFFFFFFFFu, ErrorCode::InvalidArgument, "footer exceeds 4 GiB");
  file.insert(file.end(), footer.begin(), footer.end());
  ByteWriter tail(file);
  tail.put<std::uint32_t>(static_cast<std::uint32_t>(footer.size()));
  tail.put_bytes(ByteSpan(reinterpret_cast<const std::uint8_t*>(kMagic), 4));

  result.stats.file_bytes = file.size();
  result.stats.footer_bytes = footer.size();
  result.stats.num_rows = num_rows;
  result.stats.num_groups = num_groups;
  result.stats.num_pages = pages.size();
  result.bytes = std::move(file);
  return result;
}

}  // namespace bullion::format
