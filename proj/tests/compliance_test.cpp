#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "batch_util.hpp"
#include "bullion/bitpack.hpp"
#include "bullion/compliance.hpp"
#include "bullion/error.hpp"

namespace bullion::compliance {
namespace {

using encoding::EncodedBlock;
using encoding::SchemeId;
using testing::Rng;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;  // sentinel: nothing thrown
}

Values ints(std::vector<std::int64_t> v) { return Values(std::move(v)); }
const std::vector<std::int64_t>& as_ints(const Values& v) { return v.as<std::int64_t>(); }

std::vector<std::uint32_t> random_subset(Rng& rng, std::size_t n) {
  std::vector<std::uint32_t> out;
  const auto p = testing::uniform_int(rng, 0, 100);
  for (std::uint32_t i = 0; i < n; ++i)
    if (testing::uniform_int(rng, 0, 99) < p) out.push_back(i);
  return out;
}

// --- block level -------------------------------------------------------------

TEST(MaskRle, WalkthroughExample) {
  auto block = encoding::encode_rle(ints({2, 2, 2, 6, 6, 6, 6, 6, 3}));
  const auto size_before = block.serialized_size();
  const std::uint32_t third_six = 5;
  auto bits = mask_rle(block, std::span(&third_six, 1));
  EXPECT_EQ(rle_runs(block), (std::vector<std::pair<std::int64_t, std::int64_t>>{{2, 3}, {6, 4}, {3, 1}}));
  std::string bit_string;
  for (bool b : bits) bit_string += b ? '1' : '0';
  EXPECT_EQ(bit_string, "000001000");
  EXPECT_LE(block.serialized_size(), size_before);

  auto decoded = decode_with_mask(block, bits);
  std::string shown;
  for (std::size_t i = 0; i < decoded.masked.size(); ++i) {
    if (i) shown += ',';
    shown += decoded.masked[i] ? "MASK" : std::to_string(as_ints(decoded.values)[i]);
  }
  EXPECT_EQ(shown, "2,2,2,6,6,MASK,6,6,3");
}

TEST(MaskRle, RemovingSingletonRunMerges) {
  auto block = encoding::encode_rle(ints({6, 6, 0, 6, 6, 6}));
  ASSERT_EQ(rle_runs(block).size(), 3u);
  const auto before = block.serialized_size();
  const std::uint32_t at = 2;
  mask_rle(block, std::span(&at, 1));
  EXPECT_EQ(rle_runs(block), (std::vector<std::pair<std::int64_t, std::int64_t>>{{6, 5}}));
  EXPECT_LT(block.serialized_size(), before);
}

TEST(MaskRle, RandomSubsetsNeverGrowAndKeepSurvivors) {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::int64_t> v;
    const auto runs = testing::uniform_int(rng, 1, 40);
    for (int r = 0; r < runs; ++r) v.insert(v.end(), testing::uniform_int(rng, 1, 9), testing::uniform_int(rng, -5, 5));
    encoding::EncodingConfig cfg;
    cfg.maskable_only = true;
    auto block = encoding::encode_rle(ints(v), cfg);
    const auto before = block.serialized_size();
    const auto del = random_subset(rng, v.size());
    auto bits = mask_rle(block, del, cfg);
    EXPECT_LE(block.serialized_size(), before);
    auto out = decode_with_mask(block, bits);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!bits[i]) {
        EXPECT_EQ(as_ints(out.values)[i], v[i]);
      }
    }
    // Physically gone: only survivors remain in the encoded runs.
    EXPECT_EQ(block.value_count, v.size() - del.size());
  }
}

TEST(MaskBitpacked, Examples) {
  std::vector<std::uint64_t> v{3, 7, 5};
  auto block = encoding::encode_bitpack(v);
  ASSERT_EQ(encoding::bitpack_view(block).width, 3);
  const std::uint32_t one = 1;
  mask_bitpacked(block, std::span(&one, 1));
  EXPECT_EQ(as_ints(encoding::decode(block)), (std::vector<std::int64_t>{3, 0, 5}));

  auto all = encoding::encode_bitpack(v);
  const std::vector<std::uint32_t> every{0, 1, 2};
  mask_bitpacked(all, every);
  EXPECT_TRUE(std::all_of(all.payload.begin() + 1, all.payload.end(), [](auto b) { return b == 0; }));
}

TEST(MaskVarint, Examples) {
  std::vector<std::uint64_t> v{300};
  auto block = encoding::encode_varint(v);
  EXPECT_EQ(block.payload, (Bytes{0xAC, 0x02}));
  const std::uint32_t zero = 0;
  mask_varint(block, std::span(&zero, 1));
  EXPECT_EQ(block.payload, (Bytes{0x80, 0x00}));
  EXPECT_EQ(as_ints(encoding::decode(block)), (std::vector<std::int64_t>{0}));

  std::vector<std::uint64_t> z{0};
  auto zb = encoding::encode_varint(z);
  mask_varint(zb, std::span(&zero, 1));
  EXPECT_EQ(zb.payload, (Bytes{0x00}));

  std::vector<std::uint64_t> three{1, 300, 2};
  auto tb = encoding::encode_varint(three);
  const std::uint32_t mid = 1;
  mask_varint(tb, std::span(&mid, 1));
  EXPECT_EQ(as_ints(encoding::decode(tb)), (std::vector<std::int64_t>{1, 0, 2}));
  EXPECT_EQ(tb.payload.size(), 4u);
}

TEST(MaskForDelta, Examples) {
  std::vector<std::int64_t> v{100, 102, 101, 104};
  auto block = encoding::encode_for_delta(v);
  EXPECT_EQ(encoding::for_delta_view(block).base, 100);
  const std::uint32_t three = 3;
  mask_for_delta(block, std::span(&three, 1));
  EXPECT_EQ(as_ints(encoding::decode(block)), (std::vector<std::int64_t>{100, 102, 101, 100}));

  auto again = encoding::encode_for_delta(v);
  const auto bytes = again.payload;
  const std::uint32_t zero = 0;
  mask_for_delta(again, std::span(&zero, 1));  // offset already zero
  EXPECT_EQ(again.payload, bytes);
}

TEST(MaskDictionary, Examples) {
  encoding::EncodingConfig cfg;
  cfg.candidate_set = {SchemeId::Trivial};
  auto block = encoding::encode_with(SchemeId::Dictionary, Values(std::vector<std::string>{"a", "b", "a"}), cfg);
  EXPECT_EQ(as_ints(encoding::decode(block.children[0])), (std::vector<std::int64_t>{1, 2, 1}));
  const auto dict_bytes = block.payload;
  const std::uint32_t zero = 0;
  mask_dictionary(block, std::span(&zero, 1));
  EXPECT_EQ(as_ints(encoding::decode(block.children[0])), (std::vector<std::int64_t>{0, 2, 1}));
  EXPECT_EQ(block.payload, dict_bytes);
  EXPECT_EQ(encoding::decode(block).as<std::string>(), (std::vector<std::string>{"", "b", "a"}));
}

TEST(MaskDictionary, RleCodesCompact) {
  std::vector<std::string> v;
  for (int i = 0; i < 60; ++i) v.push_back(i < 25 ? "north" : (i < 40 ? "south" : "east"));
  encoding::EncodingConfig cfg;
  cfg.maskable_only = true;
  cfg.candidate_set = {SchemeId::Trivial, SchemeId::RLE};
  auto block = encoding::encode_with(SchemeId::Dictionary, Values(v), cfg);
  ASSERT_EQ(block.children[0].scheme, SchemeId::RLE);
  const auto dict_bytes = block.payload;
  const auto before = block.serialized_size();
  const std::vector<std::uint32_t> del{0, 24, 25, 59};
  EXPECT_TRUE(mask_block(block, del));
  EXPECT_EQ(block.payload, dict_bytes);
  EXPECT_LE(block.serialized_size(), before);
  std::vector<bool> bits(v.size());
  for (auto d : del) bits[d] = true;
  auto out = decode_with_mask(block, bits);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!bits[i]) {
      EXPECT_EQ(out.values.as<std::string>()[i], v[i]);
    }
  }
}

TEST(MaskBlock, NonMaskableSchemesRejected) {
  auto constant = encoding::encode_with(SchemeId::Constant, ints({4, 4, 4}));
  const std::uint32_t zero = 0;
  EXPECT_EQ(code_of([&] { mask_block(constant, std::span(&zero, 1)); }), ErrorCode::UnsupportedEncoding);
  auto fbw = encoding::encode_bitpack(std::vector<std::uint64_t>{1, 2});
  const std::uint32_t bad = 2;
  EXPECT_EQ(code_of([&] { mask_block(fbw, std::span(&bad, 1)); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { mask_rle(fbw, {}); }), ErrorCode::InvalidArgument);
}

/// Decodes a positional block and checks that every masked slot holds the
/// mask value and every survivor is unchanged.
void expect_masked(const EncodedBlock& block, const Values& original, const std::vector<std::uint32_t>& del,
                   const Values& mask_value) {
  const auto out = encoding::decode(block);
  ASSERT_EQ(out.size(), original.size());
  std::set<std::uint32_t> gone(del.begin(), del.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (gone.count(static_cast<std::uint32_t>(i)))
      EXPECT_TRUE(out.element_equal(i, mask_value, 0));
    else
      EXPECT_TRUE(out.element_equal(i, original, i));
  }
}

TEST(MaskProperties, PositionalSchemesEraseOnlyDeletedSlots) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 300));
    std::vector<std::int64_t> v(n);
    const auto hi = testing::uniform_int(rng, 1, 1 << 20);
    for (auto& x : v) x = testing::uniform_int(rng, 0, hi);
    const auto del = random_subset(rng, n);
    std::vector<std::uint64_t> u(v.begin(), v.end());

    auto fbw = encoding::encode_bitpack(u);
    auto fbw_size = fbw.serialized_size();
    mask_bitpacked(fbw, del);
    EXPECT_EQ(fbw.serialized_size(), fbw_size);
    expect_masked(fbw, ints(v), del, ints({0}));

    auto var = encoding::encode_varint(u);
    auto var_size = var.serialized_size();
    mask_varint(var, del);
    EXPECT_EQ(var.serialized_size(), var_size);
    expect_masked(var, ints(v), del, ints({0}));

    auto shifted = v;
    const auto base = testing::uniform_int(rng, -1'000'000, 1'000'000);
    for (auto& x : shifted) x += base;
    auto fr = encoding::encode_for_delta(shifted);
    mask_for_delta(fr, del);
    expect_masked(fr, ints(shifted), del, ints({encoding::for_delta_view(fr).base}));

    auto zz = encoding::encode_zigzag(shifted, {.max_recursion_depth = 1, .maskable_only = true});
    mask_block(zz, del);
    expect_masked(zz, ints(shifted), del, ints({0}));
  }
}

TEST(MaskProperties, NullableKeepsSurvivors) {
  Rng rng(4);
  encoding::EncodingConfig cfg;
  cfg.maskable_only = true;
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 200));
    Values v = testing::random_values(rng, ValueKind::Int64, n);
    for (auto& x : v.as<std::int64_t>()) x %= 4;  // runs appear often
    v = testing::with_random_nulls(rng, std::move(v));
    if (!v.has_nulls()) continue;
    auto block = encoding::encode_with(SchemeId::Nullable, v, cfg);
    const auto before = block.serialized_size();
    const auto del = random_subset(rng, n);
    mask_block(block, del, cfg);
    EXPECT_LE(block.serialized_size(), before);
    const auto out = encoding::decode(block);
    ASSERT_EQ(out.size(), n);
    std::set<std::uint32_t> gone(del.begin(), del.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (gone.count(static_cast<std::uint32_t>(i))) continue;
      EXPECT_EQ(out.is_null(i), v.is_null(i));
      if (!v.is_null(i)) {
        EXPECT_TRUE(out.element_equal(i, v, i));
      }
    }
  }
}

// --- checksums -----------------------------------------------------------------

TEST(Checksums, IncrementalMatchesBatch) {
  std::vector<Bytes> pages{{1, 2, 3}, {4, 5}, {6}, {7, 8, 9, 10}};
  const std::vector<std::uint32_t> groups{2, 2};
  auto spans = [&] { return std::vector<ByteSpan>(pages.begin(), pages.end()); };
  auto tree = format::compute_checksum_tree(spans(), groups);
  const auto before = tree;

  pages[2] = {42, 42};
  ChecksumReadTrace trace;
  update_checksums_incremental(tree, 2, pages[2], &trace);
  EXPECT_EQ(tree, format::compute_checksum_tree(spans(), groups));
  EXPECT_NE(tree.pages[2], before.pages[2]);
  EXPECT_NE(tree.groups[1], before.groups[1]);
  EXPECT_NE(tree.root, before.root);
  EXPECT_EQ(tree.pages[0], before.pages[0]);
  EXPECT_EQ(tree.pages[1], before.pages[1]);
  EXPECT_EQ(tree.pages[3], before.pages[3]);
  EXPECT_EQ(tree.groups[0], before.groups[0]);
  EXPECT_EQ(trace.leaf_hashes_read, (std::vector<std::uint64_t>{3}));
  EXPECT_EQ(trace.group_hashes_read, (std::vector<std::uint64_t>{0}));
  EXPECT_EQ(trace.page_bytes_hashed, 2u);

  auto same = tree;
  update_checksums_incremental(same, 1, pages[1]);
  EXPECT_EQ(same, tree);
}

TEST(Checksums, RandomUpdateSequences) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint32_t> groups(static_cast<std::size_t>(testing::uniform_int(rng, 1, 6)));
    std::size_t total = 0;
    for (auto& g : groups) total += g = static_cast<std::uint32_t>(testing::uniform_int(rng, 1, 5));
    std::vector<Bytes> pages(total);
    for (auto& p : pages) p = testing::random_bytes(rng, static_cast<std::size_t>(testing::uniform_int(rng, 0, 64)));
    auto tree = format::compute_checksum_tree(std::vector<ByteSpan>(pages.begin(), pages.end()), groups);
    const auto updates = testing::uniform_int(rng, 1, 8);
    for (int u = 0; u < updates; ++u) {
      const auto p = static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<std::int64_t>(total) - 1));
      pages[p] = testing::random_bytes(rng, static_cast<std::size_t>(testing::uniform_int(rng, 0, 64)));
      update_checksums_incremental(tree, p, pages[p]);
    }
    EXPECT_EQ(tree, format::compute_checksum_tree(std::vector<ByteSpan>(pages.begin(), pages.end()), groups));
  }
}

// --- file level --------------------------------------------------------------------

RecordBatch compliance_batch(std::size_t rows, std::uint8_t level) {
  RecordBatch b;
  b.schema.columns = {{"id", LogicalType::Int64, false, std::nullopt, level},
                      {"city", LogicalType::String, false, std::nullopt, level},
                      {"score", LogicalType::Float64, true, std::nullopt, level},
                      {"hist", LogicalType::ListInt64, false, std::nullopt, level}};
  std::vector<std::int64_t> id(rows);
  std::vector<std::string> city(rows);
  std::vector<double> score(rows);
  std::vector<std::vector<std::int64_t>> hist(rows);
  const char* cities[] = {"oslo", "lima", "pune"};
  for (std::size_t r = 0; r < rows; ++r) {
    id[r] = static_cast<std::int64_t>(r * 3 + 1000);
    city[r] = cities[(r / 7) % 3];
    score[r] = static_cast<double>(r % 11) / 4.0;
    hist[r].assign(r % 4, static_cast<std::int64_t>(r));
  }
  b.columns = {ColumnVector::scalar(LogicalType::Int64, Values(id)),
               ColumnVector::scalar(LogicalType::String, Values(city)),
               ColumnVector::scalar(LogicalType::Float64, Values(score)), ColumnVector::int_lists(hist)};
  b.columns[2].values.validity.assign(rows, 1);
  for (std::size_t r = 0; r < rows; r += 9) b.columns[2].values.validity[r] = 0;
  return b;
}

std::shared_ptr<io::MemoryFile> written(const RecordBatch& batch, std::uint32_t rows_per_page = 16,
                                        std::uint32_t pages_per_group = 2) {
  format::WriteOptions o;
  o.rows_per_page = rows_per_page;
  o.pages_per_group = pages_per_group;
  return std::make_shared<io::MemoryFile>(format::write_file(batch, o).bytes);
}

TEST(DeleteRows, LevelZeroNeedsRewrite) {
  auto file = written(compliance_batch(40, 2));
  const std::vector<std::uint64_t> rows{1};
  EXPECT_EQ(code_of([&] { delete_rows(*file, rows, Level::Plain); }), ErrorCode::RewriteRequired);
  EXPECT_EQ(code_of([&] { delete_rows(*file, std::vector<std::uint64_t>{40}, Level::DeletionVector); }),
            ErrorCode::RowOutOfRange);
}

TEST(DeleteRows, NothingToDelete) {
  auto file = written(compliance_batch(40, 2));
  const auto before = file->data();
  auto stats = delete_rows(*file, std::vector<std::uint64_t>{}, Level::Erase);
  EXPECT_EQ(stats.rows_deleted, 0u);
  EXPECT_EQ(stats.pages_rewritten, 0u);
  EXPECT_EQ(stats.bytes_rewritten, 0u);
  EXPECT_EQ(file->data(), before);
}

TEST(DeleteRows, LevelOneHidesRowsWithoutTouchingPages) {
  const auto batch = compliance_batch(50, 1);
  auto file = written(batch);
  const auto before = file->data();
  const auto footer_before = format::FooterView::open(before).footer_offset();
  const std::vector<std::uint64_t> rows{3, 17, 18, 49};
  auto stats = delete_rows(*file, rows, Level::DeletionVector);
  EXPECT_EQ(stats.rows_deleted, 4u);
  EXPECT_EQ(stats.pages_rewritten, 0u);
  EXPECT_TRUE(std::equal(before.begin(), before.begin() + static_cast<std::ptrdiff_t>(footer_before),
                         file->data().begin()));
  EXPECT_TRUE(format::verify_file(*file).ok);

  format::Reader reader(file);
  auto scan = reader.scan();
  EXPECT_EQ(scan.row_ids.size(), 46u);
  for (auto r : rows) EXPECT_EQ(std::count(scan.row_ids.begin(), scan.row_ids.end(), r), 0);
  std::vector<std::size_t> keep(scan.row_ids.begin(), scan.row_ids.end());
  for (std::size_t c = 0; c < batch.columns.size(); ++c) EXPECT_EQ(scan.columns[c].data, batch.columns[c].gather(keep));

  auto again = delete_rows(*file, rows, Level::DeletionVector);
  EXPECT_EQ(again.rows_deleted, 0u);
  EXPECT_EQ(again.bytes_rewritten, 0u);
}

/// Reads every page of level-2 columns back and checks deleted rows hold no original payload.
void expect_physically_erased(io::MemoryFile& file, const RecordBatch& batch) {
  format::Reader reader(std::make_shared<io::MemoryFile>(file.data()));
  format::ReadOptions ro;
  ro.include_deleted = true;
  auto all = reader.scan(ro);
  const auto& f = reader.footer();
  for (std::size_t c = 0; c < batch.columns.size(); ++c) {
    const auto& col = all.columns[c];
    for (std::uint64_t r = 0; r < f.num_rows(); ++r) {
      if (f.is_erased(r)) {
        EXPECT_EQ(col.states[r], format::CellState::Masked);
      } else {
        EXPECT_NE(col.states[r], format::CellState::Masked);
        EXPECT_TRUE(col.data.gather({r}) == batch.columns[c].gather({r})) << "row " << r << " col " << c;
      }
    }
  }
  // No erased id survives anywhere in the raw page bytes of the id column.
  const auto idcol = format::lookup_column(f, "id");
  for (std::uint64_t r = 0; r < f.num_rows(); ++r) {
    if (!f.is_erased(r)) continue;
    const auto loc = format::locate_row(f, r);
    const auto p = f.page_ordinal(loc.group, idcol, loc.page);
    const auto page = reader.read_page(p);
    std::vector<bool> erased(f.rows_per_page(p));
    for (std::uint32_t i = 0; i < erased.size(); ++i) erased[i] = f.is_erased(r - loc.offset + i);
    auto values = format::decode_page_body(format::page_body(page), f.column(idcol), f.rows_per_page(p), erased);
    const auto original = batch.columns[0].values.as<std::int64_t>()[r];
    // A frame-of-reference slot collapses to the page base, which may equal the erased value.
    const auto block = EncodedBlock::deserialize(format::page_body(page), ValueKind::Int64);
    if (block.scheme == SchemeId::ForDelta && encoding::for_delta_view(block).base == original) continue;
    EXPECT_NE(values.values.as<std::int64_t>()[loc.offset], original);
  }
}

TEST(DeleteRows, LevelTwoMasksPagesAndKeepsSurvivors) {
  const auto batch = compliance_batch(96, 2);
  auto file = written(batch);
  const auto size = file->size();
  const std::vector<std::uint64_t> rows{0, 5, 6, 7, 40, 95};
  auto stats = delete_rows(*file, rows, Level::Erase);
  EXPECT_EQ(stats.rows_deleted, rows.size());
  EXPECT_GT(stats.pages_rewritten, 0u);
  EXPECT_LE(stats.bytes_rewritten, stats.file_bytes);
  EXPECT_EQ(file->size(), size);
  EXPECT_TRUE(format::verify_file(*file).ok);
  expect_physically_erased(*file, batch);

  format::Reader reader(file);
  format::ReadOptions as_null;
  as_null.include_deleted = true;
  as_null.mask_policy = format::MaskPolicy::AsNull;
  auto p = reader.project({"score"}, as_null);
  for (auto r : rows) EXPECT_TRUE(p.columns[0].data.values.is_null(r));

  // Second round, overlapping the first: already-erased rows are skipped.
  const std::vector<std::uint64_t> more{5, 6, 8, 9, 41};
  auto stats2 = delete_rows(*file, more, Level::Erase);
  EXPECT_EQ(stats2.rows_deleted, 3u);
  EXPECT_TRUE(format::verify_file(*file).ok);
  expect_physically_erased(*file, batch);

  auto stats3 = delete_rows(*file, more, Level::Erase);
  EXPECT_EQ(stats3.rows_deleted, 0u);
  EXPECT_EQ(stats3.bytes_rewritten, 0u);
}

TEST(DeleteRows, LevelOneThenLevelTwoErases) {
  const auto batch = compliance_batch(64, 2);
  auto file = written(batch);
  const std::vector<std::uint64_t> rows{10, 11};
  delete_rows(*file, rows, Level::DeletionVector);
  auto stats = delete_rows(*file, rows, Level::Erase);
  EXPECT_EQ(stats.rows_deleted, 2u);
  EXPECT_GT(stats.pages_rewritten, 0u);
  expect_physically_erased(*file, batch);
}

TEST(DeleteRows, RandomSchemasSurviveRepeatedErasure) {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    auto schema = testing::mixed_schema(rng);
    for (auto& c : schema.columns)
      if (testing::uniform_int(rng, 0, 1)) c.compliance_level = 2;
    const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 200));
    auto batch = testing::random_batch(rng, schema, n);
    auto file = written(batch, static_cast<std::uint32_t>(testing::uniform_int(rng, 1, 40)),
                        static_cast<std::uint32_t>(testing::uniform_int(rng, 1, 3)));
    std::set<std::uint64_t> gone;
    for (int round = 0; round < 3; ++round) {
      std::vector<std::uint64_t> rows;
      for (std::uint64_t r = 0; r < n; ++r)
        if (testing::uniform_int(rng, 0, 9) == 0) rows.push_back(r);
      const auto level = testing::uniform_int(rng, 0, 2) ? Level::Erase : Level::DeletionVector;
      auto stats = delete_rows(*file, rows, level);
      EXPECT_LE(stats.bytes_rewritten, stats.file_bytes);
      gone.insert(rows.begin(), rows.end());
      ASSERT_TRUE(format::verify_file(*file).ok) << "trial " << trial;
      format::Reader reader(file);
      auto scan = reader.scan();
      std::vector<std::size_t> keep;
      for (std::uint64_t r = 0; r < n; ++r)
        if (!gone.count(r)) keep.push_back(r);
      ASSERT_EQ(scan.row_ids.size(), keep.size());
      for (std::size_t c = 0; c < schema.columns.size(); ++c)
        EXPECT_EQ(scan.columns[c].data, batch.columns[c].gather(keep)) << "trial " << trial << " col " << c;
    }
  }
}

TEST(DeleteRows, SparseColumnsFallBackToLevelOne) {
  RecordBatch b;
  b.schema.columns = {{"seq", LogicalType::ListInt64, false, std::nullopt, 2, true}};
  std::vector<std::vector<std::int64_t>> rows;
  for (int r = 0; r < 20; ++r) rows.push_back({r, r + 1, r + 2});
  b.columns = {ColumnVector::int_lists(rows)};
  auto file = written(b, 5);
  auto stats = delete_rows(*file, std::vector<std::uint64_t>{2}, Level::Erase);
  ASSERT_EQ(stats.warnings.size(), 1u);
  EXPECT_NE(stats.warnings[0].find("UnsupportedEncoding"), std::string::npos);
  EXPECT_EQ(stats.pages_rewritten, 0u);
  format::Reader reader(file);
  EXPECT_EQ(reader.scan().row_ids.size(), 19u);
}

TEST(DeleteRows, ClusteredDeletionTouchesFewBytes) {
  RecordBatch b;
  b.schema.columns = {{"a", LogicalType::Int64, false, std::nullopt, 2},
                      {"b", LogicalType::Float64, false, std::nullopt, 2}};
  const std::size_t rows = 100 * 256;
  std::vector<std::int64_t> a(rows);
  std::vector<double> d(rows);
  Rng rng(1);
  for (std::size_t i = 0; i < rows; ++i) {
    a[i] = testing::uniform_int(rng, 0, 1 << 30);
    d[i] = static_cast<double>(a[i]) * 0.5;
  }
  b.columns = {ColumnVector::scalar(LogicalType::Int64, Values(a)), ColumnVector::scalar(LogicalType::Float64, Values(d))};
  format::WriteOptions o;
  o.rows_per_page = 256;
  o.pages_per_group = 10;
  o.encoding.candidate_set = {SchemeId::Trivial, SchemeId::FixedBitWidth};
  auto file = std::make_shared<io::MemoryFile>(format::write_file(b, o).bytes);
  std::vector<std::uint64_t> del;
  for (std::uint64_t r = 256 * 40; r < 256 * 42; ++r) del.push_back(r);  // 2% of rows, pages 40 and 41
  auto stats = delete_rows(*file, del, Level::Erase);
  EXPECT_EQ(stats.pages_rewritten, 4u);
  EXPECT_LE(static_cast<double>(stats.bytes_rewritten) / static_cast<double>(stats.file_bytes), 0.04);
  EXPECT_TRUE(format::verify_file(*file).ok);
}

TEST(DeleteRows, AppendedFooterIsReadable) {
  const auto batch = compliance_batch(48, 2);
  auto file = written(batch);
  const auto size = file->size();
  DeleteOptions opts;
  opts.footer_update = FooterUpdate::Append;
  const std::vector<std::uint64_t> rows{4, 30};
  delete_rows(*file, rows, Level::Erase, opts);
  EXPECT_GT(file->size(), size);
  EXPECT_TRUE(format::verify_file(*file).ok);
  format::Reader reader(file);
  EXPECT_EQ(reader.scan().row_ids.size(), 46u);
  expect_physically_erased(*file, batch);
}

TEST(DeleteRows, ExclusiveAccess) {
  const auto path = (std::filesystem::temp_directory_path() / "bullion_compliance_lock.bln").string();
  io::write_whole_file(path, written(compliance_batch(32, 2))->data());
  {
    io::PosixFile reader(path, io::PosixFile::Mode::Read);
    EXPECT_EQ(code_of([&] { delete_rows(reader, std::vector<std::uint64_t>{1}, Level::DeletionVector); }),
              ErrorCode::ExclusiveAccessRequired);
    io::PosixFile holder(path, io::PosixFile::Mode::ReadWrite);
    EXPECT_EQ(code_of([&] { delete_rows(path, std::vector<std::uint64_t>{1}, Level::DeletionVector); }),
              ErrorCode::ExclusiveAccessRequired);
  }
  auto stats = delete_rows(path, std::vector<std::uint64_t>{1, 2}, Level::Erase);
  EXPECT_EQ(stats.rows_deleted, 2u);
  io::PosixFile check_file(path, io::PosixFile::Mode::Read);
  EXPECT_TRUE(format::verify_file(check_file).ok);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace bullion::compliance
