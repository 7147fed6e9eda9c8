#include <gtest/gtest.h>

#include <bit>
#include <cstdlib>
#include <fstream>
#include <xxhash.h>

#include "batch_util.hpp"
#include "bullion/error.hpp"
#include "bullion/format.hpp"
#include "bullion/io.hpp"

namespace bullion::format {
namespace {

using testing::Rng;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;  // sentinel: nothing thrown
}

RecordBatch int_batch(const std::vector<std::string>& names, std::size_t rows, std::int64_t seed = 0) {
  RecordBatch b;
  for (std::size_t c = 0; c < names.size(); ++c) {
    b.schema.columns.push_back({names[c], LogicalType::Int64, false});
    std::vector<std::int64_t> v(rows);
    for (std::size_t r = 0; r < rows; ++r) v[r] = static_cast<std::int64_t>((r * 7 + c * 13 + seed) % 97);
    b.columns.push_back(ColumnVector::scalar(LogicalType::Int64, Values(std::move(v))));
  }
  return b;
}

std::shared_ptr<io::MemoryFile> as_file(Bytes bytes) { return std::make_shared<io::MemoryFile>(std::move(bytes)); }

void expect_roundtrip(const RecordBatch& batch, const Bytes& file) {
  Reader reader(as_file(file));
  auto all = reader.scan();
  ASSERT_EQ(all.columns.size(), batch.columns.size());
  for (std::size_t c = 0; c < batch.columns.size(); ++c) {
    EXPECT_EQ(all.columns[c].name, batch.schema.columns[c].name);
    EXPECT_EQ(all.columns[c].data, batch.columns[c]) << batch.schema.columns[c].name;
  }
}

TEST(Write, SinglePageFile) {
  auto batch = int_batch({"x"}, 10);
  WriteOptions o;
  o.rows_per_page = 10;
  auto w = write_file(batch, o);
  auto f = FooterView::open(w.bytes);
  EXPECT_EQ(f.num_rows(), 10u);
  EXPECT_EQ(f.num_pages(), 1u);
  EXPECT_EQ(f.num_groups(), 1u);
  EXPECT_EQ(f.page_offset(0), 0u);
  EXPECT_EQ(std::string(w.bytes.end() - 4, w.bytes.end()), "BULN");
  expect_roundtrip(batch, w.bytes);

  // Degenerate tree: leaf, one group node over it, root over the group.
  const auto page = ByteSpan(w.bytes).subspan(0, f.page_size(0));
  const auto leaf = XXH3_64bits(page.data(), page.size());
  const auto group = XXH3_64bits(&leaf, 8);
  EXPECT_EQ(f.page_checksum(0), leaf);
  EXPECT_EQ(f.group_checksum(0), group);
  EXPECT_EQ(f.root_checksum(), XXH3_64bits(&group, 8));
}

TEST(Write, ChunkLayoutAcrossGroups) {
  auto batch = int_batch({"a", "b", "c"}, 40);
  WriteOptions o;
  o.rows_per_page = 10;
  o.pages_per_group = 2;
  auto w = write_file(batch, o);
  auto f = FooterView::open(w.bytes);
  ASSERT_EQ(f.num_groups(), 2u);
  EXPECT_EQ(f.num_pages(), 12u);
  for (std::uint32_t g = 0; g < 2; ++g) {
    EXPECT_EQ(f.pages_per_group(g), 6u);
    EXPECT_EQ(f.column_offset(g, 0), 0u);
    std::uint64_t expect = 0;
    for (std::uint32_t c = 0; c < 3; ++c) {
      EXPECT_EQ(f.column_offset(g, c), expect);
      // The chunk is exactly its two pages.
      const auto p0 = f.page_ordinal(g, c, 0);
      EXPECT_EQ(f.group_offset(g) + f.column_offset(g, c), f.page_offset(p0));
      EXPECT_EQ(f.column_size(g, c), f.page_size(p0) + f.page_size(p0 + 1));
      expect += f.column_size(g, c);
    }
  }
  EXPECT_EQ(f.group_offset(1), f.group_offset(0) + f.column_size(0, 0) + f.column_size(0, 1) + f.column_size(0, 2));
  expect_roundtrip(batch, w.bytes);
  EXPECT_TRUE(verify_file(*as_file(w.bytes)).ok);
}

TEST(Write, Errors) {
  RecordBatch empty = int_batch({"a"}, 0);
  EXPECT_EQ(code_of([&] { write_file(empty); }), ErrorCode::EmptyInput);
  auto batch = int_batch({"a", "b"}, 5);
  batch.columns[1] = ColumnVector::scalar(LogicalType::Float64, Values(std::vector<double>(5)));
  EXPECT_EQ(code_of([&] { write_file(batch); }), ErrorCode::SchemaMismatch);
  auto short_col = int_batch({"a", "b"}, 5);
  short_col.columns[1].values.as<std::int64_t>().pop_back();
  EXPECT_EQ(code_of([&] { write_file(short_col); }), ErrorCode::SchemaMismatch);
  auto dup = int_batch({"a", "a"}, 5);
  EXPECT_EQ(code_of([&] { write_file(dup); }), ErrorCode::SchemaMismatch);
}

TEST(Footer, BadTails) {
  auto w = write_file(int_batch({"a"}, 5));
  auto bad = w.bytes;
  bad.back() = 'X';
  EXPECT_EQ(code_of([&] { FooterView::open(bad); }), ErrorCode::BadMagic);
  EXPECT_EQ(code_of([&] { FooterView::open(ByteSpan(w.bytes).subspan(0, 5)); }), ErrorCode::TruncatedFooter);
  auto big = w.bytes;
  store_le<std::uint32_t>(big.data() + big.size() - 8, 0xFFFFFFF0u);
  EXPECT_EQ(code_of([&] { FooterView::open(big); }), ErrorCode::TruncatedFooter);
  // A footer whose declared heap overruns its length is truncated.
  auto overrun = w.bytes;
  const auto footer = FooterView::open(w.bytes).footer_offset();
  auto* heap_size = overrun.data() + footer + 40;
  store_le<std::uint32_t>(heap_size, load_le<std::uint32_t>(heap_size) + 8);
  EXPECT_EQ(code_of([&] { FooterView::open(overrun); }), ErrorCode::TruncatedFooter);
  auto version = w.bytes;
  version[footer] = 9;
  EXPECT_EQ(code_of([&] { FooterView::open(version); }), ErrorCode::CorruptBlock);
}

TEST(Footer, LookupColumn) {
  auto w = write_file(int_batch({"col_a", "col_b", "col_c"}, 4));
  auto f = FooterView::open(w.bytes);
  EXPECT_EQ(lookup_column(f, "col_b"), 1u);
  EXPECT_EQ(lookup_column(f, "col_c"), 2u);
  EXPECT_EQ(code_of([&] { lookup_column(f, "col_d"); }), ErrorCode::ColumnNotFound);
}

std::uint64_t colliding_hash(std::string_view name) { return name.empty() ? 0 : 42; }

TEST(Footer, LookupSurvivesHashCollisions) {
  std::vector<std::string> names;
  for (int i = 0; i < 20; ++i) names.push_back("f" + std::to_string(i));
  WriteOptions o;
  o.name_hash = &colliding_hash;
  auto w = write_file(int_batch(names, 3), o);
  auto f = FooterView::open(w.bytes);
  for (std::uint32_t i = 0; i < names.size(); ++i) EXPECT_EQ(lookup_column(f, names[i], &colliding_hash), i);
  EXPECT_EQ(code_of([&] { lookup_column(f, "f99", &colliding_hash); }), ErrorCode::ColumnNotFound);
}

TEST(Footer, NameIndexSortedAndArraysConsistent) {
  Rng rng(1);
  std::vector<std::string> names;
  for (int i = 0; i < 300; ++i) names.push_back("feature_" + std::to_string(i * 7919 % 1000));
  auto w = write_file(int_batch(names, 50), WriteOptions{.rows_per_page = 8, .pages_per_group = 3});
  auto f = FooterView::open(w.bytes);
  for (std::uint32_t i = 1; i < f.num_columns(); ++i) EXPECT_LE(f.name_hash_at(i - 1), f.name_hash_at(i));
  std::uint64_t pages = 0, rows = 0;
  for (std::uint32_t g = 0; g < f.num_groups(); ++g) {
    pages += f.pages_per_group(g);
    rows += f.rows_in_group(g);
  }
  EXPECT_EQ(pages, f.num_pages());
  EXPECT_EQ(rows, f.num_rows());
  for (const auto& n : names) EXPECT_EQ(f.column(lookup_column(f, n)).name, n);
}

TEST(LocateRow, PrefixSums) {
  WriteOptions o;
  o.rows_per_page = 4;
  auto w = write_file(int_batch({"x"}, 10), o);
  auto f = FooterView::open(w.bytes);
  ASSERT_EQ(f.num_pages(), 3u);
  EXPECT_EQ(f.rows_per_page(2), 2u);
  auto loc = locate_row(f, 5);
  EXPECT_EQ(loc.page, 1u);
  EXPECT_EQ(loc.offset, 1u);
  EXPECT_EQ(loc.first_column_page, 1u);
  auto zero = locate_row(f, 0);
  EXPECT_EQ(zero.page, 0u);
  EXPECT_EQ(zero.offset, 0u);
  EXPECT_EQ(code_of([&] { locate_row(f, 10); }), ErrorCode::RowOutOfRange);
}

TEST(LocateRow, InverseOfEnumeration) {
  WriteOptions o;
  o.rows_per_page = 3;
  o.pages_per_group = 2;
  auto w = write_file(int_batch({"a", "b"}, 23), o);
  auto f = FooterView::open(w.bytes);
  std::uint64_t row = 0;
  for (std::uint32_t g = 0; g < f.num_groups(); ++g) {
    for (std::uint32_t k = 0; k < f.pages_per_chunk(g); ++k) {
      for (std::uint32_t off = 0; off < f.rows_per_page(f.page_ordinal(g, 1, k)); ++off, ++row) {
        auto loc = locate_row(f, row);
        EXPECT_EQ(loc.group, g);
        EXPECT_EQ(loc.page, k);
        EXPECT_EQ(loc.offset, off);
        EXPECT_EQ(f.page_ordinal(g, 0, k), loc.first_column_page);
      }
    }
  }
  EXPECT_EQ(row, 23u);
}

TEST(Checksums, TreeMatchesIndependentRecompute) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto batch = testing::random_batch(rng, testing::mixed_schema(rng), 1 + trial * 13);
    WriteOptions o;
    o.rows_per_page = 1 + static_cast<std::uint32_t>(trial % 7);
    o.pages_per_group = 1 + static_cast<std::uint32_t>(trial % 3);
    auto w = write_file(batch, o);
    auto f = FooterView::open(w.bytes);
    std::vector<std::uint64_t> groups;
    std::uint64_t p = 0;
    for (std::uint32_t g = 0; g < f.num_groups(); ++g) {
      std::vector<std::uint64_t> leaves;
      for (std::uint32_t k = 0; k < f.pages_per_group(g); ++k, ++p) {
        leaves.push_back(XXH3_64bits(w.bytes.data() + f.page_offset(p), f.page_size(p)));
        EXPECT_EQ(leaves.back(), f.page_checksum(p));
      }
      groups.push_back(XXH3_64bits(leaves.data(), leaves.size() * 8));
      EXPECT_EQ(groups.back(), f.group_checksum(g));
    }
    EXPECT_EQ(XXH3_64bits(groups.data(), groups.size() * 8), f.root_checksum());
  }
}

TEST(Checksums, ByteFlipChangesLeafGroupRoot) {
  WriteOptions o;
  o.rows_per_page = 5;
  o.pages_per_group = 2;
  auto w = write_file(int_batch({"a", "b"}, 20), o);
  auto f = FooterView::open(w.bytes);
  std::vector<ByteSpan> pages;
  for (std::uint64_t p = 0; p < f.num_pages(); ++p) pages.emplace_back(w.bytes.data() + f.page_offset(p), f.page_size(p));
  const auto before = compute_checksum_tree(pages, f.group_page_counts());
  EXPECT_EQ(before, f.checksum_tree());

  auto mutated = w.bytes;
  mutated[f.page_offset(5) + 6] ^= 0x01;
  std::vector<ByteSpan> mpages;
  for (std::uint64_t p = 0; p < f.num_pages(); ++p) mpages.emplace_back(mutated.data() + f.page_offset(p), f.page_size(p));
  const auto after = compute_checksum_tree(mpages, f.group_page_counts());
  const auto g = before.group_of(5);
  for (std::size_t p = 0; p < pages.size(); ++p) EXPECT_EQ(before.pages[p] != after.pages[p], p == 5);
  for (std::size_t k = 0; k < before.groups.size(); ++k) EXPECT_EQ(before.groups[k] != after.groups[k], k == g);
  EXPECT_NE(before.root, after.root);
}

TEST(Verify, DetectsCorruption) {
  WriteOptions o;
  o.rows_per_page = 4;
  auto w = write_file(int_batch({"a", "b", "c"}, 16), o);
  auto f = FooterView::open(w.bytes);
  EXPECT_TRUE(verify_file(*as_file(w.bytes)).ok);

  auto page_bad = w.bytes;
  page_bad[f.page_offset(6) + 5] ^= 0xFF;
  auto r = verify_file(*as_file(page_bad));
  EXPECT_FALSE(r.ok);
  ASSERT_TRUE(r.first_bad_page);
  EXPECT_EQ(*r.first_bad_page, 6u);

  auto root_bad = w.bytes;
  root_bad[f.footer_offset() + f.layout().checksums + 8 * (f.num_pages() + f.num_groups())] ^= 1;
  auto rr = verify_file(*as_file(root_bad));
  EXPECT_FALSE(rr.ok);
  EXPECT_FALSE(rr.root_ok);
  EXPECT_FALSE(rr.first_bad_page);

  auto magic_bad = w.bytes;
  magic_bad[magic_bad.size() - 1] = 0;
  EXPECT_FALSE(verify_file(*as_file(magic_bad)).ok);
}

TEST(Project, ReadsOnlyRequestedChunk) {
  std::vector<std::string> names;
  for (int i = 0; i < 1000; ++i) names.push_back("col" + std::to_string(i));
  WriteOptions o;
  o.rows_per_page = 64;
  auto w = write_file(int_batch(names, 64), o);
  auto f = FooterView::open(w.bytes);
  auto file = as_file(w.bytes);
  Reader reader(file);
  file->reset_stats();
  ReadOptions ro;
  ro.coalesce_gap = 0;
  auto p = reader.project({"col500"}, ro);
  const auto c = lookup_column(f, "col500");
  EXPECT_EQ(file->stats().bytes_read, f.column_size(0, c));
  EXPECT_EQ(file->stats().read_calls, 1u);
  EXPECT_EQ(p.columns[0].data, int_batch(names, 64).columns[500]);
}

TEST(Project, CoalescesNearbyChunks) {
  WriteOptions o;
  o.rows_per_page = 16;
  auto batch = int_batch({"a", "b", "c", "d"}, 16);
  auto w = write_file(batch, o);
  auto file = as_file(w.bytes);
  Reader reader(file);
  ReadOptions ro;
  ro.coalesce_gap = 1 << 20;
  file->reset_stats();
  reader.project({"a", "c"}, ro);
  EXPECT_EQ(file->stats().read_calls, 1u);
  ro.coalesce_gap = 0;
  file->reset_stats();
  reader.project({"a", "c"}, ro);
  EXPECT_EQ(file->stats().read_calls, 2u);
  file->reset_stats();
  auto p = reader.project({"b", "a"}, ro);
  EXPECT_EQ(file->stats().read_calls, 1u);  // adjacent chunks merge even at gap 0
  EXPECT_EQ(p.columns[0].name, "b");
  EXPECT_EQ(p.columns[0].data, batch.columns[1]);
  EXPECT_EQ(code_of([&] { reader.project({"zz"}); }), ErrorCode::ColumnNotFound);
}

TEST(Project, RandomSchemasRoundTrip) {
  Rng rng(2025);
  for (int trial = 0; trial < 40; ++trial) {
    auto schema = testing::mixed_schema(rng);
    auto batch = testing::random_batch(rng, schema, static_cast<std::size_t>(testing::uniform_int(rng, 1, 300)));
    WriteOptions o;
    o.rows_per_page = static_cast<std::uint32_t>(testing::uniform_int(rng, 1, 64));
    o.pages_per_group = static_cast<std::uint32_t>(testing::uniform_int(rng, 1, 4));
    auto w = write_file(batch, o);
    expect_roundtrip(batch, w.bytes);
    EXPECT_TRUE(verify_file(*as_file(w.bytes)).ok);
  }
}

TEST(Project, MultipleBatchesConcatenate) {
  Rng rng(5);
  auto schema = testing::mixed_schema(rng);
  auto a = testing::random_batch(rng, schema, 30);
  auto b = testing::random_batch(rng, schema, 17);
  auto w = write_file(schema, {a, b}, WriteOptions{.rows_per_page = 8});
  RecordBatch joined = a;
  for (std::size_t c = 0; c < joined.columns.size(); ++c) joined.columns[c].append(b.columns[c]);
  expect_roundtrip(joined, w.bytes);
}

TEST(Quantized, ColumnsReadBack) {
  using quantization::QuantTarget;
  Rng rng(9);
  std::vector<float> xs(500);
  for (auto& x : xs) x = static_cast<float>(testing::uniform_int(rng, -100000, 100000)) / 977.0f;
  xs[3] = std::numeric_limits<float>::infinity();
  std::vector<std::int64_t> ids(500);
  for (auto& v : ids) v = testing::uniform_int(rng, 0, 20) * 1'000'000'007LL;

  RecordBatch b;
  b.schema.columns = {{"h", LogicalType::Float32, true, quantization::QuantSpec{QuantTarget::Fp16}},
                      {"b8", LogicalType::Float32, true, quantization::QuantSpec{QuantTarget::Fp8E4M3}},
                      {"d", LogicalType::Float32, true, quantization::QuantSpec{QuantTarget::DualSplit16}},
                      {"r", LogicalType::Int64, true, quantization::QuantSpec{QuantTarget::IntRehash}}};
  b.columns = {ColumnVector::scalar(LogicalType::Float32, Values(xs)),
               ColumnVector::scalar(LogicalType::Float32, Values(xs)),
               ColumnVector::scalar(LogicalType::Float32, Values(xs)),
               ColumnVector::scalar(LogicalType::Int64, Values(ids))};
  b.columns[2].values.validity.assign(xs.size(), 1);
  b.columns[2].values.validity[7] = 0;
  b.columns[2].values.as<float>()[7] = 0.0f;
  auto w = write_file(b, WriteOptions{.rows_per_page = 128});
  Reader reader(as_file(w.bytes));
  EXPECT_EQ(reader.column_names(), (std::vector<std::string>{"h", "b8", "d", "r"}));
  auto p = reader.project({"h", "b8", "d", "r", "d.hi"});

  const auto& h = p.column("h").data.values.as<float>();
  const auto& b8 = p.column("b8").data.values.as<float>();
  const auto& hi = p.column("d.hi").data.values.as<float>();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint32_t>(h[i]),
              std::bit_cast<std::uint32_t>(quantization::from_fp16(quantization::to_fp16(xs[i]))));
    EXPECT_EQ(b8[i], quantization::from_fp8_e4m3(quantization::to_fp8_e4m3(xs[i])));
    if (i != 7) {
      EXPECT_EQ(hi[i], quantization::from_bf16(static_cast<std::uint16_t>(std::bit_cast<std::uint32_t>(xs[i]) >> 16)));
    }
  }
  EXPECT_EQ(p.column("d").data, b.columns[2]);
  EXPECT_EQ(p.column("r").data, b.columns[3]);

  auto f = FooterView::open(w.bytes);
  const auto hcol = lookup_column(f, "h");
  // Two bytes per code plus per-page framing.
  const auto per_page = kPageHeaderSize + 2 * encoding::kBlockHeaderSize;
  EXPECT_LE(f.column_size(0, hcol), xs.size() * 2 + f.pages_per_chunk(0) * per_page);
}

TEST(Determinism, SameInputSameBytes) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto schema = testing::mixed_schema(rng);
    auto batch = testing::random_batch(rng, schema, 200);
    WriteOptions o;
    o.rows_per_page = 32;
    EXPECT_EQ(write_file(batch, o).bytes, write_file(batch, o).bytes);
  }
}

TEST(Layout, FrequencyOrderIsTransparentAndContiguous) {
  std::vector<std::string> names;
  for (int i = 0; i < 12; ++i) names.push_back("k" + std::to_string(i));
  auto batch = int_batch(names, 100);
  WriteOptions o;
  o.rows_per_page = 10;
  o.pages_per_group = 3;
  auto base = write_file(batch, o);
  o.column_order = {layout::ColumnOrderSpec::Mode::Frequency, {"k9", "k2", "k7"}};
  auto ranked = write_file(batch, o);
  Reader a(as_file(base.bytes));
  Reader b(as_file(ranked.bytes));
  auto pa = a.project(names);
  auto pb = b.project(names);
  for (std::size_t c = 0; c < names.size(); ++c) EXPECT_EQ(pa.columns[c].data, pb.columns[c].data);
  EXPECT_EQ(b.column_names(), names);  // logical order unchanged

  const auto& f = b.footer();
  for (std::uint32_t g = 0; g < f.num_groups(); ++g) {
    std::uint64_t expect = 0;
    for (const char* n : {"k9", "k2", "k7"}) {
      const auto c = lookup_column(f, n);
      EXPECT_EQ(f.column_offset(g, c), expect) << n;
      expect += f.column_size(g, c);
    }
  }
}

#ifdef BULLION_GOLDEN_DIR
RecordBatch golden_batch() {
  RecordBatch b;
  b.schema.columns = {{"id", LogicalType::Int64, false},
                      {"score", LogicalType::Float64, true},
                      {"tag", LogicalType::String, false, std::nullopt, 2},
                      {"clicks", LogicalType::ListInt64, false, std::nullopt, 1, true},
                      {"emb", LogicalType::ListFloat32, false}};
  std::vector<std::int64_t> id;
  std::vector<double> score;
  std::vector<std::string> tag;
  std::vector<std::vector<std::int64_t>> clicks;
  std::vector<std::vector<float>> emb;
  std::vector<std::int64_t> window = {11, 12, 13, 14, 15, 16};
  for (int r = 0; r < 24; ++r) {
    id.push_back(1000 + r);
    score.push_back(r % 5 == 0 ? 0.0 : 0.25 * r);
    tag.push_back(r % 3 == 0 ? "ads" : (r % 3 == 1 ? "feed" : "search"));
    window.erase(window.begin());
    window.push_back(100 + r);
    clicks.push_back(window);
    emb.push_back({static_cast<float>(r) / 8, -static_cast<float>(r) / 16});
  }
  b.columns = {ColumnVector::scalar(LogicalType::Int64, Values(id)),
               ColumnVector::scalar(LogicalType::Float64, Values(score)),
               ColumnVector::scalar(LogicalType::String, Values(tag)), ColumnVector::int_lists(clicks),
               ColumnVector::float_lists(emb)};
  b.columns[1].values.validity.assign(24, 1);
  for (int r = 0; r < 24; r += 5) b.columns[1].values.validity[r] = 0;
  return b;
}

TEST(Golden, MatchesCheckedInFile) {
  const std::string path = std::string(BULLION_GOLDEN_DIR) + "/mixed_v1.bln";
  const auto bytes = write_file(golden_batch(), WriteOptions{.rows_per_page = 8, .pages_per_group = 2}).bytes;
  if (std::getenv("BULLION_UPDATE_GOLDEN")) io::write_whole_file(path, bytes);
  const auto golden = io::read_whole_file(path);
  EXPECT_EQ(golden, bytes) << "regenerate with BULLION_UPDATE_GOLDEN=1 only for intended format changes";
  expect_roundtrip(golden_batch(), golden);
  EXPECT_TRUE(verify_file(*as_file(golden)).ok);
}
#endif

}  // namespace
}  // namespace bullion::format
