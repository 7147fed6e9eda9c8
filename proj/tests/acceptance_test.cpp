// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance_test            run every criterion
//   acceptance_test 3 7        run only criteria 3 and 7
//   acceptance_test --emit F   write the determinism fixture to F (used by criterion 10)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "batch_util.hpp"
#include "bullion/bench.hpp"
#include "bullion/checksum.hpp"
#include "bullion/compliance.hpp"
#include "bullion/encoding.hpp"
#include "bullion/error.hpp"
#include "bullion/format.hpp"
#include "bullion/io.hpp"
#include "bullion/quantization.hpp"
#include "bullion/sparse_delta.hpp"
#include "quant_oracle.hpp"
#include "test_util.hpp"

namespace {

using namespace bullion;
using encoding::SchemeId;
using testing::Rng;
using testing::uniform_int;

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects the first few failure messages; later ones are only counted.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 5) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " failure(s): " + messages_};
  }

 private:
  std::size_t failures_ = 0;
  std::string messages_;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. RLE deletion walkthrough

Outcome rle_walkthrough() {
  auto block = encoding::encode_rle(Values(std::vector<std::int64_t>{2, 2, 2, 6, 6, 6, 6, 6, 3}));
  const std::uint32_t third_six = 5;
  const auto bits = compliance::mask_rle(block, std::span(&third_six, 1));
  const auto runs = compliance::rle_runs(block);
  std::string run_text, bit_text, shown;
  for (const auto& [v, n] : runs) run_text += "(" + std::to_string(v) + "," + std::to_string(n) + ")";
  for (bool b : bits) bit_text += b ? '1' : '0';
  const auto decoded = compliance::decode_with_mask(block, bits);
  for (std::size_t i = 0; i < decoded.masked.size(); ++i) {
    if (i) shown += ',';
    shown += decoded.masked[i] ? "MASK" : std::to_string(decoded.values.as<std::int64_t>()[i]);
  }
  Checker c;
  c.expect(run_text == "(2,3)(6,4)(3,1)", "runs " + run_text);
  c.expect(bit_text == "000001000", "bits " + bit_text);
  c.expect(shown == "2,2,2,6,6,MASK,6,6,3", "decoded " + shown);
  return c.outcome("runs " + run_text + ", bits " + bit_text + ", decoded " + shown);
}

// ---------------------------------------------------------------------------
// 2. Deletion I/O reduction

Outcome deletion_io() {
  const auto t0 = std::chrono::steady_clock::now();
  bench::DeleteBenchOptions opts;  // 100 pages per column, 2%, level 2
  opts.patterns = {bench::DeletePattern::Clustered};
  const auto report = bench::bench_delete(opts);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double ratio = report.get("clustered", "rewrite_ratio");
  const double pages = report.get("clustered", "pages_rewritten");
  Checker c;
  c.expect(ratio <= 0.04, "ratio " + fmt(ratio));
  c.expect(pages == 4, "pages rewritten " + fmt(pages) + " (expected 2 per column)");
  c.expect(seconds < 10, "took " + fmt(seconds) + " s");
  return c.outcome("bytes_rewritten/file_bytes = " + fmt(ratio, 4) + " (" + fmt(1 / ratio, 3) + "x less than a full rewrite), " +
                   fmt(pages) + " pages, " + fmt(seconds, 2) + " s");
}

// ---------------------------------------------------------------------------
// 3. Physical erasure under bitpack / varint / dictionary / FOR

struct ForensicCase {
  SchemeId scheme;
  std::vector<SchemeId> candidates;
  bool allow_negative;
};

/// Raw value held in slot `i` of a masked page block, read with the
/// scheme's own layout and no reference to the deletion metadata.
std::int64_t forensic_slot(const encoding::EncodedBlock& block, std::size_t i) {
  switch (block.scheme) {
    case SchemeId::FixedBitWidth: {
      const auto v = encoding::bitpack_view(block);
      std::uint64_t x = 0;
      for (unsigned b = 0; b < v.width; ++b) {
        const auto bit = i * v.width + b;
        x |= static_cast<std::uint64_t>(v.bits[bit / 8] >> (bit % 8) & 1) << b;
      }
      return static_cast<std::int64_t>(x);
    }
    case SchemeId::ForDelta: {
      const auto v = encoding::for_delta_view(block);
      std::uint64_t x = 0;
      for (unsigned b = 0; b < v.width; ++b) {
        const auto bit = i * v.width + b;
        x |= static_cast<std::uint64_t>(v.bits[bit / 8] >> (bit % 8) & 1) << b;
      }
      return static_cast<std::int64_t>(x);  // offset from the base
    }
    case SchemeId::Dictionary:
      return encoding::decode(block.children.at(0)).as<std::int64_t>().at(i);  // the code
    default:
      return encoding::decode(block).as<std::int64_t>().at(i);
  }
}

Outcome physical_erasure() {
  const ForensicCase cases[] = {
      {SchemeId::FixedBitWidth, {SchemeId::FixedBitWidth}, false},
      {SchemeId::Varint, {SchemeId::Varint}, false},
      {SchemeId::Dictionary, {SchemeId::Dictionary, SchemeId::FixedBitWidth, SchemeId::Varint}, true},
      {SchemeId::ForDelta, {SchemeId::ForDelta}, true},
  };
  Rng rng(303);
  Checker c;
  std::map<SchemeId, std::size_t> slots_checked;
  std::size_t runs = 0;
  for (const auto& fc : cases) {
    for (int trial = 0; trial < 250; ++trial, ++runs) {
      const auto rows = static_cast<std::size_t>(uniform_int(rng, 8, 400));
      std::vector<std::int64_t> v(rows);
      const auto card = uniform_int(rng, 1, 40);
      // Negative values keep FixedBitWidth out of the top level of dictionary pages.
      const auto base = fc.allow_negative ? uniform_int(rng, -1'000'000, -6000) : uniform_int(rng, 0, 1'000'000);
      std::vector<std::int64_t> pool(static_cast<std::size_t>(card));
      for (auto& p : pool) p = base + uniform_int(rng, 0, 5000);
      for (auto& x : v) x = pool[static_cast<std::size_t>(uniform_int(rng, 0, card - 1))];

      RecordBatch batch;
      batch.schema.columns = {{"v", LogicalType::Int64, false, std::nullopt, 2}};
      batch.columns = {ColumnVector::scalar(LogicalType::Int64, Values(v))};
      format::WriteOptions wo;
      wo.rows_per_page = static_cast<std::uint32_t>(uniform_int(rng, 8, 128));
      wo.pages_per_group = static_cast<std::uint32_t>(uniform_int(rng, 1, 4));
      wo.encoding.candidate_set = fc.candidates;
      io::MemoryFile file(format::write_file(batch, wo).bytes);

      std::vector<std::uint64_t> victims;
      const auto k = uniform_int(rng, 1, static_cast<std::int64_t>(rows / 4));
      for (std::int64_t i = 0; i < k; ++i) victims.push_back(static_cast<std::uint64_t>(uniform_int(rng, 0, rows - 1)));
      compliance::delete_rows(file, victims, compliance::Level::Erase);

      const auto footer = format::FooterView::read(file);
      c.expect(format::verify_file(file).ok, "checksums after erase");
      for (std::uint64_t r = 0; r < rows; ++r) {
        if (!footer.is_erased(r)) continue;
        const auto loc = format::locate_row(footer, r);
        const auto p = footer.page_ordinal(loc.group, 0, loc.page);
        const auto page = file.read(footer.page_offset(p), footer.page_size(p));
        const auto block = encoding::EncodedBlock::deserialize(format::page_body(page), ValueKind::Int64);
        if (block.scheme != fc.scheme) {
          c.expect(false, std::string("page used ") + std::string(encoding::scheme_name(block.scheme)));
          continue;
        }
        // Every mask lands on zero: zero bits, a zero varint, code 0, or a zero offset from the base.
        const auto raw = forensic_slot(block, loc.offset);
        c.expect(raw == 0, std::string(encoding::scheme_name(fc.scheme)) + " row " + std::to_string(r) +
                               " holds " + std::to_string(raw));
        // The full decode shows the mask value rather than the erased value.
        const auto shown = encoding::decode(block).as<std::int64_t>()[loc.offset];
        const auto mask_value = fc.scheme == SchemeId::ForDelta ? encoding::for_delta_view(block).base : 0;
        c.expect(shown == mask_value, "decoded slot is not the mask value");
        ++slots_checked[fc.scheme];
      }
    }
  }
  std::string summary = std::to_string(runs) + " randomized files; erased slots checked:";
  for (const auto& [s, n] : slots_checked) summary += " " + std::string(encoding::scheme_name(s)) + "=" + std::to_string(n);
  return c.outcome(summary);
}

// ---------------------------------------------------------------------------
// 4. Incremental checksum equals batch recomputation

Outcome incremental_checksums() {
  Rng rng(404);
  Checker c;
  std::size_t updates_applied = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto schema = testing::mixed_schema(rng);
    const auto batch = testing::random_batch(rng, schema, static_cast<std::size_t>(uniform_int(rng, 1, 300)));
    format::WriteOptions wo;
    wo.rows_per_page = static_cast<std::uint32_t>(uniform_int(rng, 4, 64));
    wo.pages_per_group = static_cast<std::uint32_t>(uniform_int(rng, 1, 5));
    io::MemoryFile file(format::write_file(batch, wo).bytes);
    const auto footer = format::FooterView::read(file);
    auto tree = footer.checksum_tree();

    std::vector<Bytes> pages(footer.num_pages());
    for (std::uint64_t p = 0; p < pages.size(); ++p) pages[p] = file.read(footer.page_offset(p), footer.page_size(p));

    const auto steps = uniform_int(rng, 1, 12);
    for (std::int64_t s = 0; s < steps; ++s) {
      const auto p = static_cast<std::uint64_t>(uniform_int(rng, 0, static_cast<std::int64_t>(pages.size()) - 1));
      auto& page = pages[p];
      // Flip a few bytes in place, as a page rewrite of unchanged size would.
      for (int k = uniform_int(rng, 1, 4); k > 0; --k)
        page[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(page.size()) - 1))] ^=
            static_cast<std::uint8_t>(uniform_int(rng, 1, 255));
      compliance::update_checksums_incremental(tree, p, page);
      ++updates_applied;
    }
    const auto counts = footer.group_page_counts();
    const auto batch_tree = format::compute_checksum_tree(std::vector<ByteSpan>(pages.begin(), pages.end()), counts);
    c.expect(tree == batch_tree, "trial " + std::to_string(trial) + " diverged");

    // The deletion path maintains the stored tree the same way.
    std::vector<std::uint64_t> victims;
    for (int k = uniform_int(rng, 1, 5); k > 0; --k)
      victims.push_back(static_cast<std::uint64_t>(uniform_int(rng, 0, static_cast<std::int64_t>(footer.num_rows()) - 1)));
    compliance::delete_rows(file, victims, compliance::Level::Erase);
    c.expect(format::verify_file(file).ok, "stored tree after delete_rows, trial " + std::to_string(trial));
  }
  return c.outcome("200 file/update-sequence pairs, " + std::to_string(updates_applied) +
                   " page updates, trees bit-identical");
}

// ---------------------------------------------------------------------------
// 5. Footer flatness

Outcome footer_flatness() {
  bench::FooterBenchOptions opts;
  opts.column_counts = {100, 20000};
  opts.trials = 301;
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = bench::bench_footer(opts);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double small = report.get("100", "open_lookup_median");
  const double wide = report.get("20000", "open_lookup_median");
  const double ratio = wide / small;
  Checker c;
  c.expect(ratio <= 3.0, "ratio " + fmt(ratio));
  c.expect(wide <= 5000.0, "20000-column lookup took " + fmt(wide) + " us");
  c.expect(seconds < 120, "took " + fmt(seconds) + " s");
  return c.outcome("median open+lookup " + fmt(small) + " us @100 cols, " + fmt(wide) + " us @20000 cols, ratio " +
                   fmt(ratio) + ", " + fmt(seconds, 2) + " s");
}

// ---------------------------------------------------------------------------
// 6. Sparse delta fidelity and ratio

Outcome sparse_delta_fidelity() {
  using sparse_delta::IntVector;
  Checker c;

  // Click-sequence walkthrough: the second row pushes 76 onto the front.
  const IntVector base = {92, 82, 66, 18, 67, 31, 12, 90, 44, 23, 71, 85, 59, 30, 47, 55};
  IntVector second = {76};
  second.insert(second.end(), base.begin(), base.begin() + 15);
  const auto fig = sparse_delta::encode_sequence_column({base, second, second});
  c.expect(fig.entries.size() == 3 && !fig.entries[0].delta, "click sequence base entry");
  if (fig.entries.size() == 3) {
    const auto& e2 = fig.entries[1];
    c.expect(e2.delta && e2.range_start == 0 && e2.range_end == 14 && e2.head == IntVector{76} && e2.tail.empty(),
             "second entry fields");
    const auto& e3 = fig.entries[2];
    c.expect(e3.delta && e3.range_start == 0 && e3.range_end == 15 && e3.head.empty() && e3.tail.empty(),
             "third entry fields");
  }

  Rng rng(606);
  std::vector<IntVector> vectors;
  IntVector cur(256);
  for (auto& x : cur) x = uniform_int(rng, 1, 1'000'000'000);
  vectors.push_back(cur);
  while (vectors.size() < 10'000) {
    const auto shift = static_cast<std::size_t>(uniform_int(rng, 0, 16));
    IntVector next;
    if (uniform_int(rng, 0, 1) == 0) {
      for (std::size_t k = 0; k < shift; ++k) next.push_back(uniform_int(rng, 1, 1'000'000'000));
      next.insert(next.end(), cur.begin(), cur.end() - static_cast<std::ptrdiff_t>(shift));
    } else {
      next.insert(next.end(), cur.begin() + static_cast<std::ptrdiff_t>(shift), cur.end());
      for (std::size_t k = 0; k < shift; ++k) next.push_back(uniform_int(rng, 1, 1'000'000'000));
    }
    cur = std::move(next);
    vectors.push_back(cur);
  }
  const auto bytes = sparse_delta::serialize(sparse_delta::encode_sequence_column(vectors));
  const auto back = sparse_delta::decode_sequence_column(sparse_delta::deserialize(bytes));
  c.expect(back == vectors, "round trip differs");
  const double ratio = static_cast<double>(bytes.size()) / static_cast<double>(sparse_delta::plain_size(vectors));
  c.expect(ratio <= 0.25, "size ratio " + fmt(ratio));
  return c.outcome("click-sequence entries exact; 10000 x 256 vectors round-trip, encoded/plain = " + fmt(ratio, 4));
}

// ---------------------------------------------------------------------------
// 7. Codec round-trip for every scheme

Values values_for(SchemeId scheme, Rng& rng) {
  const auto n = static_cast<std::size_t>(uniform_int(rng, 0, 9) == 0 ? uniform_int(rng, 1, 600) : uniform_int(rng, 1, 48));
  auto kind = static_cast<ValueKind>(uniform_int(rng, 1, 4));
  switch (scheme) {
    case SchemeId::Constant: {
      auto one = testing::random_values(rng, kind, 1);
      std::vector<std::size_t> same(n, 0);
      return one.gather(same);
    }
    case SchemeId::FixedBitWidth:
    case SchemeId::Varint: {
      auto v = testing::random_ints(rng, n);
      for (auto& x : v) x = x == std::numeric_limits<std::int64_t>::min() ? 0 : (x < 0 ? -x : x);
      return Values(std::move(v));
    }
    case SchemeId::ZigZag:
    case SchemeId::ForDelta:
      return Values(testing::random_ints(rng, n));
    case SchemeId::Nullable: {
      for (;;) {
        auto v = testing::with_random_nulls(rng, testing::random_values(rng, kind, n));
        if (v.has_nulls()) return v;
      }
    }
    default:
      return testing::random_values(rng, kind, n);
  }
}

/// Whether the tree contains Dictionary -> RLE -> FixedBitWidth.
bool has_dict_rle_bitpack(const encoding::EncodedBlock& b) {
  if (b.scheme == SchemeId::Dictionary)
    for (const auto& child : b.children)
      if (child.scheme == SchemeId::RLE)
        for (const auto& leaf : child.children)
          if (leaf.scheme == SchemeId::FixedBitWidth) return true;
  for (const auto& child : b.children)
    if (has_dict_rle_bitpack(child)) return true;
  return false;
}

Outcome codec_roundtrip() {
  Rng rng(707);
  Checker c;
  std::size_t nested = 0;
  std::size_t total = 0;
  std::string per_scheme;
  for (auto scheme : encoding::all_schemes()) {
    std::size_t cases = 0;
    while (cases < 10'000) {
      auto v = values_for(scheme, rng);
      encoding::EncodingConfig cfg;
      cfg.max_recursion_depth = static_cast<int>(uniform_int(rng, 1, 2));
      if (uniform_int(rng, 0, 3) == 0) {
        // Steer toward dictionary codes that are RLE-then-bitpacked.
        cfg.candidate_set = {SchemeId::Dictionary, SchemeId::RLE, SchemeId::FixedBitWidth};
        cfg.max_recursion_depth = 2;
        if (scheme == SchemeId::Dictionary) {
          std::vector<std::size_t> runs;
          for (std::size_t i = 0; i < v.size(); ++i) runs.push_back(i / 8 % 3);
          v = v.gather(runs);
        }
      }
      if (!encoding::scheme_accepts(scheme, v, cfg.max_recursion_depth)) continue;
      const auto block = encoding::encode_with(scheme, v, cfg);
      const auto bytes = block.serialize();
      std::size_t used = 0;
      const auto parsed = encoding::EncodedBlock::deserialize(bytes, v.kind(), &used);
      const bool ok = encoding::decode(block) == v && parsed == block && used == bytes.size() &&
                      encoding::decode(parsed) == v && block.depth() <= cfg.max_recursion_depth;
      c.expect(ok, std::string(encoding::scheme_name(scheme)) + " case " + std::to_string(cases));
      nested += has_dict_rle_bitpack(block) ? 1 : 0;
      ++cases;
    }
    total += cases;
  }
  c.expect(nested > 0, "no Dictionary->RLE->FixedBitWidth tree was produced");
  return c.outcome(std::to_string(total) + " cases over " + std::to_string(encoding::all_schemes().size()) +
                   " schemes (10000 each), " + std::to_string(nested) + " Dictionary->RLE->FixedBitWidth trees");
}

// ---------------------------------------------------------------------------
// 8. Quantization against an independent oracle

Outcome quantization_oracle() {
  using quantization::QuantTarget;
  Rng rng(808);
  Checker c;
  std::size_t checked = 0;
  for (auto t : {QuantTarget::Fp16, QuantTarget::Bf16, QuantTarget::Fp8E4M3, QuantTarget::Fp8E5M2}) {
    const testing::QuantOracle oracle(t);
    const auto xs = testing::quant_samples(oracle, rng, 1'000'000);
    const auto payload = quantization::quantize_floats(xs, quantization::QuantSpec{t});
    const auto width = quantization::code_bytes(t);
    c.expect(payload.size() == xs.size() * width, "payload size");
    if (width == 2) c.expect(payload.size() * 2 == xs.size() * sizeof(float), "16-bit payload is not half size");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::uint32_t got = payload[i * width];
      if (width == 2) got |= static_cast<std::uint32_t>(payload[i * width + 1]) << 8;
      const auto want = oracle.narrow(xs[i]);
      const bool ok = (want & testing::QuantOracle::kNan) ? oracle.is_nan_code(got) : got == want;
      c.expect(ok, std::string(quantization::target_name(t)) + " mismatch at " + fmt(xs[i], 9));
    }
    checked += xs.size();
  }

  std::vector<float> dual = {0.0f,
                             -0.0f,
                             std::numeric_limits<float>::infinity(),
                             -std::numeric_limits<float>::infinity(),
                             std::numeric_limits<float>::quiet_NaN(),
                             std::bit_cast<float>(0xFFC12345u),
                             std::bit_cast<float>(0x7F800001u),
                             std::numeric_limits<float>::denorm_min(),
                             std::numeric_limits<float>::min(),
                             std::numeric_limits<float>::max(),
                             std::numeric_limits<float>::lowest()};
  std::uniform_int_distribution<std::uint32_t> bits;
  while (dual.size() < 1'000'000 + 11) dual.push_back(std::bit_cast<float>(bits(rng)));
  const auto split = quantization::split_dual(dual);
  const auto joined = quantization::join_dual(split.hi, split.lo);
  bool identical = joined.size() == dual.size();
  for (std::size_t i = 0; identical && i < dual.size(); ++i)
    identical = std::bit_cast<std::uint32_t>(joined[i]) == std::bit_cast<std::uint32_t>(dual[i]);
  c.expect(identical, "dual split/join not bit-identical");
  c.expect(split.hi.size() * 2 * 2 == dual.size() * sizeof(float), "dual halves are not half size each");
  return c.outcome(std::to_string(checked) + " conversions match the oracle; " + std::to_string(dual.size()) +
                   " values split/join bit-identical; 16-bit payloads half size");
}

// ---------------------------------------------------------------------------
// 9. Layout transparency

Outcome layout_transparency() {
  Rng rng(909);
  Checker c;
  std::size_t groups_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto schema = testing::mixed_schema(rng);
    const auto batch = testing::random_batch(rng, schema, static_cast<std::size_t>(uniform_int(rng, 1, 200)));
    format::WriteOptions wo;
    wo.rows_per_page = static_cast<std::uint32_t>(uniform_int(rng, 4, 40));
    wo.pages_per_group = static_cast<std::uint32_t>(uniform_int(rng, 1, 3));
    const auto plain = format::write_file(batch, wo).bytes;

    std::vector<std::string> names;
    for (const auto& col : schema.columns) names.push_back(col.name);
    std::vector<std::string> ranking = names;
    std::shuffle(ranking.begin(), ranking.end(), rng);
    ranking.resize(static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(ranking.size()))));
    wo.column_order = {layout::ColumnOrderSpec::Mode::Frequency, ranking};
    const auto ranked = format::write_file(batch, wo).bytes;

    auto a = format::project_columns(std::make_shared<io::MemoryFile>(plain), names);
    auto b_file = std::make_shared<io::MemoryFile>(ranked);
    auto b = format::project_columns(b_file, names);
    for (std::size_t i = 0; i < names.size(); ++i)
      c.expect(a.columns[i].data == b.columns[i].data, "projection of " + names[i] + " differs");

    const auto footer = format::FooterView::read(*b_file);
    for (std::uint32_t g = 0; g < footer.num_groups(); ++g, ++groups_checked) {
      std::uint64_t expect = 0;
      for (const auto& n : ranking) {
        const auto col = format::lookup_column(footer, n);
        c.expect(footer.column_offset(g, col) == expect, "gap before ranked column " + n);
        expect = footer.column_offset(g, col) + footer.column_size(g, col);
      }
    }
  }
  return c.outcome("60 random schemas: projections identical under frequency order; ranked chunks adjacent in " +
                   std::to_string(groups_checked) + " row groups");
}

// ---------------------------------------------------------------------------
// 10. Determinism

Bytes determinism_fixture() {
  Rng rng(1010);
  Schema schema = testing::mixed_schema(rng);
  schema.columns.push_back({"quality", LogicalType::Float64, false, std::nullopt});
  schema.columns.push_back({"emb", LogicalType::Float32, false, quantization::QuantSpec{quantization::QuantTarget::Bf16}});
  auto batch = testing::random_batch(rng, schema, 3000);
  format::WriteOptions wo;
  wo.rows_per_page = 128;
  wo.pages_per_group = 4;
  wo.row_order = {layout::RowOrderSpec::Mode::QualityDesc, "quality"};
  wo.column_order = {layout::ColumnOrderSpec::Mode::Frequency, {"emb", "quality"}};
  return format::write_file(batch, wo).bytes;
}

Outcome determinism(const std::string& self) {
  Checker c;
  const auto first = determinism_fixture();
  const auto second = determinism_fixture();
  c.expect(first == second, "two writes in one process differ");

  const auto path = (std::filesystem::temp_directory_path() /
                     ("bullion_determinism_" + std::to_string(format::hash_bytes(first)) + ".bln"))
                        .string();
  const auto cmd = "\"" + self + "\" --emit \"" + path + "\"";
  c.expect(std::system(cmd.c_str()) == 0, "child run failed");
  std::uint64_t other = 0;
  if (std::filesystem::exists(path)) {
    other = format::hash_bytes(io::read_whole_file(path));
    std::filesystem::remove(path);
  }
  const auto h = format::hash_bytes(first);
  c.expect(other == h, "separate process wrote a different file");
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return c.outcome(std::to_string(first.size()) + "-byte file, XXH3 " + hex + " in both runs");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--emit") {
    io::write_whole_file(argv[2], determinism_fixture());
    return 0;
  }
  const std::string self = std::filesystem::absolute(argv[0]).string();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"RLE deletion walkthrough", rle_walkthrough},
      {"Deletion I/O reduction", deletion_io},
      {"Physical erasure", physical_erasure},
      {"Incremental checksum = batch", incremental_checksums},
      {"Footer flatness", footer_flatness},
      {"Sparse delta fidelity and ratio", sparse_delta_fidelity},
      {"Codec round-trip", codec_roundtrip},
      {"Quantization oracle", quantization_oracle},
      {"Layout transparency", layout_transparency},
      {"Determinism", [&] { return determinism(self); }},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %2d. %s: %s [%.2fs]\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, only.empty() ? criteria.size() : only.size());
  return failed == 0 ? 0 : 1;
}
