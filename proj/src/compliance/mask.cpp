#include <algorithm>
#include <limits>

#include "../encoding/internal.hpp"
#include "bullion/bitpack.hpp"
#include "bullion/compliance.hpp"
#include "bullion/error.hpp"

namespace bullion::compliance {

using encoding::EncodedBlock;
using encoding::EncodingConfig;
using encoding::SchemeId;

namespace {

void require_scheme(const EncodedBlock& block, SchemeId scheme) {
  if (block.scheme != scheme)
    fail(ErrorCode::InvalidArgument, "expected a " + std::string(encoding::scheme_name(scheme)) + " block, got " +
                                         std::string(encoding::scheme_name(block.scheme)));
}

void require_offsets(std::span<const std::uint32_t> offsets, std::uint32_t count) {
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    check(offsets[i] < count, ErrorCode::InvalidArgument, "mask offset beyond the block");
    check(i == 0 || offsets[i - 1] < offsets[i], ErrorCode::InvalidArgument, "mask offsets must be strictly ascending");
  }
}

/// Whether masking `block` removes elements instead of overwriting them.
bool compacts(const EncodedBlock& block) {
  switch (block.scheme) {
    case SchemeId::RLE:
      return true;
    case SchemeId::Dictionary:
      return compacts(block.children.at(0));
    default:
      return false;
  }
}

/// Leaf encoding of `values` with a given scheme, or nothing if it cannot hold them.
std::optional<EncodedBlock> leaf_as(SchemeId scheme, const Values& values) {
  const auto ints = [&]() -> const std::vector<std::int64_t>& { return values.as<std::int64_t>(); };
  switch (scheme) {
    case SchemeId::Trivial: {
      EncodedBlock b;
      b.kind = values.kind();
      b.value_count = static_cast<std::uint32_t>(values.size());
      encoding::detail::write_trivial(b.payload, values);
      return b;
    }
    case SchemeId::FixedBitWidth:
    case SchemeId::Varint: {
      if (values.kind() != ValueKind::Int64) return std::nullopt;
      const auto& v = ints();
      if (std::any_of(v.begin(), v.end(), [](std::int64_t x) { return x < 0; })) return std::nullopt;
      std::vector<std::uint64_t> u(v.begin(), v.end());
      return scheme == SchemeId::Varint ? encoding::encode_varint(u) : encoding::encode_bitpack(u);
    }
    case SchemeId::ForDelta:
      if (values.kind() != ValueKind::Int64) return std::nullopt;
      return encoding::encode_for_delta(ints());
    default:
      return std::nullopt;
  }
}

/// Smallest leaf encoding of a run sub-column.
EncodedBlock smallest_leaf(const Values& values) {
  std::optional<EncodedBlock> best;
  for (auto s : {SchemeId::Trivial, SchemeId::FixedBitWidth, SchemeId::Varint, SchemeId::ForDelta}) {
    auto b = leaf_as(s, values);
    if (b && (!best || b->serialized_size() < best->serialized_size())) best = std::move(b);
  }
  return *best;
}

EncodedBlock rle_block(const encoding::Runs& runs, bool exhaustive, const EncodingConfig& config) {
  EncodedBlock b;
  b.scheme = SchemeId::RLE;
  b.kind = runs.values.kind();
  std::uint64_t total = 0;
  for (auto c : runs.counts) total += static_cast<std::uint64_t>(c);
  b.value_count = static_cast<std::uint32_t>(total);
  const Values counts(runs.counts);
  if (exhaustive || runs.counts.empty()) {
    b.children.push_back(smallest_leaf(runs.values));
    b.children.push_back(smallest_leaf(counts));
  } else {
    // Children of a maskable RLE block are leaves, so no nesting budget is left.
    b.children.push_back(encoding::detail::cascade(runs.values, config, 0, SchemeId::RLE));
    b.children.push_back(encoding::detail::cascade(counts, config, 0, SchemeId::RLE));
  }
  return b;
}

}  // namespace

Level level_from_int(int level) {
  check(level >= 0 && level <= 2, ErrorCode::InvalidArgument, "compliance level must be 0, 1 or 2");
  return static_cast<Level>(level);
}

void mask_bitpacked(EncodedBlock& block, std::span<const std::uint32_t> offsets) {
  require_scheme(block, SchemeId::FixedBitWidth);
  require_offsets(offsets, block.value_count);
  const auto width = encoding::bitpack_view(block).width;
  auto bits = std::span(block.payload).subspan(1);
  for (auto i : offsets) bitpack::set(bits, width, i, 0);
}

void mask_for_delta(EncodedBlock& block, std::span<const std::uint32_t> offsets) {
  require_scheme(block, SchemeId::ForDelta);
  require_offsets(offsets, block.value_count);
  const auto width = encoding::for_delta_view(block).width;
  auto bits = std::span(block.payload).subspan(9);
  for (auto i : offsets) bitpack::set(bits, width, i, 0);
}

void mask_varint(EncodedBlock& block, std::span<const std::uint32_t> offsets) {
  require_scheme(block, SchemeId::Varint);
  require_offsets(offsets, block.value_count);
  std::size_t pos = 0;
  std::size_t next = 0;
  for (std::uint32_t i = 0; i < block.value_count && next < offsets.size(); ++i) {
    const auto start = pos;
    read_varint(block.payload, pos);
    if (offsets[next] != i) continue;
    ++next;
    for (auto k = start; k < pos; ++k) block.payload[k] &= 0x80;
  }
}

void mask_trivial(EncodedBlock& block, std::span<const std::uint32_t> offsets) {
  require_scheme(block, SchemeId::Trivial);
  require_offsets(offsets, block.value_count);
  if (block.kind != ValueKind::String) {
    const std::size_t width = block.kind == ValueKind::Float32 ? 4 : 8;
    check(block.payload.size() == block.value_count * width, ErrorCode::CorruptBlock, "trivial payload size mismatch");
    for (auto i : offsets) std::fill_n(block.payload.begin() + static_cast<std::ptrdiff_t>(i * width), width, 0);
    return;
  }
  std::size_t pos = 0;
  std::size_t next = 0;
  for (std::uint32_t i = 0; i < block.value_count && next < offsets.size(); ++i) {
    check(pos + 4 <= block.payload.size(), ErrorCode::CorruptBlock, "string payload truncated");
    const auto len = load_le<std::uint32_t>(block.payload.data() + pos);
    pos += 4;
    check(len <= block.payload.size() - pos, ErrorCode::CorruptBlock, "string payload truncated");
    if (offsets[next] == i) {
      std::fill_n(block.payload.begin() + static_cast<std::ptrdiff_t>(pos), len, 0);
      ++next;
    }
    pos += len;
  }
}

std::vector<std::pair<std::int64_t, std::int64_t>> rle_runs(const EncodedBlock& block) {
  require_scheme(block, SchemeId::RLE);
  const auto values = encoding::decode(block.children.at(0));
  const auto counts = encoding::decode(block.children.at(1));
  check(values.kind() == ValueKind::Int64, ErrorCode::InvalidArgument, "rle_runs needs an integer block");
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out.emplace_back(values.as<std::int64_t>()[i], counts.as<std::int64_t>()[i]);
  return out;
}

std::vector<bool> mask_rle(EncodedBlock& block, std::span<const std::uint32_t> offsets, const EncodingConfig& config) {
  require_scheme(block, SchemeId::RLE);
  require_offsets(offsets, block.value_count);
  std::vector<bool> bits(block.value_count, false);
  for (auto i : offsets) bits[i] = true;
  if (offsets.empty()) return bits;

  const auto original_size = block.serialized_size();
  const Values values = encoding::decode(block);
  std::vector<std::size_t> keep;
  keep.reserve(values.size() - offsets.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!bits[i]) keep.push_back(i);
  const auto merged = encoding::compute_runs(values.gather(keep));

  // Unmerged runs only ever lose count, so their leaves rarely need more bits
  // than before. Merging can raise a count and widen the counts leaf.
  encoding::Runs unmerged{Values::empty(values.kind()), {}};
  {
    const Values run_values = encoding::decode(block.children.at(0));
    const Values count_values = encoding::decode(block.children.at(1));
    const auto& counts = count_values.as<std::int64_t>();
    std::size_t pos = 0;
    for (std::size_t r = 0; r < counts.size(); ++r) {
      std::int64_t live = 0;
      for (std::int64_t k = 0; k < counts[r]; ++k, ++pos) live += bits[pos] ? 0 : 1;
      if (live > 0) {
        unmerged.values.push_from(run_values, r);
        unmerged.counts.push_back(live);
      }
    }
  }

  std::optional<EncodedBlock> best;
  const auto consider = [&](EncodedBlock candidate) {
    const auto size = candidate.serialized_size();
    if (size <= original_size && (!best || size < best->serialized_size())) best = std::move(candidate);
  };
  consider(rle_block(merged, false, config));
  consider(rle_block(merged, true, config));
  consider(rle_block(unmerged, true, config));
  if (!best) fail(ErrorCode::UnsupportedEncoding, "RLE page cannot be re-encoded within its original size");
  block = std::move(*best);
  return bits;
}

void mask_dictionary(EncodedBlock& block, std::span<const std::uint32_t> offsets, const EncodingConfig& config) {
  require_scheme(block, SchemeId::Dictionary);
  require_offsets(offsets, block.value_count);
  auto& codes = block.children.at(0);
  check(codes.scheme != SchemeId::ForDelta, ErrorCode::UnsupportedEncoding,
        "dictionary codes under frame-of-reference cannot reach the mask entry");
  if (mask_block(codes, offsets, config)) block.value_count = codes.value_count;
}

bool mask_block(EncodedBlock& block, std::span<const std::uint32_t> offsets, const EncodingConfig& config) {
  if (!block.maskable())
    fail(ErrorCode::UnsupportedEncoding,
         std::string(encoding::scheme_name(block.scheme)) + " blocks cannot be masked in place");
  require_offsets(offsets, block.value_count);
  if (offsets.empty()) return false;
  switch (block.scheme) {
    case SchemeId::Trivial:
      mask_trivial(block, offsets);
      return false;
    case SchemeId::FixedBitWidth:
      mask_bitpacked(block, offsets);
      return false;
    case SchemeId::Varint:
      mask_varint(block, offsets);
      return false;
    case SchemeId::ForDelta:
      mask_for_delta(block, offsets);
      return false;
    case SchemeId::RLE:
      mask_rle(block, offsets, config);
      return true;
    case SchemeId::Dictionary:
      mask_dictionary(block, offsets, config);
      return compacts(block);
    case SchemeId::ZigZag: {
      // zigzag(0) == 0, so zeroing the mapped child yields a zero value.
      check(!compacts(block.children.at(0)), ErrorCode::UnsupportedEncoding, "ZigZag child cannot compact");
      mask_block(block.children.at(0), offsets, config);
      return false;
    }
    case SchemeId::Nullable: {
      auto& child = block.children.at(0);
      std::vector<std::uint32_t> dense;
      std::vector<std::uint32_t> rows;
      std::uint32_t present = 0;
      std::size_t next = 0;
      for (std::uint32_t i = 0; i < block.value_count && next < offsets.size(); ++i) {
        const bool bit = block.payload[i / 8] >> (i % 8) & 1;
        if (offsets[next] == i) {
          if (bit) {
            dense.push_back(present);
            rows.push_back(i);
          }
          ++next;
        }
        present += bit ? 1 : 0;
      }
      if (compacts(child)) {
        // Removed elements are no longer present: clear their presence bits too.
        mask_block(child, dense, config);
        for (auto r : rows) block.payload[r / 8] &= static_cast<std::uint8_t>(~(1u << (r % 8)));
      } else {
        mask_block(child, dense, config);
      }
      return false;
    }
    default:
      break;
  }
  fail(ErrorCode::UnsupportedEncoding, "scheme cannot be masked in place");
}

MaskedValues decode_with_mask(const EncodedBlock& block, const std::vector<bool>& deletion_bits) {
  const Values live = encoding::decode(block);
  const auto removed = static_cast<std::size_t>(std::count(deletion_bits.begin(), deletion_bits.end(), true));
  MaskedValues out{Values::empty(live.kind()), deletion_bits};
  if (live.size() == deletion_bits.size()) {
    out.values = live;
    return out;
  }
  check(live.size() + removed == deletion_bits.size(), ErrorCode::CorruptBlock,
        "deletion bits do not match the block length");
  std::size_t pos = 0;
  std::visit(
      [&](auto& vec) {
        using Vec = std::decay_t<decltype(vec)>;
        const auto& src = std::get<Vec>(live.data);
        vec.reserve(deletion_bits.size());
        for (bool gone : deletion_bits) vec.push_back(gone ? typename Vec::value_type{} : src[pos++]);
      },
      out.values.data);
  return out;
}

}  // namespace bullion::compliance
