#include "bullion/sparse_delta.hpp"

#include <unordered_map>

#include "bullion/encoding.hpp"

namespace bullion::sparse_delta {

namespace {

enum class BulkMode : std::uint8_t { Raw = 0, Chunked = 1 };

struct Candidate {
  std::size_t length = 0;
  std::size_t head = 0;
  std::size_t start = 0;

  bool better_than(const Candidate& o) const {
    if (length != o.length) return length > o.length;
    if (head != o.head) return head < o.head;
    return start < o.start;
  }
};

}  // namespace

std::optional<Window> find_sliding_window(std::span<const std::int64_t> prev,
                                          std::span<const std::int64_t> curr, double min_overlap_fraction) {
  if (prev.empty() || curr.empty()) return std::nullopt;

  // Anchor candidates on equal elements, then verify by extension. Only
  // maximal starts (no match one step back) can be optimal.
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> positions;
  positions.reserve(prev.size());
  for (std::size_t s = 0; s < prev.size(); ++s) positions[prev[s]].push_back(static_cast<std::uint32_t>(s));

  Candidate best;
  for (std::size_t h = 0; h < curr.size(); ++h) {
    if (best.length >= curr.size() - h) break;  // later heads cannot win
    auto it = positions.find(curr[h]);
    if (it == positions.end()) continue;
    for (auto s : it->second) {
      if (h > 0 && s > 0 && curr[h - 1] == prev[s - 1]) continue;
      std::size_t len = 0;
      while (h + len < curr.size() && s + len < prev.size() && curr[h + len] == prev[s + len]) ++len;
      Candidate c{len, h, s};
      if (c.better_than(best)) best = c;
    }
  }
  if (best.length == 0) return std::nullopt;
  if (static_cast<double>(best.length) < min_overlap_fraction * static_cast<double>(curr.size()))
    return std::nullopt;

  Window w;
  w.range_start = static_cast<std::uint32_t>(best.start);
  w.range_end = static_cast<std::uint32_t>(best.start + best.length - 1);
  w.head.assign(curr.begin(), curr.begin() + static_cast<std::ptrdiff_t>(best.head));
  w.tail.assign(curr.begin() + static_cast<std::ptrdiff_t>(best.head + best.length), curr.end());
  return w;
}

Block encode_sequence_column(const std::vector<IntVector>& vectors, const Options& options) {
  check(!vectors.empty(), ErrorCode::EmptyInput, "sequence column has no vectors");
  Block block;
  block.entries.reserve(vectors.size());
  block.entries.push_back(Entry::literal(vectors[0]));
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    auto w = find_sliding_window(vectors[i - 1], vectors[i], options.min_overlap_fraction);
    block.entries.push_back(w ? Entry::from_window(std::move(*w)) : Entry::literal(vectors[i]));
  }
  return block;
}

std::vector<IntVector> decode_sequence_column(const Block& block) {
  std::vector<IntVector> out;
  out.reserve(block.entries.size());
  for (const auto& e : block.entries) {
    if (!e.delta) {
      out.push_back(e.base_data);
      continue;
    }
    if (out.empty()) fail(ErrorCode::CorruptBlock, "first sparse-delta entry must be a literal");
    const auto& prev = out.back();
    if (e.range_start > e.range_end || e.range_end >= prev.size())
      fail(ErrorCode::CorruptBlock, "delta range exceeds the previous vector");
    IntVector v;
    v.reserve(e.decoded_length());
    v.insert(v.end(), e.head.begin(), e.head.end());
    v.insert(v.end(), prev.begin() + e.range_start, prev.begin() + e.range_end + 1);
    v.insert(v.end(), e.tail.begin(), e.tail.end());
    out.push_back(std::move(v));
  }
  return out;
}

Bytes serialize(const Block& block, const Options& options) {
  Bytes out;
  ByteWriter w(out);
  const auto n = block.entries.size();
  w.put_varint(n);
  Bytes flags((n + 7) / 8, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (block.entries[i].delta) flags[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  w.put_bytes(flags);

  Bytes bulk;
  auto put_ints = [&](const IntVector& v) {
    const auto at = bulk.size();
    bulk.resize(at + v.size() * 8);
    std::memcpy(bulk.data() + at, v.data(), v.size() * 8);
  };
  for (const auto& e : block.entries) {
    if (e.delta) {
      w.put_varint(e.range_start);
      w.put_varint(e.range_end);
      w.put_varint(e.head.size());
      w.put_varint(e.tail.size());
      put_ints(e.head);
      put_ints(e.tail);
    } else {
      w.put_varint(e.base_data.size());
      put_ints(e.base_data);
    }
  }

  if (options.compress_bulk && !bulk.empty()) {
    auto chunked = encoding::encode_chunked(bulk).serialize();
    if (chunked.size() < bulk.size()) {
      w.put<std::uint8_t>(static_cast<std::uint8_t>(BulkMode::Chunked));
      w.put_bytes(chunked);
      return out;
    }
  }
  w.put<std::uint8_t>(static_cast<std::uint8_t>(BulkMode::Raw));
  w.put_bytes(bulk);
  return out;
}

Block deserialize(ByteSpan bytes) {
  ByteReader in(bytes);
  const auto n = in.get_varint();
  if (n > bytes.size() * 8) fail(ErrorCode::CorruptBlock, "sparse-delta entry count too large");
  const auto flags = in.get_bytes((n + 7) / 8);

  Block block;
  block.entries.resize(n);
  std::uint64_t total = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> lengths(n);  // head/base, tail
  for (std::size_t i = 0; i < n; ++i) {
    auto& e = block.entries[i];
    e.delta = (flags[i / 8] >> (i % 8)) & 1;
    if (e.delta) {
      const auto rs = in.get_varint();
      const auto re = in.get_varint();
      if (rs > re || re > 0xFFFFFFFFu) fail(ErrorCode::CorruptBlock, "bad delta range");
      e.range_start = static_cast<std::uint32_t>(rs);
      e.range_end = static_cast<std::uint32_t>(re);
      lengths[i] = {in.get_varint(), in.get_varint()};
    } else {
      lengths[i] = {in.get_varint(), 0};
    }
    total += lengths[i].first + lengths[i].second;
    if (total > (std::uint64_t{1} << 40)) fail(ErrorCode::CorruptBlock, "sparse-delta bulk too large");
  }

  Bytes decompressed;
  ByteSpan bulk;
  const auto mode = in.get<std::uint8_t>();
  if (mode == static_cast<std::uint8_t>(BulkMode::Chunked)) {
    std::size_t used = 0;
    auto chunk = encoding::EncodedBlock::deserialize(bytes.subspan(in.position()), ValueKind::Int64, &used);
    if (chunk.scheme != encoding::SchemeId::Chunked) fail(ErrorCode::CorruptBlock, "bulk block is not Chunked");
    in.get_bytes(used);
    decompressed = encoding::decode_chunked_bytes(chunk);
    bulk = decompressed;
  } else if (mode == static_cast<std::uint8_t>(BulkMode::Raw)) {
    bulk = in.get_bytes(total * 8);
  } else {
    fail(ErrorCode::CorruptBlock, "unknown bulk mode");
  }
  if (!in.done()) fail(ErrorCode::CorruptBlock, "trailing bytes after sparse-delta block");
  if (bulk.size() != total * 8) fail(ErrorCode::CorruptBlock, "bulk size does not match metadata");

  std::size_t pos = 0;
  auto take = [&](std::uint64_t count) {
    IntVector v(count);
    std::memcpy(v.data(), bulk.data() + pos, count * 8);
    pos += count * 8;
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    auto& e = block.entries[i];
    if (e.delta) {
      e.head = take(lengths[i].first);
      e.tail = take(lengths[i].second);
    } else {
      e.base_data = take(lengths[i].first);
    }
  }
  return block;
}

std::size_t plain_size(const std::vector<IntVector>& vectors) {
  std::size_t n = 0;
  for (const auto& v : vectors) n += v.size() * 8;
  return n;
}

}  // namespace bullion::sparse_delta
