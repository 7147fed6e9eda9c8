#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bullion/bytes.hpp"

namespace bullion::sparse_delta {

using IntVector = std::vector<std::int64_t>;

/// curr = head ++ prev[range_start..=range_end] ++ tail
struct Window {
  std::uint32_t range_start = 0;
  std::uint32_t range_end = 0;
  IntVector head;
  IntVector tail;

  std::size_t overlap() const { return range_end - range_start + 1; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Longest slice of `prev` that appears contiguously in `curr`. Ties go to the
/// shortest head, then the smallest range_start. Returns nullopt when the best
/// overlap is empty or shorter than `min_overlap_fraction * curr.size()`.
std::optional<Window> find_sliding_window(std::span<const std::int64_t> prev,
                                          std::span<const std::int64_t> curr, double min_overlap_fraction);

struct Entry {
  bool delta = false;
  std::uint32_t range_start = 0;  // delta only; inclusive range into the previous vector
  std::uint32_t range_end = 0;
  IntVector head;
  IntVector tail;
  IntVector base_data;  // literal vector when !delta

  static Entry literal(IntVector data) {
    Entry e;
    e.base_data = std::move(data);
    return e;
  }
  static Entry from_window(Window w) {
    Entry e;
    e.delta = true;
    e.range_start = w.range_start;
    e.range_end = w.range_end;
    e.head = std::move(w.head);
    e.tail = std::move(w.tail);
    return e;
  }

  std::size_t decoded_length() const {
    return delta ? head.size() + (range_end - range_start + 1) + tail.size() : base_data.size();
  }
  friend bool operator==(const Entry&, const Entry&) = default;
};

struct Block {
  std::vector<Entry> entries;
  friend bool operator==(const Block&, const Block&) = default;
};

struct Options {
  double min_overlap_fraction = 0.5;
  /// Store the bulk section as a Chunked (zstd) block when that is smaller.
  bool compress_bulk = true;
};

/// Each vector after the first becomes a delta against the previous decoded
/// vector when a qualifying window exists, and a literal otherwise.
Block encode_sequence_column(const std::vector<IntVector>& vectors, const Options& options = {});

/// Single forward pass; CorruptBlock on a malformed delta.
std::vector<IntVector> decode_sequence_column(const Block& block);

/// Layout: varint entry count, delta-flag bitmap, varint metadata stream
/// (literal: length; delta: range_start, range_end, head length, tail length),
/// bulk mode byte, bulk int64 data (raw little-endian or a Chunked block).
Bytes serialize(const Block& block, const Options& options = {});
Block deserialize(ByteSpan bytes);

/// Plain encoded size of the vectors at 8 bytes per element.
std::size_t plain_size(const std::vector<IntVector>& vectors);

}  // namespace bullion::sparse_delta
