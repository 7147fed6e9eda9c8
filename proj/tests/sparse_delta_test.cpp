#include <gtest/gtest.h>

#include "bullion/sparse_delta.hpp"
#include "test_util.hpp"

namespace bullion::sparse_delta {
namespace {

using testing::Rng;

// Exhaustive oracle: try every (head length, range start, overlap length)
// split and keep the first best under (longest, shortest head, lowest start).
std::optional<Window> brute_force_window(const IntVector& prev, const IntVector& curr, double frac) {
  std::optional<Window> best;
  std::size_t best_len = 0;
  for (std::size_t h = 0; h < curr.size(); ++h) {
    for (std::size_t s = 0; s < prev.size(); ++s) {
      for (std::size_t len = 1; h + len <= curr.size() && s + len <= prev.size(); ++len) {
        bool match = true;
        for (std::size_t k = 0; k < len && match; ++k) match = curr[h + k] == prev[s + k];
        if (!match) break;
        if (len > best_len) {
          best_len = len;
          Window w;
          w.range_start = static_cast<std::uint32_t>(s);
          w.range_end = static_cast<std::uint32_t>(s + len - 1);
          w.head.assign(curr.begin(), curr.begin() + static_cast<std::ptrdiff_t>(h));
          w.tail.assign(curr.begin() + static_cast<std::ptrdiff_t>(h + len), curr.end());
          best = w;
        }
      }
    }
  }
  if (!best || static_cast<double>(best_len) < frac * static_cast<double>(curr.size())) return std::nullopt;
  return best;
}

// Simplified click-sequence column: a base vector of 16 ad ids, a second row
// that pushes a new id (76) onto the front and drops the oldest, and a third
// row identical to the second.
std::vector<IntVector> click_sequence_fixture() {
  IntVector base = {92, 82, 66, 18, 67, 31, 12, 90, 44, 23, 71, 85, 59, 30, 47, 55};
  IntVector second = {76};
  second.insert(second.end(), base.begin(), base.begin() + 15);
  return {base, second, second};
}

TEST(FindWindow, Examples) {
  auto w = find_sliding_window(IntVector{1, 2, 3, 4}, IntVector{9, 1, 2, 3}, 0.5);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->head, IntVector{9});
  EXPECT_EQ(w->range_start, 0u);
  EXPECT_EQ(w->range_end, 2u);
  EXPECT_TRUE(w->tail.empty());

  IntVector v = {4, 8, 15, 16, 23, 42};
  auto id = find_sliding_window(v, v, 0.5);
  ASSERT_TRUE(id);
  EXPECT_TRUE(id->head.empty());
  EXPECT_TRUE(id->tail.empty());
  EXPECT_EQ(id->range_start, 0u);
  EXPECT_EQ(id->range_end, v.size() - 1);

  EXPECT_FALSE(find_sliding_window(IntVector{1, 2}, IntVector{7, 8}, 0.5));
}

TEST(FindWindow, ThresholdAndTieBreaks) {
  // Overlap of 1 out of 4 is below a 0.5 threshold but fine at 0.25.
  EXPECT_FALSE(find_sliding_window(IntVector{5}, IntVector{1, 5, 2, 3}, 0.5));
  EXPECT_TRUE(find_sliding_window(IntVector{5}, IntVector{1, 5, 2, 3}, 0.25));
  // Two equal-length overlaps: [1,2] at head 0 beats [1,2] at head 2.
  auto w = find_sliding_window(IntVector{1, 2}, IntVector{1, 2, 1, 2}, 0.0);
  ASSERT_TRUE(w);
  EXPECT_TRUE(w->head.empty());
  EXPECT_EQ(w->tail, (IntVector{1, 2}));
  // Same head length, two starts in prev: the lowest start wins.
  auto s = find_sliding_window(IntVector{7, 3, 7}, IntVector{7}, 0.0);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->range_start, 0u);
}

TEST(FindWindow, AgreesWithBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 3000; ++trial) {
    IntVector prev(static_cast<std::size_t>(testing::uniform_int(rng, 1, 12)));
    IntVector curr(static_cast<std::size_t>(testing::uniform_int(rng, 0, 12)));
    const auto alphabet = testing::uniform_int(rng, 1, 6);
    for (auto& x : prev) x = testing::uniform_int(rng, 0, alphabet);
    for (auto& x : curr) x = testing::uniform_int(rng, 0, alphabet);
    const double frac = static_cast<double>(testing::uniform_int(rng, 0, 4)) / 4.0;
    EXPECT_EQ(find_sliding_window(prev, curr, frac), brute_force_window(prev, curr, frac));
  }
}

TEST(EncodeSequence, ClickSequenceEntries) {
  auto block = encode_sequence_column(click_sequence_fixture());
  ASSERT_EQ(block.entries.size(), 3u);
  EXPECT_FALSE(block.entries[0].delta);
  EXPECT_EQ(block.entries[0].base_data.front(), 92);
  EXPECT_EQ(block.entries[0].base_data.back(), 55);

  const auto& second = block.entries[1];
  EXPECT_TRUE(second.delta);
  EXPECT_EQ(second.range_start, 0u);
  EXPECT_EQ(second.range_end, 14u);
  EXPECT_EQ(second.head, IntVector{76});
  EXPECT_TRUE(second.tail.empty());

  const auto& third = block.entries[2];
  EXPECT_TRUE(third.delta);
  EXPECT_EQ(third.range_start, 0u);
  EXPECT_EQ(third.range_end, 15u);
  EXPECT_TRUE(third.head.empty());
  EXPECT_TRUE(third.tail.empty());

  auto bytes = serialize(block);
  EXPECT_EQ(deserialize(bytes), block);
  EXPECT_EQ(decode_sequence_column(deserialize(bytes)), click_sequence_fixture());
}

TEST(EncodeSequence, SingleVectorAndLiteralFallback) {
  auto one = encode_sequence_column({{1, 2, 3}});
  ASSERT_EQ(one.entries.size(), 1u);
  EXPECT_FALSE(one.entries[0].delta);

  auto unrelated = encode_sequence_column({{1, 2, 3}, {7, 8, 9}, {}});
  for (const auto& e : unrelated.entries) EXPECT_FALSE(e.delta);
  EXPECT_EQ(decode_sequence_column(unrelated), (std::vector<IntVector>{{1, 2, 3}, {7, 8, 9}, {}}));
  EXPECT_THROW(encode_sequence_column({}), Error);
}

TEST(DecodeSequence, RejectsBadRanges) {
  Block b;
  b.entries.push_back(Entry::literal({1, 2}));
  Entry d;
  d.delta = true;
  d.range_start = 0;
  d.range_end = 2;
  b.entries.push_back(d);
  EXPECT_THROW(decode_sequence_column(b), Error);

  Block leading_delta;
  leading_delta.entries.push_back(d);
  EXPECT_THROW(decode_sequence_column(leading_delta), Error);

  Bytes bytes = serialize(encode_sequence_column({{1, 2, 3}, {2, 3, 4}}));
  bytes.pop_back();
  EXPECT_THROW(deserialize(bytes), Error);
}

std::vector<IntVector> shifting_sequences(Rng& rng, std::size_t count, std::size_t length, int max_shift) {
  std::vector<IntVector> out;
  IntVector cur(length);
  for (auto& x : cur) x = testing::uniform_int(rng, 1, 1'000'000'000);
  out.push_back(cur);
  for (std::size_t i = 1; i < count; ++i) {
    const auto shift = static_cast<std::size_t>(testing::uniform_int(rng, 0, max_shift));
    IntVector next;
    if (testing::uniform_int(rng, 0, 1) == 0) {
      for (std::size_t k = 0; k < shift; ++k) next.push_back(testing::uniform_int(rng, 1, 1'000'000'000));
      next.insert(next.end(), cur.begin(), cur.end() - static_cast<std::ptrdiff_t>(shift));
    } else {
      next.insert(next.end(), cur.begin() + static_cast<std::ptrdiff_t>(shift), cur.end());
      for (std::size_t k = 0; k < shift; ++k) next.push_back(testing::uniform_int(rng, 1, 1'000'000'000));
    }
    cur = next;
    out.push_back(cur);
  }
  return out;
}

TEST(Properties, RandomShiftedWindowsRoundTripAndCompress) {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    auto vectors = shifting_sequences(rng, 200, 256, 25);  // shift <= 10% of 256
    auto block = encode_sequence_column(vectors);
    for (std::size_t i = 1; i < block.entries.size(); ++i) EXPECT_TRUE(block.entries[i].delta);
    auto bytes = serialize(block);
    EXPECT_EQ(decode_sequence_column(deserialize(bytes)), vectors);
    EXPECT_LE(static_cast<double>(bytes.size()), 0.25 * static_cast<double>(plain_size(vectors)));
  }
}

TEST(Properties, VariableLengthAndRawBulk) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<IntVector> vectors(static_cast<std::size_t>(testing::uniform_int(rng, 1, 20)));
    for (auto& v : vectors) {
      v.resize(static_cast<std::size_t>(testing::uniform_int(rng, 0, 30)));
      for (auto& x : v) x = testing::uniform_int(rng, -3, 3);
    }
    Options opts;
    opts.compress_bulk = trial % 2 == 0;
    opts.min_overlap_fraction = 0.3;
    auto bytes = serialize(encode_sequence_column(vectors, opts), opts);
    EXPECT_EQ(decode_sequence_column(deserialize(bytes)), vectors);
  }
}

}  // namespace
}  // namespace bullion::sparse_delta
