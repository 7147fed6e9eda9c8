#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bullion/bytes.hpp"

namespace bullion::format {

/// XXH3-64 with seed 0.
std::uint64_t hash_bytes(ByteSpan bytes);
std::uint64_t hash_name(std::string_view name);

/// Two-level hash tree: leaf per page, node per row group, one root.
/// group hash = H(LE leaf hashes of the group's pages, in page order)
/// root       = H(LE group hashes, in group order)
struct ChecksumTree {
  std::vector<std::uint64_t> pages;
  std::vector<std::uint64_t> groups;
  std::uint64_t root = 0;
  std::vector<std::uint32_t> group_page_counts;

  /// Index of the group that owns `page` and of its first page.
  std::size_t group_of(std::size_t page) const;
  std::size_t first_page_of(std::size_t group) const;

  friend bool operator==(const ChecksumTree&, const ChecksumTree&) = default;
};

std::uint64_t hash_words(std::span<const std::uint64_t> words);

/// Builds the whole tree. `group_page_counts` must sum to pages.size().
ChecksumTree compute_checksum_tree(std::span<const ByteSpan> pages, std::span<const std::uint32_t> group_page_counts);

}  // namespace bullion::format
