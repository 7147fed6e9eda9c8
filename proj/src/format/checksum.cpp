#include "bullion/checksum.hpp"

#include <xxhash.h>

#include "bullion/error.hpp"

namespace bullion::format {

std::uint64_t hash_bytes(ByteSpan bytes) { return XXH3_64bits(bytes.data(), bytes.size()); }

std::uint64_t hash_name(std::string_view name) { return XXH3_64bits(name.data(), name.size()); }

std::uint64_t hash_words(std::span<const std::uint64_t> words) {
  // Words are hashed in their little-endian byte form, which on supported
  // hosts is the in-memory layout.
  return XXH3_64bits(words.data(), words.size() * sizeof(std::uint64_t));
}

std::size_t ChecksumTree::group_of(std::size_t page) const {
  std::size_t first = 0;
  for (std::size_t g = 0; g < group_page_counts.size(); ++g) {
    if (page < first + group_page_counts[g]) return g;
    first += group_page_counts[g];
  }
  fail(ErrorCode::InvalidArgument, "page index outside the checksum tree");
}

std::size_t ChecksumTree::first_page_of(std::size_t group) const {
  std::size_t first = 0;
  for (std::size_t g = 0; g < group; ++g) first += group_page_counts[g];
  return first;
}

ChecksumTree compute_checksum_tree(std::span<const ByteSpan> pages, std::span<const std::uint32_t> group_page_counts) {
  ChecksumTree tree;
  tree.group_page_counts.assign(group_page_counts.begin(), group_page_counts.end());
  std::size_t total = 0;
  for (auto c : group_page_counts) total += c;
  check(total == pages.size(), ErrorCode::InvalidArgument, "group page counts do not cover the pages");

  tree.pages.reserve(pages.size());
  for (auto p : pages) tree.pages.push_back(hash_bytes(p));
  std::size_t first = 0;
  for (auto c : group_page_counts) {
    tree.groups.push_back(hash_words(std::span(tree.pages).subspan(first, c)));
    first += c;
  }
  tree.root = hash_words(tree.groups);
  return tree;
}

}  // namespace bullion::format
