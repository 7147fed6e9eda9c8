#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bullion/checksum.hpp"
#include "bullion/encoding.hpp"
#include "bullion/format.hpp"
#include "bullion/io.hpp"

namespace bullion::compliance {

enum class Level : std::uint8_t {
  Plain = 0,           // no in-place deletion; callers must rewrite the file
  DeletionVector = 1,  // rows are hidden through the footer bitmap only
  Erase = 2,           // bitmap plus physical masking of the page bytes
};

Level level_from_int(int level);

// ---------------------------------------------------------------------------
// Block-level masking. `offsets` are element indices into the block's current
// logical sequence, sorted ascending without duplicates.

/// Zeroes the fixed-width slots of a FixedBitWidth block.
void mask_bitpacked(encoding::EncodedBlock& block, std::span<const std::uint32_t> offsets);
/// Clears the 7 payload bits of every byte of each deleted varint; continuation bits stay.
void mask_varint(encoding::EncodedBlock& block, std::span<const std::uint32_t> offsets);
/// Zeroes the offset slots of a frame-of-reference block, so masked values read back as its base.
void mask_for_delta(encoding::EncodedBlock& block, std::span<const std::uint32_t> offsets);
/// Zeroes plain values in place. Strings keep their length prefix with zeroed content.
void mask_trivial(encoding::EncodedBlock& block, std::span<const std::uint32_t> offsets);
/// Removes elements from an RLE block and re-encodes the survivors without growing it.
/// Returns one bit per original element, set where an element was removed.
std::vector<bool> mask_rle(encoding::EncodedBlock& block, std::span<const std::uint32_t> offsets,
                           const encoding::EncodingConfig& config = {});
/// Points deleted codes at the reserved mask entry 0. Dictionary entries are not touched.
/// Codes stored under RLE are removed instead, shrinking value_count.
void mask_dictionary(encoding::EncodedBlock& block, std::span<const std::uint32_t> offsets,
                     const encoding::EncodingConfig& config = {});

/// Masks any maskable block. Returns true when elements were removed rather
/// than overwritten (the block now holds fewer values).
bool mask_block(encoding::EncodedBlock& block, std::span<const std::uint32_t> offsets,
                const encoding::EncodingConfig& config = {});

/// Decoded values with removed positions restored as placeholders.
struct MaskedValues {
  Values values;
  std::vector<bool> masked;
};
/// Decodes `block` and re-expands it over `deletion_bits` (one bit per original element).
MaskedValues decode_with_mask(const encoding::EncodedBlock& block, const std::vector<bool>& deletion_bits);

/// RLE runs of a block as (value, count) pairs; int64 blocks only.
std::vector<std::pair<std::int64_t, std::int64_t>> rle_runs(const encoding::EncodedBlock& block);

// ---------------------------------------------------------------------------
// Page and file level.

/// Masks the rows of one stored page. `previously_erased` and `newly_erased`
/// hold one flag per row of the page. Returns a page of identical size.
Bytes mask_page(ByteSpan page, const format::ColumnInfo& column, std::uint32_t rows,
                const std::vector<bool>& previously_erased, const std::vector<bool>& newly_erased);

/// Hash reads performed by one incremental update.
struct ChecksumReadTrace {
  std::vector<std::uint64_t> leaf_hashes_read;   // page indices
  std::vector<std::uint64_t> group_hashes_read;  // group indices
  std::uint64_t page_bytes_hashed = 0;
};

/// Replaces one leaf and refreshes its group node and the root.
void update_checksums_incremental(format::ChecksumTree& tree, std::uint64_t page, ByteSpan new_page,
                                  ChecksumReadTrace* trace = nullptr);

enum class FooterUpdate : std::uint8_t {
  InPlace,  // overwrite only the changed footer words
  Append,   // write a fresh footer and tail after the current end of file
};

struct DeleteOptions {
  FooterUpdate footer_update = FooterUpdate::InPlace;
};

struct DeleteStats {
  std::uint64_t rows_deleted = 0;  // rows whose state changed
  std::uint64_t pages_rewritten = 0;
  std::uint64_t bytes_rewritten = 0;  // page bytes plus footer bytes written
  std::uint64_t file_bytes = 0;       // file size before the call
  std::vector<std::string> warnings;
};

/// Marks `row_ids` deleted. Needs exclusive access to `file`.
DeleteStats delete_rows(io::File& file, std::span<const std::uint64_t> row_ids, Level level,
                        const DeleteOptions& options = {});
/// Opens `path` read-write under an exclusive lock and deletes.
DeleteStats delete_rows(const std::string& path, std::span<const std::uint64_t> row_ids, Level level,
                        const DeleteOptions& options = {});

}  // namespace bullion::compliance
