#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bullion/bytes.hpp"
#include "bullion/values.hpp"

namespace bullion::encoding {

/// Persisted 1-byte scheme tags. Never renumber: the tag order is also the
/// tie-break order during scheme selection (lowest wins).
enum class SchemeId : std::uint8_t {
  Trivial = 1,
  Constant = 2,
  MainlyConstant = 3,
  RLE = 4,
  Dictionary = 5,
  FixedBitWidth = 6,
  Varint = 7,
  ZigZag = 8,
  ForDelta = 9,
  Nullable = 10,
  Chunked = 11,
};

inline constexpr std::uint8_t kMaxSchemeTag = 11;

std::string_view scheme_name(SchemeId id);
std::optional<SchemeId> scheme_from_name(std::string_view name);
bool is_valid_scheme_tag(std::uint8_t tag);
std::vector<SchemeId> all_schemes();

/// One encoded sub-column. Children hold the nested encodings of derived
/// sub-columns (run values/counts, dictionary codes, ...).
struct EncodedBlock {
  SchemeId scheme = SchemeId::Trivial;
  ValueKind kind = ValueKind::Int64;  // in-memory only; implied by context when persisted
  std::uint32_t value_count = 0;
  Bytes payload;
  std::vector<EncodedBlock> children;

  /// Nesting depth: 0 for a leaf, 1 + deepest child otherwise.
  int depth() const;
  /// Whether deleted elements can be erased in place without growing the block.
  bool maskable() const;

  std::size_t serialized_size() const;
  void serialize_to(Bytes& out) const;
  Bytes serialize() const;
  /// Parses a block of the given element kind; child kinds follow from the scheme.
  static EncodedBlock deserialize(ByteSpan data, ValueKind kind, std::size_t* consumed = nullptr);

  friend bool operator==(const EncodedBlock&, const EncodedBlock&) = default;
};

inline constexpr std::size_t kBlockHeaderSize = 1 + 4 + 4 + 1;  // tag, count, payload length, child count

struct EncodingConfig {
  int max_recursion_depth = 2;
  double sample_fraction = 0.01;
  std::size_t min_sample = 1024;
  std::vector<SchemeId> candidate_set = all_schemes();
  bool allow_chunked = true;
  /// Restricts every level to schemes that support in-place masking.
  bool maskable_only = false;

  void validate() const;
};

/// Sample used for scheme selection: the first `min_sample` values plus a
/// uniform stride over the remainder sized by `sample_fraction`.
Values sample_values(const Values& values, const EncodingConfig& config);

/// Whether `scheme` can represent `values` given `depth_budget` remaining nesting levels.
bool scheme_accepts(SchemeId scheme, const Values& values, int depth_budget);

/// Picks the smallest candidate (ties by lowest tag) at every nesting level.
EncodedBlock encode_cascading(const Values& values, const EncodingConfig& config = {});

/// Encodes with a fixed top-level scheme; sub-columns still go through cascading
/// selection with one less level of depth budget.
EncodedBlock encode_with(SchemeId scheme, const Values& values, const EncodingConfig& config = {});

/// Serialized byte size of `sample` under `scheme`; exact when `sample` is the full input.
std::size_t estimate_size(const Values& sample, SchemeId scheme, const EncodingConfig& config = {});

/// Byte size of the plain (Trivial) block for `values`, computed without encoding.
std::size_t trivial_size(const Values& values);

Values decode(const EncodedBlock& block);

// Single-scheme entry points. Sub-columns are cascaded under `config`.
EncodedBlock encode_rle(const Values& values, const EncodingConfig& config = {});
EncodedBlock encode_dictionary(const Values& values, const EncodingConfig& config = {});
EncodedBlock encode_varint(std::span<const std::uint64_t> values);
EncodedBlock encode_bitpack(std::span<const std::uint64_t> values);
EncodedBlock encode_for_delta(std::span<const std::int64_t> values);
EncodedBlock encode_zigzag(std::span<const std::int64_t> values, const EncodingConfig& config = {});
EncodedBlock encode_nullable(const Values& values, const EncodingConfig& config = {});

inline constexpr std::size_t kChunkSize = 256 * 1024;

/// Splits raw bytes into 256 KiB chunks, each zstd-compressed or stored raw.
EncodedBlock encode_chunked(ByteSpan bytes);
Bytes decode_chunked_bytes(const EncodedBlock& block);

struct ChunkInfo {
  std::uint32_t offset;
  std::uint32_t stored_size;
  std::uint32_t raw_size;
  bool compressed;
};
std::vector<ChunkInfo> chunk_table(const EncodedBlock& block);

// Zigzag mapping: v >= 0 -> 2v, v < 0 -> -2v - 1.
inline std::uint64_t zigzag_encode(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}
inline std::int64_t zigzag_decode(std::uint64_t u) {
  return static_cast<std::int64_t>(u >> 1) ^ -static_cast<std::int64_t>(u & 1);
}

// Accessors over scheme payloads, shared with the masking code.
struct BitpackView {
  std::uint8_t width;
  ByteSpan bits;
};
BitpackView bitpack_view(const EncodedBlock& block);  // FixedBitWidth
struct ForDeltaView {
  std::int64_t base;
  std::uint8_t width;
  ByteSpan bits;
};
ForDeltaView for_delta_view(const EncodedBlock& block);

/// Run decomposition used by RLE and by masking (re-encoding survivors).
struct Runs {
  Values values;
  std::vector<std::int64_t> counts;
};
Runs compute_runs(const Values& values);
/// Builds an RLE block from explicit runs (adjacent runs are not merged).
EncodedBlock rle_from_runs(const Runs& runs, const EncodingConfig& config, int depth_budget);

/// Dictionary entries (excluding the reserved mask entry 0) and the codes sub-column.
Values dictionary_entries(const EncodedBlock& block);

}  // namespace bullion::encoding
