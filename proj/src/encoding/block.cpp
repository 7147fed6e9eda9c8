#include <algorithm>
#include <limits>

#include "bullion/encoding.hpp"
#include "internal.hpp"

namespace bullion::encoding {

std::string_view scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::Trivial: return "Trivial";
    case SchemeId::Constant: return "Constant";
    case SchemeId::MainlyConstant: return "MainlyConstant";
    case SchemeId::RLE: return "RLE";
    case SchemeId::Dictionary: return "Dictionary";
    case SchemeId::FixedBitWidth: return "FixedBitWidth";
    case SchemeId::Varint: return "Varint";
    case SchemeId::ZigZag: return "ZigZag";
    case SchemeId::ForDelta: return "ForDelta";
    case SchemeId::Nullable: return "Nullable";
    case SchemeId::Chunked: return "Chunked";
  }
  return "?";
}

std::optional<SchemeId> scheme_from_name(std::string_view name) {
  for (auto s : all_schemes())
    if (scheme_name(s) == name) return s;
  return std::nullopt;
}

bool is_valid_scheme_tag(std::uint8_t tag) { return tag >= 1 && tag <= kMaxSchemeTag; }

std::vector<SchemeId> all_schemes() {
  std::vector<SchemeId> out;
  for (std::uint8_t t = 1; t <= kMaxSchemeTag; ++t) out.push_back(static_cast<SchemeId>(t));
  return out;
}

int EncodedBlock::depth() const {
  int d = 0;
  for (const auto& c : children) d = std::max(d, 1 + c.depth());
  return d;
}

bool EncodedBlock::maskable() const {
  switch (scheme) {
    case SchemeId::Trivial:
    case SchemeId::FixedBitWidth:
    case SchemeId::Varint:
    case SchemeId::ForDelta:
      return true;
    case SchemeId::RLE:
      // Survivors are re-encoded; leaf sub-columns never grow on a subsequence.
      return std::all_of(children.begin(), children.end(), [](const EncodedBlock& c) {
        return c.children.empty() && c.maskable();
      });
    case SchemeId::Dictionary: {
      const auto& codes = children.at(0);
      return codes.scheme != SchemeId::ForDelta && codes.maskable();
    }
    case SchemeId::ZigZag: {
      const auto& c = children.at(0);
      return c.scheme != SchemeId::ForDelta && c.scheme != SchemeId::RLE && c.maskable();
    }
    case SchemeId::Nullable:
      return children.at(0).maskable();
    case SchemeId::Constant:
    case SchemeId::MainlyConstant:
    case SchemeId::Chunked:
      return false;
  }
  return false;
}

std::size_t EncodedBlock::serialized_size() const {
  std::size_t n = kBlockHeaderSize + payload.size();
  for (const auto& c : children) n += c.serialized_size();
  return n;
}

void EncodedBlock::serialize_to(Bytes& out) const {
  check(payload.size() <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::InvalidArgument,
        "block payload exceeds 4 GiB");
  check(children.size() <= 255, ErrorCode::InvalidArgument, "too many child blocks");
  ByteWriter w(out);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(scheme));
  w.put<std::uint32_t>(value_count);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(payload.size()));
  w.put_bytes(payload);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(children.size()));
  for (const auto& c : children) c.serialize_to(out);
}

Bytes EncodedBlock::serialize() const {
  Bytes out;
  out.reserve(serialized_size());
  serialize_to(out);
  return out;
}

namespace {

std::vector<ValueKind> child_kinds(SchemeId scheme, ValueKind kind) {
  switch (scheme) {
    case SchemeId::MainlyConstant: return {ValueKind::Int64, kind};
    case SchemeId::RLE: return {kind, ValueKind::Int64};
    case SchemeId::Dictionary: return {ValueKind::Int64};
    case SchemeId::ZigZag: return {ValueKind::Int64};
    case SchemeId::Nullable: return {kind};
    default: return {};
  }
}

EncodedBlock parse(ByteReader& in, ValueKind kind, int nesting) {
  if (nesting > 16) fail(ErrorCode::CorruptBlock, "block nesting too deep");
  EncodedBlock b;
  const auto tag = in.get<std::uint8_t>();
  if (!is_valid_scheme_tag(tag)) fail(ErrorCode::CorruptBlock, "unknown scheme tag " + std::to_string(tag));
  b.scheme = static_cast<SchemeId>(tag);
  b.kind = kind;
  b.value_count = in.get<std::uint32_t>();
  const auto len = in.get<std::uint32_t>();
  auto payload = in.get_bytes(len);
  b.payload.assign(payload.begin(), payload.end());
  const auto n_children = in.get<std::uint8_t>();
  const auto kinds = child_kinds(b.scheme, kind);
  if (n_children != kinds.size())
    fail(ErrorCode::CorruptBlock, std::string(scheme_name(b.scheme)) + " block has wrong child count");
  for (auto k : kinds) b.children.push_back(parse(in, k, nesting + 1));
  return b;
}

}  // namespace

EncodedBlock EncodedBlock::deserialize(ByteSpan data, ValueKind kind, std::size_t* consumed) {
  ByteReader in(data);
  auto b = parse(in, kind, 0);
  if (consumed) *consumed = in.position();
  return b;
}

}  // namespace bullion::encoding
