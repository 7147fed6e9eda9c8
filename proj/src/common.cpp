#include <bit>
#include <cstring>

#include "bullion/bytes.hpp"
#include "bullion/error.hpp"
#include "bullion/values.hpp"

namespace bullion {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnsupportedType: return "UnsupportedType";
    case ErrorCode::CorruptBlock: return "CorruptBlock";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFooter: return "TruncatedFooter";
    case ErrorCode::ColumnNotFound: return "ColumnNotFound";
    case ErrorCode::RowOutOfRange: return "RowOutOfRange";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::ExclusiveAccessRequired: return "ExclusiveAccessRequired";
    case ErrorCode::RewriteRequired: return "RewriteRequired";
    case ErrorCode::MissingScoreColumn: return "MissingScoreColumn";
    case ErrorCode::NonNumericScore: return "NonNumericScore";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::DistinctOverflow: return "DistinctOverflow";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// LEB128

std::size_t varint_size(std::uint64_t v) {
  return v == 0 ? 1 : (static_cast<std::size_t>(std::bit_width(v)) + 6) / 7;
}

void append_varint(Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t read_varint(ByteSpan data, std::size_t& pos) {
  std::uint64_t v = 0;
  for (unsigned shift = 0; shift < 70; shift += 7) {
    if (pos >= data.size()) fail(ErrorCode::CorruptBlock, "truncated varint");
    const std::uint8_t b = data[pos++];
    if (shift == 63 && (b & 0x7E) != 0) fail(ErrorCode::CorruptBlock, "varint overflows 64 bits");
    v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
    if ((b & 0x80) == 0) return v;
  }
  fail(ErrorCode::CorruptBlock, "varint longer than 10 bytes");
}

void ByteWriter::put_varint(std::uint64_t v) { append_varint(buf(), v); }

std::uint64_t ByteReader::get_varint() { return read_varint(data_, pos_); }

// ---------------------------------------------------------------------------
// Values

const char* value_kind_name(ValueKind kind) {
  switch (kind) {
    case ValueKind::Int64: return "int64";
    case ValueKind::Float32: return "float32";
    case ValueKind::Float64: return "float64";
    case ValueKind::String: return "string";
  }
  return "?";
}

Values Values::empty(ValueKind kind) {
  switch (kind) {
    case ValueKind::Int64: return Values(std::vector<std::int64_t>{});
    case ValueKind::Float32: return Values(std::vector<float>{});
    case ValueKind::Float64: return Values(std::vector<double>{});
    case ValueKind::String: return Values(std::vector<std::string>{});
  }
  fail(ErrorCode::UnsupportedType, "unknown value kind");
}

std::size_t Values::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

bool Values::has_nulls() const {
  for (auto b : validity)
    if (b == 0) return true;
  return false;
}

void Values::push_from(const Values& src, std::size_t i) {
  std::visit(
      [&](auto& dst) {
        using Vec = std::decay_t<decltype(dst)>;
        dst.push_back(std::get<Vec>(src.data)[i]);
      },
      data);
  if (!src.validity.empty() || !validity.empty()) {
    validity.resize(size() - 1, 1);
    validity.push_back(src.is_null(i) ? 0 : 1);
  }
}

Values Values::gather(const std::vector<std::size_t>& positions) const {
  Values out = empty(kind());
  std::visit(
      [&](auto& dst) {
        using Vec = std::decay_t<decltype(dst)>;
        const auto& s = std::get<Vec>(data);
        dst.reserve(positions.size());
        for (auto p : positions) dst.push_back(s[p]);
      },
      out.data);
  if (!validity.empty()) {
    out.validity.reserve(positions.size());
    for (auto p : positions) out.validity.push_back(validity[p]);
  }
  return out;
}

namespace {
template <typename T>
bool scalar_equal(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, float>) {
    return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
  } else if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
  } else {
    return a == b;
  }
}
}  // namespace

bool Values::element_equal(std::size_t i, const Values& other, std::size_t j) const {
  if (is_null(i) || other.is_null(j)) return is_null(i) == other.is_null(j);
  return std::visit(
      [&](const auto& a) {
        using Vec = std::decay_t<decltype(a)>;
        return scalar_equal(a[i], std::get<Vec>(other.data)[j]);
      },
      data);
}

bool operator==(const Values& a, const Values& b) {
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  if (a.has_nulls() != b.has_nulls()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!a.element_equal(i, b, i)) return false;
  return true;
}

}  // namespace bullion
