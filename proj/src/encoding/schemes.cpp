#include <algorithm>
#include <bit>
#include <limits>
#include <unordered_map>

#include "bullion/bitpack.hpp"
#include "bullion/encoding.hpp"
#include "internal.hpp"

namespace bullion::encoding {

using detail::cascade;

namespace detail {

void write_trivial(Bytes& out, const Values& values) {
  std::visit(
      [&](const auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        ByteWriter w(out);
        if constexpr (std::is_same_v<T, std::string>) {
          for (const auto& s : vec) {
            w.put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
            w.put_string(s);
          }
        } else {
          const auto* p = reinterpret_cast<const std::uint8_t*>(vec.data());
          out.insert(out.end(), p, p + vec.size() * sizeof(T));
        }
      },
      values.data);
}

Values read_trivial(ByteSpan payload, ValueKind kind, std::size_t count) {
  Values out = Values::empty(kind);
  std::visit(
      [&](auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        if constexpr (std::is_same_v<T, std::string>) {
          ByteReader in(payload);
          vec.reserve(count);
          for (std::size_t i = 0; i < count; ++i) {
            auto len = in.get<std::uint32_t>();
            vec.emplace_back(in.get_string(len));
          }
          if (!in.done()) fail(ErrorCode::CorruptBlock, "trailing bytes in string payload");
        } else {
          if (payload.size() != count * sizeof(T)) fail(ErrorCode::CorruptBlock, "trivial payload size mismatch");
          vec.resize(count);
          std::memcpy(vec.data(), payload.data(), payload.size());
        }
      },
      out.data);
  return out;
}

void write_scalar(Bytes& out, const Values& values, std::size_t i) {
  std::visit(
      [&](const auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        ByteWriter w(out);
        if constexpr (std::is_same_v<T, std::string>) {
          w.put_varint(vec[i].size());
          w.put_string(vec[i]);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          w.put_varint(zigzag_encode(vec[i]));
        } else {
          w.put<T>(vec[i]);
        }
      },
      values.data);
}

void read_scalar(ByteReader& in, Values& out) {
  std::visit(
      [&](auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        if constexpr (std::is_same_v<T, std::string>) {
          auto len = in.get_varint();
          if (len > in.remaining()) fail(ErrorCode::CorruptBlock, "string scalar overruns payload");
          vec.emplace_back(in.get_string(len));
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          vec.push_back(zigzag_decode(in.get_varint()));
        } else {
          vec.push_back(in.get<T>());
        }
      },
      out.data);
}

}  // namespace detail

namespace {

// Hashable identity of one element; floats by bit pattern so NaN/-0 are exact.
template <typename T>
auto key_of(const T& v) {
  if constexpr (std::is_same_v<T, float>) {
    return std::bit_cast<std::uint32_t>(v);
  } else if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<std::uint64_t>(v);
  } else {
    return v;
  }
}

const std::vector<std::int64_t>& ints(const Values& v) { return v.as<std::int64_t>(); }

Values make_ints(std::vector<std::int64_t> v) { return Values(std::move(v)); }

EncodedBlock leaf(SchemeId scheme, ValueKind kind, std::size_t count, Bytes payload) {
  EncodedBlock b;
  b.scheme = scheme;
  b.kind = kind;
  b.value_count = static_cast<std::uint32_t>(count);
  b.payload = std::move(payload);
  return b;
}

void require_no_nulls(const Values& values, SchemeId scheme) {
  if (values.has_nulls())
    fail(ErrorCode::UnsupportedType, std::string(scheme_name(scheme)) + " cannot represent nulls");
}

void require_count(std::size_t n) {
  check(n <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::InvalidArgument,
        "block value count exceeds 32 bits");
}

// --- Trivial ---------------------------------------------------------------

EncodedBlock build_trivial(const Values& values) {
  Bytes payload;
  detail::write_trivial(payload, values);
  return leaf(SchemeId::Trivial, values.kind(), values.size(), std::move(payload));
}

// --- Constant --------------------------------------------------------------

EncodedBlock build_constant(const Values& values) {
  check(values.size() > 0, ErrorCode::EmptyInput, "Constant needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i)
    check(values.element_equal(i, values, 0), ErrorCode::InvalidArgument, "Constant input is not constant");
  Bytes payload;
  detail::write_scalar(payload, values, 0);
  return leaf(SchemeId::Constant, values.kind(), values.size(), std::move(payload));
}

Values decode_constant(const EncodedBlock& b) {
  ByteReader in(b.payload);
  Values one = Values::empty(b.kind);
  detail::read_scalar(in, one);
  if (!in.done()) fail(ErrorCode::CorruptBlock, "trailing bytes in Constant payload");
  Values out = Values::empty(b.kind);
  std::visit(
      [&](auto& vec) {
        using Vec = std::decay_t<decltype(vec)>;
        vec.assign(b.value_count, std::get<Vec>(one.data)[0]);
      },
      out.data);
  return out;
}

// --- MainlyConstant ----------------------------------------------------------

std::size_t most_frequent_index(const Values& values) {
  return std::visit(
      [&](const auto& vec) -> std::size_t {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        using K = decltype(key_of(std::declval<T>()));
        std::unordered_map<K, std::pair<std::size_t, std::size_t>> freq;  // count, first index
        for (std::size_t i = 0; i < vec.size(); ++i) {
          auto [it, inserted] = freq.try_emplace(key_of(vec[i]), 0, i);
          ++it->second.first;
        }
        std::size_t best = 0, best_count = 0;
        for (const auto& [k, cf] : freq) {
          if (cf.first > best_count || (cf.first == best_count && cf.second < best)) {
            best = cf.second;
            best_count = cf.first;
          }
        }
        return best;
      },
      values.data);
}

EncodedBlock build_mainly_constant(const Values& values, const EncodingConfig& cfg, int budget) {
  check(values.size() > 0, ErrorCode::EmptyInput, "MainlyConstant needs at least one value");
  const auto c = most_frequent_index(values);
  std::vector<std::int64_t> positions;
  std::vector<std::size_t> exception_idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values.element_equal(i, values, c)) {
      positions.push_back(static_cast<std::int64_t>(i));
      exception_idx.push_back(i);
    }
  }
  Bytes payload;
  detail::write_scalar(payload, values, c);
  auto b = leaf(SchemeId::MainlyConstant, values.kind(), values.size(), std::move(payload));
  b.children.push_back(cascade(make_ints(std::move(positions)), cfg, budget - 1, SchemeId::MainlyConstant));
  b.children.push_back(cascade(values.gather(exception_idx), cfg, budget - 1, SchemeId::MainlyConstant));
  return b;
}

Values decode_mainly_constant(const EncodedBlock& b) {
  Values out = decode_constant(b);
  const Values pos = decode(b.children.at(0));
  const Values exc = decode(b.children.at(1));
  if (pos.size() != exc.size()) fail(ErrorCode::CorruptBlock, "MainlyConstant exception arrays differ");
  std::int64_t prev = -1;
  std::visit(
      [&](auto& vec) {
        using Vec = std::decay_t<decltype(vec)>;
        const auto& ev = std::get<Vec>(exc.data);
        for (std::size_t i = 0; i < pos.size(); ++i) {
          const auto p = ints(pos)[i];
          if (p <= prev || p >= static_cast<std::int64_t>(vec.size()))
            fail(ErrorCode::CorruptBlock, "MainlyConstant exception position out of order");
          vec[static_cast<std::size_t>(p)] = ev[i];
          prev = p;
        }
      },
      out.data);
  return out;
}

// --- Dictionary --------------------------------------------------------------

EncodedBlock build_dictionary(const Values& values, const EncodingConfig& cfg, int budget) {
  check(values.size() > 0, ErrorCode::EmptyInput, "Dictionary needs at least one value");
  std::vector<std::int64_t> codes(values.size());
  std::vector<std::size_t> first_idx;
  std::visit(
      [&](const auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        using K = decltype(key_of(std::declval<T>()));
        std::unordered_map<K, std::int64_t> ids;
        for (std::size_t i = 0; i < vec.size(); ++i) {
          auto [it, inserted] = ids.try_emplace(key_of(vec[i]), static_cast<std::int64_t>(ids.size() + 1));
          if (inserted) first_idx.push_back(i);
          codes[i] = it->second;
        }
      },
      values.data);
  Bytes payload;
  append_varint(payload, first_idx.size());
  for (auto i : first_idx) detail::write_scalar(payload, values, i);
  auto b = leaf(SchemeId::Dictionary, values.kind(), values.size(), std::move(payload));
  b.children.push_back(cascade(make_ints(std::move(codes)), cfg, budget - 1, SchemeId::Dictionary));
  return b;
}

Values decode_dictionary(const EncodedBlock& b) {
  const Values entries = dictionary_entries(b);
  const Values codes = decode(b.children.at(0));
  if (codes.size() != b.value_count) fail(ErrorCode::CorruptBlock, "dictionary code count mismatch");
  Values out = Values::empty(b.kind);
  std::visit(
      [&](auto& vec) {
        using Vec = std::decay_t<decltype(vec)>;
        const auto& dict = std::get<Vec>(entries.data);
        vec.reserve(codes.size());
        for (auto c : ints(codes)) {
          if (c < 0 || c > static_cast<std::int64_t>(dict.size()))
            fail(ErrorCode::CorruptBlock, "dictionary code out of range");
          // Code 0 is the mask entry; it reads back as the type's default value.
          vec.push_back(c == 0 ? typename Vec::value_type{} : dict[static_cast<std::size_t>(c - 1)]);
        }
      },
      out.data);
  return out;
}

// --- FixedBitWidth / Varint / ForDelta / ZigZag -------------------------------

void require_unsigned(const Values& values, SchemeId scheme) {
  check(values.kind() == ValueKind::Int64, ErrorCode::UnsupportedType,
        std::string(scheme_name(scheme)) + " needs integer input");
  for (auto v : ints(values))
    check(v >= 0, ErrorCode::UnsupportedType, std::string(scheme_name(scheme)) + " needs non-negative input");
}

std::vector<std::uint64_t> as_unsigned(const Values& values) {
  const auto& v = ints(values);
  return {v.begin(), v.end()};
}

Values decode_bitpack(const EncodedBlock& b) {
  const auto view = bitpack_view(b);
  std::vector<std::int64_t> out(b.value_count);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::int64_t>(bitpack::get(view.bits, view.width, i));
  return make_ints(std::move(out));
}

Values decode_varint(const EncodedBlock& b) {
  std::vector<std::int64_t> out;
  out.reserve(b.value_count);
  std::size_t pos = 0;
  for (std::uint32_t i = 0; i < b.value_count; ++i)
    out.push_back(static_cast<std::int64_t>(read_varint(b.payload, pos)));
  if (pos != b.payload.size()) fail(ErrorCode::CorruptBlock, "trailing bytes in varint stream");
  return make_ints(std::move(out));
}

Values decode_for_delta(const EncodedBlock& b) {
  const auto view = for_delta_view(b);
  std::vector<std::int64_t> out(b.value_count);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::int64_t>(static_cast<std::uint64_t>(view.base) +
                                       bitpack::get(view.bits, view.width, i));
  return make_ints(std::move(out));
}

EncodedBlock build_zigzag(const Values& values, const EncodingConfig& cfg, int budget) {
  check(values.kind() == ValueKind::Int64, ErrorCode::UnsupportedType, "ZigZag needs integer input");
  std::vector<std::int64_t> mapped;
  mapped.reserve(values.size());
  for (auto v : ints(values)) mapped.push_back(static_cast<std::int64_t>(zigzag_encode(v)));
  auto b = leaf(SchemeId::ZigZag, ValueKind::Int64, values.size(), {});
  b.children.push_back(cascade(make_ints(std::move(mapped)), cfg, budget - 1, SchemeId::ZigZag));
  return b;
}

Values decode_zigzag(const EncodedBlock& b) {
  Values child = decode(b.children.at(0));
  if (child.size() != b.value_count) fail(ErrorCode::CorruptBlock, "ZigZag child count mismatch");
  for (auto& v : child.as<std::int64_t>()) v = zigzag_decode(static_cast<std::uint64_t>(v));
  return child;
}

// --- RLE -----------------------------------------------------------------------

Values decode_rle(const EncodedBlock& b) {
  const Values runs = decode(b.children.at(0));
  const Values counts = decode(b.children.at(1));
  if (runs.size() != counts.size()) fail(ErrorCode::CorruptBlock, "RLE run arrays differ in length");
  std::uint64_t total = 0;
  for (auto c : ints(counts)) {
    if (c < 1) fail(ErrorCode::CorruptBlock, "RLE run count must be positive");
    total += static_cast<std::uint64_t>(c);
    if (total > b.value_count) fail(ErrorCode::CorruptBlock, "RLE runs exceed value count");
  }
  if (total != b.value_count) fail(ErrorCode::CorruptBlock, "RLE runs do not cover value count");
  Values out = Values::empty(b.kind);
  std::visit(
      [&](auto& vec) {
        using Vec = std::decay_t<decltype(vec)>;
        const auto& rv = std::get<Vec>(runs.data);
        vec.reserve(b.value_count);
        for (std::size_t r = 0; r < rv.size(); ++r) vec.insert(vec.end(), static_cast<std::size_t>(ints(counts)[r]), rv[r]);
      },
      out.data);
  return out;
}

// --- Nullable ------------------------------------------------------------------

EncodedBlock build_nullable(const Values& values, const EncodingConfig& cfg, int budget) {
  const auto n = values.size();
  Bytes bitmap((n + 7) / 8, 0);
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < n; ++i) {
    if (!values.is_null(i)) {
      bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      present.push_back(i);
    }
  }
  Values dense = values.gather(present);
  dense.validity.clear();
  auto b = leaf(SchemeId::Nullable, values.kind(), n, std::move(bitmap));
  b.children.push_back(cascade(dense, cfg, budget - 1, SchemeId::Nullable));
  return b;
}

Values decode_nullable(const EncodedBlock& b) {
  if (b.payload.size() != (b.value_count + 7) / 8) fail(ErrorCode::CorruptBlock, "Nullable bitmap size mismatch");
  const Values dense = decode(b.children.at(0));
  Values out = Values::empty(b.kind);
  out.validity.assign(b.value_count, 0);
  std::size_t next = 0;
  std::visit(
      [&](auto& vec) {
        using Vec = std::decay_t<decltype(vec)>;
        const auto& dv = std::get<Vec>(dense.data);
        vec.resize(b.value_count);
        for (std::size_t i = 0; i < b.value_count; ++i) {
          if (b.payload[i / 8] >> (i % 8) & 1) {
            if (next >= dv.size()) fail(ErrorCode::CorruptBlock, "Nullable dense values too short");
            vec[i] = dv[next++];
            out.validity[i] = 1;
          }
        }
        if (next != dv.size()) fail(ErrorCode::CorruptBlock, "Nullable dense values too long");
      },
      out.data);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Runs compute_runs(const Values& values) {
  Runs runs{Values::empty(values.kind()), {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && values.element_equal(i, values, i - 1)) {
      ++runs.counts.back();
    } else {
      runs.values.push_from(values, i);
      runs.counts.push_back(1);
    }
  }
  return runs;
}

EncodedBlock rle_from_runs(const Runs& runs, const EncodingConfig& config, int depth_budget) {
  std::uint64_t total = 0;
  for (auto c : runs.counts) total += static_cast<std::uint64_t>(c);
  require_count(total);
  auto b = leaf(SchemeId::RLE, runs.values.kind(), total, {});
  b.children.push_back(cascade(runs.values, config, depth_budget - 1, SchemeId::RLE));
  b.children.push_back(cascade(make_ints(runs.counts), config, depth_budget - 1, SchemeId::RLE));
  return b;
}

BitpackView bitpack_view(const EncodedBlock& b) {
  if (b.payload.empty()) fail(ErrorCode::CorruptBlock, "FixedBitWidth payload missing width");
  const auto width = b.payload[0];
  if (width < 1 || width > 64) fail(ErrorCode::CorruptBlock, "FixedBitWidth width out of range");
  const ByteSpan bits = ByteSpan(b.payload).subspan(1);
  if (bits.size() != bitpack::packed_bytes(b.value_count, width))
    fail(ErrorCode::CorruptBlock, "FixedBitWidth payload size mismatch");
  return {width, bits};
}

ForDeltaView for_delta_view(const EncodedBlock& b) {
  if (b.payload.size() < 9) fail(ErrorCode::CorruptBlock, "ForDelta payload missing header");
  const auto base = load_le<std::int64_t>(b.payload.data());
  const auto width = b.payload[8];
  if (width < 1 || width > 64) fail(ErrorCode::CorruptBlock, "ForDelta width out of range");
  const ByteSpan bits = ByteSpan(b.payload).subspan(9);
  if (bits.size() != bitpack::packed_bytes(b.value_count, width))
    fail(ErrorCode::CorruptBlock, "ForDelta payload size mismatch");
  return {base, width, bits};
}

Values dictionary_entries(const EncodedBlock& b) {
  ByteReader in(b.payload);
  const auto k = in.get_varint();
  if (k > in.remaining()) fail(ErrorCode::CorruptBlock, "dictionary size exceeds payload");
  Values entries = Values::empty(b.kind);
  for (std::uint64_t i = 0; i < k; ++i) detail::read_scalar(in, entries);
  if (!in.done()) fail(ErrorCode::CorruptBlock, "trailing bytes in dictionary payload");
  return entries;
}

EncodedBlock encode_varint(std::span<const std::uint64_t> values) {
  require_count(values.size());
  Bytes payload;
  for (auto v : values) append_varint(payload, v);
  return leaf(SchemeId::Varint, ValueKind::Int64, values.size(), std::move(payload));
}

EncodedBlock encode_bitpack(std::span<const std::uint64_t> values) {
  require_count(values.size());
  std::uint64_t max = 0;
  for (auto v : values) max = std::max(max, v);
  const auto width = bitpack::width_for(max);
  Bytes payload{width};
  auto bits = bitpack::pack(values, width);
  payload.insert(payload.end(), bits.begin(), bits.end());
  return leaf(SchemeId::FixedBitWidth, ValueKind::Int64, values.size(), std::move(payload));
}

EncodedBlock encode_for_delta(std::span<const std::int64_t> values) {
  require_count(values.size());
  const std::int64_t base = values.empty() ? 0 : *std::min_element(values.begin(), values.end());
  std::vector<std::uint64_t> offsets;
  offsets.reserve(values.size());
  std::uint64_t max = 0;
  for (auto v : values) {
    offsets.push_back(static_cast<std::uint64_t>(v) - static_cast<std::uint64_t>(base));
    max = std::max(max, offsets.back());
  }
  const auto width = bitpack::width_for(max);
  Bytes payload(9);
  store_le(payload.data(), base);
  payload[8] = width;
  auto bits = bitpack::pack(offsets, width);
  payload.insert(payload.end(), bits.begin(), bits.end());
  return leaf(SchemeId::ForDelta, ValueKind::Int64, values.size(), std::move(payload));
}

namespace detail {

EncodedBlock build_scheme(SchemeId scheme, const Values& values, const EncodingConfig& config,
                          int depth_budget) {
  require_count(values.size());
  if (is_container(scheme) && depth_budget < 1)
    fail(ErrorCode::UnsupportedType, std::string(scheme_name(scheme)) + " exceeds the recursion depth");
  if (scheme != SchemeId::Nullable) require_no_nulls(values, scheme);
  switch (scheme) {
    case SchemeId::Trivial: return build_trivial(values);
    case SchemeId::Constant: return build_constant(values);
    case SchemeId::MainlyConstant: return build_mainly_constant(values, config, depth_budget);
    case SchemeId::RLE: return rle_from_runs(compute_runs(values), config, depth_budget);
    case SchemeId::Dictionary: return build_dictionary(values, config, depth_budget);
    case SchemeId::FixedBitWidth: {
      require_unsigned(values, scheme);
      auto u = as_unsigned(values);
      return encode_bitpack(u);
    }
    case SchemeId::Varint: {
      require_unsigned(values, scheme);
      auto u = as_unsigned(values);
      return encode_varint(u);
    }
    case SchemeId::ZigZag: return build_zigzag(values, config, depth_budget);
    case SchemeId::ForDelta:
      check(values.kind() == ValueKind::Int64, ErrorCode::UnsupportedType, "ForDelta needs integer input");
      return encode_for_delta(ints(values));
    case SchemeId::Nullable: return build_nullable(values, config, depth_budget);
    case SchemeId::Chunked: {
      Bytes raw;
      write_trivial(raw, values);
      auto b = encode_chunked(raw);
      b.kind = values.kind();
      b.value_count = static_cast<std::uint32_t>(values.size());
      return b;
    }
  }
  fail(ErrorCode::UnsupportedType, "unknown scheme");
}

}  // namespace detail

Values decode(const EncodedBlock& b) {
  Values out;
  switch (b.scheme) {
    case SchemeId::Trivial: out = detail::read_trivial(b.payload, b.kind, b.value_count); break;
    case SchemeId::Constant: out = decode_constant(b); break;
    case SchemeId::MainlyConstant: out = decode_mainly_constant(b); break;
    case SchemeId::RLE: out = decode_rle(b); break;
    case SchemeId::Dictionary: out = decode_dictionary(b); break;
    case SchemeId::FixedBitWidth: out = decode_bitpack(b); break;
    case SchemeId::Varint: out = decode_varint(b); break;
    case SchemeId::ZigZag: out = decode_zigzag(b); break;
    case SchemeId::ForDelta: out = decode_for_delta(b); break;
    case SchemeId::Nullable: out = decode_nullable(b); break;
    case SchemeId::Chunked: out = detail::read_trivial(decode_chunked_bytes(b), b.kind, b.value_count); break;
  }
  if (out.kind() != b.kind) fail(ErrorCode::CorruptBlock, "decoded kind mismatch");
  if (out.size() != b.value_count) fail(ErrorCode::CorruptBlock, "decoded length mismatch");
  return out;
}

EncodedBlock encode_rle(const Values& values, const EncodingConfig& config) {
  return encode_with(SchemeId::RLE, values, config);
}

EncodedBlock encode_dictionary(const Values& values, const EncodingConfig& config) {
  check(values.size() > 0, ErrorCode::EmptyInput, "Dictionary needs at least one value");
  return encode_with(SchemeId::Dictionary, values, config);
}

EncodedBlock encode_zigzag(std::span<const std::int64_t> values, const EncodingConfig& config) {
  return encode_with(SchemeId::ZigZag, Values(std::vector<std::int64_t>(values.begin(), values.end())), config);
}

EncodedBlock encode_nullable(const Values& values, const EncodingConfig& config) {
  return encode_with(SchemeId::Nullable, values, config);
}

}  // namespace bullion::encoding
