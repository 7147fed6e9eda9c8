#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include "bullion/error.hpp"

namespace bullion {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

static_assert(std::endian::native == std::endian::little, "bullion assumes a little-endian host");

template <typename T>
inline T load_le(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
inline void store_le(std::uint8_t* p, T v) {
  std::memcpy(p, &v, sizeof(T));
}

/// Append-only little-endian byte sink.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes& out) : out_(&out) {}

  template <typename T>
  void put(T v) {
    const auto n = buf().size();
    buf().resize(n + sizeof(T));
    store_le(buf().data() + n, v);
  }

  void put_bytes(ByteSpan bytes) { buf().insert(buf().end(), bytes.begin(), bytes.end()); }
  void put_string(std::string_view s) {
    buf().insert(buf().end(), reinterpret_cast<const std::uint8_t*>(s.data()),
                 reinterpret_cast<const std::uint8_t*>(s.data()) + s.size());
  }
  void put_varint(std::uint64_t v);
  void pad_to(std::size_t alignment) {
    while (buf().size() % alignment != 0) buf().push_back(0);
  }

  std::size_t size() const { return out_ ? out_->size() : own_.size(); }
  Bytes& bytes() { return buf(); }
  Bytes take() { return std::move(own_); }

 private:
  Bytes& buf() { return out_ ? *out_ : own_; }
  const Bytes& buf() const { return out_ ? *out_ : own_; }

  Bytes own_;
  Bytes* out_ = nullptr;
};

/// Bounds-checked little-endian cursor; every overrun is a CorruptBlock.
class ByteReader {
 public:
  explicit ByteReader(ByteSpan data) : data_(data) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = load_le<T>(data_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }

  ByteSpan get_bytes(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::string_view get_string(std::size_t n) {
    auto s = get_bytes(n);
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }

  std::uint64_t get_varint();

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) fail(ErrorCode::CorruptBlock, "unexpected end of buffer");
  }

  ByteSpan data_;
  std::size_t pos_ = 0;
};

// LEB128 primitives shared by the varint scheme, sparse-delta metadata and masking.
std::size_t varint_size(std::uint64_t v);
void append_varint(Bytes& out, std::uint64_t v);
/// Decodes one LEB128 value starting at `pos`; advances `pos`. Rejects >10-byte encodings.
std::uint64_t read_varint(ByteSpan data, std::size_t& pos);

}  // namespace bullion
