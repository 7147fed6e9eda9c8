#include <memory>

#include <zstd.h>

#include "bullion/encoding.hpp"

namespace bullion::encoding {

namespace {

constexpr int kZstdLevel = 3;
constexpr std::size_t kChunkEntrySize = 4 + 4 + 4 + 1;

struct CctxDeleter {
  void operator()(ZSTD_CCtx* c) const { ZSTD_freeCCtx(c); }
};
struct DctxDeleter {
  void operator()(ZSTD_DCtx* d) const { ZSTD_freeDCtx(d); }
};

ZSTD_CCtx* compress_context() {
  thread_local std::unique_ptr<ZSTD_CCtx, CctxDeleter> ctx(ZSTD_createCCtx());
  return ctx.get();
}

ZSTD_DCtx* decompress_context() {
  thread_local std::unique_ptr<ZSTD_DCtx, DctxDeleter> ctx(ZSTD_createDCtx());
  return ctx.get();
}

}  // namespace

EncodedBlock encode_chunked(ByteSpan bytes) {
  const std::size_t n_chunks = (bytes.size() + kChunkSize - 1) / kChunkSize;
  Bytes data;
  std::vector<ChunkInfo> table;
  Bytes scratch(ZSTD_compressBound(kChunkSize));
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const auto raw = bytes.subspan(c * kChunkSize, std::min(kChunkSize, bytes.size() - c * kChunkSize));
    const std::size_t z = ZSTD_compressCCtx(compress_context(), scratch.data(), scratch.size(), raw.data(),
                                            raw.size(), kZstdLevel);
    ChunkInfo info{static_cast<std::uint32_t>(data.size()), 0, static_cast<std::uint32_t>(raw.size()), false};
    if (!ZSTD_isError(z) && z < raw.size()) {
      info.compressed = true;
      info.stored_size = static_cast<std::uint32_t>(z);
      data.insert(data.end(), scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(z));
    } else {
      info.stored_size = static_cast<std::uint32_t>(raw.size());
      data.insert(data.end(), raw.begin(), raw.end());
    }
    table.push_back(info);
  }

  EncodedBlock b;
  b.scheme = SchemeId::Chunked;
  b.kind = ValueKind::Int64;
  b.value_count = static_cast<std::uint32_t>(bytes.size());
  ByteWriter w(b.payload);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(table.size()));
  for (const auto& t : table) {
    w.put<std::uint32_t>(t.offset);
    w.put<std::uint32_t>(t.stored_size);
    w.put<std::uint32_t>(t.raw_size);
    w.put<std::uint8_t>(t.compressed ? 1 : 0);
  }
  w.put_bytes(data);
  return b;
}

std::vector<ChunkInfo> chunk_table(const EncodedBlock& block) {
  ByteReader in(block.payload);
  const auto n = in.get<std::uint32_t>();
  if (static_cast<std::uint64_t>(n) * kChunkEntrySize > in.remaining())
    fail(ErrorCode::CorruptBlock, "chunk table overruns payload");
  std::vector<ChunkInfo> table(n);
  for (auto& t : table) {
    t.offset = in.get<std::uint32_t>();
    t.stored_size = in.get<std::uint32_t>();
    t.raw_size = in.get<std::uint32_t>();
    const auto flag = in.get<std::uint8_t>();
    if (flag > 1) fail(ErrorCode::CorruptBlock, "bad chunk flag");
    t.compressed = flag == 1;
    if (t.raw_size > kChunkSize) fail(ErrorCode::CorruptBlock, "chunk larger than 256 KiB");
  }
  return table;
}

Bytes decode_chunked_bytes(const EncodedBlock& block) {
  const auto table = chunk_table(block);
  const std::size_t data_start = 4 + table.size() * kChunkEntrySize;
  const ByteSpan data = ByteSpan(block.payload).subspan(data_start);
  Bytes out;
  for (const auto& t : table) {
    if (static_cast<std::uint64_t>(t.offset) + t.stored_size > data.size())
      fail(ErrorCode::CorruptBlock, "chunk overruns payload");
    const auto stored = data.subspan(t.offset, t.stored_size);
    const auto at = out.size();
    out.resize(at + t.raw_size);
    if (t.compressed) {
      const auto got = ZSTD_decompressDCtx(decompress_context(), out.data() + at, t.raw_size, stored.data(),
                                           stored.size());
      if (ZSTD_isError(got) || got != t.raw_size) fail(ErrorCode::CorruptBlock, "zstd chunk failed to decode");
    } else {
      if (t.stored_size != t.raw_size) fail(ErrorCode::CorruptBlock, "raw chunk size mismatch");
      std::copy(stored.begin(), stored.end(), out.begin() + static_cast<std::ptrdiff_t>(at));
    }
  }
  return out;
}

}  // namespace bullion::encoding
