#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "bullion/bytes.hpp"

namespace bullion::io {

/// Cumulative I/O accounting for one file handle.
struct IoStats {
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t read_calls = 0;
  std::uint64_t write_calls = 0;
};

/// Random-access file. Reads and writes are positional and accounted.
class File {
 public:
  virtual ~File() = default;

  virtual std::uint64_t size() const = 0;
  /// IoError when the range runs past the end.
  virtual Bytes read(std::uint64_t offset, std::size_t length) = 0;
  /// Writes may extend the file.
  virtual void write(std::uint64_t offset, ByteSpan data) = 0;
  /// Whether the handle holds exclusive access (required for mutation).
  virtual bool exclusive() const = 0;

  const IoStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 protected:
  IoStats stats_;
};

/// In-memory file; always exclusive.
class MemoryFile : public File {
 public:
  MemoryFile() = default;
  explicit MemoryFile(Bytes data) : data_(std::move(data)) {}

  std::uint64_t size() const override { return data_.size(); }
  Bytes read(std::uint64_t offset, std::size_t length) override;
  void write(std::uint64_t offset, ByteSpan data) override;
  bool exclusive() const override { return true; }

  const Bytes& data() const { return data_; }
  Bytes& data() { return data_; }

 private:
  Bytes data_;
};

/// POSIX file using pread/pwrite. Opening for write takes a non-blocking
/// exclusive flock; ExclusiveAccessRequired if another handle holds it.
class PosixFile : public File {
 public:
  enum class Mode { Read, ReadWrite };

  PosixFile(const std::string& path, Mode mode);
  ~PosixFile() override;
  PosixFile(const PosixFile&) = delete;
  PosixFile& operator=(const PosixFile&) = delete;

  std::uint64_t size() const override;
  Bytes read(std::uint64_t offset, std::size_t length) override;
  void write(std::uint64_t offset, ByteSpan data) override;
  bool exclusive() const override { return mode_ == Mode::ReadWrite; }

 private:
  std::string path_;
  Mode mode_;
  int fd_ = -1;
};

/// Read-only memory map of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::string& path);
  ~MappedFile();
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;

  ByteSpan bytes() const { return {static_cast<const std::uint8_t*>(addr_), size_}; }

 private:
  void* addr_ = nullptr;
  std::size_t size_ = 0;
};

Bytes read_whole_file(const std::string& path);
void write_whole_file(const std::string& path, ByteSpan data);

}  // namespace bullion::io
