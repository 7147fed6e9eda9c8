#include "bullion/io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "bullion/error.hpp"

namespace bullion::io {

namespace {

[[noreturn]] void io_fail(const std::string& what, const std::string& path) {
  fail(ErrorCode::IoError, what + " '" + path + "': " + std::strerror(errno));
}

}  // namespace

Bytes MemoryFile::read(std::uint64_t offset, std::size_t length) {
  check(offset <= data_.size() && length <= data_.size() - offset, ErrorCode::IoError, "read past end of file");
  stats_.bytes_read += length;
  ++stats_.read_calls;
  return Bytes(data_.begin() + static_cast<std::ptrdiff_t>(offset),
               data_.begin() + static_cast<std::ptrdiff_t>(offset + length));
}

void MemoryFile::write(std::uint64_t offset, ByteSpan data) {
  if (offset + data.size() > data_.size()) data_.resize(offset + data.size());
  std::memcpy(data_.data() + offset, data.data(), data.size());
  stats_.bytes_written += data.size();
  ++stats_.write_calls;
}

PosixFile::PosixFile(const std::string& path, Mode mode) : path_(path), mode_(mode) {
  fd_ = ::open(path.c_str(), mode == Mode::Read ? O_RDONLY : O_RDWR);
  if (fd_ < 0) io_fail("cannot open", path);
  if (mode == Mode::ReadWrite && ::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorCode::ExclusiveAccessRequired, "another process holds '" + path + "'");
  }
}

PosixFile::~PosixFile() {
  if (fd_ >= 0) ::close(fd_);  // also releases the flock
}

std::uint64_t PosixFile::size() const {
  struct stat st {};
  if (::fstat(fd_, &st) != 0) io_fail("cannot stat", path_);
  return static_cast<std::uint64_t>(st.st_size);
}

Bytes PosixFile::read(std::uint64_t offset, std::size_t length) {
  Bytes out(length);
  std::size_t done = 0;
  while (done < length) {
    const auto n = ::pread(fd_, out.data() + done, length - done, static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("cannot read", path_);
    }
    if (n == 0) fail(ErrorCode::IoError, "read past end of '" + path_ + "'");
    done += static_cast<std::size_t>(n);
  }
  stats_.bytes_read += length;
  ++stats_.read_calls;
  return out;
}

void PosixFile::write(std::uint64_t offset, ByteSpan data) {
  check(mode_ == Mode::ReadWrite, ErrorCode::ExclusiveAccessRequired, "file opened read-only");
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::pwrite(fd_, data.data() + done, data.size() - done, static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("cannot write", path_);
    }
    done += static_cast<std::size_t>(n);
  }
  stats_.bytes_written += data.size();
  ++stats_.write_calls;
}

MappedFile::MappedFile(const std::string& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) io_fail("cannot open", path);
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    io_fail("cannot stat", path);
  }
  size_ = static_cast<std::size_t>(st.st_size);
  if (size_ > 0) {
    addr_ = ::mmap(nullptr, size_, PROT_READ, MAP_SHARED, fd, 0);
    if (addr_ == MAP_FAILED) {
      addr_ = nullptr;
      ::close(fd);
      io_fail("cannot map", path);
    }
  }
  ::close(fd);
}

MappedFile::~MappedFile() {
  if (addr_) ::munmap(addr_, size_);
}

Bytes read_whole_file(const std::string& path) {
  PosixFile f(path, PosixFile::Mode::Read);
  return f.read(0, f.size());
}

void write_whole_file(const std::string& path, ByteSpan data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) io_fail("cannot create", path);
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      io_fail("cannot write", path);
    }
    done += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

}  // namespace bullion::io
