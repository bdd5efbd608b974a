#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "podvms/errors.hpp"
#include "podvms/linalg.hpp"

// Little-endian binary archive helpers shared by the snapshot, basis, and
// reduced-model container formats.

namespace podvms::io {

static_assert(std::endian::native == std::endian::little,
              "archive formats are little-endian; big-endian hosts are unsupported");

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
  }

  void magic(const char (&m)[9]) { raw(m, 8); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void f64_block(const Vec& v) { raw(v.data(), v.size() * sizeof(double)); }

  ~Writer() { out_.flush(); }

 private:
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failure on '" + path_ + "'");
  }
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path + "' for reading");
  }

  void expect_magic(const char (&m)[9]) {
    char buf[8];
    raw(buf, 8);
    if (std::memcmp(buf, m, 8) != 0)
      throw IoError(path_ + ": bad magic bytes, expected '" + std::string(m, 8) + "'");
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  Vec f64_block(std::size_t n) {
    Vec v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }
  void expect_eof() {
    char c;
    in_.read(&c, 1);
    if (!in_.eof()) throw IoError(path_ + ": trailing bytes after expected end of archive");
  }

 private:
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw IoError(path_ + ": truncated archive");
  }
  std::string path_;
  std::ifstream in_;
};

}  // namespace podvms::io
