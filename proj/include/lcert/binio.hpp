#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lcert/common.hpp"

namespace lcert {

static_assert(std::endian::native == std::endian::little,
              "artifact files are little-endian; big-endian hosts are unsupported");

/// Little-endian binary writer for artifact files.
class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) fail("cannot open '%s' for writing", path.c_str());
  }
  void magic(const char m[4]) { out_.write(m, 4); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void f64(double v) { raw(&v, 8); }
  void f64s(const std::vector<double>& v) { raw(v.data(), v.size() * 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void close() {
    out_.close();
    if (!out_) fail("write to '%s' failed", path_.c_str());
  }

 private:
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  std::string path_;
  std::ofstream out_;
};

/// Reader with explicit truncation diagnostics.
class BinReader {
 public:
  explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) fail("cannot open '%s' for reading", path.c_str());
  }
  void expect_magic(const char m[4]) {
    char got[4];
    raw(got, 4, "magic");
    if (std::string(got, 4) != std::string(m, 4))
      fail("'%s' is not a %.4s file (magic '%.4s')", path_.c_str(), m, got);
  }
  std::uint32_t u32() { return val<std::uint32_t>("u32"); }
  std::uint64_t u64() { return val<std::uint64_t>("u64"); }
  std::uint16_t u16() { return val<std::uint16_t>("u16"); }
  double f64() { return val<double>("f64"); }
  std::vector<double> f64s(std::size_t n) {
    std::vector<double> v(n);
    raw(v.data(), n * 8, "f64 block");
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    if (n > (1u << 20)) fail("'%s': corrupt string length %u", path_.c_str(), n);
    std::string s(n, '\0');
    raw(s.data(), n, "string");
    return s;
  }
  void expect_eof() {
    char c;
    if (in_.read(&c, 1)) fail("'%s': trailing bytes after payload", path_.c_str());
  }

 private:
  template <typename T>
  T val(const char* what) {
    T v;
    raw(&v, sizeof(T), what);
    return v;
  }
  void raw(void* p, std::size_t n, const char* what) {
    if (!in_.read(static_cast<char*>(p), n))
      fail("'%s': truncated file while reading %s", path_.c_str(), what);
  }
  std::string path_;
  std::ifstream in_;
};

}  // namespace lcert
