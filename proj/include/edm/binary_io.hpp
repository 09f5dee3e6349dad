#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "edm/error.hpp"

namespace edm {

// Little-endian byte encoding for the versioned blobs. Doubles travel as
// their IEEE-754 bit patterns, so a save/load cycle is exact.
class BinaryWriter {
 public:
  void magic(std::string_view tag) { bytes_.append(tag); }

  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<char>(v >> (8 * b)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    bytes_.append(s);
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void u64s(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (auto x : v) u64(x);
  }

  const std::string& bytes() const noexcept { return bytes_; }
  std::string take() && { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view tag) {
    if (bytes_.substr(pos_, tag.size()) != tag)
      throw FormatError("missing magic header \"" + std::string(tag) + "\"");
    pos_ += tag.size();
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b]))
           << (8 * b);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = count(1);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> f64s() {
    std::vector<double> v(count(8));
    for (auto& x : v) x = f64();
    return v;
  }
  std::vector<std::size_t> u64s() {
    std::vector<std::size_t> v(count(8));
    for (auto& x : v) x = u64();
    return v;
  }

  bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated blob");
  }
  // Element count prefix, bounded by the bytes actually left.
  std::size_t count(std::size_t elem_size) {
    const auto n = u64();
    if (n > (bytes_.size() - pos_) / elem_size) throw FormatError("truncated blob");
    return static_cast<std::size_t>(n);
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace edm
