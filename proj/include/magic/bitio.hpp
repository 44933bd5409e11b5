#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "magic/errors.hpp"

namespace magic {

/// MSB-first bit packer: the first bit written lands in the high bit of the
/// first byte, matching the wire layout of encoded images.
class BitWriter {
 public:
  void write(std::uint64_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) put_bit((value >> i) & 1u);
  }

  void pad_to_byte() {
    while (fill_ != 0) put_bit(0);
  }

  std::uint64_t bit_count() const { return bytes_.size() * 8ull - (fill_ ? 8 - fill_ : 0); }

  std::vector<std::uint8_t> take() {
    pad_to_byte();
    return std::move(bytes_);
  }

 private:
  void put_bit(unsigned b) {
    if (fill_ == 0) bytes_.push_back(0);
    bytes_.back() = static_cast<std::uint8_t>(bytes_.back() | (b << (7 - fill_)));
    fill_ = (fill_ + 1) % 8;
  }

  std::vector<std::uint8_t> bytes_;
  int fill_ = 0;
};

/// MSB-first reader over a byte span. Reading past the end throws
/// FormatError, which the codec surfaces as a truncated stream.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t read(int bits) {
    std::uint64_t v = 0;
    for (int i = 0; i < bits; ++i) v = (v << 1) | get_bit();
    return v;
  }

  std::uint64_t bits_consumed() const { return pos_; }
  std::uint64_t bits_remaining() const { return bytes_.size() * 8ull - pos_; }

 private:
  unsigned get_bit() {
    if (pos_ >= bytes_.size() * 8ull) throw FormatError("bit stream truncated");
    const std::uint64_t byte = pos_ >> 3;
    const unsigned bit = 7u - (pos_ & 7u);
    ++pos_;
    return (bytes_[byte] >> bit) & 1u;
  }

  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

}  // namespace magic
