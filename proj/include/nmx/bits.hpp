/*
 * Copyright 2026 The nmx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nmx {

inline bool parity64(std::uint64_t v) { return (std::popcount(v) & 1) != 0; }

inline std::uint64_t low_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

// Smallest b with 2^b >= v (ceil_log2(1) == 0).
inline unsigned ceil_log2(std::uint64_t v) {
  return v <= 1 ? 0 : 64 - static_cast<unsigned>(std::countl_zero(v - 1));
}

// Fixed-width little-endian bit string. Bit 0 is the "first" bit; when
// several fields are concatenated the first field occupies the low positions.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t nbits);

  static BitVec from_u64(std::uint64_t value, std::size_t nbits);
  static BitVec from_hex(std::string_view hex, std::size_t nbits);

  std::size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  bool get(std::size_t i) const;
  void set(std::size_t i, bool b);
  void flip(std::size_t i);

  // Up to 64 bits starting at `offset`; bits past size() read as zero.
  std::uint64_t bits(std::size_t offset, unsigned width) const;
  void set_bits(std::size_t offset, unsigned width, std::uint64_t value);

  BitVec slice(std::size_t offset, std::size_t width) const;
  BitVec concat(const BitVec& hi) const;
  // Zero-extends or truncates to `nbits`.
  BitVec resized(std::size_t nbits) const;

  std::uint64_t to_u64() const;  // requires size() <= 64
  bool is_zero() const;
  std::size_t popcount() const;
  std::string to_hex() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  BitVec& operator^=(const BitVec& other);
  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
  friend bool operator==(const BitVec& a, const BitVec& b) {
    return a.nbits_ == b.nbits_ && a.words_ == b.words_;
  }
  friend bool operator<(const BitVec& a, const BitVec& b);

 private:
  void trim();

  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

// Concatenation of several fields, first field lowest.
BitVec concat_all(const std::vector<BitVec>& parts);

}  // namespace nmx
