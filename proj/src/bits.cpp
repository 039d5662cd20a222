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

#include "nmx/bits.hpp"

#include <algorithm>

#include "nmx/error.hpp"

namespace nmx {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
    case ErrorCode::kNoPrimeInRange: return "NoPrimeInRange";
    case ErrorCode::kFactoringInfeasible: return "FactoringInfeasible";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::kFixedPointAdversary: return "FixedPointAdversary";
    case ErrorCode::kEnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
    case ErrorCode::kEmptySubset: return "EmptySubset";
    case ErrorCode::kZeroSource: return "ZeroSource";
    case ErrorCode::kZeroCoefficient: return "ZeroCoefficient";
    case ErrorCode::kOutputTooWide: return "OutputTooWide";
    case ErrorCode::kIndivisibleBlocks: return "IndivisibleBlocks";
    case ErrorCode::kSeedWidthMismatch: return "SeedWidthMismatch";
    case ErrorCode::kWidthMismatch: return "WidthMismatch";
    case ErrorCode::kInsufficientRandomness: return "InsufficientRandomness";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
  }
  return "Unknown";
}

BitVec::BitVec(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

BitVec BitVec::from_u64(std::uint64_t value, std::size_t nbits) {
  BitVec v(nbits);
  if (nbits > 0) v.words_[0] = value;
  v.trim();
  return v;
}

BitVec BitVec::from_hex(std::string_view hex, std::size_t nbits) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  BitVec v(nbits);
  std::size_t pos = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it, pos += 4) {
    const char c = *it;
    unsigned nib;
    if (c >= '0' && c <= '9') nib = c - '0';
    else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
    else throw Error(ErrorCode::kInvalidArgument, "bad hex digit");
    for (unsigned b = 0; b < 4; ++b) {
      if ((nib >> b) & 1) {
        if (pos + b >= nbits) throw Error(ErrorCode::kWidthMismatch, "hex value wider than field");
        v.set(pos + b, true);
      }
    }
  }
  return v;
}

bool BitVec::get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }

void BitVec::set(std::size_t i, bool b) {
  const std::uint64_t m = std::uint64_t{1} << (i % 64);
  if (b) words_[i / 64] |= m;
  else words_[i / 64] &= ~m;
}

void BitVec::flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

std::uint64_t BitVec::bits(std::size_t offset, unsigned width) const {
  if (width == 0 || offset >= nbits_) return 0;
  const std::size_t w = offset / 64;
  const unsigned sh = offset % 64;
  std::uint64_t v = words_[w] >> sh;
  if (sh != 0 && w + 1 < words_.size()) v |= words_[w + 1] << (64 - sh);
  return v & low_mask(width);
}

void BitVec::set_bits(std::size_t offset, unsigned width, std::uint64_t value) {
  if (width == 0) return;
  value &= low_mask(width);
  const std::size_t w = offset / 64;
  const unsigned sh = offset % 64;
  const std::uint64_t m = low_mask(width);
  words_[w] = (words_[w] & ~(m << sh)) | (value << sh);
  if (sh != 0 && sh + width > 64 && w + 1 < words_.size()) {
    const unsigned spill = sh + width - 64;
    const std::uint64_t m2 = low_mask(spill);
    words_[w + 1] = (words_[w + 1] & ~m2) | (value >> (64 - sh));
  }
  trim();
}

BitVec BitVec::slice(std::size_t offset, std::size_t width) const {
  BitVec out(width);
  for (std::size_t i = 0; i < width; i += 64) {
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(64, width - i));
    out.set_bits(i, w, bits(offset + i, w));
  }
  return out;
}

BitVec BitVec::concat(const BitVec& hi) const {
  BitVec out = resized(nbits_ + hi.nbits_);
  for (std::size_t i = 0; i < hi.nbits_; i += 64) {
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(64, hi.nbits_ - i));
    out.set_bits(nbits_ + i, w, hi.bits(i, w));
  }
  return out;
}

BitVec BitVec::resized(std::size_t nbits) const {
  BitVec out(nbits);
  const std::size_t n = std::min(out.words_.size(), words_.size());
  std::copy_n(words_.begin(), n, out.words_.begin());
  out.trim();
  return out;
}

std::uint64_t BitVec::to_u64() const {
  if (nbits_ > 64) throw Error(ErrorCode::kWidthMismatch, "bit vector wider than 64 bits");
  return words_.empty() ? 0 : words_[0];
}

bool BitVec::is_zero() const {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t BitVec::popcount() const {
  std::size_t c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

std::string BitVec::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t nibbles = std::max<std::size_t>(1, (nbits_ + 3) / 4);
  std::string s(nibbles, '0');
  for (std::size_t i = 0; i < nibbles; ++i) {
    s[nibbles - 1 - i] = kDigits[bits(4 * i, 4)];
  }
  return s;
}

BitVec& BitVec::operator^=(const BitVec& other) {
  if (other.nbits_ != nbits_) throw Error(ErrorCode::kDimensionMismatch, "xor of unequal widths");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

bool operator<(const BitVec& a, const BitVec& b) {
  if (a.nbits_ != b.nbits_) return a.nbits_ < b.nbits_;
  return std::lexicographical_compare(a.words_.rbegin(), a.words_.rend(),
                                      b.words_.rbegin(), b.words_.rend());
}

void BitVec::trim() {
  if (nbits_ % 64 != 0 && !words_.empty()) words_.back() &= low_mask(nbits_ % 64);
}

BitVec concat_all(const std::vector<BitVec>& parts) {
  BitVec out;
  for (const auto& p : parts) out = out.concat(p);
  return out;
}

}  // namespace nmx
