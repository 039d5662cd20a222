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

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmx/bits.hpp"

namespace nmx {

// Parity of u AND v; throws kDimensionMismatch on unequal lengths.
bool ip_f2(const BitVec& u, const BitVec& v);

// Inner-product two-source extractor.
bool two_source_ip(const BitVec& x, const BitVec& y);

// Applies sigma = multiplication by the field generator, block by block:
// blocks are 64 bits wide (the last may be narrower) and a vector of at most
// 64 bits is a single GF(2^n) element.
BitVec sigma_shift(const BitVec& y);

// Bit i is ip_f2(x, sigma^i(y)); bit 0 is two_source_ip(x, y).
BitVec two_source_ip_multi(const BitVec& x, const BitVec& y, unsigned m);

// Two-source step for inputs of different lengths: s is folded onto |x| bits
// by XOR of |x|-bit chunks, then two_source_ip_multi(x, fold(s), m).
BitVec two_source_fold(const BitVec& s, const BitVec& x, unsigned m);

// Universal-hash extractor. With L = max(|seed|, m) <= 64, x is cut into
// L-bit blocks x_1..x_c and the output is the low m bits of
// sum_i x_i * seed^i in GF(2^L). When |seed| = |x| this is the low m bits of
// x * seed. Throws kOutputTooWide if m > |x| or L > 64.
BitVec strong_seeded_ext(const BitVec& x, const BitVec& seed, unsigned m);
std::uint64_t strong_seeded_ext_u64(std::uint64_t x, unsigned n,
                                    std::uint64_t seed, unsigned d, unsigned m);

struct CondenserPlan {
  unsigned rows = 1;
  double promised_rate = 0.9;
};

struct CondenserOutput {
  std::vector<BitVec> rows;
  std::size_t row_width = 0;
  double promised_rate = 0;
};

// Block-promise condenser: C contiguous blocks of x.
CondenserOutput somewhere_condense(const BitVec& x, const CondenserPlan& plan);

// z mod M for M a power of two.
std::uint64_t reduce_mod(std::uint64_t z, std::uint64_t modulus);

struct ExtractorClaim {
  double k = 0;
  double eps = 0;
};

struct ExtractorSpec {
  std::string name;
  unsigned n = 0;
  unsigned d = 0;
  unsigned m = 0;
  std::vector<ExtractorClaim> claims;

  nlohmann::json to_json() const;
  static ExtractorSpec from_json(const nlohmann::json& j);
};

}  // namespace nmx
