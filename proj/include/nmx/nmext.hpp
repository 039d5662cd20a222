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
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nmx/bits.hpp"
#include "nmx/codes.hpp"
#include "nmx/dist.hpp"
#include "nmx/extractors.hpp"
#include "nmx/fields.hpp"

namespace nmx {

enum class NmVariant {
  kHalf,          // IP(x, (z, z^3)), l = n/2
  kBelowHalf,     // IP((x, g^x), (z, z^3)) over GF(2^p), p prime just above n
  kFpQuadratic,   // (x*y + x^2*y^2 mod p) mod M
  kMultibit,      // bit i uses the column scaled by basis element b_i
  kReducedSeed,   // IP((x, g^x), (z, z^3, ..., z^(4t-1)) padded), l = p/t
  kGenericR,      // IP(f(x), (z, z^3, ..., z^(2r+1)))
};

// CLI spellings: half, below-half, fp-quad, multibit, reduced-seed, generic-r.
std::string_view variant_name(NmVariant v);
NmVariant variant_from_name(std::string_view name);

using SourceEncodingFn = std::function<BitVec(const BitVec& x)>;

struct NmExtConfig {
  NmVariant variant = NmVariant::kHalf;
  unsigned n = 0;                       // source bits
  unsigned r = 1;                       // encoding degree parameter
  unsigned ell = 0;                     // generic-r field width
  unsigned t = 1;                       // reduced-seed distance parameter
  std::uint64_t p = 0;                  // fp-quad prime
  std::uint64_t modulus = 0;            // fp-quad output modulus M
  unsigned m = 1;                       // multibit output bits
  NmVariant base = NmVariant::kHalf;    // multibit base construction
  Embed embed = Embed::kTopBit;
  SourceEncodingFn f;                   // generic-r; identity when empty

  nlohmann::json to_json() const;
  static NmExtConfig from_json(const nlohmann::json& j);
};

// A configured construction. Sources and seeds are dense integers when they
// fit in 64 bits; eval_bits handles wider sources.
class NmExtractor {
 public:
  explicit NmExtractor(NmExtConfig cfg);

  const NmExtConfig& config() const { return cfg_; }
  unsigned source_bits() const { return source_bits_; }
  unsigned seed_bits() const { return seed_bits_; }
  std::uint64_t seed_count() const { return seed_count_; }
  unsigned output_bits() const { return output_bits_; }
  // Field width l of the seed column (0 for fp-quad).
  unsigned field_bits() const;
  // Prime p for below-half, reduced-seed and fp-quad, else 0.
  std::uint64_t prime() const { return p_; }

  // False for inputs outside the construction's source domain (x = 0 for
  // the (x, g^x) encodings, x >= p for fp-quad).
  bool accepts_source(std::uint64_t x) const;

  std::uint64_t eval(std::uint64_t x, std::uint64_t y) const;
  BitVec eval_bits(const BitVec& x, std::uint64_t y) const;
  ExtFn as_fn() const;
  ExtractorSpec spec() const;

  // Source encoding as the wide bit vector the column is paired with.
  BitVec encode_source(const BitVec& x) const;
  // Seed column scaled by basis element `i` (i = 0 gives the plain column),
  // zero-padded to the source-encoding width.
  BitVec encode_seed(std::uint64_t y, unsigned i = 0) const;

 private:
  std::uint64_t eval_fp(std::uint64_t x, std::uint64_t y) const;
  std::uint64_t encode_source_u64(std::uint64_t x) const;
  std::uint64_t encode_seed_u64(std::uint64_t y, unsigned i) const;

  NmExtConfig cfg_;
  unsigned source_bits_ = 0;
  unsigned seed_bits_ = 0;
  std::uint64_t seed_count_ = 0;
  unsigned output_bits_ = 1;
  unsigned enc_width_ = 0;       // width of the IP operands
  std::uint64_t p_ = 0;
  std::optional<GF2Ctx> field_;  // source field GF(2^p) for the exp encoding
  GF2Elem g_ = 0;
  std::optional<SeedEncoding> seed_enc_;
  std::vector<GF2Elem> basis_;
  // Packed seed columns for every (seed, basis index) when enc_width_ <= 64
  // and the seed space is small.
  std::vector<std::uint64_t> seed_cache_;
  std::vector<std::uint64_t> exp_cache_;  // g^x per x when small
};

std::uint64_t nm_half(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg);
std::uint64_t nm_below(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg);
std::uint64_t nm_fp(FpElem x, FpElem y, const NmExtConfig& cfg);
BitVec nm_multibit(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg);
std::uint64_t nm_reduced_seed(const BitVec& x, std::uint64_t y,
                              const NmExtConfig& cfg);
std::uint64_t nm_generic_r(const BitVec& x, std::uint64_t y,
                           const NmExtConfig& cfg);

// Prime used by the (x, g^x) constructions for an n-bit source: the least
// prime in (n, n + ceil(n^0.525) + 1).
std::uint64_t below_half_prime(unsigned n);

// XOR over condensed rows of nm(x, row_j || tag(j)), tags of
// max(1, ceil(log2 C)) bits. Throws kSeedWidthMismatch unless
// row width + tag width equals the nm seed width.
std::uint64_t nm_to_two_source(const BitVec& x, const BitVec& y,
                               const NmExtractor& nm, const CondenserPlan& plan);
unsigned two_source_tag_bits(unsigned rows);

}  // namespace nmx
