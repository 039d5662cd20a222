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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nmx/bits.hpp"
#include "nmx/dist.hpp"
#include "nmx/fields.hpp"

namespace nmx {

// How a seed index maps to a nonzero field element (a parity-check column).
enum class Embed {
  // z = y + 2^(l-1): (l-1)-bit seeds, top bit forced so z != 0.
  kTopBit,
  // z = y + 1 over y in [0, 2^l - 2]: every nonzero column, used by tests
  // that quantify over the full column set.
  kAllColumns,
};

class SeedEncoding {
 public:
  SeedEncoding(GF2Ctx ctx, unsigned r, Embed embed = Embed::kTopBit);

  const GF2Ctx& ctx() const { return ctx_; }
  unsigned r() const { return r_; }
  Embed embed_kind() const { return embed_; }
  unsigned ell() const { return ctx_.ell(); }
  // Number of valid seed indices.
  std::uint64_t seed_count() const;
  // Bits needed to write a seed index.
  unsigned seed_bits() const;
  // Output width (r+1)*l.
  unsigned width() const { return (r_ + 1) * ctx_.ell(); }

  GF2Elem embed(std::uint64_t y) const;
  // (z, z^3, ..., z^(2r+1)) as r+1 field elements.
  std::vector<GF2Elem> blocks(std::uint64_t y) const;
  // The same column packed into one word; requires width() <= 64.
  std::uint64_t packed(std::uint64_t y) const;

 private:
  GF2Ctx ctx_;
  unsigned r_;
  Embed embed_;
};

// Packs l-bit blocks into a bit vector, block 0 lowest.
BitVec pack_blocks(const std::vector<GF2Elem>& blocks, unsigned ell);
// Column (z, z^3, ..., z^(2r+1)) for an arbitrary nonzero z.
std::vector<GF2Elem> bch_column(GF2Elem z, unsigned r, const GF2Ctx& ctx);

BitVec enc_bch(std::uint64_t y, const SeedEncoding& enc);
// (x, g^x) with x read as an integer exponent; throws kZeroSource on x == 0.
BitVec enc_source_exp(std::uint64_t x, const GF2Ctx& ctx, GF2Elem g);
std::pair<FpElem, FpElem> enc_source_quad(FpElem x, const FpCtx& ctx);

struct IndependenceAudit {
  bool ok = true;
  std::uint64_t subsets_checked = 0;
  // Column field elements z of a dependent w-subset when !ok.
  std::vector<GF2Elem> witness;
};

// Checks every w-subset of the full column set {(z, z^3, ...) : z != 0} for
// F_2-linear independence. Requires (r+1)*l <= 64.
IndependenceAudit audit_linear_independence(
    const SeedEncoding& enc, unsigned w,
    std::uint64_t cap = kDefaultEnumerationCap);

// max_v |{y : enc(y) + enc(A(y)) = v}|.
unsigned audit_preimages_sum(const SeedEncoding& enc, const AdversaryFn& a);
// max_v |{y : t1*(z, z^3) + t2*(z', z'^3) = v}|, z = embed(y), z' = embed(A(y)).
unsigned audit_preimages_linear(const SeedEncoding& enc, const AdversaryFn& a,
                                GF2Elem t1, GF2Elem t2);
// max_v |{y : (y, y^2) + r*(A(y), A(y)^2) = v}| over F_p.
unsigned audit_preimages_fp(const FpCtx& ctx, const AdversaryFn& a,
                            FpElem r_coef);

struct AuditReport {
  std::string claim;
  nlohmann::json params;
  std::uint64_t functions_checked = 0;
  unsigned max_preimages = 0;
  unsigned bound = 0;
  std::uint64_t violations = 0;
  std::optional<nlohmann::json> witness;

  bool holds() const { return violations == 0; }
  nlohmann::json to_json() const;
};

}  // namespace nmx
