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

#include "nmx/codes.hpp"

#include <algorithm>

#include "nmx/error.hpp"

namespace nmx {
namespace {

// Largest multiplicity in a small multiset.
unsigned max_multiplicity(std::vector<std::uint64_t>& vals) {
  std::sort(vals.begin(), vals.end());
  unsigned best = 0;
  for (std::size_t i = 0; i < vals.size();) {
    std::size_t j = i;
    while (j < vals.size() && vals[j] == vals[i]) ++j;
    best = std::max(best, static_cast<unsigned>(j - i));
    i = j;
  }
  return best;
}

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binom_sat(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > ~std::uint64_t{0}) return ~std::uint64_t{0};
  }
  return static_cast<std::uint64_t>(acc);
}

void check_adversary(const SeedEncoding& enc, const AdversaryFn& a) {
  if (a.domain_size() != enc.seed_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "adversary domain does not match the seed space");
  }
  a.require_fixed_point_free();
}

}  // namespace

SeedEncoding::SeedEncoding(GF2Ctx ctx, unsigned r, Embed embed)
    : ctx_(ctx), r_(r), embed_(embed) {
  if (embed == Embed::kTopBit && ctx.ell() > 63) {
    throw Error(ErrorCode::kInvalidArgument, "top-bit embedding needs l <= 63");
  }
}

std::uint64_t SeedEncoding::seed_count() const {
  if (embed_ == Embed::kTopBit) return std::uint64_t{1} << (ctx_.ell() - 1);
  return ctx_.mask();
}

unsigned SeedEncoding::seed_bits() const {
  if (embed_ == Embed::kTopBit) return ctx_.ell() - 1;
  return ceil_log2(ctx_.mask());
}

GF2Elem SeedEncoding::embed(std::uint64_t y) const {
  if (y >= seed_count()) {
    throw Error(ErrorCode::kInvalidArgument, "seed " + std::to_string(y) + " outside the embedded domain");
  }
  if (embed_ == Embed::kTopBit) return y | (std::uint64_t{1} << (ctx_.ell() - 1));
  return y + 1;
}

std::vector<GF2Elem> SeedEncoding::blocks(std::uint64_t y) const {
  return bch_column(embed(y), r_, ctx_);
}

std::uint64_t SeedEncoding::packed(std::uint64_t y) const {
  if (width() > 64) throw Error(ErrorCode::kInvalidArgument, "column wider than 64 bits");
  std::uint64_t out = 0;
  unsigned off = 0;
  for (GF2Elem b : blocks(y)) {
    out |= b << off;
    off += ctx_.ell();
  }
  return out;
}

BitVec pack_blocks(const std::vector<GF2Elem>& blocks, unsigned ell) {
  BitVec out(blocks.size() * ell);
  for (std::size_t i = 0; i < blocks.size(); ++i) out.set_bits(i * ell, ell, blocks[i]);
  return out;
}

std::vector<GF2Elem> bch_column(GF2Elem z, unsigned r, const GF2Ctx& ctx) {
  if (z == 0 || !ctx.contains(z)) throw Error(ErrorCode::kInvalidArgument, "column index must be a nonzero field element");
  std::vector<GF2Elem> out;
  out.reserve(r + 1);
  const GF2Elem z2 = gf_square(z, ctx);
  GF2Elem cur = z;
  for (unsigned i = 0; i <= r; ++i) {
    out.push_back(cur);
    cur = gf_mul(cur, z2, ctx);
  }
  return out;
}

BitVec enc_bch(std::uint64_t y, const SeedEncoding& enc) {
  return pack_blocks(enc.blocks(y), enc.ell());
}

BitVec enc_source_exp(std::uint64_t x, const GF2Ctx& ctx, GF2Elem g) {
  if (x == 0) throw Error(ErrorCode::kZeroSource, "source value 0 is not in the multiplicative group");
  if (!ctx.contains(x)) throw Error(ErrorCode::kWidthMismatch, "source wider than the field");
  return pack_blocks({x, gf_pow(g, x, ctx)}, ctx.ell());
}

std::pair<FpElem, FpElem> enc_source_quad(FpElem x, const FpCtx& ctx) {
  if (x >= ctx.p()) throw Error(ErrorCode::kInvalidArgument, "value outside F_p");
  return {x, fp_mul(x, x, ctx)};
}

IndependenceAudit audit_linear_independence(const SeedEncoding& enc, unsigned w,
                                            std::uint64_t cap) {
  if (enc.width() > 64) throw Error(ErrorCode::kInvalidArgument, "column wider than 64 bits");
  const GF2Ctx& ctx = enc.ctx();
  const std::uint64_t ncols = ctx.mask();
  if (w == 0 || w > ncols) {
    throw Error(ErrorCode::kInvalidArgument, "subset size must be in [1, number of columns]");
  }
  const std::uint64_t total = binom_sat(ncols, w);
  if (total > cap) {
    throw Error(ErrorCode::kEnumerationBudgetExceeded,
                "C(" + std::to_string(ncols) + ", " + std::to_string(w) + ") subsets exceed the cap");
  }
  std::vector<std::uint64_t> cols(ncols);
  for (std::uint64_t z = 1; z <= ncols; ++z) {
    std::uint64_t v = 0;
    unsigned off = 0;
    for (GF2Elem b : bch_column(z, enc.r(), ctx)) {
      v |= b << off;
      off += ctx.ell();
    }
    cols[z - 1] = v;
  }

  // Depth-first over increasing index tuples, carrying an echelon basis of
  // the prefix. A prefix that is already dependent makes every completion
  // dependent, so the first one found is a witness.
  IndependenceAudit out;
  std::vector<std::uint64_t> idx;
  std::vector<std::vector<std::uint64_t>> basis(w + 1);
  struct Frame {
    std::uint64_t next;
  };
  std::vector<Frame> stack{{0}};
  while (!stack.empty()) {
    const std::size_t depth = stack.size() - 1;
    if (depth == w) {
      ++out.subsets_checked;
      stack.pop_back();
      idx.pop_back();
      continue;
    }
    Frame& f = stack.back();
    // Not enough columns left to complete the tuple.
    if (f.next + (w - depth) > ncols) {
      stack.pop_back();
      if (!idx.empty()) idx.pop_back();
      continue;
    }
    const std::uint64_t c = f.next++;
    std::uint64_t v = cols[c];
    for (std::uint64_t b : basis[depth]) v = std::min(v, v ^ b);
    if (v == 0) {
      out.ok = false;
      idx.push_back(c);
      std::vector<bool> used(ncols, false);
      for (auto i : idx) used[i] = true;
      for (std::uint64_t i = 0; i < ncols && idx.size() < w; ++i) {
        if (!used[i]) idx.push_back(i);
      }
      std::sort(idx.begin(), idx.end());
      for (auto i : idx) out.witness.push_back(i + 1);
      out.subsets_checked += 1;
      return out;
    }
    basis[depth + 1] = basis[depth];
    basis[depth + 1].push_back(v);
    // Keep the basis sorted descending so min(v, v ^ b) reduces by leading bit.
    std::sort(basis[depth + 1].rbegin(), basis[depth + 1].rend());
    idx.push_back(c);
    stack.push_back({c + 1});
  }
  return out;
}

unsigned audit_preimages_sum(const SeedEncoding& enc, const AdversaryFn& a) {
  check_adversary(enc, a);
  std::vector<std::uint64_t> cols(enc.seed_count());
  for (std::uint64_t y = 0; y < cols.size(); ++y) cols[y] = enc.packed(y);
  std::vector<std::uint64_t> vals(cols.size());
  for (std::uint64_t y = 0; y < cols.size(); ++y) vals[y] = cols[y] ^ cols[a(y)];
  return max_multiplicity(vals);
}

unsigned audit_preimages_linear(const SeedEncoding& enc, const AdversaryFn& a, GF2Elem t1,
                                GF2Elem t2) {
  if (t1 == 0) throw Error(ErrorCode::kZeroCoefficient, "t1 must be nonzero");
  if (enc.r() != 1) throw Error(ErrorCode::kInvalidArgument, "linear audit needs r = 1");
  const GF2Ctx& ctx = enc.ctx();
  if (!ctx.contains(t1) || !ctx.contains(t2)) {
    throw Error(ErrorCode::kInvalidArgument, "coefficient outside the field");
  }
  if (ctx.ell() > 32) throw Error(ErrorCode::kInvalidArgument, "column wider than 64 bits");
  check_adversary(enc, a);
  const std::uint64_t n = enc.seed_count();
  std::vector<std::pair<GF2Elem, GF2Elem>> cols(n);
  for (std::uint64_t y = 0; y < n; ++y) {
    const auto b = enc.blocks(y);
    cols[y] = {b[0], b[1]};
  }
  std::vector<std::uint64_t> vals(n);
  for (std::uint64_t y = 0; y < n; ++y) {
    const auto& c = cols[y];
    const auto& d = cols[a(y)];
    const GF2Elem lo = gf_mul(t1, c.first, ctx) ^ gf_mul(t2, d.first, ctx);
    const GF2Elem hi = gf_mul(t1, c.second, ctx) ^ gf_mul(t2, d.second, ctx);
    vals[y] = lo | (hi << ctx.ell());
  }
  return max_multiplicity(vals);
}

unsigned audit_preimages_fp(const FpCtx& ctx, const AdversaryFn& a, FpElem r_coef) {
  const std::uint64_t p = ctx.p();
  if (a.domain_size() != p) {
    throw Error(ErrorCode::kDimensionMismatch, "adversary domain must be F_p");
  }
  if (r_coef == 0 || r_coef >= p) throw Error(ErrorCode::kZeroCoefficient, "r must be a nonzero element");
  if (p > (std::uint64_t{1} << 32)) throw Error(ErrorCode::kInvalidArgument, "p too large to pack pairs");
  a.require_fixed_point_free();
  std::vector<std::uint64_t> vals(p);
  for (std::uint64_t y = 0; y < p; ++y) {
    const FpElem ay = a(y);
    const FpElem v1 = fp_add(y, fp_mul(r_coef, ay, ctx), ctx);
    const FpElem v2 = fp_add(fp_mul(y, y, ctx), fp_mul(r_coef, fp_mul(ay, ay, ctx), ctx), ctx);
    vals[y] = v1 * p + v2;
  }
  return max_multiplicity(vals);
}

nlohmann::json AuditReport::to_json() const {
  nlohmann::json j{{"claim", claim},
                   {"params", params},
                   {"functions_checked", functions_checked},
                   {"max_preimages", max_preimages},
                   {"bound", bound},
                   {"violations", violations},
                   {"holds", holds()}};
  if (witness) j["witness"] = *witness;
  return j;
}

}  // namespace nmx
