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

#include "nmx/nmext.hpp"

#include <cmath>

#include "nmx/error.hpp"

namespace nmx {
namespace {

constexpr std::uint64_t kCacheLimit = std::uint64_t{1} << 20;

std::string_view embed_name(Embed e) { return e == Embed::kTopBit ? "top-bit" : "all-columns"; }

Embed embed_from_name(std::string_view s) {
  if (s == "top-bit") return Embed::kTopBit;
  if (s == "all-columns") return Embed::kAllColumns;
  throw Error(ErrorCode::kInvalidArgument, "unknown embedding '" + std::string(s) + "'");
}

}  // namespace

std::string_view variant_name(NmVariant v) {
  switch (v) {
    case NmVariant::kHalf: return "half";
    case NmVariant::kBelowHalf: return "below-half";
    case NmVariant::kFpQuadratic: return "fp-quad";
    case NmVariant::kMultibit: return "multibit";
    case NmVariant::kReducedSeed: return "reduced-seed";
    case NmVariant::kGenericR: return "generic-r";
  }
  return "?";
}

NmVariant variant_from_name(std::string_view name) {
  for (auto v : {NmVariant::kHalf, NmVariant::kBelowHalf, NmVariant::kFpQuadratic,
                 NmVariant::kMultibit, NmVariant::kReducedSeed, NmVariant::kGenericR}) {
    if (variant_name(v) == name) return v;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown construction '" + std::string(name) + "'");
}

nlohmann::json NmExtConfig::to_json() const {
  nlohmann::json j{{"variant", variant_name(variant)}, {"n", n}, {"embed", embed_name(embed)}};
  switch (variant) {
    case NmVariant::kFpQuadratic:
      j["p"] = p;
      j["modulus"] = modulus;
      break;
    case NmVariant::kMultibit:
      j["m"] = m;
      j["base"] = variant_name(base);
      if (base == NmVariant::kGenericR) {
        j["r"] = r;
        j["ell"] = ell;
      }
      break;
    case NmVariant::kReducedSeed:
      j["t"] = t;
      if (ell) j["ell"] = ell;
      break;
    case NmVariant::kGenericR:
      j["r"] = r;
      j["ell"] = ell;
      break;
    default:
      break;
  }
  return j;
}

NmExtConfig NmExtConfig::from_json(const nlohmann::json& j) {
  NmExtConfig c;
  c.variant = variant_from_name(j.at("variant").get<std::string>());
  c.n = j.value("n", 0u);
  c.r = j.value("r", 1u);
  c.ell = j.value("ell", 0u);
  c.t = j.value("t", 1u);
  c.p = j.value("p", std::uint64_t{0});
  c.modulus = j.value("modulus", std::uint64_t{0});
  c.m = j.value("m", 1u);
  if (j.contains("base")) c.base = variant_from_name(j.at("base").get<std::string>());
  if (j.contains("embed")) c.embed = embed_from_name(j.at("embed").get<std::string>());
  return c;
}

std::uint64_t below_half_prime(unsigned n) {
  const auto slack = static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<double>(n), 0.525)));
  return fp_find_prime(n, n + slack + 1);
}

NmExtractor::NmExtractor(NmExtConfig cfg) : cfg_(std::move(cfg)) {
  auto bad = [](const std::string& msg) { return Error(ErrorCode::kInvalidArgument, msg); };
  NmVariant shape = cfg_.variant;
  unsigned col_r = 1;
  unsigned ell = 0;
  if (shape == NmVariant::kMultibit) {
    shape = cfg_.base;
    if (shape != NmVariant::kHalf && shape != NmVariant::kBelowHalf && shape != NmVariant::kGenericR) {
      throw bad("multibit base must be half, below-half or generic-r");
    }
  }
  switch (shape) {
    case NmVariant::kHalf:
      if (cfg_.n == 0 || cfg_.n % 2 != 0 || cfg_.n > 128) throw bad("half needs an even n <= 128");
      ell = cfg_.n / 2;
      source_bits_ = cfg_.n;
      enc_width_ = cfg_.n;
      break;
    case NmVariant::kBelowHalf:
    case NmVariant::kReducedSeed: {
      if (cfg_.n == 0) throw bad("source width must be positive");
      p_ = cfg_.p ? cfg_.p : below_half_prime(cfg_.n);
      if (!is_prime(p_) || p_ <= cfg_.n || p_ > 64) throw bad("field width p must be a prime in (n, 64]");
      field_.emplace(static_cast<unsigned>(p_));
      g_ = field_with_generator(static_cast<unsigned>(p_)).g;
      source_bits_ = cfg_.n;
      enc_width_ = 2 * static_cast<unsigned>(p_);
      ell = static_cast<unsigned>(p_);
      if (shape == NmVariant::kReducedSeed) {
        if (cfg_.t == 0) throw bad("t must be positive");
        ell = cfg_.ell ? cfg_.ell : static_cast<unsigned>(p_) / cfg_.t;
        col_r = 2 * cfg_.t - 1;
        if (ell < 2 || cfg_.t * ell > p_) throw bad("reduced seed needs 2 <= l and t*l <= p");
      }
      break;
    }
    case NmVariant::kGenericR:
      if (cfg_.ell == 0 || cfg_.ell > 64) throw bad("generic-r needs 1 <= l <= 64");
      ell = cfg_.ell;
      col_r = cfg_.r;
      enc_width_ = (cfg_.r + 1) * cfg_.ell;
      source_bits_ = cfg_.f ? cfg_.n : enc_width_;
      if (source_bits_ == 0) throw bad("source width must be positive");
      break;
    case NmVariant::kFpQuadratic: {
      if (cfg_.p == 0) {
        if (cfg_.n == 0 || cfg_.n > 62) throw bad("fp-quad needs p or 1 <= n <= 62");
        p_ = fp_find_prime(std::uint64_t{1} << cfg_.n, std::uint64_t{1} << (cfg_.n + 1));
      } else {
        p_ = cfg_.p;
      }
      if (!is_prime(p_) || p_ > (std::uint64_t{1} << 32)) throw bad("fp-quad needs a prime p < 2^32");
      std::uint64_t mod = cfg_.modulus;
      if (mod == 0) {
        mod = 1;
        while (mod * 2 <= p_) mod *= 2;
      }
      if ((mod & (mod - 1)) != 0 || mod > p_ || mod < 2) throw bad("M must be a power of two in [2, p]");
      cfg_.p = p_;
      cfg_.modulus = mod;
      source_bits_ = ceil_log2(p_);
      seed_bits_ = source_bits_;
      seed_count_ = p_;
      output_bits_ = static_cast<unsigned>(std::countr_zero(mod));
      return;
    }
    case NmVariant::kMultibit:
      break;
  }
  seed_enc_.emplace(GF2Ctx(ell), col_r, cfg_.embed);
  if (seed_enc_->width() > enc_width_) throw bad("seed column wider than the source encoding");
  seed_bits_ = seed_enc_->seed_bits();
  seed_count_ = seed_enc_->seed_count();
  if (cfg_.variant == NmVariant::kMultibit) {
    if (cfg_.m == 0 || cfg_.m > ell) throw bad("multibit needs 1 <= m <= l");
    output_bits_ = cfg_.m;
    basis_ = gf_basis(seed_enc_->ctx());
    basis_.resize(cfg_.m);
  } else {
    output_bits_ = 1;
    basis_ = {1};
  }
  if (enc_width_ <= 64 && seed_count_ * basis_.size() <= kCacheLimit) {
    // Filled before assignment: encode_seed_u64 reads the cache once it is non-empty.
    std::vector<std::uint64_t> cache(seed_count_ * basis_.size());
    for (std::uint64_t y = 0; y < seed_count_; ++y) {
      for (unsigned i = 0; i < basis_.size(); ++i) cache[y * basis_.size() + i] = encode_seed(y, i).to_u64();
    }
    seed_cache_ = std::move(cache);
  }
  if (field_ && source_bits_ <= 16) {
    exp_cache_.resize(std::uint64_t{1} << source_bits_);
    for (std::uint64_t x = 1; x < exp_cache_.size(); ++x) exp_cache_[x] = gf_pow(g_, x, *field_);
  }
}

unsigned NmExtractor::field_bits() const { return seed_enc_ ? seed_enc_->ell() : 0; }

bool NmExtractor::accepts_source(std::uint64_t x) const {
  if (source_bits_ < 64 && (x >> source_bits_) != 0) return false;
  if (field_) return x != 0;
  if (cfg_.variant == NmVariant::kFpQuadratic) return x < p_;
  return true;
}

BitVec NmExtractor::encode_source(const BitVec& x) const {
  if (x.size() != source_bits_) {
    throw Error(ErrorCode::kWidthMismatch, "source has " + std::to_string(x.size()) + " bits, expected " +
                                               std::to_string(source_bits_));
  }
  if (field_) return enc_source_exp(x.to_u64(), *field_, g_);
  if (cfg_.f) {
    BitVec e = cfg_.f(x);
    if (e.size() != enc_width_) throw Error(ErrorCode::kWidthMismatch, "source encoding has the wrong width");
    return e;
  }
  return x;
}

BitVec NmExtractor::encode_seed(std::uint64_t y, unsigned i) const {
  if (!seed_enc_) throw Error(ErrorCode::kInvalidArgument, "fp-quad has no seed column");
  if (i >= basis_.size()) throw Error(ErrorCode::kInvalidArgument, "basis index out of range");
  std::vector<GF2Elem> col = seed_enc_->blocks(y);
  for (auto& b : col) b = gf_mul(b, basis_[i], seed_enc_->ctx());
  return pack_blocks(col, seed_enc_->ell()).resized(enc_width_);
}

std::uint64_t NmExtractor::encode_seed_u64(std::uint64_t y, unsigned i) const {
  if (!seed_cache_.empty()) {
    if (y >= seed_count_) throw Error(ErrorCode::kInvalidArgument, "seed outside the domain");
    return seed_cache_[y * basis_.size() + i];
  }
  return encode_seed(y, i).to_u64();
}

std::uint64_t NmExtractor::encode_source_u64(std::uint64_t x) const {
  if (field_) {
    if (x == 0) throw Error(ErrorCode::kZeroSource, "source value 0 is not in the multiplicative group");
    const GF2Elem gx = x < exp_cache_.size() ? exp_cache_[x] : gf_pow(g_, x, *field_);
    return x | (gx << p_);
  }
  if (cfg_.f) return encode_source(BitVec::from_u64(x, source_bits_)).to_u64();
  return x;
}

std::uint64_t NmExtractor::eval_fp(std::uint64_t x, std::uint64_t y) const {
  const FpCtx ctx(p_);
  if (x >= p_ || y >= p_) throw Error(ErrorCode::kInvalidArgument, "value outside F_p");
  const FpElem xy = fp_mul(x, y, ctx);
  return reduce_mod(fp_add(xy, fp_mul(xy, xy, ctx), ctx), cfg_.modulus);
}

std::uint64_t NmExtractor::eval(std::uint64_t x, std::uint64_t y) const {
  if (cfg_.variant == NmVariant::kFpQuadratic) return eval_fp(x, y);
  if (source_bits_ > 64) throw Error(ErrorCode::kWidthMismatch, "source wider than 64 bits; use eval_bits");
  if (!accepts_source(x)) {
    if (field_ && x == 0) throw Error(ErrorCode::kZeroSource, "source value 0 is not in the multiplicative group");
    throw Error(ErrorCode::kWidthMismatch, "source value outside the domain");
  }
  if (enc_width_ > 64) return eval_bits(BitVec::from_u64(x, source_bits_), y).to_u64();
  const std::uint64_t ex = encode_source_u64(x);
  std::uint64_t out = 0;
  for (unsigned i = 0; i < basis_.size(); ++i) {
    out |= static_cast<std::uint64_t>(parity64(ex & encode_seed_u64(y, i))) << i;
  }
  return out;
}

BitVec NmExtractor::eval_bits(const BitVec& x, std::uint64_t y) const {
  if (cfg_.variant == NmVariant::kFpQuadratic) return BitVec::from_u64(eval_fp(x.to_u64(), y), output_bits_);
  if (enc_width_ <= 64 && x.size() == source_bits_) return BitVec::from_u64(eval(x.to_u64(), y), output_bits_);
  const BitVec ex = encode_source(x);
  BitVec out(output_bits_);
  for (unsigned i = 0; i < basis_.size(); ++i) out.set(i, ip_f2(ex, encode_seed(y, i)));
  return out;
}

ExtFn NmExtractor::as_fn() const {
  return [this](std::uint64_t x, std::uint64_t y) { return eval(x, y); };
}

ExtractorSpec NmExtractor::spec() const {
  ExtractorSpec s;
  s.name = std::string(variant_name(cfg_.variant));
  s.n = source_bits_;
  s.d = seed_bits_;
  s.m = output_bits_;
  return s;
}

namespace {

NmExtConfig with_variant(NmExtConfig cfg, NmVariant v, const BitVec& x) {
  cfg.variant = v;
  if (cfg.n == 0 || v == NmVariant::kHalf) cfg.n = static_cast<unsigned>(x.size());
  return cfg;
}

}  // namespace

std::uint64_t nm_half(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg) {
  return NmExtractor(with_variant(cfg, NmVariant::kHalf, x)).eval_bits(x, y).to_u64();
}

std::uint64_t nm_below(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg) {
  return NmExtractor(with_variant(cfg, NmVariant::kBelowHalf, x)).eval_bits(x, y).to_u64();
}

std::uint64_t nm_fp(FpElem x, FpElem y, const NmExtConfig& cfg) {
  NmExtConfig c = cfg;
  c.variant = NmVariant::kFpQuadratic;
  return NmExtractor(std::move(c)).eval(x, y);
}

BitVec nm_multibit(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg) {
  NmExtConfig c = cfg;
  c.variant = NmVariant::kMultibit;
  if (c.n == 0 || c.base == NmVariant::kHalf) c.n = static_cast<unsigned>(x.size());
  return NmExtractor(std::move(c)).eval_bits(x, y);
}

std::uint64_t nm_reduced_seed(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg) {
  return NmExtractor(with_variant(cfg, NmVariant::kReducedSeed, x)).eval_bits(x, y).to_u64();
}

std::uint64_t nm_generic_r(const BitVec& x, std::uint64_t y, const NmExtConfig& cfg) {
  NmExtConfig c = cfg;
  c.variant = NmVariant::kGenericR;
  if (c.f) c.n = static_cast<unsigned>(x.size());
  return NmExtractor(std::move(c)).eval_bits(x, y).to_u64();
}

unsigned two_source_tag_bits(unsigned rows) { return std::max(1u, ceil_log2(rows)); }

std::uint64_t nm_to_two_source(const BitVec& x, const BitVec& y, const NmExtractor& nm,
                               const CondenserPlan& plan) {
  const CondenserOutput cond = somewhere_condense(y, plan);
  const unsigned tag = two_source_tag_bits(plan.rows);
  if (cond.row_width + tag != nm.seed_bits()) {
    throw Error(ErrorCode::kSeedWidthMismatch,
                "row width " + std::to_string(cond.row_width) + " + tag " + std::to_string(tag) +
                    " != seed width " + std::to_string(nm.seed_bits()));
  }
  std::uint64_t out = 0;
  for (std::size_t j = 0; j < cond.rows.size(); ++j) {
    const std::uint64_t seed = cond.rows[j].to_u64() | (static_cast<std::uint64_t>(j) << cond.row_width);
    out ^= nm.eval_bits(x, seed).to_u64();
  }
  return out;
}

}  // namespace nmx
