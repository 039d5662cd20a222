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
#include <vector>

namespace nmx {

// Elements of GF(2^l) are polynomials over F_2 packed into the low l bits.
using GF2Elem = std::uint64_t;

// GF(2^l) for 1 <= l <= 64. The modulus x^l + low(x) is stored without its
// leading term, so a degree-64 modulus still fits in a machine word.
class GF2Ctx {
 public:
  // Uses the fixed modulus table (lowest-weight irreducible for each l).
  explicit GF2Ctx(unsigned ell);
  // Custom modulus; throws kInvalidArgument unless it is irreducible.
  GF2Ctx(unsigned ell, std::uint64_t modulus_low);

  unsigned ell() const { return ell_; }
  std::uint64_t modulus_low() const { return modulus_low_; }
  std::uint64_t mask() const { return mask_; }
  // 2^l - 1, the order of the multiplicative group.
  std::uint64_t group_order() const { return mask_; }
  bool contains(GF2Elem a) const { return (a & ~mask_) == 0; }

  friend bool operator==(const GF2Ctx& a, const GF2Ctx& b) {
    return a.ell_ == b.ell_ && a.modulus_low_ == b.modulus_low_;
  }

 private:
  unsigned ell_;
  std::uint64_t modulus_low_;
  std::uint64_t mask_;
};

// Low part of the tabulated modulus for GF(2^l).
std::uint64_t irreducible_modulus(unsigned ell);
// Rabin's test for x^l + low(x).
bool is_irreducible(unsigned ell, std::uint64_t modulus_low);

GF2Elem gf_mul(GF2Elem a, GF2Elem b, const GF2Ctx& ctx);
GF2Elem gf_square(GF2Elem a, const GF2Ctx& ctx);
GF2Elem gf_pow(GF2Elem a, std::uint64_t e, const GF2Ctx& ctx);
// Throws kDivisionByZero for a == 0.
GF2Elem gf_inv(GF2Elem a, const GF2Ctx& ctx);
// Least element of multiplicative order 2^l - 1.
GF2Elem gf_find_generator(const GF2Ctx& ctx);
// Monomial basis 1, x, ..., x^(l-1).
std::vector<GF2Elem> gf_basis(const GF2Ctx& ctx);

// Cached (context, generator) pair per width; safe to call concurrently.
struct FieldWithGenerator {
  GF2Ctx ctx;
  GF2Elem g;
};
const FieldWithGenerator& field_with_generator(unsigned ell);

// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(std::uint64_t n);
// Distinct prime factors in increasing order (Pollard rho).
std::vector<std::uint64_t> prime_factors(std::uint64_t n);
// Smallest prime strictly between lo and hi; kNoPrimeInRange otherwise.
std::uint64_t fp_find_prime(std::uint64_t lo, std::uint64_t hi);

using FpElem = std::uint64_t;

class FpCtx {
 public:
  // Throws kInvalidArgument if p is not prime.
  explicit FpCtx(std::uint64_t p);
  std::uint64_t p() const { return p_; }

 private:
  std::uint64_t p_;
};

FpElem fp_add(FpElem a, FpElem b, const FpCtx& ctx);
FpElem fp_sub(FpElem a, FpElem b, const FpCtx& ctx);
FpElem fp_mul(FpElem a, FpElem b, const FpCtx& ctx);
FpElem fp_pow(FpElem a, std::uint64_t e, const FpCtx& ctx);
FpElem fp_inv(FpElem a, const FpCtx& ctx);

enum class FpOp { kAdd, kSub, kMul, kInv, kPow };
// Single entry point over the five operations; `b` is the exponent for kPow
// and ignored for kInv.
FpElem fp_arith(FpElem a, FpElem b, FpOp op, const FpCtx& ctx);

}  // namespace nmx
