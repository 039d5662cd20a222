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

#include "nmx/fields.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

#include "nmx/error.hpp"

namespace nmx {
namespace {

// x^l + low: the lowest-weight irreducible for each l (a trinomial with the
// smallest middle exponent when one exists, else the smallest pentanomial).
constexpr std::array<std::uint64_t, 65> kModulusLow = {
    0,          0x1,     0x3,   0x3,   0x3,        0x5,   0x3,   0x3,
    0x1b,       0x3,     0x9,   0x5,   0x9,        0x1b,  0x21,  0x3,
    0x2b,       0x9,     0x9,   0x27,  0x9,        0x5,   0x3,   0x21,
    0x1b,       0x9,     0x1b,  0x27,  0x3,        0x5,   0x3,   0x9,
    0x8d,       0x401,   0x81,  0x5,   0x201,      0x53,  0x63,  0x11,
    0x39,       0x9,     0x81,  0x59,  0x21,       0x1b,  0x3,   0x21,
    0x2d,       0x201,   0x1d,  0x4b,  0x9,        0x47,  0x201, 0x81,
    0x95,       0x11,    0x80001, 0x95, 0x3,       0x27,  0x20000001, 0x3,
    0x1b,
};

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

// Polynomial arithmetic mod an arbitrary degree-l modulus, used only by the
// irreducibility test (where the modulus is not yet trusted).
struct PolyRing {
  unsigned ell;
  std::uint64_t low;
  std::uint64_t mask;

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t r = 0;
    while (b) {
      if (b & 1) r ^= a;
      b >>= 1;
      const bool carry = (a >> (ell - 1)) & 1;
      a = (a << 1) & mask;
      if (carry) a ^= low;
    }
    return r;
  }
  // x^(2^k) mod f.
  std::uint64_t frobenius_x(unsigned k) const {
    std::uint64_t r = ell == 1 ? (low & 1) : 2;
    for (unsigned i = 0; i < k; ++i) r = mul(r, r);
    return r;
  }
};

unsigned degree(u128 a) {
  unsigned d = 0;
  while (a >> 1) {
    a >>= 1;
    ++d;
  }
  return d;
}

// gcd over F_2[x] with 65-bit operands.
u128 poly_gcd(u128 a, u128 b) {
  while (b != 0) {
    const unsigned db = degree(b);
    while (a != 0 && degree(a) >= db) a ^= b << (degree(a) - db);
    std::swap(a, b);
  }
  return a;
}

std::vector<std::uint64_t> small_prime_factors(unsigned n) {
  std::vector<std::uint64_t> out;
  for (unsigned p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::uint64_t pollard_rho(std::uint64_t n) {
  if (n % 2 == 0) return 2;
  for (std::uint64_t c = 1; c < 200; ++c) {
    std::uint64_t x = 2, y = 2, d = 1;
    auto f = [&](std::uint64_t v) { return (mulmod(v, v, n) + c) % n; };
    for (std::uint64_t it = 0; d == 1 && it < (std::uint64_t{1} << 22); ++it) {
      x = f(x);
      y = f(f(y));
      d = std::gcd(x > y ? x - y : y - x, n);
    }
    if (d != 1 && d != n) return d;
  }
  throw Error(ErrorCode::kFactoringInfeasible,
              "no factor found for " + std::to_string(n));
}

void factor_into(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
      factor_into(n, out);
      return;
    }
  }
  const std::uint64_t d = pollard_rho(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace

std::uint64_t irreducible_modulus(unsigned ell) {
  if (ell < 1 || ell > 64) {
    throw Error(ErrorCode::kInvalidArgument, "field width must be in [1, 64]");
  }
  return kModulusLow[ell];
}

bool is_irreducible(unsigned ell, std::uint64_t modulus_low) {
  if (ell < 1 || ell > 64) return false;
  const std::uint64_t mask = ell == 64 ? ~0ULL : (1ULL << ell) - 1;
  if ((modulus_low & ~mask) != 0) return false;
  if (ell == 1) return true;
  if ((modulus_low & 1) == 0) return false;  // divisible by x
  const PolyRing ring{ell, modulus_low, mask};
  // Rabin: x^(2^l) = x mod f, and gcd(f, x^(2^(l/q)) - x) = 1 for each prime q | l.
  if (ring.frobenius_x(ell) != 2) return false;
  const u128 f = (static_cast<u128>(1) << ell) | modulus_low;
  for (std::uint64_t q : small_prime_factors(ell)) {
    const std::uint64_t h = ring.frobenius_x(ell / static_cast<unsigned>(q)) ^ 2;
    const u128 g = poly_gcd(f, h);
    if (g != 1) return false;
  }
  return true;
}

GF2Ctx::GF2Ctx(unsigned ell) : GF2Ctx(ell, irreducible_modulus(ell)) {}

GF2Ctx::GF2Ctx(unsigned ell, std::uint64_t modulus_low)
    : ell_(ell),
      modulus_low_(modulus_low),
      mask_(ell >= 64 ? ~0ULL : (1ULL << ell) - 1) {
  if (ell < 1 || ell > 64) {
    throw Error(ErrorCode::kInvalidArgument, "field width must be in [1, 64]");
  }
  if (modulus_low != kModulusLow[ell] && !is_irreducible(ell, modulus_low)) {
    throw Error(ErrorCode::kInvalidArgument, "modulus is not irreducible");
  }
}

GF2Elem gf_mul(GF2Elem a, GF2Elem b, const GF2Ctx& ctx) {
  const unsigned top = ctx.ell() - 1;
  const std::uint64_t mask = ctx.mask();
  const std::uint64_t low = ctx.modulus_low();
  GF2Elem r = 0;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    const bool carry = (a >> top) & 1;
    a = (a << 1) & mask;
    if (carry) a ^= low;
  }
  return r;
}

GF2Elem gf_square(GF2Elem a, const GF2Ctx& ctx) { return gf_mul(a, a, ctx); }

GF2Elem gf_pow(GF2Elem a, std::uint64_t e, const GF2Ctx& ctx) {
  GF2Elem r = 1;
  while (e) {
    if (e & 1) r = gf_mul(r, a, ctx);
    a = gf_mul(a, a, ctx);
    e >>= 1;
  }
  return r;
}

GF2Elem gf_inv(GF2Elem a, const GF2Ctx& ctx) {
  if (a == 0) throw Error(ErrorCode::kDivisionByZero, "inverse of 0 in GF(2^l)");
  return gf_pow(a, ctx.group_order() - 1, ctx);
}

GF2Elem gf_find_generator(const GF2Ctx& ctx) {
  const std::uint64_t order = ctx.group_order();
  if (order == 1) return 1;
  const std::vector<std::uint64_t> factors = prime_factors(order);
  for (GF2Elem g = 2; g <= ctx.mask(); ++g) {
    bool ok = true;
    for (std::uint64_t q : factors) {
      if (gf_pow(g, order / q, ctx) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw Error(ErrorCode::kInvalidArgument, "no generator found");
}

std::vector<GF2Elem> gf_basis(const GF2Ctx& ctx) {
  std::vector<GF2Elem> b(ctx.ell());
  for (unsigned i = 0; i < ctx.ell(); ++i) b[i] = GF2Elem{1} << i;
  return b;
}

const FieldWithGenerator& field_with_generator(unsigned ell) {
  static std::mutex mu;
  static std::map<unsigned, std::unique_ptr<FieldWithGenerator>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[ell];
  if (!slot) {
    GF2Ctx ctx(ell);
    const GF2Elem g = gf_find_generator(ctx);
    slot = std::make_unique<FieldWithGenerator>(FieldWithGenerator{ctx, g});
  }
  return *slot;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are a proof of primality for every n < 2^64.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  factor_into(n, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t fp_find_prime(std::uint64_t lo, std::uint64_t hi) {
  if (lo >= hi) throw Error(ErrorCode::kInvalidArgument, "empty interval");
  for (std::uint64_t c = lo + 1; c < hi; ++c) {
    if (is_prime(c)) return c;
  }
  throw Error(ErrorCode::kNoPrimeInRange,
              "no prime in (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

FpCtx::FpCtx(std::uint64_t p) : p_(p) {
  if (!is_prime(p)) throw Error(ErrorCode::kInvalidArgument, std::to_string(p) + " is not prime");
}

FpElem fp_add(FpElem a, FpElem b, const FpCtx& ctx) {
  const std::uint64_t p = ctx.p();
  return static_cast<FpElem>((static_cast<u128>(a) + b) % p);
}

FpElem fp_sub(FpElem a, FpElem b, const FpCtx& ctx) {
  const std::uint64_t p = ctx.p();
  return a >= b ? (a - b) % p : static_cast<FpElem>((static_cast<u128>(a) + p - b) % p);
}

FpElem fp_mul(FpElem a, FpElem b, const FpCtx& ctx) { return mulmod(a, b, ctx.p()); }

FpElem fp_pow(FpElem a, std::uint64_t e, const FpCtx& ctx) { return powmod(a, e, ctx.p()); }

FpElem fp_inv(FpElem a, const FpCtx& ctx) {
  if (a % ctx.p() == 0) throw Error(ErrorCode::kDivisionByZero, "inverse of 0 mod p");
  return powmod(a, ctx.p() - 2, ctx.p());
}

FpElem fp_arith(FpElem a, FpElem b, FpOp op, const FpCtx& ctx) {
  switch (op) {
    case FpOp::kAdd: return fp_add(a, b, ctx);
    case FpOp::kSub: return fp_sub(a, b, ctx);
    case FpOp::kMul: return fp_mul(a, b, ctx);
    case FpOp::kInv: return fp_inv(a, ctx);
    case FpOp::kPow: return fp_pow(a, b, ctx);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown operation");
}

}  // namespace nmx
