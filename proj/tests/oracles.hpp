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

// Slow, independent reference implementations used to derive or cross-check
// the values the unit and acceptance tests freeze. Nothing here calls into
// the library code it is checking.

#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "nmx/dist.hpp"

namespace oracle {

using nmx::Rational;

// Schoolbook carry-less product followed by long division by the full
// modulus x^l + low.
inline std::uint64_t gf_mul(std::uint64_t a, std::uint64_t b, unsigned ell, std::uint64_t low) {
  unsigned __int128 prod = 0;
  for (unsigned i = 0; i < 64; ++i) {
    if ((b >> i) & 1) prod ^= static_cast<unsigned __int128>(a) << i;
  }
  const unsigned __int128 mod = (static_cast<unsigned __int128>(1) << ell) | low;
  for (int deg = 127; deg >= static_cast<int>(ell); --deg) {
    if ((prod >> deg) & 1) prod ^= mod << (deg - static_cast<int>(ell));
  }
  return static_cast<std::uint64_t>(prod);
}

inline std::uint64_t gf_pow(std::uint64_t a, std::uint64_t e, unsigned ell, std::uint64_t low) {
  std::uint64_t acc = 1;
  for (std::uint64_t i = 0; i < e; ++i) acc = gf_mul(acc, a, ell, low);
  return acc;
}

// True when x^l + low has no factor of degree 1..l/2, by trial division.
inline bool irreducible_by_division(unsigned ell, std::uint64_t low) {
  const std::uint64_t f = (std::uint64_t{1} << ell) | low;
  auto deg = [](std::uint64_t v) { return 63 - __builtin_clzll(v); };
  for (std::uint64_t g = 2; deg(g) <= static_cast<int>(ell) / 2; ++g) {
    std::uint64_t r = f;
    while (r && deg(r) >= deg(g)) r ^= g << (deg(r) - deg(g));
    if (r == 0) return false;
  }
  return true;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline unsigned parity(std::uint64_t v) { return __builtin_parityll(v); }

// Distance of (E(X,Y), E(X,A(Y)), Y) from (U, E(X,A(Y)), Y) for X flat on
// `xs` and Y uniform on [0, domain), summed cell by cell.
template <class F>
Rational nm_error(F ext, unsigned m, const std::vector<std::uint64_t>& xs, std::uint64_t domain,
                  const std::vector<std::uint64_t>& adv) {
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>, Rational> real;
  std::map<std::pair<std::uint64_t, std::uint64_t>, Rational> rest;
  const Rational w(1, static_cast<long long>(xs.size() * domain));
  for (std::uint64_t y = 0; y < domain; ++y) {
    for (std::uint64_t x : xs) {
      const std::uint64_t zb = adv.empty() ? 0 : ext(x, adv[y]);
      real[{ext(x, y), zb, y}] += w;
      rest[{zb, y}] += w;
    }
  }
  Rational total = 0;
  const Rational u(1, 1LL << m);
  for (const auto& [key, p] : rest) {
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << m); ++z) {
      auto it = real.find({z, key.first, key.second});
      const Rational q = it == real.end() ? Rational(0) : it->second;
      const Rational d = q - p * u;
      total += d < 0 ? -d : d;
    }
  }
  return total / 2;
}

// Carry-less polynomial MAC: k2 + sum_i w_i k1^i over v-bit blocks of msg.
inline std::uint64_t mac(std::uint64_t k1, std::uint64_t k2, std::uint64_t msg, unsigned d, unsigned v,
                         std::uint64_t low) {
  std::uint64_t tag = k2;
  std::uint64_t power = k1;
  for (unsigned off = 0; off < d; off += v) {
    const std::uint64_t wi = (msg >> off) & ((std::uint64_t{1} << v) - 1);
    tag ^= gf_mul(wi, power, v, low);
    power = gf_mul(power, k1, v, low);
  }
  return tag;
}

}  // namespace oracle
