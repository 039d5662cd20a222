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

#include "nmx/extractors.hpp"

#include <algorithm>

#include "nmx/error.hpp"
#include "nmx/fields.hpp"

namespace nmx {

bool ip_f2(const BitVec& u, const BitVec& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "inner product of " + std::to_string(u.size()) +
                                                   " and " + std::to_string(v.size()) + " bits");
  }
  std::uint64_t acc = 0;
  const auto& a = u.words();
  const auto& b = v.words();
  for (std::size_t i = 0; i < a.size(); ++i) acc ^= a[i] & b[i];
  return parity64(acc);
}

bool two_source_ip(const BitVec& x, const BitVec& y) { return ip_f2(x, y); }

BitVec sigma_shift(const BitVec& y) {
  BitVec out(y.size());
  for (std::size_t off = 0; off < y.size(); off += 64) {
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(64, y.size() - off));
    const auto& f = field_with_generator(w);
    out.set_bits(off, w, gf_mul(y.bits(off, w), f.g, f.ctx));
  }
  return out;
}

BitVec two_source_ip_multi(const BitVec& x, const BitVec& y, unsigned m) {
  if (x.size() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "two-source inputs differ in length");
  BitVec out(m);
  BitVec cur = y;
  for (unsigned i = 0; i < m; ++i) {
    if (i > 0) cur = sigma_shift(cur);
    out.set(i, ip_f2(x, cur));
  }
  return out;
}

BitVec two_source_fold(const BitVec& s, const BitVec& x, unsigned m) {
  if (x.empty()) throw Error(ErrorCode::kWidthMismatch, "empty source");
  BitVec folded(x.size());
  for (std::size_t off = 0; off < s.size(); off += x.size()) {
    folded ^= s.slice(off, std::min(x.size(), s.size() - off)).resized(x.size());
  }
  return two_source_ip_multi(x, folded, m);
}

BitVec strong_seeded_ext(const BitVec& x, const BitVec& seed, unsigned m) {
  const unsigned d = static_cast<unsigned>(seed.size());
  const unsigned L = std::max(d, m);
  if (m > x.size() || L > 64) {
    throw Error(ErrorCode::kOutputTooWide, "cannot extract " + std::to_string(m) + " bits from " +
                                               std::to_string(x.size()) + " with a " +
                                               std::to_string(d) + "-bit seed");
  }
  if (m == 0) return BitVec(0);
  const GF2Ctx ctx(L);
  const GF2Elem sv = seed.bits(0, d);
  const std::size_t blocks = (x.size() + L - 1) / L;
  // Horner from the highest block down: (((x_c) s + x_{c-1}) s + ...) s.
  GF2Elem acc = 0;
  for (std::size_t i = blocks; i-- > 0;) {
    acc = gf_mul(acc ^ x.bits(i * L, L), sv, ctx);
  }
  return BitVec::from_u64(acc & low_mask(m), m);
}

std::uint64_t strong_seeded_ext_u64(std::uint64_t x, unsigned n, std::uint64_t seed, unsigned d,
                                    unsigned m) {
  const unsigned L = std::max(d, m);
  if (m > n || L > 64 || n > 64) {
    throw Error(ErrorCode::kOutputTooWide, "output wider than the source or field");
  }
  if (m == 0) return 0;
  const GF2Ctx ctx(L);
  const std::uint64_t sv = seed & low_mask(d);
  const unsigned blocks = (n + L - 1) / L;
  GF2Elem acc = 0;
  for (unsigned i = blocks; i-- > 0;) {
    const unsigned off = i * L;
    acc = gf_mul(acc ^ ((x >> off) & low_mask(std::min(L, n - off))), sv, ctx);
  }
  return acc & low_mask(m);
}

CondenserOutput somewhere_condense(const BitVec& x, const CondenserPlan& plan) {
  if (plan.rows == 0) throw Error(ErrorCode::kInvalidArgument, "condenser needs at least one row");
  if (x.size() % plan.rows != 0) {
    throw Error(ErrorCode::kIndivisibleBlocks, std::to_string(plan.rows) + " rows do not divide " +
                                                   std::to_string(x.size()) + " bits");
  }
  CondenserOutput out;
  out.row_width = x.size() / plan.rows;
  out.promised_rate = plan.promised_rate;
  // Row 0 is the most significant block, so rows read left to right in hex.
  for (unsigned j = plan.rows; j-- > 0;) out.rows.push_back(x.slice(j * out.row_width, out.row_width));
  return out;
}

std::uint64_t reduce_mod(std::uint64_t z, std::uint64_t modulus) {
  if (modulus == 0 || (modulus & (modulus - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "output modulus must be a power of two");
  }
  return z & (modulus - 1);
}

nlohmann::json ExtractorSpec::to_json() const {
  nlohmann::json cl = nlohmann::json::array();
  for (const auto& c : claims) cl.push_back({{"k", c.k}, {"eps", c.eps}});
  return {{"name", name}, {"n", n}, {"d", d}, {"m", m}, {"claims", cl}};
}

ExtractorSpec ExtractorSpec::from_json(const nlohmann::json& j) {
  ExtractorSpec s;
  s.name = j.value("name", "");
  s.n = j.at("n").get<unsigned>();
  s.d = j.at("d").get<unsigned>();
  s.m = j.at("m").get<unsigned>();
  if (s.m > s.n) throw Error(ErrorCode::kOutputTooWide, "m exceeds n");
  if (j.contains("claims")) {
    for (const auto& c : j.at("claims")) s.claims.push_back({c.at("k").get<double>(), c.at("eps").get<double>()});
  }
  return s;
}

}  // namespace nmx
