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

#include "nmx/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nmx/error.hpp"
#include "nmx/extractors.hpp"
#include "nmx/fields.hpp"

namespace nmx {
namespace {

unsigned ceil_div(unsigned a, unsigned b) { return (a + b - 1) / b; }

void require_width(const BitVec& v, std::size_t want, const char* what) {
  if (v.size() != want) {
    throw Error(ErrorCode::kWidthMismatch, std::string(what) + " has " + std::to_string(v.size()) +
                                               " bits, expected " + std::to_string(want));
  }
}

nlohmann::json uvec(const std::vector<unsigned>& v) { return nlohmann::json(v); }

}  // namespace

nlohmann::json FormulaWidths::to_json() const {
  return {{"m_nm", m_nm},       {"z_bits", z_bits},   {"tag_bits", tag_bits}, {"y1_bits", y1_bits},
          {"y2_bits", y2_bits}, {"y3_bits", y3_bits}, {"v_bits", uvec(v_bits)}};
}

FormulaWidths formula_widths(unsigned s, unsigned rows, unsigned d, unsigned d_nm) {
  if (s == 0 || rows == 0 || rows > 20 || d == 0) {
    throw Error(ErrorCode::kInvalidArgument, "s, C and d must be positive (C <= 20)");
  }
  const unsigned pow_c = 1u << rows;
  const unsigned dmax = std::max(d, d_nm);
  FormulaWidths f;
  f.m_nm = 6 * pow_c * s;
  f.z_bits = pow_c * 6 * s;
  f.tag_bits = pow_c * 3 * s;
  f.y1_bits = dmax;
  f.y2_bits = 4 * rows * d + 31 * dmax + 4 * s;
  f.y3_bits = 30 * dmax + 3 * s;
  for (unsigned i = 1; i <= rows; ++i) f.v_bits.push_back((1u << (rows - i)) * 2 * s);
  return f;
}

NmExtConfig protocol_nm_config(unsigned row_bits, unsigned m_nm) {
  NmExtConfig c;
  c.variant = NmVariant::kMultibit;
  c.m = m_nm;
  if (row_bits >= 4 && row_bits <= 128 && row_bits % 2 == 0) {
    c.base = NmVariant::kHalf;
    c.n = row_bits;
  } else if (row_bits > 128 && row_bits % 64 == 0) {
    // Rows too wide for a single 64-bit field use the degree-r column over
    // GF(2^64), which spans (r+1)*64 bits.
    c.base = NmVariant::kGenericR;
    c.ell = 64;
    c.r = row_bits / 64 - 1;
    c.n = row_bits;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "no nm slot for " + std::to_string(row_bits) + "-bit rows (need even <= 128 or a multiple of 64)");
  }
  return c;
}

ProtocolParams ProtocolParams::make(std::string name, unsigned n, unsigned k, unsigned s,
                                    unsigned rows, unsigned d, unsigned key_bits,
                                    unsigned y_divisor) {
  if (n == 0 || rows == 0 || n % rows != 0) {
    throw Error(ErrorCode::kIndivisibleBlocks, "C must divide n");
  }
  if (d == 0 || d > 64 || key_bits == 0 || key_bits > 64 || key_bits > n || y_divisor == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= d, key_bits <= 64, key_bits <= n, y_divisor >= 1");
  }
  ProtocolParams p;
  p.name = std::move(name);
  p.n = n;
  p.k = k;
  p.s = s;
  p.rows = rows;
  p.d = d;
  p.key_bits = key_bits;
  p.row_bits = n / rows;

  const NmExtConfig probe = protocol_nm_config(p.row_bits, 1);
  p.nm_r = probe.base == NmVariant::kGenericR ? probe.r : 1;
  p.nm_ell = probe.base == NmVariant::kGenericR ? probe.ell : p.row_bits / 2;
  p.d_nm = p.nm_ell - 1;
  p.formula = formula_widths(s, rows, d, p.d_nm);
  const FormulaWidths& f = p.formula;
  auto relax = [&p](const std::string& what, unsigned from, unsigned to, const std::string& why) {
    if (from != to) {
      p.relaxations.push_back(what + " " + std::to_string(from) + " -> " + std::to_string(to) + ": " + why);
    }
  };

  p.m_nm = std::min(f.m_nm, p.nm_ell);
  relax("m_nm", f.m_nm, p.m_nm, "nm output limited to the field width " + std::to_string(p.nm_ell));

  p.z_bits = std::min({f.z_bits, n, 64u}) & ~1u;
  relax("z_bits", f.z_bits, p.z_bits, "MAC key limited to min(n, 64) even bits");
  p.tag_bits = p.z_bits / 2;
  relax("tag_bits", f.tag_bits, p.tag_bits, "tag is half the MAC key");

  p.y1_bits = f.y1_bits;
  p.y2_bits = std::max(d, ceil_div(f.y2_bits, y_divisor));
  relax("y2_bits", f.y2_bits, p.y2_bits, "scaled down by " + std::to_string(y_divisor));
  p.y3_bits = std::max(1u, ceil_div(f.y3_bits, y_divisor));
  relax("y3_bits", f.y3_bits, p.y3_bits, "scaled down by " + std::to_string(y_divisor));

  for (unsigned lit : f.v_bits) p.v_bits.push_back(std::min({lit, p.m_nm, 64u}));
  if (p.v_total() >= p.z_bits) {
    for (std::size_t i = 0; i < f.v_bits.size(); ++i) {
      p.v_bits[i] = std::min(p.v_bits[i],
                             std::max(1u, static_cast<unsigned>(std::uint64_t{f.v_bits[i]} * p.z_bits / f.z_bits)));
    }
  }
  for (std::size_t i = 0; i < f.v_bits.size(); ++i) {
    relax("v_bits[" + std::to_string(i + 1) + "]", f.v_bits[i], p.v_bits[i],
          "kept below |Z| and the nm output width");
  }
  p.validate();
  return p;
}

ProtocolParams ProtocolParams::preset(std::string_view name) {
  if (name == "micro") return make("micro", 12, 10, 1, 1, 4, 2, 48);
  if (name == "small") return make("small", 64, 56, 4, 2, 16, 16);
  if (name == "demo") return make("demo", 1024, 960, 16, 4, 32, 64);
  throw Error(ErrorCode::kInvalidArgument, "unknown preset '" + std::string(name) + "'");
}

unsigned ProtocolParams::v_total() const { return std::accumulate(v_bits.begin(), v_bits.end(), 0u); }

double ProtocolParams::target_epsilon() const { return std::ldexp(1.0, -static_cast<int>(s)); }

void ProtocolParams::validate() const {
  auto fail = [](const std::string& msg) { return Error(ErrorCode::kInvalidArgument, msg); };
  if (n == 0 || rows == 0 || row_bits * rows != n) throw fail("rows must split n evenly");
  if (k > n) throw fail("k exceeds n");
  if (d == 0 || d > 64 || d > y2_bits || d > n) throw fail("d must be in [1, min(64, |Y2|, n)]");
  if (d_nm == 0 || d_nm > y1_bits) throw fail("nm seed must fit in Y1");
  if (m_nm == 0 || m_nm > nm_ell) throw fail("nm output wider than its field");
  if (z_bits == 0 || z_bits % 2 != 0 || z_bits > n || std::max(y1_bits, z_bits) > 64) {
    throw fail("MAC key must be even, <= n, and fit a 64-bit field with Y1");
  }
  if (tag_bits * 2 != z_bits) throw fail("tag must be half the MAC key");
  if (y3_bits == 0) throw fail("Y3 must be non-empty");
  if (v_bits.size() != rows) throw fail("one V width per row");
  for (unsigned v : v_bits) {
    if (v == 0 || v > m_nm || std::max(v, d) > 64) throw fail("V widths must be in [1, m_nm]");
  }
  if (v_total() >= z_bits) throw fail("sum of V widths must stay below |Z|");
  if (key_bits == 0 || std::max(key_bits, d) > 64 || key_bits > n) throw fail("key width out of range");
}

nlohmann::json ProtocolParams::to_json() const {
  return {{"name", name},
          {"n", n},
          {"k", k},
          {"s", s},
          {"C", rows},
          {"d", d},
          {"row_bits", row_bits},
          {"nm_r", nm_r},
          {"nm_ell", nm_ell},
          {"d_nm", d_nm},
          {"m_nm", m_nm},
          {"z_bits", z_bits},
          {"tag_bits", tag_bits},
          {"y1_bits", y1_bits},
          {"y2_bits", y2_bits},
          {"y3_bits", y3_bits},
          {"v_bits", uvec(v_bits)},
          {"key_bits", key_bits},
          {"target_epsilon", target_epsilon()},
          {"formula", formula.to_json()},
          {"relaxations", relaxations}};
}

BitVec FixedRandomness::take(std::size_t nbits) {
  if (pos_ + nbits > bits_.size()) {
    throw Error(ErrorCode::kInsufficientRandomness,
                "need " + std::to_string(nbits) + " bits, " + std::to_string(bits_.size() - pos_) + " left");
  }
  BitVec out = bits_.slice(pos_, nbits);
  pos_ += nbits;
  return out;
}

std::uint64_t mac_tag_u64(std::uint64_t key, unsigned v, std::uint64_t msg, unsigned d) {
  if (v == 0 || v > 32 || d > 64) throw Error(ErrorCode::kInvalidArgument, "u64 MAC needs 1 <= v <= 32, d <= 64");
  const GF2Ctx ctx(v);
  const GF2Elem k1 = key & ctx.mask();
  const GF2Elem k2 = (key >> v) & ctx.mask();
  const unsigned c = std::max(1u, ceil_div(d, v));
  GF2Elem acc = 0;
  for (unsigned i = c; i-- > 0;) {
    const unsigned off = i * v;
    const GF2Elem wi = off < 64 ? (msg >> off) & ctx.mask() : 0;
    acc = gf_mul(acc ^ wi, k1, ctx);
  }
  return acc ^ k2;
}

BitVec mac_tag(const BitVec& key, const BitVec& msg) {
  if (key.size() == 0 || key.size() % 2 != 0 || key.size() > 128) {
    throw Error(ErrorCode::kInvalidArgument, "MAC key must have 2v bits with 1 <= v <= 64");
  }
  const unsigned v = static_cast<unsigned>(key.size() / 2);
  const GF2Ctx ctx(v);
  const GF2Elem k1 = key.bits(0, v);
  const GF2Elem k2 = key.bits(v, v);
  const std::size_t c = std::max<std::size_t>(1, (msg.size() + v - 1) / v);
  GF2Elem acc = 0;
  for (std::size_t i = c; i-- > 0;) acc = gf_mul(acc ^ msg.bits(i * v, v), k1, ctx);
  return BitVec::from_u64(acc ^ k2, v);
}

namespace {

// Forging game: the forger may choose w after seeing the leaked key bits,
// sees tag(w), then outputs (w', t') with w' != w. Returns the exact
// success probability of the best forger.
Rational forgery(unsigned v, unsigned d, const std::vector<unsigned>& leaked, std::uint64_t cap) {
  if (v == 0 || v > 16 || d == 0 || d > 16) {
    throw Error(ErrorCode::kInvalidArgument, "exhaustive forgery needs 1 <= v, d <= 16");
  }
  const unsigned kb = 2 * v;
  std::uint64_t leak_mask = 0;
  for (unsigned b : leaked) {
    if (b >= kb) throw Error(ErrorCode::kInvalidCoordinate, "leaked bit outside the key");
    leak_mask |= std::uint64_t{1} << b;
  }
  const std::uint64_t nkeys = std::uint64_t{1} << kb;
  const std::uint64_t nmsg = std::uint64_t{1} << d;
  const std::uint64_t ntags = std::uint64_t{1} << v;
  if (kb + 2 * d > 62 || (nkeys * nmsg > cap / nmsg)) {
    throw Error(ErrorCode::kEnumerationBudgetExceeded, "forgery search exceeds the cap");
  }
  std::vector<std::uint32_t> table(nkeys * nmsg);
  for (std::uint64_t key = 0; key < nkeys; ++key) {
    for (std::uint64_t w = 0; w < nmsg; ++w) {
      table[key * nmsg + w] = static_cast<std::uint32_t>(mac_tag_u64(key, v, w, d));
    }
  }
  // Group keys by leaked value.
  std::map<std::uint64_t, std::vector<std::uint64_t>> classes;
  for (std::uint64_t key = 0; key < nkeys; ++key) classes[key & leak_mask].push_back(key);

  std::uint64_t wins = 0;
  std::vector<std::uint32_t> cnt(ntags * ntags);
  std::vector<std::uint32_t> best(ntags);
  for (const auto& [e, keys] : classes) {
    std::uint64_t best_w = 0;
    for (std::uint64_t w = 0; w < nmsg; ++w) {
      std::fill(best.begin(), best.end(), 0);
      for (std::uint64_t w2 = 0; w2 < nmsg; ++w2) {
        if (w2 == w) continue;
        for (std::uint64_t key : keys) {
          const std::uint32_t t = table[key * nmsg + w];
          const std::uint32_t t2 = table[key * nmsg + w2];
          const std::uint32_t c = ++cnt[t * ntags + t2];
          if (c > best[t]) best[t] = c;
        }
        for (std::uint64_t key : keys) cnt[table[key * nmsg + w] * ntags + table[key * nmsg + w2]] = 0;
      }
      const std::uint64_t total = std::accumulate(best.begin(), best.end(), std::uint64_t{0});
      best_w = std::max(best_w, total);
    }
    wins += best_w;
  }
  return Rational(BigInt(wins), BigInt(nkeys));
}

}  // namespace

Rational mac_forgery_advantage(unsigned v, unsigned d, std::uint64_t cap) {
  return forgery(v, d, {}, cap);
}

Rational mac_forgery_with_leakage(unsigned v, unsigned d, const std::vector<unsigned>& leaked,
                                  std::uint64_t cap) {
  return forgery(v, d, leaked, cap);
}

Protocol::Protocol(ProtocolParams params)
    : params_(std::move(params)), nm_(protocol_nm_config(params_.row_bits, params_.m_nm)) {
  params_.validate();
  if (nm_.seed_bits() != params_.d_nm || nm_.output_bits() != params_.m_nm) {
    throw Error(ErrorCode::kWidthMismatch, "nm slot does not match the parameters");
  }
}

BitVec Protocol::mac_key(const BitVec& x, const BitVec& y1) const {
  return strong_seeded_ext(x, y1, params_.z_bits);
}

std::vector<BitVec> Protocol::nm_rows(const BitVec& x, const BitVec& y1) const {
  const CondenserOutput cond = somewhere_condense(x, {params_.rows, 0.9});
  const std::uint64_t seed = y1.bits(0, params_.d_nm);
  std::vector<BitVec> out;
  out.reserve(cond.rows.size());
  for (const auto& row : cond.rows) out.push_back(nm_.eval_bits(row, seed));
  return out;
}

BitVec Protocol::final_key(const BitVec& x, const BitVec& w) const {
  return strong_seeded_ext(x, w, params_.key_bits);
}

AltExtraction Protocol::alt_extract_seeds(const BitVec& x, const BitVec& q, const BitVec& s0) const {
  require_width(x, params_.n, "X");
  require_width(q, params_.y2_bits, "Q");
  require_width(s0, params_.y3_bits, "S0");
  AltExtraction a;
  a.s.push_back(s0);
  a.r.push_back(two_source_fold(s0, x, params_.d));
  for (unsigned i = 1; i <= params_.rows; ++i) {
    a.s.push_back(strong_seeded_ext(q, a.r.back(), params_.d));
    a.r.push_back(strong_seeded_ext(x, a.s.back(), params_.d));
  }
  return a;
}

BitVec Protocol::v_output(const BitVec& xbar_row, const BitVec& s_i, unsigned i) const {
  if (i == 0 || i > params_.rows) throw Error(ErrorCode::kInvalidArgument, "V index out of range");
  require_width(xbar_row, params_.m_nm, "X-bar row");
  return strong_seeded_ext(xbar_row, s_i, params_.v_bits[i - 1]);
}

AltExtraction Protocol::alt_extract(const BitVec& x, const std::vector<BitVec>& xbar,
                                    const BitVec& q, const BitVec& s0) const {
  if (xbar.size() != params_.rows) throw Error(ErrorCode::kWidthMismatch, "need one X-bar row per condenser row");
  AltExtraction a = alt_extract_seeds(x, q, s0);
  for (unsigned i = 1; i <= params_.rows; ++i) a.v.push_back(v_output(xbar[i - 1], a.s[i], i));
  return a;
}

std::vector<BitVec> Protocol::look_ahead_ext(const BitVec& x, const std::vector<BitVec>& xbar,
                                             const BitVec& q, const BitVec& s0) const {
  return alt_extract(x, xbar, q, s0).v;
}

void Protocol::check_round1(const Round1Msg& m) const {
  require_width(m.y1, params_.y1_bits, "Y1");
  require_width(m.y2, params_.y2_bits, "Y2");
  require_width(m.y3, params_.y3_bits, "Y3");
}

void Protocol::check_round2(const Round2Msg& m) const {
  require_width(m.w, params_.d, "W");
  require_width(m.t, params_.tag_bits, "T");
  require_width(m.v, params_.v_total(), "V");
}

std::pair<Round1Msg, AliceState> Protocol::alice_round1(const BitVec& x, Randomness& rnd) const {
  require_width(x, params_.n, "X");
  Round1Msg msg;
  msg.y1 = rnd.take(params_.y1_bits);
  msg.y2 = rnd.take(params_.y2_bits);
  msg.y3 = rnd.take(params_.y3_bits);
  return {msg, AliceState{x, msg}};
}

std::pair<Round2Msg, PartyOutcome> Protocol::bob_round(const BitVec& x, const Round1Msg& received,
                                                       Randomness& rnd) const {
  require_width(x, params_.n, "X");
  check_round1(received);
  Round2Msg out;
  out.w = rnd.take(params_.d);
  const BitVec z = mac_key(x, received.y1);
  out.v = concat_all(look_ahead_ext(x, nm_rows(x, received.y1), received.y2, received.y3));
  out.t = mac_tag(z, out.w);
  return {out, PartyOutcome{true, final_key(x, out.w)}};
}

PartyOutcome Protocol::alice_finalize(const AliceState& state, const Round2Msg& received) const {
  if (received.w.size() != params_.d || received.t.size() != params_.tag_bits ||
      received.v.size() != params_.v_total()) {
    return {};
  }
  const BitVec z = mac_key(state.x, state.sent.y1);
  if (mac_tag(z, received.w) != received.t) return {};
  const BitVec vbar =
      concat_all(look_ahead_ext(state.x, nm_rows(state.x, state.sent.y1), state.sent.y2, state.sent.y3));
  if (vbar != received.v) return {};
  return {true, final_key(state.x, received.w)};
}

}  // namespace nmx
