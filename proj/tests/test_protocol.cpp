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

#include <set>

#include "doctest.h"
#include "nmx/error.hpp"
#include "nmx/eve.hpp"
#include "nmx/extractors.hpp"
#include "nmx/protocol.hpp"
#include "nmx/rng.hpp"
#include "nmx/session.hpp"
#include "oracles.hpp"

using namespace nmx;

// Frozen from the first passing run.
#define GOLDEN_W "78a9"
#define GOLDEN_T "f7f0a6b0"
#define GOLDEN_V "8d28e6"
#define GOLDEN_KEY "c937"

namespace {

// (R_A, transcript) against (U, transcript) by replaying every coin
// assignment through the public round functions.
Rational brute_key_tv(const Protocol& pr, const FlatSource& xs) {
  const ProtocolParams& p = pr.params();
  const unsigned alice = p.y1_bits + p.y2_bits + p.y3_bits;
  const unsigned coins = alice + p.d;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::map<std::uint64_t, long long>> cells;
  for (std::uint64_t x : xs.support()) {
    const BitVec xb = BitVec::from_u64(x, p.n);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << coins); ++c) {
      FixedRandomness ra(BitVec::from_u64(c, alice));
      FixedRandomness rb(BitVec::from_u64(c >> alice, p.d));
      auto [m1, st] = pr.alice_round1(xb, ra);
      auto [m2, bob] = pr.bob_round(xb, m1, rb);
      const PartyOutcome a = pr.alice_finalize(st, m2);
      REQUIRE(a.accepted);
      const std::uint64_t tv = m2.t.to_u64() | (m2.v.to_u64() << p.tag_bits);
      ++cells[{c, tv}][a.key.to_u64()];
    }
  }
  // Each (coins, T, V) cell has mass n_cell / (|X| 2^coins); compare key
  // counts against n_cell / 2^key_bits.
  const long long kk = 1LL << p.key_bits;
  BigInt num = 0;
  for (const auto& [view, keys] : cells) {
    long long n_cell = 0;
    for (const auto& [k, c] : keys) n_cell += c;
    long long seen = 0;
    for (const auto& [k, c] : keys) {
      num += abs(BigInt(c * kk - n_cell));
      ++seen;
    }
    num += BigInt(n_cell) * (kk - seen);
  }
  return Rational(num, BigInt(2) * xs.size() * (BigInt(1) << coins) * kk);
}

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("MAC tag") {
    // v = 4, k1 = 3, k2 = 5, message blocks (1, 2):
    // 5 + 1*3 + 2*3^2 = 5 + 3 + 0xA = 0xC in GF(16).
    CHECK(mac_tag_u64(0x53, 4, 0x21, 8) == 0xC);
    CHECK(oracle::mac(3, 5, 0x21, 8, 4, GF2Ctx(4).modulus_low()) == 0xC);
    CHECK(mac_tag(BitVec::from_u64(0x53, 8), BitVec::from_u64(0x21, 8)).to_u64() == 0xC);
    for (std::uint64_t k2 = 0; k2 < 16; ++k2) {
      CHECK(mac_tag_u64(k2 << 4, 4, 0xB7, 8) == k2);
      CHECK(mac_tag_u64(0x7 | (k2 << 4), 4, 0, 8) == k2);
    }
    Rng rng(1, 1);
    for (unsigned v : {3u, 8u, 13u, 32u}) {
      for (int i = 0; i < 30; ++i) {
        const unsigned d = 1 + rng.below(std::min(3 * v, 64u));
        const std::uint64_t k1 = rng.next() & low_mask(v), k2 = rng.next() & low_mask(v);
        const std::uint64_t msg = rng.next() & low_mask(d);
        const std::uint64_t want = oracle::mac(k1, k2, msg, d, v, GF2Ctx(v).modulus_low());
        CHECK(mac_tag_u64(k1 | (k2 << v), v, msg, d) == want);
        CHECK(mac_tag(BitVec::from_u64(k1 | (k2 << v), 2 * v), BitVec::from_u64(msg, d)).to_u64() == want);
      }
    }
  }

  TEST_CASE("MAC forgery, exact") {
    CHECK(mac_forgery_advantage(1, 1) <= Rational(1, 2));
    const Rational a44 = mac_forgery_advantage(4, 4);
    const Rational a48 = mac_forgery_advantage(4, 8);
    CHECK(a44 <= Rational(1, 16));
    CHECK(a48 <= Rational(2, 16));
    // One block: the tag is affine in k1 with a nonzero slope difference,
    // so each forgery is right for exactly one k1.
    CHECK(a44 == Rational(1, 16));
    // Two blocks: w' - w is a nonzero polynomial of degree <= 2 in k1.
    CHECK(a48 == Rational(1, 8));
    // Either full half-key breaks the MAC: k1 directly, k2 because the tag
    // of a one-block query then reveals k1.
    CHECK(mac_forgery_with_leakage(4, 8, {4, 5, 6, 7}) == 1);
    CHECK(mac_forgery_with_leakage(4, 8, {0, 1, 2, 3}) == 1);
    CHECK(mac_forgery_with_leakage(4, 8, {}) == a48);
    CHECK(mac_forgery_with_leakage(4, 8, {0}) <= Rational(2, 8));
    CHECK(mac_forgery_with_leakage(4, 8, {5}) <= Rational(2, 8));
    CHECK_THROWS_AS(mac_forgery_with_leakage(4, 8, {8}), Error);
  }

  TEST_CASE("presets") {
    const ProtocolParams micro = ProtocolParams::preset("micro");
    CHECK(micro.n == 12);
    CHECK(micro.rows == 1);
    CHECK(micro.y1_bits == 5);
    CHECK(micro.y2_bits == 4);
    CHECK(micro.y3_bits == 4);
    CHECK(micro.z_bits == 12);
    CHECK(micro.tag_bits == 6);
    CHECK(micro.m_nm == 6);
    CHECK(micro.v_bits == std::vector<unsigned>{2});
    CHECK(micro.key_bits == 2);
    const ProtocolParams small = ProtocolParams::preset("small");
    CHECK(small.row_bits == 32);
    CHECK(small.d_nm == 15);
    CHECK(small.m_nm == 16);
    CHECK(small.z_bits == 64);
    CHECK(small.tag_bits == 32);
    CHECK(small.v_bits == std::vector<unsigned>{16, 8});
    CHECK(small.y1_bits == 16);
    CHECK(small.y2_bits == 640);
    CHECK(small.y3_bits == 492);
    CHECK(small.target_epsilon() == doctest::Approx(1.0 / 16));
    const ProtocolParams demo = ProtocolParams::preset("demo");
    CHECK(demo.rows == 4);
    CHECK(demo.nm_r == 3);
    CHECK(demo.d_nm == 63);
    for (const auto* p : {&micro, &small, &demo}) {
      CHECK(p->v_total() < p->z_bits);
      CHECK_FALSE(p->relaxations.empty());
      CHECK_NOTHROW(p->validate());
      CHECK_NOTHROW(Protocol(*p));
    }
    CHECK_THROWS_AS(ProtocolParams::preset("huge"), Error);
  }

  TEST_CASE("formula widths") {
    const FormulaWidths f = formula_widths(4, 2, 16, 15);
    CHECK(f.m_nm == 6 * 4 * 4);
    CHECK(f.z_bits == 4 * 24);
    CHECK(f.tag_bits == 4 * 12);
    CHECK(f.y1_bits == 16);
    CHECK(f.y2_bits == 4 * 2 * 16 + 31 * 16 + 16);
    CHECK(f.y3_bits == 30 * 16 + 12);
    CHECK(f.v_bits == std::vector<unsigned>{16, 8});
  }

  TEST_CASE("alternating extraction") {
    const Protocol pr(ProtocolParams::preset("micro"));
    const ProtocolParams& p = pr.params();
    Rng rng(3, 3);
    const BitVec x = rng.bits(p.n), q = rng.bits(p.y2_bits), s0 = rng.bits(p.y3_bits);
    const std::vector<BitVec> xbar = pr.nm_rows(x, rng.bits(p.y1_bits));
    const AltExtraction a = pr.alt_extract(x, xbar, q, s0);
    CHECK(a.s.size() == 2);
    CHECK(a.r.size() == 2);
    REQUIRE(a.v.size() == 1);
    CHECK(a.v[0].size() == 2 * p.s);
    CHECK(pr.look_ahead_ext(x, xbar, q, s0) == a.v);
    CHECK(a.s[0] == s0);
    CHECK(a.r[0] == two_source_fold(s0, x, p.d));
    CHECK(a.s[1] == strong_seeded_ext(q, a.r[0], p.d));
    CHECK(a.r[1] == strong_seeded_ext(x, a.s[1], p.d));
    const AltExtraction z = pr.alt_extract(BitVec(p.n), xbar, BitVec(p.y2_bits), s0);
    for (std::size_t i = 1; i < z.s.size(); ++i) CHECK(z.s[i].is_zero());
    for (const auto& r : z.r) CHECK(r.is_zero());
    for (const auto& v : z.v) CHECK(v.is_zero());
    CHECK_THROWS_AS(pr.alt_extract(x, {}, q, s0), Error);
  }

  TEST_CASE("golden session at the small preset") {
    const Protocol pr(ProtocolParams::preset("small"));
    Rng rng(2026, 0);
    const BitVec x = rng.bits(64);
    StreamRandomness ra(rng), rb(rng);
    auto [m1, st] = pr.alice_round1(x, ra);
    auto [m2, bob] = pr.bob_round(x, m1, rb);
    const PartyOutcome a = pr.alice_finalize(st, m2);
    CHECK(a.accepted);
    CHECK(a.key == bob.key);
    CHECK(m2.w.to_hex() == GOLDEN_W);
    CHECK(m2.t.to_hex() == GOLDEN_T);
    CHECK(m2.v.to_hex() == GOLDEN_V);
    CHECK(a.key.to_hex() == GOLDEN_KEY);
  }

  TEST_CASE("Alice rejects tampered second messages") {
    const Protocol pr(ProtocolParams::preset("small"));
    Rng rng(5, 0);
    const BitVec x = rng.bits(64);
    StreamRandomness r(rng);
    auto [m1, st] = pr.alice_round1(x, r);
    auto [m2, bob] = pr.bob_round(x, m1, r);
    for (int f = 0; f < 3; ++f) {
      Round2Msg bad = m2;
      BitVec& field = f == 0 ? bad.w : f == 1 ? bad.t : bad.v;
      field.flip(0);
      CHECK_FALSE(pr.alice_finalize(st, bad).accepted);
    }
    Round2Msg shortened = m2;
    shortened.t = shortened.t.resized(3);
    CHECK_FALSE(pr.alice_finalize(st, shortened).accepted);
    Round1Msg wrong = m1;
    wrong.y1 = wrong.y1.resized(2);
    CHECK_THROWS_AS(pr.bob_round(x, wrong, r), Error);
    FixedRandomness few(BitVec(3));
    CHECK_THROWS_AS(pr.alice_round1(x, few), Error);
  }
}

TEST_SUITE("eve") {
  TEST_CASE("strategy library") {
    const ProtocolParams p = ProtocolParams::preset("small");
    const auto names = tampering_strategy_names();
    CHECK(names.size() == 17);
    std::set<std::string> seen;
    for (const auto& n : names) {
      const auto e = make_eve(n, p);
      CHECK_FALSE(e->passive());
      seen.insert(e->name());
    }
    CHECK(seen.size() == names.size());
    CHECK(make_eve("passive", p)->passive());
    CHECK(make_eve("flip-t:3", p)->name() == "flip-t:3");
    CHECK_THROWS_AS(make_eve("flip-q", p), Error);
    CHECK_THROWS_AS(make_eve("trunc-w:x", p), Error);
  }

  TEST_CASE("tampering edits only the named field") {
    const ProtocolParams p = ProtocolParams::preset("small");
    Rng rng(6, 0);
    const Round1Msg m1{rng.bits(p.y1_bits), rng.bits(p.y2_bits), rng.bits(p.y3_bits)};
    const Round2Msg m2{rng.bits(p.d), rng.bits(p.tag_bits), rng.bits(p.v_total())};
    const EveView view{BitVec(0), m1, m1};
    const Round2Msg t = make_eve("flip-t:3", p)->tamper_round2(m2, view);
    CHECK((t.t ^ m2.t).popcount() == 1);
    CHECK(t.t.get(3) != m2.t.get(3));
    CHECK(t.w == m2.w);
    CHECK(t.v == m2.v);
    const Round1Msg y = make_eve("trunc-y2:10", p)->tamper_round1(m1, BitVec(0));
    CHECK(y.y2.size() == p.y2_bits);
    CHECK(y.y2.slice(0, 10) == m1.y2.slice(0, 10));
    CHECK(y.y2.slice(10, p.y2_bits - 10).is_zero());
    CHECK(y.y1 == m1.y1);
    const Round2Msg c = make_eve("const-r2", p)->tamper_round2(m2, view);
    CHECK(c.w.is_zero());
    CHECK(c.t.is_zero());
    CHECK(c.v.is_zero());
  }

  TEST_CASE("leaky strategies see the first bits of x") {
    const ProtocolParams p = ProtocolParams::preset("small");
    const auto e = make_eve("leaky-adaptive", p);
    CHECK(e->leakage_bits() == 4);
    const BitVec x = BitVec::from_u64(0xABCD, 64);
    CHECK(e->leak(x).to_u64() == 0xD);
    const auto composed = make_eve("flip-y1-w", p);
    CHECK(composed->leakage_bits() == 0);
  }
}

TEST_SUITE("session") {
  TEST_CASE("Wilson interval") {
    const Interval z = wilson_interval(0, 100);
    CHECK(z.lo == doctest::Approx(0.0));
    CHECK(z.hi == doctest::Approx(1.96 * 1.96 / (100 + 1.96 * 1.96)));
    const Interval h = wilson_interval(50, 100);
    CHECK(h.lo + h.hi == doctest::Approx(1.0));
    CHECK_THROWS_AS(wilson_interval(3, 2), Error);
  }

  TEST_CASE("bit-fixing secret") {
    const BitFixingSecret s(64, 10, 4);
    Rng rng(1, 0);
    const BitVec a = s.sample(rng), b = s.sample(rng);
    CHECK(a.slice(10, 54) == b.slice(10, 54));
    CHECK(s.min_entropy() == doctest::Approx(10));
  }

  TEST_CASE("passive sessions are correct and reproducible") {
    const ProtocolParams p = ProtocolParams::preset("small");
    const Protocol pr(p);
    const BitFixingSecret src(p.n, p.k, 7);
    const PassiveEve passive;
    std::vector<std::string> lines;
    const SessionStats a =
        run_session(pr, src, passive, 200, 9, [&](const nlohmann::json& t) { lines.push_back(t.dump()); });
    CHECK(a.correct == 200);
    CHECK(a.robustness_violations == 0);
    CHECK(a.violation_rate() == 0);
    REQUIRE(lines.size() == 200);
    std::vector<std::string> again;
    run_session(pr, src, passive, 200, 9, [&](const nlohmann::json& t) { again.push_back(t.dump()); });
    CHECK(lines == again);
    const auto t0 = nlohmann::json::parse(lines[0]);
    CHECK(t0["outcome_A"]["status"] == "accept");
    CHECK(t0["outcome_A"]["key"] == t0["outcome_B"]["key"]);
  }

  TEST_CASE("tampering with W is bounded by MAC forgery") {
    const ProtocolParams p = ProtocolParams::preset("small");
    const Protocol pr(p);
    const BitFixingSecret src(p.n, p.k, 7);
    // Flipping bit 0 of W shifts the tag by k1, so Alice accepts exactly when
    // k1 = 0. That happens when Y1 = 0 zeroes the whole MAC key.
    std::uint64_t accepted = 0, zero_seed = 0;
    const SessionStats s = run_session(pr, src, *make_eve("flip-w", p), 200000, 3, [&](const nlohmann::json& t) {
      if (t["outcome_A"]["status"] != "accept") return;
      ++accepted;
      if (t["messages_sent"]["alice"]["y1"] == "0000") ++zero_seed;
    });
    CHECK(s.alice_accepts == accepted);
    CHECK(zero_seed == accepted);
    CHECK(s.correct == 0);
    CHECK(wilson_interval(s.alice_accepts, s.trials).lo <= std::ldexp(1.0, -static_cast<int>(p.y1_bits)));
    const SessionStats c = run_session(pr, src, *make_eve("const-r2", p), 20000, 3);
    CHECK(c.alice_accepts == 0);
  }

  TEST_CASE("exhaustive passive run at micro widths") {
    const Protocol pr(ProtocolParams::preset("micro"));
    const ExhaustiveRun r = exhaustive_passive_run(pr, FlatSource(12, {3, 900, 1234, 4095}));
    CHECK(r.sessions == 4ull << 17);
    CHECK(r.correct == r.sessions);
  }

  TEST_CASE("exact key distance matches the replay oracle") {
    const Protocol pr(ProtocolParams::preset("micro"));
    const FlatSource xs(12, {5, 77, 1500, 3000});
    const Rational fast = exact_key_tv(pr, xs, PassiveEve{});
    CHECK(fast == brute_key_tv(pr, xs));
    CHECK(fast <= 1);
  }

  TEST_CASE("passive view law") {
    const Protocol pr(ProtocolParams::preset("micro"));
    const ProtocolParams& p = pr.params();
    const Round1Msg y{BitVec::from_u64(3, p.y1_bits), BitVec::from_u64(9, p.y2_bits), BitVec::from_u64(4, p.y3_bits)};
    const JointDist j = passive_view_joint(pr, FlatSource(12, {1, 2, 3}), y, BitVec::from_u64(5, p.d));
    CHECK(j.widths() == std::vector<unsigned>{p.n, p.tag_bits + p.v_total()});
    CHECK(j.marginal_dist(0).support_size() == 3);
  }
}
