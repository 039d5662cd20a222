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

#include "doctest.h"
#include "nmx/codes.hpp"
#include "nmx/error.hpp"
#include "nmx/extractors.hpp"
#include "nmx/harness.hpp"
#include "nmx/nmext.hpp"
#include "nmx/rng.hpp"
#include "oracles.hpp"

using namespace nmx;

namespace {

NmExtConfig cfg_of(NmVariant v, unsigned n) {
  NmExtConfig c;
  c.variant = v;
  c.n = n;
  return c;
}

// IP of an n-bit x with the packed column (z, z^3, ..., z^(2r+1)) over
// GF(2^l), from the power oracle.
unsigned ip_with_column(std::uint64_t x, std::uint64_t z, unsigned r, unsigned ell, std::uint64_t low) {
  std::uint64_t col = 0;
  for (unsigned i = 0; i <= r; ++i) col |= oracle::gf_pow(z, 2 * i + 1, ell, low) << (i * ell);
  return oracle::parity(x & col);
}

}  // namespace

TEST_SUITE("nmext") {
  TEST_CASE("variant names round trip") {
    for (auto v : {NmVariant::kHalf, NmVariant::kBelowHalf, NmVariant::kFpQuadratic, NmVariant::kMultibit,
                   NmVariant::kReducedSeed, NmVariant::kGenericR}) {
      CHECK(variant_from_name(variant_name(v)) == v);
    }
    CHECK_THROWS_AS(variant_from_name("ip"), Error);
    NmExtConfig c = cfg_of(NmVariant::kMultibit, 8);
    c.m = 3;
    c.embed = Embed::kAllColumns;
    const NmExtConfig back = NmExtConfig::from_json(c.to_json());
    CHECK(back.variant == NmVariant::kMultibit);
    CHECK(back.m == 3);
    CHECK(back.embed == Embed::kAllColumns);
  }

  TEST_CASE("half-length construction") {
    const NmExtConfig c = cfg_of(NmVariant::kHalf, 8);
    const NmExtractor nm(c);
    CHECK(nm.seed_bits() == 3);
    CHECK(nm.seed_count() == 8);
    const std::uint64_t low = GF2Ctx(4).modulus_low();
    for (std::uint64_t y = 0; y < 8; ++y) {
      CHECK(nm_half(BitVec(8), y, c) == 0);
      for (std::uint64_t x = 0; x < 256; ++x) {
        REQUIRE(nm.eval(x, y) == ip_with_column(x, y | 8, 1, 4, low));
      }
    }
    // Column for z = 1 at n = 6 is (001, 001); x = 111111 hits two ones.
    CHECK_FALSE(ip_f2(BitVec::from_u64(0b111111, 6), pack_blocks(bch_column(1, 1, GF2Ctx(3)), 3)));
    CHECK_THROWS_AS(NmExtractor(cfg_of(NmVariant::kHalf, 7)), Error);
  }

  TEST_CASE("wide sources take the bit-vector path") {
    const NmExtractor nm(cfg_of(NmVariant::kHalf, 126));
    Rng rng(8, 8);
    const BitVec x = rng.bits(126);
    const std::uint64_t y = rng.below(nm.seed_count());
    CHECK(nm.eval_bits(x, y).size() == 1);
    CHECK(nm.eval_bits(x, y).get(0) == ip_f2(x, nm.encode_seed(y)));
    CHECK_THROWS_AS(nm.eval_bits(rng.bits(125), y), Error);
    CHECK_THROWS_AS(NmExtractor(cfg_of(NmVariant::kHalf, 128)), Error);
  }

  TEST_CASE("below-half construction") {
    CHECK(below_half_prime(2) == 3);
    CHECK(below_half_prime(4) == 5);
    CHECK(below_half_prime(6) == 7);
    CHECK(below_half_prime(16) == 17);
    // p = 3: x = 1 encodes as (1, g) with g = x in GF(8).
    const NmExtConfig c = cfg_of(NmVariant::kBelowHalf, 2);
    const NmExtractor nm(c);
    CHECK(nm.prime() == 3);
    const std::uint64_t low = GF2Ctx(3).modulus_low();
    for (std::uint64_t y = 0; y < nm.seed_count(); ++y) {
      const std::uint64_t ex = 1 | (0b010 << 3);
      CHECK(nm_below(BitVec::from_u64(1, 2), y, c) == ip_with_column(ex, y | 4, 1, 3, low));
    }
    // x = 2^p - 1 gives g^x = 1.
    const NmExtractor wide(cfg_of(NmVariant::kBelowHalf, 3));
    CHECK(wide.prime() == 5);
    const std::uint64_t low5 = GF2Ctx(5).modulus_low();
    for (std::uint64_t y = 0; y < wide.seed_count(); ++y) {
      CHECK(wide.eval(7, y) == ip_with_column(7 | (oracle::gf_pow(2, 7, 5, low5) << 5), y | 16, 1, 5, low5));
    }
    CHECK_THROWS_AS(nm.eval(0, 1), Error);
    CHECK_FALSE(nm.accepts_source(0));
  }

  TEST_CASE("quadratic construction over F_p") {
    NmExtConfig c;
    c.variant = NmVariant::kFpQuadratic;
    c.p = 7;
    c.modulus = 4;
    CHECK(nm_fp(3, 2, c) == 0);
    for (FpElem v = 0; v < 7; ++v) {
      CHECK(nm_fp(0, v, c) == 0);
      CHECK(nm_fp(v, 0, c) == 0);
      for (FpElem w = 0; w < 7; ++w) CHECK(nm_fp(v, w, c) == ((v * w + v * v * w * w) % 7) % 4);
    }
    c.modulus = 6;
    CHECK_THROWS_AS(NmExtractor{c}, Error);
    NmExtConfig d;
    d.variant = NmVariant::kFpQuadratic;
    d.n = 4;
    const NmExtractor nm(d);
    CHECK(nm.prime() == 17);
    CHECK(nm.output_bits() == 4);
  }

  TEST_CASE("multi-bit output") {
    NmExtConfig c = cfg_of(NmVariant::kMultibit, 6);
    c.m = 2;
    const NmExtractor nm(c);
    CHECK(nm.output_bits() == 2);
    const NmExtractor one(cfg_of(NmVariant::kHalf, 6));
    for (std::uint64_t y = 0; y < nm.seed_count(); ++y) {
      CHECK(nm_multibit(BitVec(6), y, c).is_zero());
      for (std::uint64_t x = 0; x < 64; ++x) REQUIRE((nm.eval(x, y) & 1) == one.eval(x, y));
    }
    // On the full cube every nonempty XOR of output bits across a tampered
    // pair is unbiased: t1 (z, z^3) + t2 (z', z'^3) never vanishes for z != z'.
    const ExplicitDist yd = ExplicitDist::uniform(2);
    for (std::uint64_t c0 = 1; c0 < 4; ++c0) {
      std::vector<std::uint64_t> t(4);
      for (std::uint64_t y = 0; y < 4; ++y) t[y] = y ^ c0;
      const JointDist j = nm_joint(nm.as_fn(), 2, FlatSource::full(6), yd, {AdversaryFn(t)});
      CHECK(nm_error(j) == 0);
      const std::vector<std::vector<unsigned>> subsets{{}, {0}, {1}, {0, 1}};
      for (const auto& s1 : subsets) {
        for (const auto& s2 : subsets) {
          if (s1.empty()) continue;
          CHECK(xor_bias(j, s1, s2) == 0);
        }
      }
    }
    c.m = 4;
    CHECK_THROWS_AS(NmExtractor{c}, Error);
  }

  TEST_CASE("reduced-seed construction") {
    NmExtConfig c = cfg_of(NmVariant::kReducedSeed, 4);
    c.t = 1;
    const NmExtractor r1(c);
    const NmExtractor below(cfg_of(NmVariant::kBelowHalf, 4));
    for (std::uint64_t x = 1; x < 16; ++x) {
      for (std::uint64_t y = 0; y < below.seed_count(); ++y) CHECK(r1.eval(x, y) == below.eval(x, y));
    }
    // t = 2 over p = 5: l = 2 and the column (z, z^3, z^5, z^7) in GF(4),
    // zero-padded against the 10-bit (x, g^x).
    c.t = 2;
    const NmExtractor r2(c);
    CHECK(r2.field_bits() == 2);
    CHECK(r2.seed_count() == 2);
    const std::uint64_t low5 = GF2Ctx(5).modulus_low();
    const std::uint64_t low2 = GF2Ctx(2).modulus_low();
    const std::uint64_t g = gf_find_generator(GF2Ctx(5));
    for (std::uint64_t x = 1; x < 16; ++x) {
      for (std::uint64_t y = 0; y < 2; ++y) {
        const std::uint64_t ex = x | (oracle::gf_pow(g, x, 5, low5) << 5);
        CHECK(nm_reduced_seed(BitVec::from_u64(x, 4), y, c) == ip_with_column(ex, y | 2, 3, 2, low2));
      }
    }
    CHECK_THROWS_AS(nm_reduced_seed(BitVec(4), 0, c), Error);
  }

  TEST_CASE("generic-r construction") {
    NmExtConfig c;
    c.variant = NmVariant::kGenericR;
    c.r = 1;
    c.ell = 4;
    const NmExtractor r1(c);
    const NmExtractor half(cfg_of(NmVariant::kHalf, 8));
    for (std::uint64_t x = 0; x < 256; ++x) {
      for (std::uint64_t y = 0; y < 8; ++y) REQUIRE(r1.eval(x, y) == half.eval(x, y));
    }
    c.r = 2;
    const NmExtractor r2(c);
    CHECK(r2.source_bits() == 12);
    const std::uint64_t low = GF2Ctx(4).modulus_low();
    Rng rng(2, 2);
    for (int i = 0; i < 200; ++i) {
      const std::uint64_t x = rng.below(1 << 12), y = rng.below(8);
      CHECK(nm_generic_r(BitVec::from_u64(x, 12), y, c) == ip_with_column(x, y | 8, 2, 4, low));
    }
    // A linear source encoding keeps the output bilinear in f(x).
    c.r = 1;
    c.n = 4;
    const GF2Ctx ctx(4);
    c.f = [ctx](const BitVec& x) {
      const std::uint64_t v = x.to_u64();
      return BitVec::from_u64(v | (gf_mul(v, v, ctx) << 4), 8);
    };
    for (std::uint64_t a = 0; a < 16; ++a) {
      for (std::uint64_t b = 0; b < 16; ++b) {
        for (std::uint64_t y = 0; y < 8; ++y) {
          CHECK((nm_generic_r(BitVec::from_u64(a ^ b, 4), y, c) ==
                 (nm_generic_r(BitVec::from_u64(a, 4), y, c) ^ nm_generic_r(BitVec::from_u64(b, 4), y, c))));
        }
      }
    }
  }

  TEST_CASE("two-source wrapper") {
    const NmExtractor nm(cfg_of(NmVariant::kHalf, 8));
    CHECK(two_source_tag_bits(1) == 1);
    CHECK(two_source_tag_bits(2) == 1);
    CHECK(two_source_tag_bits(5) == 3);
    for (std::uint64_t x = 0; x < 256; x += 7) {
      for (std::uint64_t y = 0; y < 4; ++y) {
        CHECK(nm_to_two_source(BitVec::from_u64(x, 8), BitVec::from_u64(y, 2), nm, {1, 0.9}) == nm.eval(x, y));
        // Equal rows still reach distinct seeds through the tag.
        const BitVec yy = BitVec::from_u64(y | (y << 2), 4);
        CHECK(nm_to_two_source(BitVec::from_u64(x, 8), yy, nm, {2, 0.9}) == (nm.eval(x, y) ^ nm.eval(x, y | 4)));
      }
    }
    CHECK_THROWS_AS(nm_to_two_source(BitVec(8), BitVec(6), nm, {2, 0.9}), Error);
  }

  TEST_CASE("sweep errors match the oracle") {
    const NmExtractor nm(cfg_of(NmVariant::kHalf, 8));
    const Construction c = make_construction({{"name", "half"}, {"n", 8}});
    const auto sources = make_sources({{"kind", "flat_random"}, {"k", 6}, {"count", 3}, {"seed", 4}}, c);
    for (const auto& src : sources) {
      for (const auto& a : gen_adversaries({FamilyKind::kOffset}, 8)) {
        const Rational got = nm_error(nm_joint(c.fn, 1, src, ExplicitDist::uniform(3), {a}));
        CHECK(got == oracle::nm_error([&](std::uint64_t x, std::uint64_t y) { return nm.eval(x, y); }, 1,
                                      src.support(), 8, a.table()));
        CHECK(got < Rational(1, 2));
      }
    }
  }
}
