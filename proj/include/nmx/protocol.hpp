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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nmx/bits.hpp"
#include "nmx/dist.hpp"
#include "nmx/nmext.hpp"
#include "nmx/rng.hpp"

namespace nmx {

// Widths exactly as the protocol's formulas give them.
struct FormulaWidths {
  unsigned m_nm = 0;   // 6 * 2^C * s
  unsigned z_bits = 0;   // 2^C * 6s
  unsigned tag_bits = 0;   // 2^C * 3s
  unsigned y1_bits = 0;  // max(d, d')
  unsigned y2_bits = 0;  // 4Cd + 31 max(d, d') + 4s
  unsigned y3_bits = 0;  // 30 max(d, d') + 3s
  std::vector<unsigned> v_bits;  // 2^(C-i) * 2s, i = 1..C

  nlohmann::json to_json() const;
};

FormulaWidths formula_widths(unsigned s, unsigned rows, unsigned d,
                             unsigned d_nm);

struct ProtocolParams {
  std::string name;
  unsigned n = 0;
  unsigned k = 0;
  unsigned s = 0;
  unsigned rows = 1;      // condenser row count C
  unsigned d = 0;         // seeded-extractor seed bits (|W|, |R_i|, |S_i|)
  unsigned row_bits = 0;  // n / C
  unsigned nm_r = 1;      // nm slot column degree parameter
  unsigned nm_ell = 0;    // nm slot field width
  unsigned d_nm = 0;      // nm slot seed bits d'
  unsigned m_nm = 0;      // |X-bar_i|
  unsigned z_bits = 0;    // MAC key
  unsigned tag_bits = 0;
  unsigned y1_bits = 0;
  unsigned y2_bits = 0;
  unsigned y3_bits = 0;
  std::vector<unsigned> v_bits;
  unsigned key_bits = 0;  // final key |R_A| = |R_B|
  FormulaWidths formula;
  // One line per width that differs from its formula value.
  std::vector<std::string> relaxations;

  // Formula widths, then fitted to what the desk-scale components can
  // produce: nm output <= l, MAC key <= min(n, 64), sum |V_i| < |Z|.
  // y_divisor > 1 shrinks |Y2| and |Y3| proportionally.
  static ProtocolParams make(std::string name, unsigned n, unsigned k,
                             unsigned s, unsigned rows, unsigned d,
                             unsigned key_bits, unsigned y_divisor = 1);
  // micro (n=12, s=1, C=1), small (n=64, s=4, C=2), demo (n=1024, s=16, C=4).
  static ProtocolParams preset(std::string_view name);

  unsigned v_total() const;
  unsigned mac_v() const { return tag_bits; }
  // Robustness target printed with every run.
  double target_epsilon() const;
  void validate() const;
  nlohmann::json to_json() const;
};

struct Round1Msg {
  BitVec y1, y2, y3;
};

struct Round2Msg {
  BitVec w, t, v;  // v = V_1 || ... || V_C
};

struct PartyOutcome {
  bool accepted = false;
  BitVec key;
};

struct AliceState {
  BitVec x;
  Round1Msg sent;
};

struct AltExtraction {
  std::vector<BitVec> s;  // S_0 .. S_C
  std::vector<BitVec> r;  // R_0 .. R_C
  std::vector<BitVec> v;  // V_1 .. V_C
};

// Source of the parties' fresh coins.
class Randomness {
 public:
  virtual ~Randomness() = default;
  virtual BitVec take(std::size_t nbits) = 0;
};

class StreamRandomness : public Randomness {
 public:
  explicit StreamRandomness(Rng& rng) : rng_(rng) {}
  BitVec take(std::size_t nbits) override { return rng_.bits(nbits); }

 private:
  Rng& rng_;
};

// Hands out a fixed bit string in order; kInsufficientRandomness when empty.
class FixedRandomness : public Randomness {
 public:
  explicit FixedRandomness(BitVec bits) : bits_(std::move(bits)) {}
  BitVec take(std::size_t nbits) override;

 private:
  BitVec bits_;
  std::size_t pos_ = 0;
};

// lrMAC: key = (k1, k2) in GF(2^v)^2, tag = k2 + sum_i w_i * k1^i over the
// v-bit blocks of msg (last block zero-padded).
BitVec mac_tag(const BitVec& key, const BitVec& msg);
std::uint64_t mac_tag_u64(std::uint64_t key, unsigned v, std::uint64_t msg,
                          unsigned d);
// Best single-query forgery probability over uniform keys, exact.
Rational mac_forgery_advantage(unsigned v, unsigned d,
                               std::uint64_t cap = kDefaultEnumerationCap);
// Same, when the forger also sees the key bits at `leaked` positions
// (positions index the 2v-bit key; k1 is the low half).
Rational mac_forgery_with_leakage(unsigned v, unsigned d,
                                  const std::vector<unsigned>& leaked,
                                  std::uint64_t cap = kDefaultEnumerationCap);

// One configured protocol instance: widths plus the non-malleable extractor
// filling the nmExt slot.
class Protocol {
 public:
  explicit Protocol(ProtocolParams params);

  const ProtocolParams& params() const { return params_; }
  const NmExtractor& nm() const { return nm_; }

  BitVec mac_key(const BitVec& x, const BitVec& y1) const;          // Z
  std::vector<BitVec> nm_rows(const BitVec& x, const BitVec& y1) const;  // X-bar
  BitVec final_key(const BitVec& x, const BitVec& w) const;          // Ext(X; W)

  // The seed chain alone: S_0..S_C and R_0..R_C depend only on (x, q, s0).
  AltExtraction alt_extract_seeds(const BitVec& x, const BitVec& q,
                                  const BitVec& s0) const;
  BitVec v_output(const BitVec& xbar_row, const BitVec& s_i, unsigned i) const;
  AltExtraction alt_extract(const BitVec& x, const std::vector<BitVec>& xbar,
                            const BitVec& q, const BitVec& s0) const;
  std::vector<BitVec> look_ahead_ext(const BitVec& x,
                                     const std::vector<BitVec>& xbar,
                                     const BitVec& q, const BitVec& s0) const;

  std::pair<Round1Msg, AliceState> alice_round1(const BitVec& x,
                                                Randomness& rnd) const;
  std::pair<Round2Msg, PartyOutcome> bob_round(const BitVec& x,
                                               const Round1Msg& received,
                                               Randomness& rnd) const;
  PartyOutcome alice_finalize(const AliceState& state,
                              const Round2Msg& received) const;

 private:
  void check_round1(const Round1Msg& m) const;
  void check_round2(const Round2Msg& m) const;

  ProtocolParams params_;
  NmExtractor nm_;
};

// Nm slot used by the protocol for a given row width.
NmExtConfig protocol_nm_config(unsigned row_bits, unsigned m_nm);

}  // namespace nmx
