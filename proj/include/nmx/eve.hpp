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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nmx/protocol.hpp"

namespace nmx {

enum class MsgField { kY1, kY2, kY3, kW, kT, kV };
std::string_view field_name(MsgField f);
MsgField field_from_name(std::string_view name);

struct EveView {
  BitVec leak;               // E(x)
  Round1Msg round1_sent;     // what Alice sent
  Round1Msg round1_delivered;  // what Bob received
};

// Man-in-the-middle on both rounds. Strategies are deterministic functions
// of Eve's view; any randomness they use is fixed at construction.
class EveStrategy {
 public:
  virtual ~EveStrategy() = default;
  virtual std::string name() const = 0;
  virtual bool passive() const { return false; }
  virtual unsigned leakage_bits() const { return 0; }
  virtual BitVec leak(const BitVec& x) const;
  virtual Round1Msg tamper_round1(const Round1Msg& m, const BitVec& leak) const;
  virtual Round2Msg tamper_round2(const Round2Msg& m, const EveView& view) const;
};

class PassiveEve : public EveStrategy {
 public:
  std::string name() const override { return "passive"; }
  bool passive() const override { return true; }
};

class BitFlipEve : public EveStrategy {
 public:
  BitFlipEve(MsgField field, std::size_t position);
  std::string name() const override;
  Round1Msg tamper_round1(const Round1Msg& m, const BitVec& leak) const override;
  Round2Msg tamper_round2(const Round2Msg& m, const EveView& view) const override;

 private:
  MsgField field_;
  std::size_t position_;
};

// Replaces every field of one round with zeros.
class ConstantEve : public EveStrategy {
 public:
  explicit ConstantEve(int round) : round_(round) {}
  std::string name() const override;
  Round1Msg tamper_round1(const Round1Msg& m, const BitVec& leak) const override;
  Round2Msg tamper_round2(const Round2Msg& m, const EveView& view) const override;

 private:
  int round_;
};

// Keeps the first `keep` bits of a field and zero-fills the rest.
class TruncateEve : public EveStrategy {
 public:
  TruncateEve(MsgField field, std::size_t keep);
  std::string name() const override;
  Round1Msg tamper_round1(const Round1Msg& m, const BitVec& leak) const override;
  Round2Msg tamper_round2(const Round2Msg& m, const EveView& view) const override;

 private:
  MsgField field_;
  std::size_t keep_;
};

// Looks up XOR masks for (Y1, W, T) in a fixed random table indexed by the
// low bits of what Eve has seen: Y1 in round 2, or E(x) when leak_bits > 0.
// With leak_bits > 0, E(x) is the projection onto the first leak_bits bits.
class AdaptiveTableEve : public EveStrategy {
 public:
  AdaptiveTableEve(const ProtocolParams& params, std::uint64_t table_seed,
                   unsigned leak_bits = 0, unsigned index_bits = 8);
  std::string name() const override;
  unsigned leakage_bits() const override { return leak_bits_; }
  BitVec leak(const BitVec& x) const override;
  Round1Msg tamper_round1(const Round1Msg& m, const BitVec& leak) const override;
  Round2Msg tamper_round2(const Round2Msg& m, const EveView& view) const override;

 private:
  struct Entry {
    BitVec y1_mask, w_mask, t_mask;
  };
  std::size_t index(const BitVec& bits) const;

  unsigned leak_bits_;
  unsigned index_bits_;
  std::vector<Entry> table_;
};

// Applies `first` then `second` in each round.
class ComposedEve : public EveStrategy {
 public:
  ComposedEve(std::unique_ptr<EveStrategy> first,
              std::unique_ptr<EveStrategy> second);
  std::string name() const override;
  unsigned leakage_bits() const override;
  BitVec leak(const BitVec& x) const override;
  Round1Msg tamper_round1(const Round1Msg& m, const BitVec& leak) const override;
  Round2Msg tamper_round2(const Round2Msg& m, const EveView& view) const override;

 private:
  std::unique_ptr<EveStrategy> first_;
  std::unique_ptr<EveStrategy> second_;
};

// Builds a strategy from its CLI name: passive, flip-<field>[:pos],
// flip-y1-w, const-r1, const-r2, trunc-<field>, adaptive, leaky-adaptive.
std::unique_ptr<EveStrategy> make_eve(std::string_view spec,
                                      const ProtocolParams& params);
// Every shipped strategy that tampers with the channel.
std::vector<std::string> tampering_strategy_names();

}  // namespace nmx
