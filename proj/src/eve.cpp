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

#include "nmx/eve.hpp"

#include <charconv>

#include "nmx/error.hpp"
#include "nmx/rng.hpp"

namespace nmx {
namespace {

bool in_round1(MsgField f) { return f == MsgField::kY1 || f == MsgField::kY2 || f == MsgField::kY3; }

BitVec& field_ref(Round1Msg& m, MsgField f) {
  switch (f) {
    case MsgField::kY1: return m.y1;
    case MsgField::kY2: return m.y2;
    default: return m.y3;
  }
}

BitVec& field_ref(Round2Msg& m, MsgField f) {
  switch (f) {
    case MsgField::kW: return m.w;
    case MsgField::kT: return m.t;
    default: return m.v;
  }
}

std::size_t field_width(const ProtocolParams& p, MsgField f) {
  switch (f) {
    case MsgField::kY1: return p.y1_bits;
    case MsgField::kY2: return p.y2_bits;
    case MsgField::kY3: return p.y3_bits;
    case MsgField::kW: return p.d;
    case MsgField::kT: return p.tag_bits;
    case MsgField::kV: return p.v_total();
  }
  return 0;
}

void flip_at(BitVec& v, std::size_t pos) {
  if (!v.empty()) v.flip(pos % v.size());
}

void truncate_to(BitVec& v, std::size_t keep) {
  if (keep < v.size()) v = v.slice(0, keep).resized(v.size());
}

}  // namespace

std::string_view field_name(MsgField f) {
  switch (f) {
    case MsgField::kY1: return "y1";
    case MsgField::kY2: return "y2";
    case MsgField::kY3: return "y3";
    case MsgField::kW: return "w";
    case MsgField::kT: return "t";
    case MsgField::kV: return "v";
  }
  return "?";
}

MsgField field_from_name(std::string_view name) {
  for (auto f : {MsgField::kY1, MsgField::kY2, MsgField::kY3, MsgField::kW, MsgField::kT, MsgField::kV}) {
    if (field_name(f) == name) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown message field '" + std::string(name) + "'");
}

BitVec EveStrategy::leak(const BitVec&) const { return BitVec(0); }

Round1Msg EveStrategy::tamper_round1(const Round1Msg& m, const BitVec&) const { return m; }

Round2Msg EveStrategy::tamper_round2(const Round2Msg& m, const EveView&) const { return m; }

BitFlipEve::BitFlipEve(MsgField field, std::size_t position) : field_(field), position_(position) {}

std::string BitFlipEve::name() const {
  return "flip-" + std::string(field_name(field_)) + ":" + std::to_string(position_);
}

Round1Msg BitFlipEve::tamper_round1(const Round1Msg& m, const BitVec&) const {
  Round1Msg out = m;
  if (in_round1(field_)) flip_at(field_ref(out, field_), position_);
  return out;
}

Round2Msg BitFlipEve::tamper_round2(const Round2Msg& m, const EveView&) const {
  Round2Msg out = m;
  if (!in_round1(field_)) flip_at(field_ref(out, field_), position_);
  return out;
}

std::string ConstantEve::name() const { return "const-r" + std::to_string(round_); }

Round1Msg ConstantEve::tamper_round1(const Round1Msg& m, const BitVec&) const {
  if (round_ != 1) return m;
  return {BitVec(m.y1.size()), BitVec(m.y2.size()), BitVec(m.y3.size())};
}

Round2Msg ConstantEve::tamper_round2(const Round2Msg& m, const EveView&) const {
  if (round_ != 2) return m;
  return {BitVec(m.w.size()), BitVec(m.t.size()), BitVec(m.v.size())};
}

TruncateEve::TruncateEve(MsgField field, std::size_t keep) : field_(field), keep_(keep) {}

std::string TruncateEve::name() const {
  return "trunc-" + std::string(field_name(field_)) + ":" + std::to_string(keep_);
}

Round1Msg TruncateEve::tamper_round1(const Round1Msg& m, const BitVec&) const {
  Round1Msg out = m;
  if (in_round1(field_)) truncate_to(field_ref(out, field_), keep_);
  return out;
}

Round2Msg TruncateEve::tamper_round2(const Round2Msg& m, const EveView&) const {
  Round2Msg out = m;
  if (!in_round1(field_)) truncate_to(field_ref(out, field_), keep_);
  return out;
}

AdaptiveTableEve::AdaptiveTableEve(const ProtocolParams& params, std::uint64_t table_seed,
                                   unsigned leak_bits, unsigned index_bits)
    : leak_bits_(leak_bits), index_bits_(index_bits) {
  if (index_bits == 0 || index_bits > 16) throw Error(ErrorCode::kInvalidArgument, "index bits must be in [1, 16]");
  if (leak_bits > params.n) throw Error(ErrorCode::kInvalidArgument, "leak wider than the secret");
  Rng rng(table_seed, 0xEAE);
  table_.resize(std::size_t{1} << index_bits);
  for (auto& e : table_) {
    e.y1_mask = rng.bits(params.y1_bits);
    do {
      e.w_mask = rng.bits(params.d);
    } while (e.w_mask.is_zero());
    e.t_mask = rng.bits(params.tag_bits);
  }
}

std::string AdaptiveTableEve::name() const {
  return leak_bits_ ? "leaky-adaptive:" + std::to_string(leak_bits_) : "adaptive";
}

BitVec AdaptiveTableEve::leak(const BitVec& x) const { return x.slice(0, leak_bits_); }

std::size_t AdaptiveTableEve::index(const BitVec& bits) const {
  return static_cast<std::size_t>(bits.bits(0, index_bits_));
}

Round1Msg AdaptiveTableEve::tamper_round1(const Round1Msg& m, const BitVec& leak) const {
  Round1Msg out = m;
  out.y1 ^= table_[index(leak_bits_ ? leak : m.y1)].y1_mask;
  return out;
}

Round2Msg AdaptiveTableEve::tamper_round2(const Round2Msg& m, const EveView& view) const {
  const Entry& e = table_[index(leak_bits_ ? view.leak : view.round1_sent.y1)];
  Round2Msg out = m;
  out.w ^= e.w_mask;
  out.t ^= e.t_mask;
  return out;
}

ComposedEve::ComposedEve(std::unique_ptr<EveStrategy> first, std::unique_ptr<EveStrategy> second)
    : first_(std::move(first)), second_(std::move(second)) {}

std::string ComposedEve::name() const { return first_->name() + "+" + second_->name(); }

unsigned ComposedEve::leakage_bits() const { return first_->leakage_bits() + second_->leakage_bits(); }

BitVec ComposedEve::leak(const BitVec& x) const { return first_->leak(x).concat(second_->leak(x)); }

Round1Msg ComposedEve::tamper_round1(const Round1Msg& m, const BitVec& leak) const {
  const unsigned a = first_->leakage_bits();
  const BitVec l1 = leak.slice(0, a);
  const BitVec l2 = leak.slice(a, leak.size() - a);
  return second_->tamper_round1(first_->tamper_round1(m, l1), l2);
}

Round2Msg ComposedEve::tamper_round2(const Round2Msg& m, const EveView& view) const {
  const unsigned a = first_->leakage_bits();
  EveView v1 = view;
  v1.leak = view.leak.slice(0, a);
  EveView v2 = view;
  v2.leak = view.leak.slice(a, view.leak.size() - a);
  return second_->tamper_round2(first_->tamper_round2(m, v1), v2);
}

std::unique_ptr<EveStrategy> make_eve(std::string_view spec, const ProtocolParams& params) {
  auto usage = [&] { return Error(ErrorCode::kInvalidArgument, "unknown Eve strategy '" + std::string(spec) + "'"); };
  std::string_view head = spec;
  std::optional<std::size_t> arg;
  if (auto colon = spec.find(':'); colon != std::string_view::npos) {
    head = spec.substr(0, colon);
    const std::string_view tail = spec.substr(colon + 1);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), v);
    if (ec != std::errc() || ptr != tail.data() + tail.size()) throw usage();
    arg = v;
  }
  if (head == "passive") return std::make_unique<PassiveEve>();
  if (head == "const-r1") return std::make_unique<ConstantEve>(1);
  if (head == "const-r2") return std::make_unique<ConstantEve>(2);
  if (head == "adaptive") return std::make_unique<AdaptiveTableEve>(params, arg.value_or(1));
  if (head == "leaky-adaptive") {
    const unsigned bits = static_cast<unsigned>(arg.value_or(std::min(8u, std::max(1u, params.s))));
    return std::make_unique<AdaptiveTableEve>(params, 2, bits, std::max(1u, std::min(bits, 16u)));
  }
  if (head == "flip-y1-w") {
    return std::make_unique<ComposedEve>(std::make_unique<BitFlipEve>(MsgField::kY1, arg.value_or(0)),
                                         std::make_unique<BitFlipEve>(MsgField::kW, arg.value_or(0)));
  }
  if (head.starts_with("flip-")) {
    return std::make_unique<BitFlipEve>(field_from_name(head.substr(5)), arg.value_or(0));
  }
  if (head.starts_with("trunc-")) {
    const MsgField f = field_from_name(head.substr(6));
    return std::make_unique<TruncateEve>(f, arg.value_or(field_width(params, f) / 2));
  }
  throw usage();
}

std::vector<std::string> tampering_strategy_names() {
  return {"flip-y1",  "flip-y2",  "flip-y3",  "flip-w",  "flip-t",  "flip-v",   "flip-y1-w", "const-r1", "const-r2",
          "trunc-y1", "trunc-y2", "trunc-y3", "trunc-w", "trunc-t", "trunc-v", "adaptive",  "leaky-adaptive"};
}

}  // namespace nmx
