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
#include <optional>
#include <string>

#include "json.hpp"
#include "nmx/dist.hpp"
#include "nmx/eve.hpp"
#include "nmx/protocol.hpp"

namespace nmx {

class SecretSource {
 public:
  virtual ~SecretSource() = default;
  virtual unsigned n_bits() const = 0;
  virtual double min_entropy() const = 0;
  virtual BitVec sample(Rng& rng) const = 0;
};

class FlatSecret : public SecretSource {
 public:
  explicit FlatSecret(FlatSource source) : source_(std::move(source)) {}
  unsigned n_bits() const override { return source_.n_bits(); }
  double min_entropy() const override { return source_.min_entropy(); }
  BitVec sample(Rng& rng) const override;

 private:
  FlatSource source_;
};

// Flat source on {x : x agrees with a fixed pattern outside the first k
// bits}; the pattern is drawn from `pattern_seed`.
class BitFixingSecret : public SecretSource {
 public:
  BitFixingSecret(unsigned n, unsigned k, std::uint64_t pattern_seed);
  unsigned n_bits() const override { return n_; }
  double min_entropy() const override { return k_; }
  BitVec sample(Rng& rng) const override;

 private:
  unsigned n_;
  unsigned k_;
  BitVec pattern_;
};

struct Interval {
  double lo = 0;
  double hi = 0;
};

// Wilson score interval for `successes` out of `trials` at normal quantile z.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z = 1.96);

struct SessionStats {
  std::string eve;
  std::uint64_t trials = 0;
  std::uint64_t correct = 0;          // both accept with equal keys
  std::uint64_t alice_accepts = 0;
  std::uint64_t robustness_violations = 0;  // Alice accepts, R_A != R_B
  std::optional<Rational> key_tv;     // exact, micro-exhaustive only

  double correctness_rate() const;
  double acceptance_rate() const;
  double violation_rate() const;
  nlohmann::json to_json() const;
};

using TranscriptSink = std::function<void(const nlohmann::json&)>;

// One session per trial: x from the source, fresh coins for both parties,
// Eve interposed on both rounds. Trial i uses Rng(seed, i).
SessionStats run_session(const Protocol& protocol, const SecretSource& source,
                         const EveStrategy& eve, std::uint64_t trials,
                         std::uint64_t seed, const TranscriptSink& sink = {});

struct ExhaustiveRun {
  std::uint64_t sessions = 0;
  std::uint64_t correct = 0;
};

// Passive channel over every x in the source and every assignment of both
// parties' coins. Only for micro widths.
ExhaustiveRun exhaustive_passive_run(const Protocol& protocol,
                                     const FlatSource& x);

// Exact distance of (R_A, view) from (U, view) for a passive Eve whose view
// is the full transcript plus E(x), with X uniform on `x`. Exhaustive over
// all coins; only for micro widths.
Rational exact_key_tv(const Protocol& protocol, const FlatSource& x,
                      const EveStrategy& eve);

// Law of (X, T || V) for fixed public coins (y, w) under a passive channel.
JointDist passive_view_joint(const Protocol& protocol, const FlatSource& x,
                             const Round1Msg& y, const BitVec& w);

}  // namespace nmx
