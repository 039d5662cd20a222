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
#include <string>
#include <vector>

#include "json.hpp"
#include "nmx/codes.hpp"
#include "nmx/dist.hpp"
#include "nmx/nmext.hpp"

namespace nmx {

enum class FamilyKind {
  kNone,
  kAllFunctions,
  kAffinePatched,
  kOffset,
  kRandomSample,
  kPaperCounterexample,
};

struct AdversaryFamily {
  FamilyKind kind = FamilyKind::kOffset;
  std::uint64_t count = 0;  // random_sample
  std::uint64_t seed = 0;   // random_sample

  std::string label() const;
  nlohmann::json to_json() const;
  static AdversaryFamily from_json(const nlohmann::json& j);
};

// Seed domains are dense: seeds are 0..domain-1.
std::uint64_t family_size(const AdversaryFamily& family, std::uint64_t domain);

// Streams every function of the family. all_functions needs domain <= 8,
// affine_patched and paper_counterexample need a power-of-two domain.
// Throws kBudgetExceeded if the family is larger than `budget`.
void for_each_adversary(const AdversaryFamily& family, std::uint64_t domain,
                        const std::function<void(const AdversaryFn&)>& fn,
                        std::uint64_t budget = std::uint64_t{1} << 24);
std::vector<AdversaryFn> gen_adversaries(
    const AdversaryFamily& family, std::uint64_t domain,
    std::uint64_t budget = std::uint64_t{1} << 20);

// A named extractor as the sweeps see it: dense integer sources and seeds.
struct Construction {
  std::string name;
  unsigned source_bits = 0;
  unsigned seed_bits = 0;
  std::uint64_t seed_count = 0;
  unsigned output_bits = 1;
  ExtFn fn;
  std::function<bool(std::uint64_t)> source_ok;
};

// {"name": "raw-ip" | "half" | "below-half" | ..., construction fields}.
// raw-ip is the unencoded inner product with an n-bit seed.
Construction make_construction(const nlohmann::json& spec);

// Source families: flat_random {k, count, seed}, block_structured {k}:
// first k bits uniform and the rest zero, counterexample: first bit 0,
// explicit {support}, full. An array of specs concatenates the families.
// Sources avoid values the construction rejects.
std::vector<FlatSource> make_sources(const nlohmann::json& spec,
                                     const Construction& c);

// Reports carry this note: worst-case only when every fixed-point-free
// function on the seed space was enumerated.
std::string quantification_label(const AdversaryFamily& family,
                                  std::uint64_t domain);

nlohmann::json run_nm_sweep(const nlohmann::json& cfg);
nlohmann::json run_preimage_audits(const nlohmann::json& cfg);
nlohmann::json run_protocol_suite(const nlohmann::json& cfg);

// Rows of a report's "rows" array as CSV, columns in first-row order.
std::string report_csv(const nlohmann::json& report);

struct BoundCheck {
  bool feasible = false;
  double seed_margin = 0;     // d - (1.5 log(n-k) + 3 log(1/eps) + c1)
  double entropy_margin = 0;  // k - ((r+1)m + d/3 + 2 log(1/eps) + log d + c2)
  // Comparison bound: d > log(n-k+1) + 2 log(1/eps) + 7 and
  // k > 2m + 3 log(1/eps) + log d + 9.
  bool reference_feasible = false;
  double reference_seed_margin = 0;
  double reference_entropy_margin = 0;

  nlohmann::json to_json() const;
};

BoundCheck existence_bound_check(double n, double k, double d, double m,
                                 double eps, double r, double c1 = 10,
                                 double c2 = 10);

// Error of a seeded experiment as a function of which seeds are allowed:
// uniform_error averages the per-seed errors over all seeds, weak_error
// over `seeds`, and bound = 2^(d - log|seeds|) * uniform_error.
struct WeakSeedCheck {
  Rational uniform_error;
  Rational weak_error;
  Rational bound;
  bool holds = false;
};

WeakSeedCheck weak_seed_check(const ExtFn& ext, unsigned m, unsigned seed_bits,
                              const FlatSource& x,
                              const std::vector<AdversaryFn>& advs,
                              const std::vector<std::uint64_t>& seeds);

// Seed-revealed error against the non-strong error aggregated through the
// bad-seed sets. eps is the exact maximum non-strong error over every flat
// seed source with 2^k2 elements; the claim checked is
//   seeded_error(Y') <= 2^((r+1)m) * (2^(k2 - k2' + 1) + eps)
// for a flat Y' with 2^k2' elements, together with |B_{z,zbar}| < 2^(k2+1)
// for every bad set.
struct StrongAggregationCheck {
  Rational eps;
  Rational seeded_error;
  Rational bound;
  std::size_t max_bad_set = 0;
  std::size_t bad_set_limit = 0;
  bool holds = false;
};

StrongAggregationCheck strong_aggregation_check(
    const ExtFn& ext, unsigned m, unsigned seed_bits, const FlatSource& x,
    const std::vector<AdversaryFn>& advs, unsigned k2,
    const std::vector<std::uint64_t>& weak_seeds,
    std::uint64_t cap = std::uint64_t{1} << 22);

}  // namespace nmx
