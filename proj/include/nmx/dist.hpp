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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

namespace nmx {

// Exact probability arithmetic. cpp_int keeps small values inline and only
// allocates once a value outgrows a few machine words.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& q);
// "num/den", or "num" when the denominator is 1.
std::string to_string(const Rational& q);
Rational rational_from_string(const std::string& s);
// log2 of a positive rational, accurate to double precision even when the
// numerator and denominator overflow a double.
double log2_rational(const Rational& q);

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 28;

// A tamper map on seeds, tabulated over the dense seed domain [0, size).
class AdversaryFn {
 public:
  explicit AdversaryFn(std::vector<std::uint64_t> table, std::string name = {});

  std::uint64_t operator()(std::uint64_t y) const { return table_[y]; }
  std::size_t domain_size() const { return table_.size(); }
  const std::vector<std::uint64_t>& table() const { return table_; }
  const std::string& name() const { return name_; }

  std::optional<std::uint64_t> fixed_point() const;
  // Throws kFixedPointAdversary naming the first fixed point.
  void require_fixed_point_free() const;

 private:
  std::vector<std::uint64_t> table_;
  std::string name_;
};

class ExplicitDist;

// Uniform distribution on a non-empty set of n-bit strings.
class FlatSource {
 public:
  FlatSource(unsigned n_bits, std::vector<std::uint64_t> support);
  static FlatSource full(unsigned n_bits);

  unsigned n_bits() const { return n_bits_; }
  const std::vector<std::uint64_t>& support() const { return support_; }
  std::size_t size() const { return support_.size(); }
  double min_entropy() const;
  ExplicitDist to_dist() const;

 private:
  unsigned n_bits_;
  std::vector<std::uint64_t> support_;
};

// Finite pmf stored as integer weights over one common denominator, so sums
// and comparisons stay exact without per-entry normalization.
class ExplicitDist {
 public:
  // Throws kInvalidDistribution unless the probabilities are non-negative and
  // sum to exactly 1.
  ExplicitDist(unsigned n_bits, const std::map<std::uint64_t, Rational>& pmf);
  // Weights need not be normalized; the denominator is their sum.
  static ExplicitDist from_weights(unsigned n_bits,
                                   std::map<std::uint64_t, BigInt> weights);
  static ExplicitDist uniform(unsigned n_bits);

  unsigned n_bits() const { return n_bits_; }
  const BigInt& denominator() const { return denom_; }
  const std::map<std::uint64_t, BigInt>& weights() const { return weights_; }
  std::size_t support_size() const { return weights_.size(); }
  Rational prob(std::uint64_t v) const;

 private:
  ExplicitDist() = default;

  unsigned n_bits_ = 0;
  BigInt denom_;
  std::map<std::uint64_t, BigInt> weights_;
};

// Pmf over tuples whose components are packed into one 64-bit key,
// component 0 in the lowest bits.
class JointDist {
 public:
  JointDist(std::vector<unsigned> widths,
            std::map<std::uint64_t, BigInt> weights);

  const std::vector<unsigned>& widths() const { return widths_; }
  std::size_t arity() const { return widths_.size(); }
  const BigInt& denominator() const { return denom_; }
  const std::map<std::uint64_t, BigInt>& weights() const { return weights_; }

  unsigned offset(std::size_t coord) const;
  std::uint64_t component(std::uint64_t key, std::size_t coord) const;
  std::uint64_t pack(const std::vector<std::uint64_t>& parts) const;
  Rational prob(const std::vector<std::uint64_t>& tuple) const;

  JointDist marginal(const std::vector<std::size_t>& coords) const;
  ExplicitDist marginal_dist(std::size_t coord) const;

 private:
  void check_coord(std::size_t coord) const;

  std::vector<unsigned> widths_;
  BigInt denom_;
  std::map<std::uint64_t, BigInt> weights_;
};

Rational max_prob(const ExplicitDist& d);
double min_entropy(const ExplicitDist& d);

// Half the L1 distance; throws kDimensionMismatch on differing widths.
Rational stat_dist(const ExplicitDist& a, const ExplicitDist& b);
Rational stat_dist(const JointDist& a, const JointDist& b);

// E_w[max_x Pr[X = x | W = w]], i.e. sum_w max_x Pr[X = x, W = w].
Rational avg_cond_guess_prob(const JointDist& j, std::size_t target,
                             const std::vector<std::size_t>& given);
double avg_cond_min_entropy(const JointDist& j, std::size_t target,
                            const std::vector<std::size_t>& given);
// Pr_w[H_inf(X | W = w) >= threshold].
Rational prob_cond_entropy_at_least(const JointDist& j, std::size_t target,
                                    const std::vector<std::size_t>& given,
                                    double threshold);

using ExtFn = std::function<std::uint64_t(std::uint64_t x, std::uint64_t y)>;

// Exact law of (ext(X,Y), ext(X,A_1(Y)), ..., ext(X,A_r(Y)), Y) with X and Y
// independent. Component widths are (m, ..., m, Yd.n_bits()).
JointDist nm_joint(const ExtFn& ext, unsigned m, const FlatSource& x,
                   const ExplicitDist& yd, const std::vector<AdversaryFn>& advs,
                   std::uint64_t cap = kDefaultEnumerationCap);

// Distance from the law with component 0 replaced by an independent uniform
// m-bit value.
Rational nm_error(const JointDist& j);
// The same distance conditioned on each value of the last component.
std::map<std::uint64_t, Rational> nm_error_by_seed(const JointDist& j);

// |E[(-1)^b]| for b = XOR of bits S1 of component 0 and bits S2 of
// component 1 (bit indices are 0-based). Throws kEmptySubset if S1 is empty.
Rational xor_bias(const JointDist& j, const std::vector<unsigned>& s1,
                  const std::vector<unsigned>& s2);
// E_w |E[(-1)^b | W = w]| with W the last component; S1 may be empty here.
Rational xor_bias_given_seed(const JointDist& j, const std::vector<unsigned>& s1,
                             const std::vector<unsigned>& s2);

nlohmann::json to_json(const ExplicitDist& d);
ExplicitDist dist_from_json(const nlohmann::json& j);

}  // namespace nmx
