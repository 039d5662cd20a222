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

#include "nmx/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "nmx/bits.hpp"
#include "nmx/error.hpp"
#include "nmx/parallel.hpp"

namespace nmx {
namespace {

double log2_big(const BigInt& v) {
  const unsigned msb = boost::multiprecision::msb(v);
  if (msb < 900) return std::log2(v.convert_to<double>());
  const BigInt top = v >> (msb - 60);
  return std::log2(top.convert_to<double>()) + static_cast<double>(msb - 60);
}

nlohmann::json big_to_json(const BigInt& v) {
  if (v <= std::numeric_limits<std::uint64_t>::max()) {
    return v.convert_to<std::uint64_t>();
  }
  return v.str();
}

BigInt big_from_json(const nlohmann::json& j) {
  if (j.is_string()) return BigInt(j.get<std::string>());
  return BigInt(j.get<std::uint64_t>());
}

BigInt sum_weights(const std::map<std::uint64_t, BigInt>& w) {
  BigInt s = 0;
  for (const auto& [k, v] : w) s += v;
  return s;
}

void check_value(std::uint64_t v, unsigned bits) {
  if (bits < 64 && (v >> bits) != 0) {
    throw Error(ErrorCode::kWidthMismatch, "value " + std::to_string(v) +
                                               " exceeds " + std::to_string(bits) + " bits");
  }
}

std::uint64_t subset_mask(const std::vector<unsigned>& idx, unsigned width) {
  std::uint64_t m = 0;
  for (unsigned i : idx) {
    if (i >= width) throw Error(ErrorCode::kInvalidCoordinate, "bit index out of range");
    m |= std::uint64_t{1} << i;
  }
  return m;
}

}  // namespace

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::string to_string(const Rational& q) {
  const BigInt& den = boost::multiprecision::denominator(q);
  if (den == 1) return boost::multiprecision::numerator(q).str();
  return boost::multiprecision::numerator(q).str() + "/" + den.str();
}

Rational rational_from_string(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(BigInt(s));
  return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
}

double log2_rational(const Rational& q) {
  if (q <= 0) throw Error(ErrorCode::kInvalidArgument, "log2 of a non-positive value");
  return log2_big(boost::multiprecision::numerator(q)) -
         log2_big(boost::multiprecision::denominator(q));
}

AdversaryFn::AdversaryFn(std::vector<std::uint64_t> table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {
  for (auto v : table_) {
    if (v >= table_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "adversary maps outside its seed domain");
    }
  }
}

std::optional<std::uint64_t> AdversaryFn::fixed_point() const {
  for (std::uint64_t y = 0; y < table_.size(); ++y) {
    if (table_[y] == y) return y;
  }
  return std::nullopt;
}

void AdversaryFn::require_fixed_point_free() const {
  if (auto fp = fixed_point()) {
    throw Error(ErrorCode::kFixedPointAdversary,
                "A(" + std::to_string(*fp) + ") = " + std::to_string(*fp) +
                    (name_.empty() ? "" : " for " + name_));
  }
}

FlatSource::FlatSource(unsigned n_bits, std::vector<std::uint64_t> support)
    : n_bits_(n_bits), support_(std::move(support)) {
  if (n_bits == 0 || n_bits > 64) throw Error(ErrorCode::kInvalidArgument, "n_bits must be in [1, 64]");
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
  if (support_.empty()) throw Error(ErrorCode::kInvalidDistribution, "empty support");
  check_value(support_.back(), n_bits);
}

FlatSource FlatSource::full(unsigned n_bits) {
  if (n_bits > 30) throw Error(ErrorCode::kBudgetExceeded, "full cube too large to list");
  std::vector<std::uint64_t> s(std::uint64_t{1} << n_bits);
  std::iota(s.begin(), s.end(), std::uint64_t{0});
  return FlatSource(n_bits, std::move(s));
}

double FlatSource::min_entropy() const { return std::log2(static_cast<double>(support_.size())); }

ExplicitDist FlatSource::to_dist() const {
  std::map<std::uint64_t, BigInt> w;
  for (auto v : support_) w.emplace_hint(w.end(), v, 1);
  return ExplicitDist::from_weights(n_bits_, std::move(w));
}

ExplicitDist::ExplicitDist(unsigned n_bits, const std::map<std::uint64_t, Rational>& pmf)
    : n_bits_(n_bits) {
  if (n_bits == 0 || n_bits > 64) throw Error(ErrorCode::kInvalidArgument, "n_bits must be in [1, 64]");
  BigInt lcm = 1;
  for (const auto& [v, p] : pmf) {
    if (p < 0) throw Error(ErrorCode::kInvalidDistribution, "negative probability");
    lcm = boost::multiprecision::lcm(lcm, BigInt(boost::multiprecision::denominator(p)));
  }
  for (const auto& [v, p] : pmf) {
    if (p == 0) continue;
    check_value(v, n_bits);
    weights_[v] = boost::multiprecision::numerator(p) * (lcm / boost::multiprecision::denominator(p));
  }
  denom_ = lcm;
  if (sum_weights(weights_) != denom_) {
    throw Error(ErrorCode::kInvalidDistribution, "probabilities do not sum to 1");
  }
}

ExplicitDist ExplicitDist::from_weights(unsigned n_bits, std::map<std::uint64_t, BigInt> weights) {
  if (n_bits == 0 || n_bits > 64) throw Error(ErrorCode::kInvalidArgument, "n_bits must be in [1, 64]");
  ExplicitDist d;
  d.n_bits_ = n_bits;
  for (auto& [v, w] : weights) {
    if (w < 0) throw Error(ErrorCode::kInvalidDistribution, "negative weight");
    if (w == 0) continue;
    check_value(v, n_bits);
    d.weights_.emplace_hint(d.weights_.end(), v, std::move(w));
  }
  d.denom_ = sum_weights(d.weights_);
  if (d.denom_ == 0) throw Error(ErrorCode::kInvalidDistribution, "empty support");
  return d;
}

ExplicitDist ExplicitDist::uniform(unsigned n_bits) {
  if (n_bits > 24) throw Error(ErrorCode::kBudgetExceeded, "uniform pmf too large to list");
  std::map<std::uint64_t, BigInt> w;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n_bits); ++v) w.emplace_hint(w.end(), v, 1);
  return from_weights(n_bits, std::move(w));
}

Rational ExplicitDist::prob(std::uint64_t v) const {
  auto it = weights_.find(v);
  if (it == weights_.end()) return 0;
  return Rational(it->second, denom_);
}

JointDist::JointDist(std::vector<unsigned> widths, std::map<std::uint64_t, BigInt> weights)
    : widths_(std::move(widths)) {
  const unsigned total = std::accumulate(widths_.begin(), widths_.end(), 0u);
  if (widths_.empty() || total > 64) {
    throw Error(ErrorCode::kInvalidArgument, "joint widths must be non-empty and total at most 64 bits");
  }
  for (auto& [k, w] : weights) {
    if (w < 0) throw Error(ErrorCode::kInvalidDistribution, "negative weight");
    if (w == 0) continue;
    check_value(k, total);
    weights_.emplace_hint(weights_.end(), k, std::move(w));
  }
  denom_ = sum_weights(weights_);
  if (denom_ == 0) throw Error(ErrorCode::kInvalidDistribution, "empty support");
}

void JointDist::check_coord(std::size_t coord) const {
  if (coord >= widths_.size()) {
    throw Error(ErrorCode::kInvalidCoordinate, "coordinate " + std::to_string(coord) + " out of range");
  }
}

unsigned JointDist::offset(std::size_t coord) const {
  check_coord(coord);
  return std::accumulate(widths_.begin(), widths_.begin() + coord, 0u);
}

std::uint64_t JointDist::component(std::uint64_t key, std::size_t coord) const {
  const unsigned off = offset(coord);
  return off >= 64 ? 0 : (key >> off) & low_mask(widths_[coord]);
}

std::uint64_t JointDist::pack(const std::vector<std::uint64_t>& parts) const {
  if (parts.size() != widths_.size()) throw Error(ErrorCode::kDimensionMismatch, "tuple arity");
  std::uint64_t key = 0;
  unsigned off = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    check_value(parts[i], widths_[i]);
    if (off < 64) key |= parts[i] << off;
    off += widths_[i];
  }
  return key;
}

Rational JointDist::prob(const std::vector<std::uint64_t>& tuple) const {
  auto it = weights_.find(pack(tuple));
  if (it == weights_.end()) return 0;
  return Rational(it->second, denom_);
}

JointDist JointDist::marginal(const std::vector<std::size_t>& coords) const {
  std::vector<unsigned> w;
  std::vector<unsigned> offs;
  for (auto c : coords) {
    offs.push_back(offset(c));
    w.push_back(widths_[c]);
  }
  std::map<std::uint64_t, BigInt> out;
  for (const auto& [k, v] : weights_) {
    std::uint64_t nk = 0;
    unsigned off = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      nk |= ((k >> offs[i]) & low_mask(w[i])) << off;
      off += w[i];
    }
    out[nk] += v;
  }
  return JointDist(std::move(w), std::move(out));
}

ExplicitDist JointDist::marginal_dist(std::size_t coord) const {
  JointDist m = marginal({coord});
  return ExplicitDist::from_weights(widths_[coord], m.weights());
}

Rational max_prob(const ExplicitDist& d) {
  BigInt best = 0;
  for (const auto& [v, w] : d.weights()) best = std::max(best, w);
  return Rational(best, d.denominator());
}

double min_entropy(const ExplicitDist& d) { return -log2_rational(max_prob(d)); }

Rational stat_dist(const ExplicitDist& a, const ExplicitDist& b) {
  if (a.n_bits() != b.n_bits()) throw Error(ErrorCode::kDimensionMismatch, "distributions over different widths");
  const BigInt& da = a.denominator();
  const BigInt& db = b.denominator();
  BigInt acc = 0;
  auto ia = a.weights().begin();
  auto ib = b.weights().begin();
  while (ia != a.weights().end() || ib != b.weights().end()) {
    if (ib == b.weights().end() || (ia != a.weights().end() && ia->first < ib->first)) {
      acc += ia->second * db;
      ++ia;
    } else if (ia == a.weights().end() || ib->first < ia->first) {
      acc += ib->second * da;
      ++ib;
    } else {
      BigInt diff = ia->second * db - ib->second * da;
      acc += diff < 0 ? BigInt(-diff) : diff;
      ++ia;
      ++ib;
    }
  }
  return Rational(acc, 2 * da * db);
}

Rational stat_dist(const JointDist& a, const JointDist& b) {
  if (a.widths() != b.widths()) throw Error(ErrorCode::kDimensionMismatch, "joints over different widths");
  const unsigned total = std::accumulate(a.widths().begin(), a.widths().end(), 0u);
  return stat_dist(ExplicitDist::from_weights(std::max(1u, total), a.weights()),
                   ExplicitDist::from_weights(std::max(1u, total), b.weights()));
}

Rational avg_cond_guess_prob(const JointDist& j, std::size_t target,
                             const std::vector<std::size_t>& given) {
  for (auto g : given) {
    if (g == target) throw Error(ErrorCode::kInvalidCoordinate, "target listed among the given coordinates");
  }
  std::vector<std::size_t> coords = given;
  coords.push_back(target);
  // Target ends up in the highest bits, so each given value w indexes a
  // contiguous run only after regrouping; use a map keyed by w.
  const JointDist m = j.marginal(coords);
  const unsigned gbits = m.offset(coords.size() - 1);
  std::map<std::uint64_t, BigInt> best;
  for (const auto& [k, v] : m.weights()) {
    const std::uint64_t w = k & low_mask(gbits);
    auto& b = best[w];
    if (v > b) b = v;
  }
  BigInt s = 0;
  for (const auto& [w, b] : best) s += b;
  return Rational(s, j.denominator());
}

double avg_cond_min_entropy(const JointDist& j, std::size_t target,
                            const std::vector<std::size_t>& given) {
  return -log2_rational(avg_cond_guess_prob(j, target, given));
}

Rational prob_cond_entropy_at_least(const JointDist& j, std::size_t target,
                                    const std::vector<std::size_t>& given,
                                    double threshold) {
  std::vector<std::size_t> coords = given;
  coords.push_back(target);
  const JointDist m = j.marginal(coords);
  const unsigned gbits = m.offset(coords.size() - 1);
  std::map<std::uint64_t, std::pair<BigInt, BigInt>> per;  // w -> (P(w), max_x)
  for (const auto& [k, v] : m.weights()) {
    auto& [tot, mx] = per[k & low_mask(gbits)];
    tot += v;
    if (v > mx) mx = v;
  }
  BigInt good = 0;
  for (const auto& [w, pm] : per) {
    const double h = log2_rational(Rational(pm.first, pm.second));
    if (h >= threshold - 1e-12) good += pm.first;
  }
  return Rational(good, j.denominator());
}

JointDist nm_joint(const ExtFn& ext, unsigned m, const FlatSource& x, const ExplicitDist& yd,
                   const std::vector<AdversaryFn>& advs, std::uint64_t cap) {
  const std::size_t r = advs.size();
  const unsigned out_bits = static_cast<unsigned>((r + 1) * m);
  if (m == 0 || out_bits + yd.n_bits() > 64) {
    throw Error(ErrorCode::kInvalidArgument, "joint does not fit in 64 bits");
  }
  for (const auto& a : advs) {
    a.require_fixed_point_free();
    if (!yd.weights().empty() && yd.weights().rbegin()->first >= a.domain_size()) {
      throw Error(ErrorCode::kInvalidArgument, "seed outside the adversary's domain");
    }
  }
  const std::uint64_t xs = x.size();
  const std::uint64_t ys = yd.support_size();
  if (ys != 0 && xs > cap / ys) {
    throw Error(ErrorCode::kEnumerationBudgetExceeded,
                std::to_string(xs) + " x " + std::to_string(ys) + " pairs exceed the cap");
  }
  const std::uint64_t omask = low_mask(m);
  std::vector<std::pair<std::uint64_t, const BigInt*>> seeds;
  for (const auto& [y, w] : yd.weights()) seeds.emplace_back(y, &w);

  const unsigned workers = worker_count(seeds.size() * xs / 4096 + 1);
  std::vector<std::map<std::uint64_t, BigInt>> partial(workers);
  parallel_chunks(seeds.size(), workers, [&](unsigned wk, std::uint64_t b, std::uint64_t e) {
    std::unordered_map<std::uint64_t, std::uint64_t> hist;
    std::vector<std::uint64_t> tampered(r);
    for (std::uint64_t si = b; si < e; ++si) {
      const std::uint64_t y = seeds[si].first;
      for (std::size_t i = 0; i < r; ++i) tampered[i] = advs[i](y);
      hist.clear();
      for (std::uint64_t xv : x.support()) {
        std::uint64_t key = ext(xv, y);
        if (key & ~omask) throw Error(ErrorCode::kWidthMismatch, "extractor output wider than m");
        for (std::size_t i = 0; i < r; ++i) {
          const std::uint64_t o = ext(xv, tampered[i]);
          if (o & ~omask) throw Error(ErrorCode::kWidthMismatch, "extractor output wider than m");
          key |= o << ((i + 1) * m);
        }
        ++hist[key];
      }
      const std::uint64_t yk = out_bits < 64 ? y << out_bits : 0;
      for (const auto& [k, c] : hist) partial[wk][k | yk] += *seeds[si].second * c;
    }
  });
  std::map<std::uint64_t, BigInt> merged;
  for (auto& p : partial) {
    if (merged.empty()) merged = std::move(p);
    else for (auto& [k, v] : p) merged[k] += v;
  }
  std::vector<unsigned> widths(r + 1, m);
  widths.push_back(yd.n_bits());
  return JointDist(std::move(widths), std::move(merged));
}

Rational nm_error(const JointDist& j) {
  const unsigned m = j.widths()[0];
  const BigInt scale = BigInt(1) << m;
  const std::uint64_t zcount = std::uint64_t{1} << m;
  BigInt acc = 0;
  auto it = j.weights().begin();
  while (it != j.weights().end()) {
    const std::uint64_t rest = it->first >> m;
    auto end = it;
    BigInt total = 0;
    std::uint64_t present = 0;
    while (end != j.weights().end() && (end->first >> m) == rest) {
      total += end->second;
      ++present;
      ++end;
    }
    for (auto e = it; e != end; ++e) {
      BigInt diff = e->second * scale - total;
      acc += diff < 0 ? BigInt(-diff) : diff;
    }
    acc += total * (zcount - present);  // outputs never seen with this rest
    it = end;
  }
  return Rational(acc, 2 * j.denominator() * scale);
}

std::map<std::uint64_t, Rational> nm_error_by_seed(const JointDist& j) {
  const unsigned m = j.widths()[0];
  const std::size_t last = j.arity() - 1;
  const unsigned yoff = j.offset(last);
  const BigInt scale = BigInt(1) << m;
  const std::uint64_t zcount = std::uint64_t{1} << m;
  std::map<std::uint64_t, Rational> out;
  auto it = j.weights().begin();
  while (it != j.weights().end()) {
    const std::uint64_t y = it->first >> yoff;
    BigInt acc = 0;
    BigInt dy = 0;
    while (it != j.weights().end() && (it->first >> yoff) == y) {
      const std::uint64_t rest = it->first >> m;
      auto end = it;
      BigInt total = 0;
      std::uint64_t present = 0;
      while (end != j.weights().end() && (end->first >> m) == rest) {
        total += end->second;
        ++present;
        ++end;
      }
      for (auto e = it; e != end; ++e) {
        BigInt diff = e->second * scale - total;
        acc += diff < 0 ? BigInt(-diff) : diff;
      }
      acc += total * (zcount - present);
      dy += total;
      it = end;
    }
    out[y] = Rational(acc, 2 * dy * scale);
  }
  return out;
}

Rational xor_bias(const JointDist& j, const std::vector<unsigned>& s1,
                  const std::vector<unsigned>& s2) {
  if (s1.empty()) throw Error(ErrorCode::kEmptySubset, "S1 must be non-empty");
  const std::uint64_t m1 = subset_mask(s1, j.widths()[0]);
  const std::uint64_t m2 = s2.empty() ? 0 : subset_mask(s2, j.arity() > 1 ? j.widths()[1] : 0);
  const unsigned off1 = j.arity() > 1 ? j.offset(1) : 0;
  BigInt acc = 0;
  for (const auto& [k, w] : j.weights()) {
    const bool b = parity64(k & m1) ^ parity64((k >> off1) & m2);
    if (b) acc -= w;
    else acc += w;
  }
  return Rational(acc < 0 ? BigInt(-acc) : acc, j.denominator());
}

Rational xor_bias_given_seed(const JointDist& j, const std::vector<unsigned>& s1,
                             const std::vector<unsigned>& s2) {
  const std::uint64_t m1 = s1.empty() ? 0 : subset_mask(s1, j.widths()[0]);
  const std::uint64_t m2 = s2.empty() ? 0 : subset_mask(s2, j.arity() > 2 ? j.widths()[1] : 0);
  const unsigned off1 = j.arity() > 1 ? j.offset(1) : 0;
  const unsigned yoff = j.offset(j.arity() - 1);
  BigInt acc = 0;
  auto it = j.weights().begin();
  while (it != j.weights().end()) {
    const std::uint64_t y = it->first >> yoff;
    BigInt s = 0;
    for (; it != j.weights().end() && (it->first >> yoff) == y; ++it) {
      const bool b = parity64(it->first & m1) ^ parity64((it->first >> off1) & m2);
      if (b) s -= it->second;
      else s += it->second;
    }
    acc += s < 0 ? BigInt(-s) : s;
  }
  return Rational(acc, j.denominator());
}

nlohmann::json to_json(const ExplicitDist& d) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [v, w] : d.weights()) {
    const Rational p(w, d.denominator());
    entries.push_back({v, big_to_json(boost::multiprecision::numerator(p)),
                       big_to_json(boost::multiprecision::denominator(p))});
  }
  return {{"n_bits", d.n_bits()}, {"entries", entries}};
}

ExplicitDist dist_from_json(const nlohmann::json& j) {
  std::map<std::uint64_t, Rational> pmf;
  for (const auto& e : j.at("entries")) {
    pmf[e.at(0).get<std::uint64_t>()] += Rational(big_from_json(e.at(1)), big_from_json(e.at(2)));
  }
  return ExplicitDist(j.at("n_bits").get<unsigned>(), pmf);
}

}  // namespace nmx
