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

#include "nmx/harness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>

#include "nmx/error.hpp"
#include "nmx/extractors.hpp"
#include "nmx/parallel.hpp"
#include "nmx/protocol.hpp"
#include "nmx/rng.hpp"
#include "nmx/session.hpp"

namespace nmx {
namespace {

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::string_view kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::kNone: return "none";
    case FamilyKind::kAllFunctions: return "all_functions";
    case FamilyKind::kAffinePatched: return "affine_patched";
    case FamilyKind::kOffset: return "offset";
    case FamilyKind::kRandomSample: return "random_sample";
    case FamilyKind::kPaperCounterexample: return "counterexample";
  }
  return "?";
}

FamilyKind kind_from_name(std::string_view s) {
  for (auto k : {FamilyKind::kNone, FamilyKind::kAllFunctions, FamilyKind::kAffinePatched, FamilyKind::kOffset,
                 FamilyKind::kRandomSample, FamilyKind::kPaperCounterexample}) {
    if (kind_name(k) == s) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown adversary family '" + std::string(s) + "'");
}

std::uint64_t pow_sat(std::uint64_t b, std::uint64_t e) {
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 0; i < e; ++i) {
    acc *= b;
    if (acc > ~std::uint64_t{0}) return ~std::uint64_t{0};
  }
  return static_cast<std::uint64_t>(acc);
}

ExplicitDist uniform_seeds(const Construction& c) {
  std::map<std::uint64_t, BigInt> w;
  for (std::uint64_t y = 0; y < c.seed_count; ++y) w.emplace_hint(w.end(), y, 1);
  return ExplicitDist::from_weights(std::max(1u, c.seed_bits), std::move(w));
}

nlohmann::json rational_json(const Rational& q) {
  return {{"exact", to_string(q)}, {"approx", to_double(q)}};
}

}  // namespace

std::string AdversaryFamily::label() const {
  if (kind == FamilyKind::kRandomSample) {
    return "random_sample(" + std::to_string(count) + ", seed " + std::to_string(seed) + ")";
  }
  return std::string(kind_name(kind));
}

nlohmann::json AdversaryFamily::to_json() const {
  nlohmann::json j{{"kind", kind_name(kind)}};
  if (kind == FamilyKind::kRandomSample) {
    j["count"] = count;
    j["seed"] = seed;
  }
  return j;
}

AdversaryFamily AdversaryFamily::from_json(const nlohmann::json& j) {
  AdversaryFamily f;
  f.kind = kind_from_name(j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>());
  if (j.is_object()) {
    f.count = j.value("count", std::uint64_t{0});
    f.seed = j.value("seed", std::uint64_t{0});
  }
  return f;
}

std::uint64_t family_size(const AdversaryFamily& family, std::uint64_t domain) {
  if (domain < 2) return 0;
  switch (family.kind) {
    case FamilyKind::kNone: return 0;
    case FamilyKind::kAllFunctions: return pow_sat(domain - 1, domain);
    case FamilyKind::kAffinePatched: return domain * domain - 1;
    case FamilyKind::kOffset: return domain - 1;
    case FamilyKind::kRandomSample: return family.count;
    case FamilyKind::kPaperCounterexample: return 1;
  }
  return 0;
}

void for_each_adversary(const AdversaryFamily& family, std::uint64_t domain,
                        const std::function<void(const AdversaryFn&)>& fn, std::uint64_t budget) {
  if (domain > (std::uint64_t{1} << 20)) throw Error(ErrorCode::kBudgetExceeded, "seed space above 2^20 values");
  const std::uint64_t size = family_size(family, domain);
  if (size > budget) {
    throw Error(ErrorCode::kBudgetExceeded,
                family.label() + " has " + std::to_string(size) + " functions, over the budget");
  }
  if (domain < 2) return;
  std::vector<std::uint64_t> t(domain);
  switch (family.kind) {
    case FamilyKind::kNone:
      return;
    case FamilyKind::kAllFunctions: {
      if (domain > 8) throw Error(ErrorCode::kBudgetExceeded, "all_functions needs at most 8 seeds");
      // Odometer over digit_y in [0, domain-2], value = digit + (digit >= y).
      std::vector<std::uint64_t> digit(domain, 0);
      for (;;) {
        for (std::uint64_t y = 0; y < domain; ++y) t[y] = digit[y] + (digit[y] >= y ? 1 : 0);
        fn(AdversaryFn(t));
        std::uint64_t i = 0;
        while (i < domain && ++digit[i] == domain - 1) digit[i++] = 0;
        if (i == domain) return;
      }
    }
    case FamilyKind::kAffinePatched: {
      if (!is_pow2(domain)) throw Error(ErrorCode::kInvalidArgument, "affine family needs a power-of-two seed space");
      const GF2Ctx ctx(static_cast<unsigned>(std::countr_zero(domain)));
      for (std::uint64_t a = 0; a < domain; ++a) {
        for (std::uint64_t b = 0; b < domain; ++b) {
          if (a == 1 && b == 0) continue;
          for (std::uint64_t y = 0; y < domain; ++y) {
            const std::uint64_t v = gf_mul(a, y, ctx) ^ b;
            t[y] = v == y ? (y + 1) % domain : v;
          }
          fn(AdversaryFn(t, "affine(a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")"));
        }
      }
      return;
    }
    case FamilyKind::kOffset:
      for (std::uint64_t c = 1; c < domain; ++c) {
        for (std::uint64_t y = 0; y < domain; ++y) t[y] = is_pow2(domain) ? y ^ c : (y + c) % domain;
        fn(AdversaryFn(t, "offset(" + std::to_string(c) + ")"));
      }
      return;
    case FamilyKind::kRandomSample: {
      Rng rng(family.seed, 0xADF);
      for (std::uint64_t i = 0; i < family.count; ++i) {
        for (std::uint64_t y = 0; y < domain; ++y) {
          const std::uint64_t v = rng.below(domain - 1);
          t[y] = v >= y ? v + 1 : v;
        }
        fn(AdversaryFn(t, "random#" + std::to_string(i)));
      }
      return;
    }
    case FamilyKind::kPaperCounterexample:
      if (domain % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "flip-first-bit needs an even seed space");
      for (std::uint64_t y = 0; y < domain; ++y) t[y] = y ^ 1;
      fn(AdversaryFn(t, "flip-first-bit"));
      return;
  }
}

std::vector<AdversaryFn> gen_adversaries(const AdversaryFamily& family, std::uint64_t domain,
                                         std::uint64_t budget) {
  std::vector<AdversaryFn> out;
  for_each_adversary(family, domain, [&](const AdversaryFn& a) { out.push_back(a); }, budget);
  return out;
}

Construction make_construction(const nlohmann::json& spec) {
  const std::string name = spec.at("name").get<std::string>();
  Construction c;
  c.name = name;
  if (name == "raw-ip") {
    const unsigned n = spec.at("n").get<unsigned>();
    if (n == 0 || n > 32) throw Error(ErrorCode::kInvalidArgument, "raw-ip needs 1 <= n <= 32");
    c.source_bits = n;
    c.seed_bits = n;
    c.seed_count = std::uint64_t{1} << n;
    c.fn = [](std::uint64_t x, std::uint64_t y) -> std::uint64_t { return parity64(x & y); };
    c.source_ok = [n](std::uint64_t x) { return (x >> n) == 0; };
    return c;
  }
  nlohmann::json cfg = spec;
  cfg["variant"] = name;
  auto nm = std::make_shared<const NmExtractor>(NmExtConfig::from_json(cfg));
  if (nm->source_bits() > 32) throw Error(ErrorCode::kInvalidArgument, "sweeps need sources of at most 32 bits");
  c.source_bits = nm->source_bits();
  c.seed_bits = nm->seed_bits();
  c.seed_count = nm->seed_count();
  c.output_bits = nm->output_bits();
  c.fn = [nm](std::uint64_t x, std::uint64_t y) { return nm->eval(x, y); };
  c.source_ok = [nm](std::uint64_t x) { return nm->accepts_source(x); };
  return c;
}

std::vector<FlatSource> make_sources(const nlohmann::json& spec, const Construction& c) {
  if (spec.is_array()) {
    std::vector<FlatSource> all;
    for (const auto& s : spec) {
      for (auto& src : make_sources(s, c)) all.push_back(std::move(src));
    }
    return all;
  }
  const std::string kind = spec.at("kind").get<std::string>();
  const unsigned n = c.source_bits;
  const std::uint64_t space = std::uint64_t{1} << n;
  auto filtered = [&](auto&& pred) {
    std::vector<std::uint64_t> s;
    for (std::uint64_t x = 0; x < space; ++x) {
      if (c.source_ok(x) && pred(x)) s.push_back(x);
    }
    return s;
  };
  if (kind == "full") return {FlatSource(n, filtered([](std::uint64_t) { return true; }))};
  if (kind == "counterexample") {
    return {FlatSource(n, filtered([](std::uint64_t x) { return (x & 1) == 0; }))};
  }
  if (kind == "block_structured") {
    const unsigned k = spec.at("k").get<unsigned>();
    if (k > n) throw Error(ErrorCode::kInvalidArgument, "k exceeds n");
    return {FlatSource(n, filtered([k](std::uint64_t x) { return (x >> k) == 0; }))};
  }
  if (kind == "explicit") {
    return {FlatSource(n, spec.at("support").get<std::vector<std::uint64_t>>())};
  }
  if (kind == "flat_random") {
    const unsigned k = spec.at("k").get<unsigned>();
    const std::uint64_t count = spec.value("count", std::uint64_t{1});
    const std::uint64_t seed = spec.value("seed", std::uint64_t{0});
    std::vector<std::uint64_t> pool = filtered([](std::uint64_t) { return true; });
    const std::uint64_t size = std::uint64_t{1} << k;
    if (size > pool.size()) throw Error(ErrorCode::kInvalidArgument, "2^k exceeds the source domain");
    Rng rng(seed, 0x50CE);
    std::vector<FlatSource> out;
    for (std::uint64_t i = 0; i < count; ++i) {
      // Partial Fisher-Yates: the first 2^k slots become a uniform subset.
      for (std::uint64_t j = 0; j < size; ++j) std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
      out.emplace_back(n, std::vector<std::uint64_t>(pool.begin(), pool.begin() + size));
    }
    return out;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown source family '" + kind + "'");
}

std::string quantification_label(const AdversaryFamily& family, std::uint64_t domain) {
  if (family.kind == FamilyKind::kAllFunctions) {
    return "worst-case: all " + std::to_string(family_size(family, domain)) +
           " fixed-point-free functions on " + std::to_string(domain) + " seeds";
  }
  if (family.kind == FamilyKind::kNone) return "no adversary: strong-extractor error";
  return "family-max over " + family.label() + " on " + std::to_string(domain) +
         " seeds; not a worst-case bound";
}

nlohmann::json run_nm_sweep(const nlohmann::json& cfg) {
  const Construction c = make_construction(cfg.at("construction"));
  const std::vector<FlatSource> sources = make_sources(cfg.at("sources"), c);
  const AdversaryFamily family = AdversaryFamily::from_json(cfg.value("adversaries", nlohmann::json("offset")));
  const std::uint64_t cap = cfg.value("cap", kDefaultEnumerationCap);
  const std::uint64_t budget = cfg.value("budget", std::uint64_t{1} << 20);
  nlohmann::json mode = cfg.value("mode", nlohmann::json("exhaustive"));
  const bool monte_carlo = mode.is_object() && mode.contains("monte_carlo");

  std::vector<std::vector<AdversaryFn>> tuples;
  if (family.kind == FamilyKind::kNone) {
    tuples.push_back({});
  } else {
    for (auto& a : gen_adversaries(family, c.seed_count, budget)) tuples.push_back({std::move(a)});
  }

  nlohmann::json rows = nlohmann::json::array();
  std::map<std::string, std::uint64_t> histogram;
  Rational best = -1;
  nlohmann::json argmax;
  double mc_best = -1;

  if (!monte_carlo) {
    const ExplicitDist yd = uniform_seeds(c);
    for (std::size_t si = 0; si < sources.size(); ++si) {
      for (const auto& advs : tuples) {
        const Rational err = nm_error(nm_joint(c.fn, c.output_bits, sources[si], yd, advs, cap));
        const std::string adv = advs.empty() ? "none" : advs[0].name();
        rows.push_back({{"source", si},
                        {"adversary", adv},
                        {"error", to_string(err)},
                        {"error_approx", to_double(err)}});
        // Histogram buckets by -log2(error), rounded down.
        const std::string bucket =
            err == 0 ? "0" : "2^-" + std::to_string(static_cast<int>(std::floor(-log2_rational(err))));
        ++histogram[bucket];
        if (err > best) {
          best = err;
          argmax = {{"source", si}, {"adversary", adv}};
        }
      }
    }
  } else {
    const std::uint64_t trials = mode["monte_carlo"].value("trials", std::uint64_t{1000});
    const std::uint64_t seed = mode["monte_carlo"].value("seed", std::uint64_t{0});
    for (std::size_t si = 0; si < sources.size(); ++si) {
      for (std::size_t ai = 0; ai < tuples.size(); ++ai) {
        const auto& advs = tuples[ai];
        Rng rng(seed, si * tuples.size() + ai);
        double sum = 0, sum2 = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
          const std::uint64_t y = rng.below(c.seed_count);
          std::map<std::uint64_t, BigInt> one{{y, 1}};
          const ExplicitDist yd = ExplicitDist::from_weights(std::max(1u, c.seed_bits), one);
          const double e = to_double(nm_error(nm_joint(c.fn, c.output_bits, sources[si], yd, advs, cap)));
          sum += e;
          sum2 += e * e;
        }
        const double mean = sum / static_cast<double>(trials);
        const double var = std::max(0.0, sum2 / static_cast<double>(trials) - mean * mean);
        const double se = std::sqrt(var / static_cast<double>(trials));
        const std::string adv = advs.empty() ? "none" : advs[0].name();
        rows.push_back({{"source", si}, {"adversary", adv}, {"error_mean", mean}, {"error_se", se}});
        if (mean > mc_best) {
          mc_best = mean;
          argmax = {{"source", si}, {"adversary", adv}, {"se", se}};
        }
      }
    }
  }

  nlohmann::json report{{"kind", "nm_sweep"},
                        {"construction", cfg.at("construction")},
                        {"sources", cfg.at("sources")},
                        {"source_count", sources.size()},
                        {"adversaries", family.to_json()},
                        {"quantification", quantification_label(family, c.seed_count)},
                        {"mode", monte_carlo ? "monte_carlo" : "exhaustive"},
                        {"cells", rows.size()},
                        {"argmax", argmax},
                        {"rows", rows}};
  bool holds = true;
  if (!monte_carlo) {
    report["max_error"] = rational_json(best < 0 ? Rational(0) : best);
    report["histogram"] = histogram;
    if (cfg.contains("expect_max_below")) {
      const Rational lim = rational_from_string(cfg["expect_max_below"].get<std::string>());
      holds = best < lim;
      report["expect_max_below"] = to_string(lim);
    }
  } else {
    report["max_error_mean"] = mc_best;
    if (cfg.contains("expect_max_below")) {
      holds = mc_best < to_double(rational_from_string(cfg["expect_max_below"].get<std::string>()));
    }
  }
  report["holds"] = holds;
  return report;
}

namespace {

struct AuditTally {
  std::uint64_t checked = 0;
  unsigned max_pre = 0;
  std::uint64_t violations = 0;
  std::optional<nlohmann::json> witness;

  void add(unsigned pre, unsigned bound, const std::function<nlohmann::json()>& describe) {
    ++checked;
    max_pre = std::max(max_pre, pre);
    if (pre > bound) {
      ++violations;
      if (!witness) witness = describe();
    }
  }
};

AuditReport to_report(std::string claim, nlohmann::json params, unsigned bound, const AuditTally& t) {
  AuditReport r;
  r.claim = std::move(claim);
  r.params = std::move(params);
  r.functions_checked = t.checked;
  r.max_preimages = t.max_pre;
  r.bound = bound;
  r.violations = t.violations;
  r.witness = t.witness;
  return r;
}

Embed embed_from_cfg(const nlohmann::json& cfg) {
  const std::string e = cfg.value("embed", std::string("top-bit"));
  if (e == "top-bit") return Embed::kTopBit;
  if (e == "all-columns") return Embed::kAllColumns;
  throw Error(ErrorCode::kInvalidArgument, "unknown embedding '" + e + "'");
}

}  // namespace

nlohmann::json run_preimage_audits(const nlohmann::json& cfg) {
  std::vector<std::string> claims = cfg.value("claims", std::vector<std::string>{"sum", "linear", "fp"});
  const std::uint64_t budget = cfg.value("budget", std::uint64_t{1} << 24);
  const std::uint64_t samples = cfg.value("samples", std::uint64_t{100000});
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
  const Embed embed = embed_from_cfg(cfg);
  nlohmann::json reports = nlohmann::json::array();
  nlohmann::json rows = nlohmann::json::array();
  bool holds = true;

  auto emit = [&](const AuditReport& r, bool exhaustive) {
    nlohmann::json j = r.to_json();
    j["exhaustive"] = exhaustive;
    rows.push_back({{"claim", r.claim},
                    {"params", r.params.dump()},
                    {"exhaustive", exhaustive},
                    {"functions_checked", r.functions_checked},
                    {"max_preimages", r.max_preimages},
                    {"bound", r.bound},
                    {"violations", r.violations}});
    holds = holds && r.holds();
    reports.push_back(std::move(j));
  };

  for (const auto& claim : claims) {
    if (claim == "independence") {
      const unsigned ell = cfg.value("ell", 3u);
      const unsigned r = cfg.value("r", 1u);
      const unsigned w = cfg.value("w", 2 * (r + 1));
      const SeedEncoding enc(GF2Ctx(ell), r, Embed::kAllColumns);
      const IndependenceAudit a = audit_linear_independence(enc, w, budget);
      AuditReport rep;
      rep.claim = "independence";
      rep.params = {{"ell", ell}, {"r", r}, {"w", w}};
      rep.functions_checked = a.subsets_checked;
      rep.violations = a.ok ? 0 : 1;
      if (!a.ok) rep.witness = a.witness;
      emit(rep, true);
    } else if (claim == "sum" || claim == "linear") {
      const unsigned ell = cfg.value("ell", 3u);
      const SeedEncoding enc(GF2Ctx(ell), 1, embed);
      const std::uint64_t D = enc.seed_count();
      const bool lin = claim == "linear";
      const unsigned bound = lin ? 3 : 2;
      const std::uint64_t coeffs = lin ? (std::uint64_t{1} << ell) * ((std::uint64_t{1} << ell) - 1) : 1;
      const std::uint64_t space = family_size({FamilyKind::kAllFunctions}, D);
      const bool exhaustive = D <= 8 && space <= budget;
      AuditTally tally;
      // Columns once, then scaled combinations per function.
      std::vector<std::pair<GF2Elem, GF2Elem>> col(D);
      for (std::uint64_t y = 0; y < D; ++y) {
        const auto b = enc.blocks(y);
        col[y] = {b[0], b[1]};
      }
      const GF2Ctx& ctx = enc.ctx();
      std::vector<std::uint64_t> vals(D);
      auto check = [&](const std::vector<std::uint64_t>& t, GF2Elem t1, GF2Elem t2) {
        for (std::uint64_t y = 0; y < D; ++y) {
          const auto& a = col[y];
          const auto& b = col[t[y]];
          GF2Elem lo, hi;
          if (lin) {
            lo = gf_mul(t1, a.first, ctx) ^ gf_mul(t2, b.first, ctx);
            hi = gf_mul(t1, a.second, ctx) ^ gf_mul(t2, b.second, ctx);
          } else {
            lo = a.first ^ b.first;
            hi = a.second ^ b.second;
          }
          vals[y] = lo | (hi << ell);
        }
        std::sort(vals.begin(), vals.end());
        unsigned best = 0;
        for (std::size_t i = 0; i < vals.size();) {
          std::size_t j = i;
          while (j < vals.size() && vals[j] == vals[i]) ++j;
          best = std::max(best, static_cast<unsigned>(j - i));
          i = j;
        }
        tally.add(best, bound, [&] { return nlohmann::json{{"table", t}, {"t1", t1}, {"t2", t2}}; });
      };
      auto each_coeff = [&](const std::vector<std::uint64_t>& t) {
        if (!lin) {
          check(t, 1, 1);
          return;
        }
        for (GF2Elem t1 = 1; t1 < (GF2Elem{1} << ell); ++t1) {
          for (GF2Elem t2 = 0; t2 < (GF2Elem{1} << ell); ++t2) check(t, t1, t2);
        }
      };
      if (exhaustive) {
        for_each_adversary({FamilyKind::kAllFunctions}, D, [&](const AdversaryFn& a) { each_coeff(a.table()); },
                           budget);
      } else {
        Rng rng(seed, 0xA0D1);
        std::vector<std::uint64_t> t(D);
        for (std::uint64_t i = 0; i < samples; ++i) {
          for (std::uint64_t y = 0; y < D; ++y) {
            const std::uint64_t v = rng.below(D - 1);
            t[y] = v >= y ? v + 1 : v;
          }
          if (!lin) {
            check(t, 1, 1);
          } else {
            const GF2Elem t1 = 1 + rng.below(ctx.mask());
            const GF2Elem t2 = rng.below(std::uint64_t{1} << ell);
            check(t, t1, t2);
          }
        }
      }
      nlohmann::json params{{"ell", ell},
                            {"seeds", D},
                            {"embed", embed == Embed::kTopBit ? "top-bit" : "all-columns"},
                            {"coefficient_pairs", exhaustive ? coeffs : 0}};
      if (!exhaustive) params["samples"] = samples;
      emit(to_report(lin ? "linear" : "sum", params, bound, tally), exhaustive);
    } else if (claim == "fp") {
      std::vector<std::uint64_t> primes = cfg.value("p", std::vector<std::uint64_t>{5, 7});
      for (std::uint64_t p : primes) {
        const FpCtx ctx(p);
        if (p > 8 || family_size({FamilyKind::kAllFunctions}, p) > budget) {
          throw Error(ErrorCode::kBudgetExceeded, "fp audit is exhaustive only for p <= 7");
        }
        AuditTally tally;
        std::vector<std::uint64_t> vals(p);
        for_each_adversary(
            {FamilyKind::kAllFunctions}, p,
            [&](const AdversaryFn& a) {
              for (FpElem r = 1; r < p; ++r) {
                const unsigned pre = audit_preimages_fp(ctx, a, r);
                tally.add(pre, 2, [&] { return nlohmann::json{{"table", a.table()}, {"r", r}}; });
              }
            },
            budget);
        emit(to_report("fp", {{"p", p}, {"coefficients", p - 1}}, 2, tally), true);
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown audit claim '" + claim + "'");
    }
  }
  return {{"kind", "preimage_audits"}, {"reports", reports}, {"rows", rows}, {"holds", holds}};
}

nlohmann::json run_protocol_suite(const nlohmann::json& cfg) {
  const ProtocolParams params = ProtocolParams::preset(cfg.value("preset", std::string("small")));
  const Protocol protocol(params);
  const std::uint64_t trials = cfg.value("trials", std::uint64_t{1000});
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
  const double limit = cfg.value("max_violation_rate", params.target_epsilon());
  std::vector<std::string> strategies;
  if (!cfg.contains("strategies") || cfg["strategies"] == "all") {
    strategies.push_back("passive");
    for (auto& s : tampering_strategy_names()) strategies.push_back(s);
  } else {
    strategies = cfg["strategies"].get<std::vector<std::string>>();
  }
  const BitFixingSecret source(params.n, params.k, cfg.value("source_seed", std::uint64_t{7}));
  nlohmann::json rows = nlohmann::json::array();
  bool holds = true;
  for (const auto& name : strategies) {
    const auto eve = make_eve(name, params);
    SessionStats st = run_session(protocol, source, *eve, trials, seed);
    nlohmann::json row = st.to_json();
    bool ok;
    if (eve->passive()) {
      ok = st.correct == st.trials;
      row["asserted"] = "correctness = 1";
    } else {
      ok = st.violation_rate() <= limit;
      row["asserted"] = "violation_rate <= " + std::to_string(limit);
    }
    row["target_epsilon"] = params.target_epsilon();
    row["holds"] = ok;
    holds = holds && ok;
    rows.push_back(std::move(row));
  }
  nlohmann::json report{{"kind", "protocol_suite"},
                        {"params", params.to_json()},
                        {"trials", trials},
                        {"seed", seed},
                        {"rows", rows}};
  if (cfg.value("key_tv", false)) {
    const std::vector<unsigned> ks = cfg.value("key_tv_k", std::vector<unsigned>{params.k});
    nlohmann::json tv = nlohmann::json::array();
    Rng rng(seed, 0x7E57);
    std::vector<std::uint64_t> perm(std::uint64_t{1} << params.n);
    std::iota(perm.begin(), perm.end(), std::uint64_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    const PassiveEve passive;
    for (unsigned k : ks) {
      if (k > params.n) throw Error(ErrorCode::kInvalidArgument, "k exceeds n");
      const FlatSource x(params.n, std::vector<std::uint64_t>(perm.begin(), perm.begin() + (std::uint64_t{1} << k)));
      const Rational d = exact_key_tv(protocol, x, passive);
      tv.push_back({{"k", k}, {"key_tv", to_string(d)}, {"key_tv_approx", to_double(d)}});
    }
    report["key_tv"] = tv;
  }
  report["holds"] = holds;
  return report;
}

nlohmann::json BoundCheck::to_json() const {
  return {{"feasible", feasible},
          {"seed_margin", seed_margin},
          {"entropy_margin", entropy_margin},
          {"reference_feasible", reference_feasible},
          {"reference_seed_margin", reference_seed_margin},
          {"reference_entropy_margin", reference_entropy_margin}};
}

BoundCheck existence_bound_check(double n, double k, double d, double m, double eps, double r, double c1,
                                 double c2) {
  if (!(n > 0 && k > 0 && d > 0 && m > 0 && eps > 0 && eps < 1 && r > 0 && k < n)) {
    throw Error(ErrorCode::kInvalidArgument, "need positive n, k, d, m, r with k < n and 0 < eps < 1");
  }
  const double le = std::log2(1 / eps);
  BoundCheck b;
  b.seed_margin = d - (1.5 * std::log2(n - k) + 3 * le + c1);
  b.entropy_margin = k - ((r + 1) * m + d / 3 + 2 * le + std::log2(d) + c2);
  b.feasible = b.seed_margin > 0 && b.entropy_margin > 0;
  b.reference_seed_margin = d - (std::log2(n - k + 1) + 2 * le + 7);
  b.reference_entropy_margin = k - (2 * m + 3 * le + std::log2(d) + 9);
  b.reference_feasible = b.reference_seed_margin > 0 && b.reference_entropy_margin > 0;
  return b;
}

WeakSeedCheck weak_seed_check(const ExtFn& ext, unsigned m, unsigned seed_bits, const FlatSource& x,
                              const std::vector<AdversaryFn>& advs, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw Error(ErrorCode::kEmptySubset, "weak seed set is empty");
  const std::uint64_t domain = advs.empty() ? (std::uint64_t{1} << seed_bits) : advs[0].domain_size();
  std::map<std::uint64_t, BigInt> w;
  for (std::uint64_t y = 0; y < domain; ++y) w.emplace_hint(w.end(), y, 1);
  const auto per_seed =
      nm_error_by_seed(nm_joint(ext, m, x, ExplicitDist::from_weights(std::max(1u, seed_bits), w), advs));
  Rational total = 0;
  for (const auto& [y, e] : per_seed) total += e;
  const std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  Rational weak = 0;
  for (std::uint64_t y : uniq) {
    auto it = per_seed.find(y);
    if (it == per_seed.end()) throw Error(ErrorCode::kInvalidArgument, "weak seed outside the seed space");
    weak += it->second;
  }
  WeakSeedCheck c;
  c.uniform_error = total / domain;
  c.weak_error = weak / uniq.size();
  c.bound = c.uniform_error * Rational(domain, uniq.size());
  c.holds = c.weak_error <= c.bound;
  return c;
}

StrongAggregationCheck strong_aggregation_check(const ExtFn& ext, unsigned m, unsigned seed_bits,
                                                const FlatSource& x, const std::vector<AdversaryFn>& advs,
                                                unsigned k2, const std::vector<std::uint64_t>& weak_seeds,
                                                std::uint64_t cap) {
  const std::size_t r = advs.size();
  const unsigned cells_bits = static_cast<unsigned>((r + 1) * m);
  if (cells_bits > 20) throw Error(ErrorCode::kBudgetExceeded, "too many output cells");
  const std::uint64_t domain = advs.empty() ? (std::uint64_t{1} << seed_bits) : advs[0].domain_size();
  for (const auto& a : advs) a.require_fixed_point_free();
  const std::uint64_t K = std::uint64_t{1} << k2;
  if (K > domain) throw Error(ErrorCode::kInvalidArgument, "2^k2 exceeds the seed space");
  const std::uint64_t ncells = std::uint64_t{1} << cells_bits;
  const std::uint64_t nx = x.size();
  const std::int64_t scale = std::int64_t{1} << m;

  // delta[y][z, zbar] * nx * 2^m = 2^m * #{x : (W, Wbar) = (z, zbar)} - #{x : Wbar = zbar}.
  std::vector<std::vector<std::int64_t>> delta(domain, std::vector<std::int64_t>(ncells, 0));
  std::vector<std::int64_t> joint(ncells), marg(std::uint64_t{1} << (r * m));
  for (std::uint64_t y = 0; y < domain; ++y) {
    std::fill(joint.begin(), joint.end(), 0);
    std::fill(marg.begin(), marg.end(), 0);
    for (std::uint64_t xv : x.support()) {
      std::uint64_t zbar = 0;
      for (std::size_t i = 0; i < r; ++i) zbar |= ext(xv, advs[i](y)) << (i * m);
      const std::uint64_t z = ext(xv, y);
      ++joint[z | (zbar << m)];
      ++marg[zbar];
    }
    for (std::uint64_t c = 0; c < ncells; ++c) delta[y][c] = scale * joint[c] - marg[c >> m];
  }

  // eps: max over flat seed sets of size K of the non-strong error
  // (1 / (2 K nx 2^m)) sum_cells |sum_{y in set} delta[y][cell]|.
  auto binom = [](std::uint64_t n, std::uint64_t k) {
    unsigned __int128 a = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
      a = a * (n - k + i) / i;
      if (a > ~std::uint64_t{0}) return ~std::uint64_t{0};
    }
    return static_cast<std::uint64_t>(a);
  };
  if (binom(domain, K) > cap) throw Error(ErrorCode::kEnumerationBudgetExceeded, "too many flat seed sets");
  std::int64_t best = 0;
  std::vector<std::uint64_t> idx(K);
  std::iota(idx.begin(), idx.end(), std::uint64_t{0});
  std::vector<std::int64_t> sum(ncells);
  for (;;) {
    std::fill(sum.begin(), sum.end(), 0);
    for (auto y : idx) {
      for (std::uint64_t c = 0; c < ncells; ++c) sum[c] += delta[y][c];
    }
    std::int64_t tot = 0;
    for (auto s : sum) tot += s < 0 ? -s : s;
    best = std::max(best, tot);
    std::int64_t i = static_cast<std::int64_t>(K) - 1;
    while (i >= 0 && idx[i] == domain - K + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (std::uint64_t j = i + 1; j < K; ++j) idx[j] = idx[j - 1] + 1;
  }
  StrongAggregationCheck out;
  out.eps = Rational(best, 2 * static_cast<std::int64_t>(K) * static_cast<std::int64_t>(nx) * scale);

  // Bad sets: y with |delta_y(cell)| / (nx 2^m) > eps.
  for (std::uint64_t c = 0; c < ncells; ++c) {
    std::size_t bad = 0;
    for (std::uint64_t y = 0; y < domain; ++y) {
      const std::int64_t d = delta[y][c] < 0 ? -delta[y][c] : delta[y][c];
      if (Rational(d, nx * scale) > out.eps) ++bad;
    }
    out.max_bad_set = std::max(out.max_bad_set, bad);
  }
  out.bad_set_limit = 2 * K;

  const std::set<std::uint64_t> uniq(weak_seeds.begin(), weak_seeds.end());
  if (uniq.empty()) throw Error(ErrorCode::kEmptySubset, "weak seed set is empty");
  std::int64_t seeded = 0;
  for (auto y : uniq) {
    if (y >= domain) throw Error(ErrorCode::kInvalidArgument, "weak seed outside the seed space");
    for (std::uint64_t c = 0; c < ncells; ++c) seeded += delta[y][c] < 0 ? -delta[y][c] : delta[y][c];
  }
  out.seeded_error = Rational(seeded, 2 * static_cast<std::int64_t>(uniq.size()) * static_cast<std::int64_t>(nx) * scale);
  out.bound = Rational(BigInt(1) << cells_bits) * (Rational(2 * K, uniq.size()) + out.eps);
  out.holds = out.seeded_error <= out.bound && out.max_bad_set < out.bad_set_limit;
  return out;
}

}  // namespace nmx
