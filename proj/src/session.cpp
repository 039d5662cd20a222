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

#include "nmx/session.hpp"

#include <cmath>

#include "nmx/error.hpp"
#include "nmx/extractors.hpp"
#include "nmx/parallel.hpp"

namespace nmx {
namespace {

nlohmann::json round1_json(const Round1Msg& m) {
  return {{"y1", m.y1.to_hex()}, {"y2", m.y2.to_hex()}, {"y3", m.y3.to_hex()}};
}

nlohmann::json round2_json(const Round2Msg& m) {
  return {{"w", m.w.to_hex()}, {"t", m.t.to_hex()}, {"v", m.v.to_hex()}};
}

nlohmann::json outcome_json(const PartyOutcome& o) {
  if (!o.accepted) return {{"status", "reject"}};
  return {{"status", "accept"}, {"key", o.key.to_hex()}};
}

struct CoinLayout {
  unsigned y1, y2, y3, d;
  unsigned total() const { return y1 + y2 + y3 + d; }
};

CoinLayout coin_layout(const ProtocolParams& p) { return {p.y1_bits, p.y2_bits, p.y3_bits, p.d}; }

void require_micro(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kBudgetExceeded, std::string("parameters too wide for exhaustive mode: ") + what);
}

}  // namespace

BitVec FlatSecret::sample(Rng& rng) const {
  return BitVec::from_u64(source_.support()[rng.below(source_.size())], source_.n_bits());
}

BitFixingSecret::BitFixingSecret(unsigned n, unsigned k, std::uint64_t pattern_seed) : n_(n), k_(k) {
  if (n == 0 || k > n) throw Error(ErrorCode::kInvalidArgument, "need 0 <= k <= n, n > 0");
  Rng rng(pattern_seed, 0xB17F);
  pattern_ = rng.bits(n);
}

BitVec BitFixingSecret::sample(Rng& rng) const {
  BitVec out = pattern_;
  const BitVec free = rng.bits(k_);
  for (std::size_t off = 0; off < k_; off += 64) {
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(64, k_ - off));
    out.set_bits(off, w, free.bits(off, w));
  }
  return out;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (successes > trials) throw Error(ErrorCode::kInvalidArgument, "more successes than trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double SessionStats::correctness_rate() const {
  return trials ? static_cast<double>(correct) / static_cast<double>(trials) : 0.0;
}

double SessionStats::acceptance_rate() const {
  return trials ? static_cast<double>(alice_accepts) / static_cast<double>(trials) : 0.0;
}

double SessionStats::violation_rate() const {
  return trials ? static_cast<double>(robustness_violations) / static_cast<double>(trials) : 0.0;
}

nlohmann::json SessionStats::to_json() const {
  const Interval ci = wilson_interval(robustness_violations, trials);
  nlohmann::json j{{"eve", eve},
                   {"trials", trials},
                   {"correct", correct},
                   {"alice_accepts", alice_accepts},
                   {"robustness_violations", robustness_violations},
                   {"correctness_rate", correctness_rate()},
                   {"acceptance_rate", acceptance_rate()},
                   {"violation_rate", violation_rate()},
                   {"violation_wilson95", {ci.lo, ci.hi}}};
  if (key_tv) {
    j["key_tv"] = to_string(*key_tv);
    j["key_tv_approx"] = to_double(*key_tv);
  }
  return j;
}

SessionStats run_session(const Protocol& protocol, const SecretSource& source, const EveStrategy& eve,
                         std::uint64_t trials, std::uint64_t seed, const TranscriptSink& sink) {
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  if (source.n_bits() != protocol.params().n) {
    throw Error(ErrorCode::kWidthMismatch, "secret width does not match the protocol");
  }
  // Transcripts are emitted in trial order, so a sink forces one worker.
  const unsigned workers = sink ? 1 : worker_count(trials / 256 + 1);
  std::vector<SessionStats> partial(workers);
  parallel_chunks(trials, workers, [&](unsigned wk, std::uint64_t b, std::uint64_t e) {
    SessionStats& st = partial[wk];
    for (std::uint64_t i = b; i < e; ++i) {
      Rng rng(seed, i);
      StreamRandomness rnd(rng);
      const BitVec x = source.sample(rng);
      const BitVec leak = eve.leak(x);
      auto [sent1, state] = protocol.alice_round1(x, rnd);
      const Round1Msg got1 = eve.tamper_round1(sent1, leak);
      auto [sent2, bob] = protocol.bob_round(x, got1, rnd);
      const Round2Msg got2 = eve.tamper_round2(sent2, EveView{leak, sent1, got1});
      const PartyOutcome alice = protocol.alice_finalize(state, got2);
      ++st.trials;
      const bool both = alice.accepted && bob.accepted;
      if (both && alice.key == bob.key) ++st.correct;
      if (alice.accepted) ++st.alice_accepts;
      if (both && alice.key != bob.key) ++st.robustness_violations;
      if (sink) {
        nlohmann::json j{{"trial", i},
                         {"widths", {{"y1", protocol.params().y1_bits},
                                     {"y2", protocol.params().y2_bits},
                                     {"y3", protocol.params().y3_bits},
                                     {"w", protocol.params().d},
                                     {"t", protocol.params().tag_bits},
                                     {"v", protocol.params().v_total()},
                                     {"key", protocol.params().key_bits}}},
                         {"messages_sent", {{"alice", round1_json(sent1)}, {"bob", round2_json(sent2)}}},
                         {"messages_received", {{"bob", round1_json(got1)}, {"alice", round2_json(got2)}}},
                         {"outcome_A", outcome_json(alice)},
                         {"outcome_B", outcome_json(bob)}};
        sink(j);
      }
    }
  });
  SessionStats out;
  out.eve = eve.name();
  for (const auto& p : partial) {
    out.trials += p.trials;
    out.correct += p.correct;
    out.alice_accepts += p.alice_accepts;
    out.robustness_violations += p.robustness_violations;
  }
  return out;
}

ExhaustiveRun exhaustive_passive_run(const Protocol& protocol, const FlatSource& x) {
  const ProtocolParams& p = protocol.params();
  const CoinLayout cl = coin_layout(p);
  require_micro(cl.total() <= 24 && x.n_bits() == p.n, "coin space");
  const unsigned alice_bits = cl.y1 + cl.y2 + cl.y3;
  const std::uint64_t coins = std::uint64_t{1} << cl.total();
  ExhaustiveRun run;
  for (std::uint64_t xv : x.support()) {
    const BitVec xb = BitVec::from_u64(xv, p.n);
    for (std::uint64_t c = 0; c < coins; ++c) {
      FixedRandomness ra(BitVec::from_u64(c & low_mask(alice_bits), alice_bits));
      FixedRandomness rb(BitVec::from_u64(c >> alice_bits, cl.d));
      auto [m1, state] = protocol.alice_round1(xb, ra);
      auto [m2, bob] = protocol.bob_round(xb, m1, rb);
      const PartyOutcome alice = protocol.alice_finalize(state, m2);
      ++run.sessions;
      if (alice.accepted && bob.accepted && alice.key == bob.key) ++run.correct;
    }
  }
  return run;
}

Rational exact_key_tv(const Protocol& protocol, const FlatSource& x, const EveStrategy& eve) {
  const ProtocolParams& p = protocol.params();
  const CoinLayout cl = coin_layout(p);
  const unsigned leak_bits = eve.leakage_bits();
  const unsigned vt = p.v_total();
  const unsigned label_bits = p.tag_bits + vt + leak_bits;
  require_micro(x.n_bits() == p.n && p.n <= 64, "source");
  require_micro(cl.total() <= 26, "coin space");
  require_micro(p.m_nm + p.d <= 20, "V table");
  require_micro(p.z_bits + p.d <= 24, "MAC table");
  require_micro(label_bits + p.key_bits <= 24, "view labels");
  require_micro(cl.y2 + cl.y3 <= 16, "seed chain table");

  const auto& xs = x.support();
  const std::size_t nx = xs.size();
  const std::uint64_t n1 = std::uint64_t{1} << cl.y1;
  const std::uint64_t n23 = std::uint64_t{1} << (cl.y2 + cl.y3);
  const std::uint64_t nw = std::uint64_t{1} << cl.d;
  const unsigned C = p.rows;

  std::vector<BitVec> xbits(nx);
  std::vector<std::uint64_t> leak(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    xbits[i] = BitVec::from_u64(xs[i], p.n);
    leak[i] = leak_bits ? eve.leak(xbits[i]).to_u64() : 0;
  }
  // Per (x, y1): MAC key and nm rows. Per (x, w): final key.
  std::vector<std::uint32_t> zt(nx * n1);
  std::vector<std::uint32_t> rows(nx * n1 * C);
  std::vector<std::uint32_t> keyt(nx * nw);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::uint64_t y1 = 0; y1 < n1; ++y1) {
      const BitVec yb = BitVec::from_u64(y1, cl.y1);
      zt[i * n1 + y1] = static_cast<std::uint32_t>(protocol.mac_key(xbits[i], yb).to_u64());
      const auto r = protocol.nm_rows(xbits[i], yb);
      for (unsigned j = 0; j < C; ++j) rows[(i * n1 + y1) * C + j] = static_cast<std::uint32_t>(r[j].to_u64());
    }
    for (std::uint64_t w = 0; w < nw; ++w) {
      keyt[i * nw + w] =
          static_cast<std::uint32_t>(protocol.final_key(xbits[i], BitVec::from_u64(w, cl.d)).to_u64());
    }
  }
  // Per (x, y2, y3): S_1..S_C.
  std::vector<std::uint32_t> chain(nx * n23 * C);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::uint64_t q = 0; q < n23; ++q) {
      const BitVec y2 = BitVec::from_u64(q & low_mask(cl.y2), cl.y2);
      const BitVec y3 = BitVec::from_u64(q >> cl.y2, cl.y3);
      const AltExtraction a = protocol.alt_extract_seeds(xbits[i], y2, y3);
      for (unsigned j = 0; j < C; ++j) chain[(i * n23 + q) * C + j] = static_cast<std::uint32_t>(a.s[j + 1].to_u64());
    }
  }
  // V_i(row value, S_i), and MAC(z, w).
  const std::uint64_t nrow = std::uint64_t{1} << p.m_nm;
  const std::uint64_t ns = std::uint64_t{1} << p.d;
  std::vector<std::vector<std::uint32_t>> vtab(C, std::vector<std::uint32_t>(nrow * ns));
  for (unsigned j = 0; j < C; ++j) {
    for (std::uint64_t rv = 0; rv < nrow; ++rv) {
      for (std::uint64_t sv = 0; sv < ns; ++sv) {
        vtab[j][rv * ns + sv] = static_cast<std::uint32_t>(
            protocol.v_output(BitVec::from_u64(rv, p.m_nm), BitVec::from_u64(sv, p.d), j + 1).to_u64());
      }
    }
  }
  const std::uint64_t nz = std::uint64_t{1} << p.z_bits;
  std::vector<std::uint32_t> mac(nz * nw);
  for (std::uint64_t z = 0; z < nz; ++z) {
    for (std::uint64_t w = 0; w < nw; ++w) {
      mac[z * nw + w] = static_cast<std::uint32_t>(mac_tag_u64(z, p.tag_bits, w, p.d));
    }
  }

  // For each public view, sum_key |2^kb * c(label, key) - c(label)| over the
  // labels (T, V, E(x)) hit by some x.
  const unsigned kb = p.key_bits;
  const std::uint64_t scale = std::uint64_t{1} << kb;
  const unsigned workers = worker_count(n1);
  std::vector<BigInt> acc(workers);
  parallel_chunks(n1, workers, [&](unsigned wk, std::uint64_t b, std::uint64_t e) {
    std::vector<std::uint32_t> cnt(std::size_t{1} << (label_bits + kb), 0);
    std::vector<std::uint32_t> tot(std::size_t{1} << label_bits, 0);
    std::vector<std::uint32_t> touched;
    std::vector<std::uint64_t> vlabel(nx);
    std::uint64_t local = 0;
    for (std::uint64_t y1 = b; y1 < e; ++y1) {
      for (std::uint64_t q = 0; q < n23; ++q) {
        for (std::size_t i = 0; i < nx; ++i) {
          std::uint64_t v = 0;
          unsigned off = 0;
          for (unsigned j = 0; j < C; ++j) {
            const std::uint32_t rv = rows[(i * n1 + y1) * C + j];
            const std::uint32_t sv = chain[(i * n23 + q) * C + j];
            v |= static_cast<std::uint64_t>(vtab[j][rv * ns + sv]) << off;
            off += p.v_bits[j];
          }
          vlabel[i] = (v << p.tag_bits) | (leak[i] << (p.tag_bits + vt));
        }
        for (std::uint64_t w = 0; w < nw; ++w) {
          for (std::size_t i = 0; i < nx; ++i) {
            const std::uint64_t label = vlabel[i] | mac[zt[i * n1 + y1] * nw + w];
            if (tot[label]++ == 0) touched.push_back(static_cast<std::uint32_t>(label));
            ++cnt[(label << kb) | keyt[i * nw + w]];
          }
          for (std::uint32_t label : touched) {
            const std::uint64_t t = tot[label];
            for (std::uint64_t k = 0; k < scale; ++k) {
              const std::uint64_t c = cnt[(static_cast<std::uint64_t>(label) << kb) | k] * scale;
              local += c > t ? c - t : t - c;
              cnt[(static_cast<std::uint64_t>(label) << kb) | k] = 0;
            }
            tot[label] = 0;
          }
          touched.clear();
        }
      }
    }
    acc[wk] = local;
  });
  BigInt num = 0;
  for (const auto& a : acc) num += a;
  const BigInt den = BigInt(2) * BigInt(nx) * (BigInt(1) << cl.total()) * BigInt(scale);
  return Rational(num, den);
}

JointDist passive_view_joint(const Protocol& protocol, const FlatSource& x, const Round1Msg& y,
                             const BitVec& w) {
  const ProtocolParams& p = protocol.params();
  const unsigned view_bits = p.tag_bits + p.v_total();
  if (p.n + view_bits > 64) throw Error(ErrorCode::kBudgetExceeded, "joint wider than 64 bits");
  std::map<std::uint64_t, BigInt> weights;
  for (std::uint64_t xv : x.support()) {
    const BitVec xb = BitVec::from_u64(xv, p.n);
    FixedRandomness rb(w);
    const Round2Msg m = protocol.bob_round(xb, y, rb).first;
    const std::uint64_t view = m.t.to_u64() | (m.v.to_u64() << p.tag_bits);
    weights[xv | (view << p.n)] += 1;
  }
  return JointDist({p.n, view_bits}, std::move(weights));
}

}  // namespace nmx
