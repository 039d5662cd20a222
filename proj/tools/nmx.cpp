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

// Command-line driver. Every subcommand prints a JSON report (or CSV rows
// with --csv) and exits 0 when the asserted bounds hold, 1 on a violation
// and 2 on a usage error.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "nmx/error.hpp"
#include "nmx/harness.hpp"
#include "nmx/protocol.hpp"
#include "nmx/session.hpp"

namespace {

int emit(const nlohmann::json& report, bool csv) {
  if (csv) {
    std::cout << nmx::report_csv(report);
  } else {
    std::cout << report.dump(2) << '\n';
  }
  return report.value("holds", true) ? 0 : 1;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nmx::Error(nmx::ErrorCode::kInvalidArgument, "cannot open " + path);
  return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nmx: non-malleable extractor and privacy amplification workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  bool csv = false;
  app.add_flag("--csv", csv, "print the report rows as CSV");

  auto* sweep = app.add_subcommand("sweep", "non-malleability error sweep from a JSON config");
  std::string config;
  sweep->add_option("--config", config, "experiment config file")->required();

  auto* audit = app.add_subcommand("audit", "preimage and independence audits");
  std::string claim;
  unsigned ell = 3;
  std::vector<std::uint64_t> primes{5, 7};
  std::uint64_t samples = 100000, audit_seed = 1;
  std::string embed = "top-bit";
  unsigned r = 1;
  std::optional<unsigned> w;
  audit->add_option("--claim", claim, "independence | sum | linear | fp")
      ->required()
      ->check(CLI::IsMember({"independence", "sum", "linear", "fp"}));
  audit->add_option("--ell", ell, "field degree")->check(CLI::Range(2u, 16u));
  audit->add_option("--p", primes, "primes for the fp claim");
  audit->add_option("--samples", samples, "random functions when exhaustive search is over budget");
  audit->add_option("--seed", audit_seed, "sampling seed");
  audit->add_option("--embed", embed, "seed embedding: top-bit | all-columns")
      ->check(CLI::IsMember({"top-bit", "all-columns"}));
  audit->add_option("--r", r, "code dimension minus one (independence)");
  audit->add_option("--w", w, "subset size (independence)");

  auto* proto = app.add_subcommand("protocol", "privacy amplification sessions");
  std::string preset = "small", eve = "passive", transcripts;
  std::uint64_t trials = 1000, seed = 1;
  bool key_tv = false;
  proto->add_option("--preset", preset)->check(CLI::IsMember({"micro", "small", "demo"}));
  proto->add_option("--eve", eve, "strategy name, or 'all'");
  proto->add_option("--trials", trials);
  proto->add_option("--seed", seed);
  proto->add_option("--transcripts", transcripts, "write one JSON transcript per line");
  proto->add_flag("--key-tv", key_tv, "exact key distance (micro preset only)");

  auto* bounds = app.add_subcommand("bounds", "existence-bound parameter calculator");
  double bn = 0, bk = 0, bd = 0, bm = 0, beps = 0, br = 1, c1 = 10, c2 = 10;
  bounds->add_option("--n", bn)->required();
  bounds->add_option("--k", bk)->required();
  bounds->add_option("--d", bd)->required();
  bounds->add_option("--m", bm)->required();
  bounds->add_option("--eps", beps)->required();
  bounds->add_option("--r", br);
  bounds->add_option("--c1", c1);
  bounds->add_option("--c2", c2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sweep->parsed()) return emit(nmx::run_nm_sweep(load_json(config)), csv);
    if (audit->parsed()) {
      nlohmann::json cfg{{"claims", {claim}}, {"ell", ell},   {"p", primes},
                         {"samples", samples}, {"seed", audit_seed}, {"embed", embed}, {"r", r}};
      if (w) cfg["w"] = *w;
      return emit(nmx::run_preimage_audits(cfg), csv);
    }
    if (proto->parsed()) {
      if (!transcripts.empty()) {
        if (eve == "all") throw nmx::Error(nmx::ErrorCode::kInvalidArgument, "--transcripts needs one strategy");
        std::ofstream out(transcripts);
        if (!out) throw nmx::Error(nmx::ErrorCode::kInvalidArgument, "cannot write " + transcripts);
        const auto params = nmx::ProtocolParams::preset(preset);
        const nmx::Protocol protocol(params);
        const nmx::BitFixingSecret source(params.n, params.k, 7);
        const auto strategy = nmx::make_eve(eve, params);
        const auto st = nmx::run_session(protocol, source, *strategy, trials, seed,
                                         [&](const nlohmann::json& t) { out << t.dump() << '\n'; });
        nlohmann::json row = st.to_json();
        const bool ok = strategy->passive() ? st.correct == st.trials
                                            : st.violation_rate() <= params.target_epsilon();
        row["holds"] = ok;
        return emit({{"kind", "protocol_suite"}, {"params", params.to_json()}, {"rows", {row}}, {"holds", ok}},
                    csv);
      }
      nlohmann::json cfg{{"preset", preset}, {"trials", trials}, {"seed", seed}, {"key_tv", key_tv}};
      if (eve != "all") cfg["strategies"] = {eve};
      return emit(nmx::run_protocol_suite(cfg), csv);
    }
    if (bounds->parsed()) {
      const auto b = nmx::existence_bound_check(bn, bk, bd, bm, beps, br, c1, c2);
      nlohmann::json row = b.to_json();
      return emit({{"kind", "bounds"}, {"rows", {row}}, {"holds", b.feasible}}, csv);
    }
  } catch (const nmx::Error& e) {
    std::cerr << "nmx: " << e.what() << '\n';
    const auto c = e.code();
    return c == nmx::ErrorCode::kInvalidArgument || c == nmx::ErrorCode::kBudgetExceeded ||
                   c == nmx::ErrorCode::kEnumerationBudgetExceeded
               ? 2
               : 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "nmx: bad config: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
