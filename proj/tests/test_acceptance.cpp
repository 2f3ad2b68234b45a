#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include "helpers.hpp"

using namespace switchlab;
using testutil::tiny_dnf;
using testutil::tiny_family_params;
using testutil::tiny_oracle_params;
using testutil::tiny_params;
using testutil::tiny_space;

namespace {

struct stopwatch {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void report(int criterion, bool pass, const std::string& what) {
  std::cout << "criterion " << criterion << ": " << (pass ? "PASS" : "FAIL")
            << " - " << what << "\n";
}

} // namespace

TEST_CASE("criterion 1: canonical tree correctness") {
  stopwatch timer;
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  canonical_params params = tiny_params();
  std::uint64_t checked = 0, good = 0;
  enumerate_restrictions(sp, {}, 1 << 20,
                         [&](const restriction& rho, const rational&) {
                           ++checked;
                           decision_tree t = canonical_tree(sp, f, rho, params);
                           if (verify_tree_decides(sp, f, rho, t)) ++good;
                         });
  double secs = timer.seconds();
  bool pass = checked == 2401 && good == 2401 && secs < 5.0;
  report(1, pass,
         "tree decides the formula on " + std::to_string(good) + "/" +
             std::to_string(checked) + " enumerated events in " +
             format_double(secs) + "s");
  REQUIRE(checked == 2401);
  REQUIRE(good == 2401);
  CHECK(secs < 5.0);
}

TEST_CASE("criterion 2: encoding injects and round-trips") {
  stopwatch timer;
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  canonical_params params = tiny_params();
  std::set<std::string> bundles;
  std::uint64_t members = 0, roundtrips = 0;
  enumerate_restrictions(
      sp, {}, 1 << 20, [&](const restriction& rho, const rational&) {
        auto ev = failure_set_member(sp, f, rho, params);
        if (!ev) return;
        ++members;
        code_bundle b = encode_failure(sp, f, rho, *ev, params);
        if (decode_failure(sp, f, b, params) == rho) ++roundtrips;
        bundles.insert(bundle_to_json(b).dump());
      });
  double secs = timer.seconds();
  bool pass = members == 732 && roundtrips == members &&
              bundles.size() == members && secs < 10.0;
  report(2, pass,
         std::to_string(members) + " failing events, " +
             std::to_string(bundles.size()) + " distinct code bundles, " +
             std::to_string(roundtrips) + " exact round-trips in " +
             format_double(secs) + "s");
  REQUIRE(members == 732);
  REQUIRE(roundtrips == members);
  REQUIRE(bundles.size() == members);
  CHECK(secs < 10.0);
}

TEST_CASE("criterion 3: probability accounting") {
  stopwatch timer;
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  canonical_params params = tiny_params();
  rational total(0);
  std::map<std::string, rational> class_mass;
  bool certificates = true;
  enumerate_restrictions(
      sp, {}, 1 << 20, [&](const restriction& rho, const rational& p) {
        total += p;
        auto ev = failure_set_member(sp, f, rho, params);
        if (!ev) return;
        code_bundle b = encode_failure(sp, f, rho, *ev, params);
        certificates =
            certificates && ratio_certificate(sp, rho, b, params).holds;
        njson key = bundle_to_json(b);
        key.erase("rhoTauSigma");
        class_mass[key.dump()] += exact_probability(b.rho_tau_sigma);
      });
  bool masses = true;
  for (const auto& [key, mass] : class_mass)
    masses = masses && mass <= rational(1);
  double secs = timer.seconds();
  bool pass = total == rational(1) && certificates && masses && secs < 10.0;
  report(3, pass,
         "total mass " + rational_to_string(total) + ", certificates hold, " +
             std::to_string(class_mass.size()) +
             " witness classes all at most unit mass in " +
             format_double(secs) + "s");
  REQUIRE(total == rational(1));
  REQUIRE(certificates);
  REQUIRE(masses);
  CHECK(secs < 10.0);
}

TEST_CASE("criterion 4: monte carlo tracks the exact rate") {
  stopwatch timer;
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  exact_rate exact = exact_failure_rate(sp, f, tiny_params());
  double truth = exact.p.get_d();
  int within = 0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) {
    mc_rate mc =
        monte_carlo_failure_rate(sp, f, tiny_params(), {}, s, 100000, 8);
    if (std::abs(mc.estimate - truth) <= 3.0 * mc.stderr_est) ++within;
  }
  double secs = timer.seconds();
  bool pass = within >= 19 && secs < 60.0;
  report(4, pass,
         std::to_string(within) + "/" + std::to_string(seeds) +
             " hundred-thousand-trial estimates within three standard errors"
             " of " +
             rational_to_string(exact.p) + " in " + format_double(secs) + "s");
  REQUIRE(within >= 19);
  CHECK(secs < 60.0);
}

TEST_CASE("criterion 5: growth checkpoints") {
  stopwatch timer;
  bool below = true;
  for (unsigned long n = 5; n <= 20; ++n)
    below = below && f_k(2, bigint(n)) < pow2(n);
  growth_fn fn{growth_fn::family::frac_exp, 2};
  bool above = true;
  for (unsigned long n = 3; n <= 20; ++n)
    above = above && iterate_growth(fn, 3, bigint(n)) > pow2(n);
  bool monotone = true;
  for (unsigned k = 2; k <= 3; ++k) {
    bigint prev(0);
    for (unsigned long n = 0; n <= 200; ++n) {
      bigint v = f_k(k, bigint(n));
      monotone = monotone && v >= prev;
      prev = v;
    }
  }
  double secs = timer.seconds();
  bool pass = below && above && monotone && secs < 1.0;
  report(5, pass,
         "f2 below 2^n on [5,20], its triple iterate above 2^n on [3,20], "
         "f2 and f3 monotone, in " +
             format_double(secs) + "s");
  REQUIRE(below);
  REQUIRE(above);
  REQUIRE(monotone);
  CHECK(secs < 1.0);
}

TEST_CASE("criterion 6: oracle pipeline battery") {
  stopwatch timer;
  const var_space& sp = tiny_space();
  oracle_params params = tiny_oracle_params();
  int equivalent = 0, completed = 0;
  const std::uint64_t seeds = 10;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    formula_family fam =
        generate_family(sp, tiny_family_params(), counter_rng(seed));
    oracle_run run = build_oracle(sp, fam, params, seed);
    ++completed; // would have thrown on try-cap or designated exhaustion
    if (run.eq.all_equal) ++equivalent;
  }
  double secs = timer.seconds();
  bool pass = completed == 10 && equivalent == 10 && secs < 60.0;
  report(6, pass,
         std::to_string(completed) + "/10 builds completed without"
         " exhaustion and " +
             std::to_string(equivalent) +
             "/10 passed equivalence in " + format_double(secs) + "s");
  REQUIRE(completed == 10);
  REQUIRE(equivalent == 10);
  CHECK(secs < 60.0);
}

TEST_CASE("criterion 7: byte-identical artifacts") {
  stopwatch timer;
  auto capture = [&](const std::string& command, const std::string& config,
                     const std::string& format, unsigned threads) {
    cli_invocation inv;
    inv.command = command;
    if (!config.empty()) inv.config_path = testutil::source_path(config);
    inv.format = format;
    inv.threads = threads;
    if (command == "growth") {
      inv.k = 2;
      inv.range = "3..20";
      inv.l = 1;
      inv.m = 3;
    }
    auto r = testutil::run(inv);
    REQUIRE(r.code == 0);
    return r.out;
  };

  bool stable = true;
  const std::string sw = "configs/switch_tiny.json";
  const std::string orc = "configs/oracle_tiny.json";
  const std::pair<std::string, std::string> plan[] = {
      {"sample", sw},        {"tree", sw},   {"encode-roundtrip", sw},
      {"build-oracle", orc}, {"verify-oracle", orc},
      {"growth", ""},        {"schema", ""},
  };
  for (const auto& [command, config] : plan)
    stable = stable &&
             capture(command, config, "json", 0) ==
                 capture(command, config, "json", 0);

  std::string csv_once = capture("switch-experiment", sw, "csv", 1);
  std::string csv_again = capture("switch-experiment", sw, "csv", 1);
  std::string csv_wide = capture("switch-experiment", sw, "csv", 8);
  std::string json_once = capture("switch-experiment", sw, "json", 1);
  std::string json_wide = capture("switch-experiment", sw, "json", 8);
  bool threads_invariant = csv_once == csv_wide && json_once == json_wide;
  stable = stable && csv_once == csv_again;

  double secs = timer.seconds();
  bool pass = stable && threads_invariant;
  report(7, pass,
         std::string("every command repeats byte-identically") +
             (threads_invariant ? ", one and eight worker threads agree"
                                : ", thread counts disagree") +
             ", in " + format_double(secs) + "s");
  REQUIRE(stable);
  REQUIRE(threads_invariant);
}

TEST_CASE("criterion 8: bound ordering at the nominal word size") {
  rational delta(1, 110), eps(1, 9);
  bound_report nominal = bound_values(64, delta, eps);
  bound_report tiny = bound_values(4, delta, eps);
  bound_report asymptotic = bound_values(std::uint64_t(1) << 20, delta, eps);

  bool tiny_flagged = tiny.vacuous;
  bool ordered_at_64 = nominal.ordering_holds && !nominal.vacuous;
  bool pass = ordered_at_64 && tiny_flagged;
  report(8, pass,
         "union bound 2^" + nominal.log2_union.str(6) + " vs target 2^" +
             nominal.log2_target.str(6) +
             " at N=2^64: the paper's final inequality does not order until"
             " log2 N is near 2^20 (there: vacuous=" +
             (asymptotic.vacuous ? "1" : "0") + ", ordered=" +
             (asymptotic.ordering_holds ? "1" : "0") +
             "); tiny-N vacuous flag=" + (tiny_flagged ? "1" : "0"));

  // the reporting machinery itself is verifiably correct in both regimes
  REQUIRE(tiny_flagged);
  REQUIRE(asymptotic.ordering_holds);
  REQUIRE_FALSE(asymptotic.vacuous);
  REQUIRE(nominal.delta_small);

  // the criterion's ordering clause at N = 2^64, asserted as stated; the
  // finite-size constants make it genuinely false there, so this check is
  // expected to fail and the failure is the honest result
  CHECK(ordered_at_64);
}
