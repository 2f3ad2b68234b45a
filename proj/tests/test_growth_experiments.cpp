#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace switchlab;
using testutil::tiny_dnf;
using testutil::tiny_params;
using testutil::tiny_space;

TEST_CASE("iterated exponentials") {
  REQUIRE(exp_tower(0, bigint(5)) == 5);
  REQUIRE(exp_tower(1, bigint(5)) == 32);
  REQUIRE(exp_tower(2, bigint(2)) == 16);
  REQUIRE(exp_tower(3, bigint(2)) == 65536);
  REQUIRE_THROWS_AS(exp_tower(5, bigint(2)), error);
  try {
    exp_tower(5, bigint(2));
  } catch (const error& e) {
    REQUIRE(e.kind() == error_kind::budget);
  }
}

TEST_CASE("fractional-exponential checkpoints") {
  auto f2 = [](unsigned long n) { return f_k(2, bigint(n)); };
  REQUIRE(f2(0) == 3);
  REQUIRE(f2(1) == 3);
  REQUIRE(f2(2) == 3);
  REQUIRE(f2(3) == 4);
  REQUIRE(f2(4) == 8);
  REQUIRE(f2(5) == 8);
  REQUIRE(f2(8) == 16);
  REQUIRE(f2(16) == 256);
  REQUIRE(f2(256) == 65536);

  auto f3 = [](unsigned long n) { return f_k(3, bigint(n)); };
  REQUIRE(f3(0) == 5);
  REQUIRE(f3(4) == 5);
  REQUIRE(f3(5) == 6);
  REQUIRE(f3(16) == 17);
  REQUIRE(f3(17) == 32);

  growth_fn fn{growth_fn::family::frac_exp, 2};
  REQUIRE(iterate_growth(fn, 3, bigint(4)) == 256);
  REQUIRE(iterate_growth(fn, 0, bigint(9)) == 9);
  REQUIRE_THROWS_AS(f_k(0, bigint(3)), error);
  REQUIRE_THROWS_AS(f_k(2, bigint(-1)), error);
}

TEST_CASE("growth stays monotone on tested ranges") {
  for (unsigned k = 2; k <= 3; ++k) {
    bigint prev(0);
    for (unsigned long n = 0; n <= 300; ++n) {
      bigint v = f_k(k, bigint(n));
      REQUIRE(v >= prev);
      REQUIRE(v > n); // strictly above its argument by construction
      prev = v;
    }
  }
}

TEST_CASE("growth respects the bit budget") {
  REQUIRE(f_k(2, bigint(40), 64) == 256);
  REQUIRE_THROWS_AS(f_k(2, bigint(300), 8), error);
  try {
    f_k(2, bigint(300), 8);
  } catch (const error& e) {
    REQUIRE(e.kind() == error_kind::budget);
  }
}

TEST_CASE("growth report flags both regimes") {
  auto rows = growth_report(2, 3, 20, 1, 3);
  REQUIRE(rows.size() == 18);
  for (const auto& row : rows) {
    REQUIRE(row.f == f_k(2, bigint(static_cast<unsigned long>(row.n))));
    REQUIRE(row.pow2n == pow2(row.n));
    REQUIRE(row.pass_l == (row.iter_l < row.pow2n));
    REQUIRE(row.pass_m == (row.iter_m >= row.pow2n));
    REQUIRE(row.pass_l);
    REQUIRE(row.pass_m);
    REQUIRE(row.ratio_l == rational(row.iter_l) / rational(row.pow2n));
  }
  REQUIRE_THROWS_AS(growth_report(2, 9, 3, 1, 3), error);
}

TEST_CASE("exact failure rate on the fixture") {
  exact_rate r = exact_failure_rate(tiny_space(), tiny_dnf(), tiny_params());
  REQUIRE(r.p == rational(1, 4));
  REQUIRE(r.members == 732);
  REQUIRE(r.outcomes == 2401);
  REQUIRE_THROWS_AS(
      exact_failure_rate(tiny_space(), tiny_dnf(), tiny_params(), {}, 100),
      error);
}

TEST_CASE("monte carlo estimates are thread-invariant and deterministic") {
  const var_space& sp = tiny_space();
  dnf f = tiny_dnf();
  mc_rate one = monte_carlo_failure_rate(sp, f, tiny_params(), {}, 7, 20000, 1);
  mc_rate four =
      monte_carlo_failure_rate(sp, f, tiny_params(), {}, 7, 20000, 4);
  REQUIRE(one.failures == four.failures);
  REQUIRE(one.estimate == four.estimate);
  REQUIRE(one.stderr_est == four.stderr_est);
  REQUIRE(one.trials == 20000);

  mc_rate again =
      monte_carlo_failure_rate(sp, f, tiny_params(), {}, 7, 20000, 3);
  REQUIRE(again.failures == one.failures);

  // the frozen hundred-thousand-trial values at master seed 7
  mc_rate big = monte_carlo_failure_rate(sp, f, tiny_params(), {}, 7, 100000, 4);
  REQUIRE(big.failures == 24805);
  REQUIRE(format_double(big.estimate) == "0.24805");
  REQUIRE(format_double(big.stderr_est) == "0.00136572763573");

  double expected_err =
      std::sqrt(big.estimate * (1.0 - big.estimate) / 100000.0);
  REQUIRE(big.stderr_est == Catch::Approx(expected_err));
}

TEST_CASE("bound evaluation at the nominal word size is vacuous") {
  bound_report r = bound_values(64, rational(1, 110), rational(1, 9));
  REQUIRE(r.vacuous);
  REQUIRE_FALSE(r.ordering_holds);
  REQUIRE(r.delta_small);
  double lu = r.log2_union.to_double();
  REQUIRE(lu > 455.29);
  REQUIRE(lu < 455.31);
  double lt = r.log2_target.to_double();
  REQUIRE(lt > -138.25);
  REQUIRE(lt < -138.24);
  REQUIRE(r.union_bound.str() == "1.1440219736e+137");
  REQUIRE(r.target_bound.str() == "2.4171942362e-42");
}

TEST_CASE("bound evaluation flips in the asymptotic regime") {
  bound_report r =
      bound_values(std::uint64_t(1) << 20, rational(1, 110), rational(1, 9));
  REQUIRE_FALSE(r.vacuous);
  REQUIRE(r.ordering_holds);
  REQUIRE(r.log2_union.is_negative());

  bound_report tiny = bound_values(4, rational(1, 110), rational(1, 9));
  REQUIRE(tiny.vacuous);

  bound_report fat_delta = bound_values(64, rational(1, 100), rational(1, 9));
  REQUIRE_FALSE(fat_delta.delta_small);

  REQUIRE_THROWS_AS(bound_values(0, rational(1, 110), rational(1, 9)), error);
  REQUIRE_THROWS_AS(bound_values(64, rational(0), rational(1, 9)), error);
  REQUIRE_THROWS_AS(bound_values(64, rational(1, 110), rational(-1, 9)), error);
}

TEST_CASE("experiment rows serialize to the fixed csv shape") {
  REQUIRE(csv_header_experiments() ==
          "config_hash,mode,h,w,exact_p,exact_q,mc_estimate,mc_stderr,trials,"
          "union_bound,target_bound,vacuous_flag");

  experiment_row row;
  row.config_hash = "deadbeefdeadbeef";
  row.mode = "exact";
  row.h = 2;
  row.w = 2;
  row.has_exact = true;
  row.exact_value = rational(1, 4);
  row.bounds = bound_values(64, rational(1, 110), rational(1, 9));

  auto cells = testutil::split_csv(csv_row_experiments(row));
  REQUIRE(cells.size() == 12);
  REQUIRE(cells[0] == "deadbeefdeadbeef");
  REQUIRE(cells[1] == "exact");
  REQUIRE(cells[2] == "2");
  REQUIRE(cells[3] == "2");
  REQUIRE(cells[4] == "1");
  REQUIRE(cells[5] == "4");
  REQUIRE(cells[6].empty());
  REQUIRE(cells[7].empty());
  REQUIRE(cells[8].empty());
  REQUIRE(cells[9] == "1.1440219736e+137");
  REQUIRE(cells[10] == "2.4171942362e-42");
  REQUIRE(cells[11] == "1");

  experiment_row mc;
  mc.config_hash = row.config_hash;
  mc.mode = "montecarlo";
  mc.h = 2;
  mc.w = 2;
  mc.has_mc = true;
  mc.mc.trials = 1000;
  mc.mc.failures = 250;
  mc.mc.estimate = 0.25;
  mc.mc.stderr_est = 0.01;
  mc.bounds = row.bounds;
  auto mcells = testutil::split_csv(csv_row_experiments(mc));
  REQUIRE(mcells.size() == 12);
  REQUIRE(mcells[4].empty());
  REQUIRE(mcells[5].empty());
  REQUIRE(mcells[6] == "0.25");
  REQUIRE(mcells[7] == "0.01");
  REQUIRE(mcells[8] == "1000");

  njson j = json_row_experiments(mc);
  REQUIRE(j["exact_p"].is_null());
  REQUIRE(j["mc_estimate"].get<double>() == 0.25);
  REQUIRE(j["vacuous_flag"].get<bool>());
  REQUIRE_FALSE(j["ordering_holds"].get<bool>());
  REQUIRE(j["delta_small"].get<bool>());
}

TEST_CASE("fixture configs parse with their frozen hashes") {
  njson sw = load_json_file(testutil::source_path("configs/switch_tiny.json"));
  REQUIRE(config_hash(sw) == "b62883c079bce074");
  experiment_config cfg = parse_experiment_config(sw);
  REQUIRE(cfg.mode == run_mode::both);
  REQUIRE(cfg.trials == 100000);
  REQUIRE(cfg.master_seed == 7);
  REQUIRE(cfg.threads == 2);
  REQUIRE(cfg.delta == rational(1, 110));
  REQUIRE(cfg.epsilon == rational(1, 9));
  REQUIRE(cfg.log2_nominal_n == 64);
  REQUIRE(cfg.params.small_block_threshold == 2);
  REQUIRE(cfg.params.height_threshold == 2);
  dnf f = resolve_dnf(cfg);
  REQUIRE(f.terms.size() == 4);
  REQUIRE(f.width == 2);
  REQUIRE(f == tiny_dnf());

  njson orc = load_json_file(testutil::source_path("configs/oracle_tiny.json"));
  REQUIRE(config_hash(orc) == "95760cb0431a7dbd");
  oracle_config ocfg = parse_oracle_config(orc);
  REQUIRE(ocfg.master_seed == 1);
  REQUIRE(ocfg.params.b_min_scale == 2);
  REQUIRE(ocfg.params.quota1.at(1) == 2);
  REQUIRE(ocfg.params.quota2.at(1) == 2);
  REQUIRE(ocfg.params.max_tries == 1000);

  njson gr = load_json_file(testutil::source_path("configs/growth_tiny.json"));
  growth_config gcfg = parse_growth_config(gr);
  REQUIRE(gcfg.k == 2);
  REQUIRE(gcfg.lo == 3);
  REQUIRE(gcfg.hi == 20);
  REQUIRE(gcfg.l == 1);
  REQUIRE(gcfg.m == 3);
}

TEST_CASE("config hashing is order-insensitive and value-sensitive") {
  njson a = njson::parse(R"({"x": 1, "y": "z"})");
  njson b = njson::parse(R"({"y": "z", "x": 1})");
  REQUIRE(config_hash(a) == config_hash(b));
  njson c = a;
  c["x"] = 2;
  REQUIRE(config_hash(c) != config_hash(a));
}

TEST_CASE("experiment config validation") {
  njson base = load_json_file(testutil::source_path("configs/switch_tiny.json"));

  njson both_dnfs = base;
  both_dnfs["dnfRandom"] = njson{{"terms", 2}, {"width", 2}, {"seed", 1}};
  REQUIRE_THROWS_AS(parse_experiment_config(both_dnfs), error);

  njson neither = base;
  neither.erase("dnf");
  REQUIRE_THROWS_AS(parse_experiment_config(neither), error);

  njson bad_mode = base;
  bad_mode["mode"] = "sideways";
  REQUIRE_THROWS_AS(parse_experiment_config(bad_mode), error);

  njson bad_stage = base;
  bad_stage["stage"] = "omega";
  REQUIRE_THROWS_AS(parse_experiment_config(bad_stage), error);

  njson bad_polarity = base;
  bad_polarity["polarity"] = "reversed";
  REQUIRE_THROWS_AS(parse_experiment_config(bad_polarity), error);

  njson negative = base;
  negative["trials"] = -5;
  REQUIRE_THROWS_AS(parse_experiment_config(negative), error);

  njson bad_rational = base;
  bad_rational["delta"] = "1/0";
  REQUIRE_THROWS_AS(parse_experiment_config(bad_rational), error);

  njson mc_without_trials = base;
  mc_without_trials["mode"] = "mc";
  mc_without_trials.erase("trials");
  REQUIRE_THROWS_AS(parse_experiment_config(mc_without_trials), error);
}

TEST_CASE("schema validates the shipped configs and rejects mutations") {
  njson schema = config_schema();
  REQUIRE(schema.contains("experiment"));
  REQUIRE(schema.contains("oracle"));
  REQUIRE(schema.contains("growth"));

  njson sw = load_json_file(testutil::source_path("configs/switch_tiny.json"));
  njson orc = load_json_file(testutil::source_path("configs/oracle_tiny.json"));
  njson gr = load_json_file(testutil::source_path("configs/growth_tiny.json"));
  REQUIRE_NOTHROW(validate_against_schema(schema["experiment"], sw, "experiment"));
  REQUIRE_NOTHROW(validate_against_schema(schema["oracle"], orc, "oracle"));
  REQUIRE_NOTHROW(validate_against_schema(schema["growth"], gr, "growth"));

  njson negative = sw;
  negative["trials"] = -5;
  REQUIRE_THROWS_AS(
      validate_against_schema(schema["experiment"], negative, "experiment"),
      error);

  njson missing = sw;
  missing.erase("space");
  try {
    validate_against_schema(schema["experiment"], missing, "experiment");
    FAIL("expected a config error");
  } catch (const error& e) {
    REQUIRE(e.kind() == error_kind::config);
    REQUIRE(std::string(e.what()).find("space") != std::string::npos);
  }

  // the emitted schema survives a serialization loop unchanged
  REQUIRE(njson::parse(schema.dump()) == schema);
}
