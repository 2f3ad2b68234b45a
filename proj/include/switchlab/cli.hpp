#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "config.hpp"
#include "encoding.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "growth.hpp"
#include "oracle.hpp"
#include "serialize.hpp"

namespace switchlab {

struct cli_invocation {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv"; // csv | json
  unsigned threads = 0;       // 0 keeps the config value
  std::optional<std::uint64_t> budget;
  // growth flags; --range wins over the config file
  std::optional<std::uint64_t> k;
  std::string range; // "lo..hi"
  std::optional<std::uint64_t> l, m;
};

inline int exit_code_for(error_kind k) {
  switch (k) {
    case error_kind::config:
    case error_kind::data: return 2;
    case error_kind::budget:
    case error_kind::tries: return 3;
    case error_kind::verification: return 1;
    case error_kind::internal: return 1;
  }
  return 1;
}

namespace cli_detail {

inline std::optional<std::uint64_t> env_seed() {
  const char* e = std::getenv("SWITCHLAB_SEED");
  if (!e || !*e) return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(e, &end, 10);
  if (!end || *end)
    fail(error_kind::config,
         "SWITCHLAB_SEED is not an unsigned integer: " + std::string(e));
  return static_cast<std::uint64_t>(v);
}

// flag beats environment beats config file
inline std::uint64_t resolve_seed(const cli_invocation& inv,
                                  std::uint64_t config_seed) {
  if (inv.seed) return *inv.seed;
  if (auto e = env_seed()) return *e;
  return config_seed;
}

inline njson require_config(const cli_invocation& inv) {
  if (inv.config_path.empty())
    fail(error_kind::config, "this command needs --config");
  return load_json_file(inv.config_path);
}

inline void write_text(const cli_invocation& inv, std::ostream& fallback,
                       const std::string& text) {
  if (inv.out_path.empty()) {
    fallback << text;
    if (text.empty() || text.back() != '\n') fallback << '\n';
    return;
  }
  std::ofstream out(inv.out_path, std::ios::binary);
  if (!out) fail(error_kind::config, "cannot write to " + inv.out_path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

inline void check_format(const cli_invocation& inv) {
  if (inv.format != "csv" && inv.format != "json")
    fail(error_kind::config, "format must be csv or json");
}

inline std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  std::size_t dots = s.find("..");
  if (dots == std::string::npos)
    fail(error_kind::config, "range must look like lo..hi");
  try {
    std::size_t u1 = 0, u2 = 0;
    std::uint64_t lo = std::stoull(s.substr(0, dots), &u1);
    std::uint64_t hi = std::stoull(s.substr(dots + 2), &u2);
    if (u1 != dots || u2 != s.size() - dots - 2)
      fail(error_kind::config, "range must look like lo..hi");
    return {lo, hi};
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    fail(error_kind::config, "range must look like lo..hi");
  }
}

// ---- commands -------------------------------------------------------------

inline int cmd_sample(const cli_invocation& inv, std::ostream& out) {
  njson raw = require_config(inv);
  experiment_config c = parse_experiment_config(raw);
  std::uint64_t seed = resolve_seed(inv, c.master_seed);
  counter_rng rng(seed);
  restriction r = sample_rho(c.space, c.dist, rng, 0, c.pol);
  if (c.stage == "g" || c.stage == "h") r = extend_g(r);
  if (c.stage == "h") r = extend_h(r, parse_len_map(raw, "quota"));
  njson artifact;
  artifact["seed"] = seed;
  artifact["configHash"] = config_hash(raw);
  artifact["restriction"] = restriction_to_json(r);
  write_text(inv, out, artifact.dump(2));
  return 0;
}

inline int cmd_tree(const cli_invocation& inv, std::ostream& out) {
  njson raw = require_config(inv);
  experiment_config c = parse_experiment_config(raw);
  std::uint64_t seed = resolve_seed(inv, c.master_seed);
  c.master_seed = seed; // a seeded formula follows the override too
  dnf f = resolve_dnf(c);
  restriction rho = raw.contains("restriction")
                        ? parse_restriction(c.space, raw["restriction"])
                        : sample_rho(c.space, c.dist, counter_rng(seed), 0,
                                     c.pol);
  validate_event(rho);
  decision_tree t = canonical_tree(c.space, f, rho, c.params);
  auto profile = tree_height_profile(t);
  njson artifact;
  artifact["seed"] = seed;
  artifact["configHash"] = config_hash(raw);
  artifact["heightProfile"] =
      njson{{"phase1", profile.first}, {"phase2", profile.second}};
  artifact["tree"] = tree_to_json(c.space, t);
  write_text(inv, out, artifact.dump(2));
  return 0;
}

inline int cmd_encode_roundtrip(const cli_invocation& inv, std::ostream& out) {
  njson raw = require_config(inv);
  experiment_config c = parse_experiment_config(raw);
  if (inv.budget) c.budget = *inv.budget;
  dnf f = resolve_dnf(c);
  std::uint64_t checked = 0, members = 0, mismatches = 0;
  enumerate_restrictions(
      c.space, c.dist, c.budget,
      [&](const restriction& rho, const rational&) {
        ++checked;
        auto ev = failure_set_member(c.space, f, rho, c.params);
        if (!ev) return;
        ++members;
        code_bundle b = encode_failure(c.space, f, rho, *ev, c.params);
        restriction back = decode_failure(c.space, f, b, c.params);
        if (!(back == rho)) ++mismatches;
      },
      c.pol);
  njson artifact;
  artifact["configHash"] = config_hash(raw);
  artifact["checked"] = checked;
  artifact["members"] = members;
  artifact["mismatches"] = mismatches;
  write_text(inv, out, artifact.dump(2));
  if (mismatches)
    fail(error_kind::verification,
         std::to_string(mismatches) + " decoded events differ from their source");
  return 0;
}

inline int cmd_switch_experiment(const cli_invocation& inv, std::ostream& out) {
  njson raw = require_config(inv);
  experiment_config c = parse_experiment_config(raw);
  if (inv.budget) c.budget = *inv.budget;
  unsigned threads = inv.threads ? inv.threads : c.threads;
  std::uint64_t seed = resolve_seed(inv, c.master_seed);
  c.master_seed = seed; // a seeded formula follows the override too
  dnf f = resolve_dnf(c);
  bound_report bounds = bound_values(c.log2_nominal_n, c.delta, c.epsilon);
  std::string hash = config_hash(raw);

  std::vector<experiment_row> rows;
  if (c.mode == run_mode::exact || c.mode == run_mode::both) {
    exact_rate ex = exact_failure_rate(c.space, f, c.params, c.dist, c.budget,
                                       c.pol);
    experiment_row row;
    row.config_hash = hash;
    row.mode = "exact";
    row.h = c.params.height_threshold;
    row.w = f.width;
    row.has_exact = true;
    row.exact_value = ex.p;
    row.bounds = bounds;
    rows.push_back(std::move(row));
  }
  if (c.mode == run_mode::montecarlo || c.mode == run_mode::both) {
    experiment_row row;
    row.config_hash = hash;
    row.mode = "montecarlo";
    row.h = c.params.height_threshold;
    row.w = f.width;
    row.has_mc = true;
    row.mc = monte_carlo_failure_rate(c.space, f, c.params, c.dist, seed,
                                      c.trials, threads, c.pol);
    row.bounds = bounds;
    rows.push_back(std::move(row));
  }

  if (inv.format == "json") {
    njson artifact;
    artifact["configHash"] = hash;
    artifact["seed"] = seed;
    njson jr = njson::array();
    for (const experiment_row& r : rows) jr.push_back(json_row_experiments(r));
    artifact["rows"] = std::move(jr);
    write_text(inv, out, artifact.dump(2));
  } else {
    std::string text = csv_header_experiments() + "\n";
    for (const experiment_row& r : rows) text += csv_row_experiments(r) + "\n";
    write_text(inv, out, text);
  }
  return 0;
}

inline int cmd_growth(const cli_invocation& inv, std::ostream& out) {
  growth_config c;
  if (!inv.config_path.empty())
    c = parse_growth_config(load_json_file(inv.config_path));
  if (inv.k) c.k = static_cast<unsigned>(*inv.k);
  if (!inv.range.empty()) {
    auto [lo, hi] = parse_range(inv.range);
    c.lo = lo;
    c.hi = hi;
  }
  if (inv.l) c.l = *inv.l;
  if (inv.m) c.m = *inv.m;
  if (inv.budget) c.budget_bits = *inv.budget;
  if (c.k < 1) fail(error_kind::config, "k must be >= 1");
  if (c.lo > c.hi) fail(error_kind::config, "empty growth range");
  std::vector<growth_row> rows =
      growth_report(c.k, c.lo, c.hi, c.l, c.m, c.budget_bits);
  if (inv.format == "json") {
    njson jr = njson::array();
    for (const growth_row& r : rows)
      jr.push_back(njson{{"n", r.n},
                         {"f", r.f.get_str()},
                         {"iter_l", r.iter_l.get_str()},
                         {"pow2n", r.pow2n.get_str()},
                         {"pass_l", r.pass_l},
                         {"iter_m", r.iter_m.get_str()},
                         {"pass_m", r.pass_m},
                         {"ratio_l", r.ratio_l.get_str()}});
    write_text(inv, out, jr.dump(2));
  } else {
    std::string text = "n,f,iter_l,2^n,pass_l,iter_m,pass_m\n";
    for (const growth_row& r : rows)
      text += std::to_string(r.n) + "," + r.f.get_str() + "," +
              r.iter_l.get_str() + "," + r.pow2n.get_str() + "," +
              (r.pass_l ? "1" : "0") + "," + r.iter_m.get_str() + "," +
              (r.pass_m ? "1" : "0") + "\n";
    write_text(inv, out, text);
  }
  return 0;
}

inline int cmd_oracle(const cli_invocation& inv, std::ostream& out,
                      bool verify_only) {
  njson raw = require_config(inv);
  oracle_config c = parse_oracle_config(raw);
  std::uint64_t seed = resolve_seed(inv, c.master_seed);
  // a seed override stands in for the whole config seed, the derived
  // family included; otherwise --seed could not reproduce a config run
  c.master_seed = seed;
  formula_family fam = resolve_family(c);
  oracle_run run = build_oracle(c.space, fam, c.params, seed);
  njson artifact = table_to_json(c.space, run);
  artifact["configHash"] = config_hash(raw);
  if (verify_only) {
    njson report;
    report["configHash"] = artifact["configHash"];
    report["seed"] = seed;
    report["allEqual"] = artifact["allEqual"];
    report["equivalence"] = artifact["equivalence"];
    write_text(inv, out, report.dump(2));
  } else {
    write_text(inv, out, artifact.dump(2));
  }
  if (!run.eq.all_equal)
    fail(error_kind::verification,
         "formula and quantifier game disagree on some word");
  return 0;
}

inline int cmd_schema(const cli_invocation& inv, std::ostream& out) {
  write_text(inv, out, config_schema().dump(2));
  return 0;
}

} // namespace cli_detail

// Dispatches one parsed invocation. Throws nothing: failures come back as
// the documented exit codes with a one-line JSON report on the error stream.
inline int run_cli(const cli_invocation& inv, std::ostream& out,
                   std::ostream& err) {
  try {
    cli_detail::check_format(inv);
    if (inv.command == "sample") return cli_detail::cmd_sample(inv, out);
    if (inv.command == "tree") return cli_detail::cmd_tree(inv, out);
    if (inv.command == "encode-roundtrip")
      return cli_detail::cmd_encode_roundtrip(inv, out);
    if (inv.command == "switch-experiment")
      return cli_detail::cmd_switch_experiment(inv, out);
    if (inv.command == "growth") return cli_detail::cmd_growth(inv, out);
    if (inv.command == "build-oracle")
      return cli_detail::cmd_oracle(inv, out, false);
    if (inv.command == "verify-oracle")
      return cli_detail::cmd_oracle(inv, out, true);
    if (inv.command == "schema") return cli_detail::cmd_schema(inv, out);
    fail(error_kind::config, "unknown command: " + inv.command);
  } catch (const error& e) {
    njson j;
    j["error"] = njson{{"kind", to_string(e.kind())}, {"message", e.what()}};
    err << j.dump() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    njson j;
    j["error"] = njson{{"kind", "internal"}, {"message", e.what()}};
    err << j.dump() << "\n";
    return exit_code_for(error_kind::internal);
  }
}

} // namespace switchlab
