#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "switchlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"switchlab: blocked restrictions, canonical trees and witness codes"};
  app.require_subcommand(1);

  switchlab::cli_invocation inv;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "JSON config file");
    sub->add_option("--seed", inv.seed,
                    "master seed; falls back to SWITCHLAB_SEED, then the config");
    sub->add_option("--out", inv.out_path, "output file (default stdout)");
    sub->add_option("--format", inv.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", inv.threads, "worker threads (0 keeps config)");
    sub->add_option("--budget", inv.budget,
                    "enumeration outcome cap or growth bit cap");
    return sub;
  };

  add_common(app.add_subcommand("sample", "draw a two-stage restriction"));
  add_common(app.add_subcommand("tree", "build the canonical decision tree"));
  add_common(app.add_subcommand("encode-roundtrip",
                                "decode every encoded failure back"));
  add_common(app.add_subcommand(
      "switch-experiment", "exact and sampled failure rates with bounds"));
  CLI::App* growth =
      add_common(app.add_subcommand("growth", "slow-growth checkpoint table"));
  growth->add_option("--k", inv.k, "function index");
  growth->add_option("--range", inv.range, "n range as lo..hi");
  growth->add_option("--l", inv.l, "iterations that must stay below 2^n");
  growth->add_option("--m", inv.m, "iterations that must reach 2^n");
  add_common(app.add_subcommand("build-oracle",
                                "run the two-round pipeline and completion"));
  add_common(app.add_subcommand("verify-oracle",
                                "rebuild deterministically and check equivalence"));
  add_common(app.add_subcommand("schema", "print the config schema"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  inv.command = app.get_subcommands().front()->get_name();
  return switchlab::run_cli(inv, std::cout, std::cerr);
}
