#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <switchlab/cli.hpp>
#include <switchlab/config.hpp>
#include <switchlab/encoding.hpp>
#include <switchlab/experiments.hpp>
#include <switchlab/growth.hpp>
#include <switchlab/oracle.hpp>
#include <switchlab/serialize.hpp>

namespace testutil {

using namespace switchlab;

inline std::string source_path(const std::string& rel) {
  return std::string(SWITCHLAB_SOURCE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(error_kind::data, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// the tiny space every exhaustive check runs on: one length-1 word,
// three coordinates, 4 blocks of 2 variables, 7^4 = 2401 outcomes
inline const var_space& tiny_space() {
  static var_space sp({1}, 1, 1, 3, {});
  return sp;
}

inline std::uint64_t V(const var_space& sp, std::uint64_t y1, std::uint64_t y2,
                       std::uint64_t y3) {
  return sp.index_of(var_id{base_word{1, 0}, {y1, y2, y3}});
}

// width-2 fixture formula, the same one configs/switch_tiny.json spells out
inline dnf tiny_dnf() {
  const var_space& sp = tiny_space();
  auto lit = [&](std::uint64_t y1, std::uint64_t y2, std::uint64_t y3,
                 bool pos) {
    return literal{var_id{base_word{1, 0}, {y1, y2, y3}}, pos};
  };
  std::vector<conjunction> terms = {
      {lit(0, 0, 0, true), lit(0, 1, 1, false)},
      {lit(1, 0, 0, false), lit(1, 1, 0, true)},
      {lit(0, 0, 1, true), lit(1, 1, 1, true)},
      {lit(0, 1, 0, false), lit(1, 0, 1, false)},
  };
  dnf f = make_dnf(std::move(terms), formula_kind::dnf, 2);
  validate_dnf(sp, f);
  return f;
}

inline canonical_params tiny_params() { return canonical_params{2, 2}; }

// oracle fixture mirrors configs/oracle_tiny.json
inline oracle_params tiny_oracle_params() {
  oracle_params p;
  p.b_min_scale = 2;
  p.a_min_scale = 2;
  p.quota1 = {{1, 2}};
  p.quota2 = {{1, 2}};
  p.round1 = canonical_params{2, 4};
  p.round2 = canonical_params{2, 6};
  p.max_tries = 1000;
  return p;
}

inline family_gen_params tiny_family_params() {
  return family_gen_params{3, 2, 2};
}

// runs the cli entry point in-process, capturing both streams
struct cli_result {
  int code = 0;
  std::string out;
  std::string err;
};

inline cli_result run(const cli_invocation& inv) {
  std::ostringstream out, err;
  cli_result r;
  r.code = run_cli(inv, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

} // namespace testutil
