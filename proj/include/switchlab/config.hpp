#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "decision_tree.hpp"
#include "error.hpp"
#include "formula.hpp"
#include "growth.hpp"
#include "oracle.hpp"
#include "rational.hpp"
#include "restriction.hpp"
#include "serialize.hpp"
#include "var_space.hpp"

namespace switchlab {

// ---- primitives -------------------------------------------------------------

inline njson load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(error_kind::config, "cannot open config file: " + path);
  njson j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(error_kind::config,
         "config file " + path + " is not valid JSON: " + e.what());
  }
  return j;
}

inline rational parse_rational_field(const njson& j, const std::string& name) {
  const njson& v = j.at(name);
  try {
    if (v.is_string()) {
      rational q(v.get<std::string>());
      if (q.get_den() == 0)
        fail(error_kind::config, name + " has a zero denominator");
      q.canonicalize();
      return q;
    }
    if (v.is_number_unsigned())
      return rational(bigint(static_cast<unsigned long>(v.get<std::uint64_t>())));
    if (v.is_number_integer())
      return rational(static_cast<long>(v.get<std::int64_t>()));
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    fail(error_kind::config, name + " is not a rational");
  }
  fail(error_kind::config, name + " must be a \"p/q\" string or an integer");
}

inline std::uint64_t require_uint(const njson& j, const std::string& name) {
  if (!j.contains(name) || !j[name].is_number_unsigned())
    fail(error_kind::config, name + " must be a nonnegative integer");
  return j[name].get<std::uint64_t>();
}

inline std::uint64_t uint_or(const njson& j, const std::string& name,
                             std::uint64_t dflt) {
  if (!j.contains(name)) return dflt;
  if (!j[name].is_number_unsigned())
    fail(error_kind::config, name + " must be a nonnegative integer");
  return j[name].get<std::uint64_t>();
}

inline std::map<unsigned, std::uint64_t> parse_len_map(const njson& j,
                                                       const std::string& name) {
  std::map<unsigned, std::uint64_t> out;
  if (!j.contains(name)) return out;
  if (!j[name].is_object())
    fail(error_kind::config, name + " must map word lengths to counts");
  for (const auto& [k, v] : j[name].items()) {
    unsigned len = 0;
    try {
      std::size_t used = 0;
      len = static_cast<unsigned>(std::stoul(k, &used));
      if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      fail(error_kind::config, name + " key is not a word length: " + k);
    }
    if (!v.is_number_unsigned())
      fail(error_kind::config, name + " values must be nonnegative integers");
    out[len] = v.get<std::uint64_t>();
  }
  return out;
}

// ---- space ------------------------------------------------------------------

inline var_space parse_space(const njson& j) {
  if (!j.is_object() || !j.contains("scaleRange") || !j["scaleRange"].is_array())
    fail(error_kind::config, "space needs a scaleRange array of word lengths");
  std::vector<unsigned> lens;
  for (const njson& e : j["scaleRange"]) {
    if (!e.is_number_unsigned())
      fail(error_kind::config, "scaleRange entries must be positive integers");
    lens.push_back(static_cast<unsigned>(e.get<std::uint64_t>()));
  }
  unsigned e1 = static_cast<unsigned>(uint_or(j, "e1", 1));
  unsigned e2 = static_cast<unsigned>(uint_or(j, "e2", 1));
  unsigned arity = static_cast<unsigned>(uint_or(j, "tupleArity", 3));
  return var_space(lens, e1, e2, arity, parse_len_map(j, "lastRangeOverride"));
}

inline dist_params parse_dist(const njson& j) {
  dist_params d;
  if (!j.contains("dist")) return d;
  const njson& e = j["dist"];
  if (!e.is_object()) fail(error_kind::config, "dist must be an object");
  if (e.contains("starProbVar"))
    d.var_star = parse_rational_field(e, "starProbVar");
  if (e.contains("starProbBlock"))
    d.block_star = parse_rational_field(e, "starProbBlock");
  return d;
}

inline canonical_params parse_canonical(const njson& j, const std::string& name,
                                        canonical_params dflt) {
  if (!j.contains(name)) return dflt;
  const njson& e = j[name];
  canonical_params p = dflt;
  p.small_block_threshold = uint_or(e, "smallBlockThreshold",
                                    dflt.small_block_threshold);
  p.height_threshold = uint_or(e, "heightThreshold", dflt.height_threshold);
  validate_params(p);
  return p;
}

// ---- experiment config --------------------------------------------------------

enum class run_mode : unsigned char { exact, montecarlo, both };

struct experiment_config {
  njson raw;
  var_space space;
  std::optional<njson> dnf_json;      // explicit formula
  std::uint64_t random_count = 0;     // or a seeded one
  std::uint64_t random_width = 0;
  canonical_params params{2, 2};
  run_mode mode = run_mode::exact;
  std::uint64_t trials = 0;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  std::uint64_t budget = 1u << 20;
  dist_params dist;
  rational delta;
  rational epsilon;
  std::uint64_t log2_nominal_n = 64;
  bool delta_small = false; // 12*delta < epsilon, recorded, never enforced
  polarity pol = polarity::normal;
  std::string stage = "rho";
};

inline experiment_config parse_experiment_config(const njson& j) {
  if (!j.is_object()) fail(error_kind::config, "config must be a JSON object");
  experiment_config c;
  c.raw = j;
  c.space = parse_space(j.value("space", njson::object()));
  if (j.contains("dnf") && j.contains("dnfRandom"))
    fail(error_kind::config, "give either dnf or dnfRandom, not both");
  if (j.contains("dnf")) c.dnf_json = j["dnf"];
  if (j.contains("dnfRandom")) {
    c.random_count = require_uint(j["dnfRandom"], "count");
    c.random_width = require_uint(j["dnfRandom"], "width");
    if (c.random_count < 1 || c.random_width < 1)
      fail(error_kind::config, "dnfRandom needs positive count and width");
  }
  c.params = parse_canonical(j, "params", c.params);
  std::string mode = j.value("mode", std::string("exact"));
  if (mode == "exact")
    c.mode = run_mode::exact;
  else if (mode == "montecarlo")
    c.mode = run_mode::montecarlo;
  else if (mode == "both")
    c.mode = run_mode::both;
  else
    fail(error_kind::config, "mode must be exact, montecarlo or both");
  if (j.contains("trials") && !j["trials"].is_number_unsigned())
    fail(error_kind::config, "trials must be a nonnegative integer");
  c.trials = uint_or(j, "trials", 0);
  if (c.mode != run_mode::exact && c.trials == 0)
    fail(error_kind::config, "montecarlo mode needs a positive trial count");
  c.master_seed = uint_or(j, "masterSeed", 0);
  c.threads = static_cast<unsigned>(uint_or(j, "threads", 1));
  c.budget = uint_or(j, "budget", 1u << 20);
  c.dist = parse_dist(j);
  c.delta = j.contains("delta") ? parse_rational_field(j, "delta")
                                : rational(1) / rational(110);
  c.epsilon = j.contains("epsilon") ? parse_rational_field(j, "epsilon")
                                    : rational(1) / rational(9);
  if (c.delta <= 0 || c.epsilon <= 0)
    fail(error_kind::config, "delta and epsilon must be positive");
  c.delta_small = c.delta * 12 < c.epsilon;
  c.log2_nominal_n = uint_or(j, "log2NominalN", 64);
  if (c.log2_nominal_n < 1)
    fail(error_kind::config, "log2NominalN must be at least 1");
  std::string pol = j.value("polarity", std::string("normal"));
  if (pol == "flipped")
    c.pol = polarity::flipped;
  else if (pol != "normal")
    fail(error_kind::config, "polarity must be normal or flipped");
  c.stage = j.value("stage", std::string("rho"));
  if (c.stage != "rho" && c.stage != "g" && c.stage != "h")
    fail(error_kind::config, "stage must be rho, g or h");
  return c;
}

// Explicit formula if given, else a seeded one: per term, distinct variables
// with independent signs, deterministic in the seed.
inline dnf resolve_dnf(const experiment_config& c) {
  if (c.dnf_json) return parse_dnf(c.space, *c.dnf_json);
  if (c.random_count == 0)
    fail(error_kind::config, "config carries neither dnf nor dnfRandom");
  if (c.space.var_count() < c.random_width)
    fail(error_kind::config, "space too small for the requested term width");
  counter_rng rng(c.master_seed);
  std::vector<conjunction> terms;
  std::uint64_t idx = 0;
  for (std::uint64_t t = 0; t < c.random_count; ++t) {
    conjunction term;
    std::vector<std::uint64_t> used;
    while (term.size() < c.random_width) {
      std::uint64_t v =
          rng.bounded(rng_stream::family, t, idx++, c.space.var_count());
      bool fresh = true;
      for (std::uint64_t u : used) fresh = fresh && u != v;
      if (!fresh) continue;
      used.push_back(v);
      bool sign = rng.draw(rng_stream::family, t, idx++) & 1;
      term.push_back({c.space.var_at(v), sign});
    }
    terms.push_back(std::move(term));
  }
  dnf f = make_dnf(std::move(terms));
  validate_dnf(c.space, f);
  return f;
}

// ---- oracle config -------------------------------------------------------------

struct oracle_config {
  njson raw;
  var_space space;
  oracle_params params;
  std::optional<njson> family_json;  // explicit disjunct lists
  family_gen_params family_gen;
  bool family_seeded = true;
  std::uint64_t master_seed = 0;
};

inline oracle_config parse_oracle_config(const njson& j) {
  if (!j.is_object()) fail(error_kind::config, "config must be a JSON object");
  oracle_config c;
  c.raw = j;
  c.space = parse_space(j.value("space", njson::object()));
  c.params.b_min_scale = uint_or(j, "bMin", 2);
  c.params.a_min_scale = uint_or(j, "aMin", c.params.b_min_scale);
  c.params.quota1 = parse_len_map(j, "quota1");
  c.params.quota2 = parse_len_map(j, "quota2");
  c.params.round1 = parse_canonical(j, "round1", {2, 4});
  c.params.round2 = parse_canonical(j, "round2", {2, 6});
  c.params.max_tries = uint_or(j, "maxTries", 1000);
  c.master_seed = uint_or(j, "masterSeed", 0);
  if (j.contains("family")) {
    const njson& fj = j["family"];
    if (!fj.is_object()) fail(error_kind::config, "family must be an object");
    if (fj.contains("explicit")) {
      c.family_json = fj["explicit"];
      c.family_seeded = false;
    } else {
      c.family_gen.disjuncts_per_word = uint_or(fj, "disjunctsPerWord", 2);
      c.family_gen.clauses_per_disjunct = uint_or(fj, "clausesPerDisjunct", 2);
      c.family_gen.width = uint_or(fj, "width", 2);
    }
  }
  validate_oracle_params(c.space, c.params);
  return c;
}

inline formula_family resolve_family(const oracle_config& c) {
  if (!c.family_seeded) {
    formula_family fam;
    if (!c.family_json->is_array())
      fail(error_kind::config, "explicit family must be an array per word");
    for (const njson& word : *c.family_json) {
      std::vector<dnf> ds;
      for (const njson& d : word) ds.push_back(parse_dnf(c.space, d));
      fam.per_word.push_back(std::move(ds));
    }
    validate_family(c.space, fam);
    return fam;
  }
  counter_rng rng(c.master_seed);
  return generate_family(c.space, c.family_gen, rng);
}

// ---- growth config --------------------------------------------------------------

struct growth_config {
  unsigned k = 2;
  std::uint64_t lo = 3, hi = 20;
  std::uint64_t l = 1, m = 3;
  std::uint64_t budget_bits = default_growth_budget_bits;
};

inline growth_config parse_growth_config(const njson& j) {
  growth_config c;
  c.k = static_cast<unsigned>(uint_or(j, "k", 2));
  c.lo = uint_or(j, "lo", 3);
  c.hi = uint_or(j, "hi", 20);
  c.l = uint_or(j, "l", 1);
  c.m = uint_or(j, "m", 3);
  c.budget_bits = uint_or(j, "budgetBits", default_growth_budget_bits);
  if (c.k < 1) fail(error_kind::config, "k must be >= 1");
  if (c.lo > c.hi) fail(error_kind::config, "empty growth range");
  return c;
}

// ---- hashing and schema -----------------------------------------------------------

// FNV-1a over the canonical dump; object keys are already sorted, so two
// files with the same content hash alike regardless of key order
inline std::string config_hash(const njson& j) {
  std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

inline njson config_schema() {
  njson uint_min0 = {{"type", "integer"}, {"minimum", 0}};
  njson uint_min1 = {{"type", "integer"}, {"minimum", 1}};
  njson rational_s = {{"type", "rational"}};
  njson space = {
      {"type", "object"},
      {"required", njson::array({"scaleRange"})},
      {"properties",
       {{"scaleRange", {{"type", "array"}, {"items", uint_min1}}},
        {"e1", uint_min1},
        {"e2", uint_min1},
        {"tupleArity", {{"type", "integer"}, {"minimum", 2}}},
        {"lastRangeOverride", {{"type", "object"}}}}}};
  njson params = {{"type", "object"},
                  {"properties",
                   {{"smallBlockThreshold", {{"type", "integer"}, {"minimum", 2}}},
                    {"heightThreshold", uint_min0}}}};
  njson schema;
  schema["experiment"] = {
      {"type", "object"},
      {"required", njson::array({"space"})},
      {"properties",
       {{"space", space},
        {"dnf", {{"type", "object"}}},
        {"dnfRandom",
         {{"type", "object"},
          {"required", njson::array({"count", "width"})},
          {"properties", {{"count", uint_min1}, {"width", uint_min1}}}}},
        {"params", params},
        {"mode",
         {{"type", "string"},
          {"enum", njson::array({"exact", "montecarlo", "both"})}}},
        {"trials", uint_min0},
        {"masterSeed", uint_min0},
        {"threads", uint_min1},
        {"budget", uint_min1},
        {"dist", {{"type", "object"}}},
        {"delta", rational_s},
        {"epsilon", rational_s},
        {"log2NominalN", uint_min1},
        {"polarity",
         {{"type", "string"}, {"enum", njson::array({"normal", "flipped"})}}},
        {"stage",
         {{"type", "string"}, {"enum", njson::array({"rho", "g", "h"})}}}}}};
  schema["oracle"] = {
      {"type", "object"},
      {"required", njson::array({"space", "quota1", "quota2"})},
      {"properties",
       {{"space", space},
        {"bMin", uint_min1},
        {"aMin", uint_min1},
        {"quota1", {{"type", "object"}}},
        {"quota2", {{"type", "object"}}},
        {"round1", params},
        {"round2", params},
        {"maxTries", uint_min1},
        {"masterSeed", uint_min0},
        {"family", {{"type", "object"}}}}}};
  schema["growth"] = {
      {"type", "object"},
      {"properties",
       {{"k", uint_min1},
        {"lo", uint_min0},
        {"hi", uint_min0},
        {"l", uint_min0},
        {"m", uint_min0},
        {"budgetBits", uint_min1}}}};
  return schema;
}

// Just enough of the schema language for the shapes above: type, required,
// properties, items, minimum, enum. "rational" accepts an integer or a
// "p/q" string.
inline void validate_against_schema(const njson& schema, const njson& value,
                                    const std::string& where) {
  std::string type = schema.value("type", std::string());
  if (type == "object") {
    if (!value.is_object())
      fail(error_kind::config, where + " must be an object");
    for (const njson& req : schema.value("required", njson::array()))
      if (!value.contains(req.get<std::string>()))
        fail(error_kind::config,
             where + " misses required field " + req.get<std::string>());
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key))
          validate_against_schema(sub, value[key], where + "." + key);
  } else if (type == "array") {
    if (!value.is_array()) fail(error_kind::config, where + " must be an array");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < value.size(); ++i)
        validate_against_schema(schema["items"], value[i],
                                where + "[" + std::to_string(i) + "]");
  } else if (type == "integer") {
    if (!value.is_number_integer())
      fail(error_kind::config, where + " must be an integer");
    if (schema.contains("minimum") &&
        value.get<std::int64_t>() < schema["minimum"].get<std::int64_t>())
      fail(error_kind::config,
           where + " must be at least " + schema["minimum"].dump());
  } else if (type == "string") {
    if (!value.is_string()) fail(error_kind::config, where + " must be a string");
    if (schema.contains("enum")) {
      bool ok = false;
      for (const njson& e : schema["enum"]) ok = ok || e == value;
      if (!ok)
        fail(error_kind::config,
             where + " must be one of " + schema["enum"].dump());
    }
  } else if (type == "boolean") {
    if (!value.is_boolean()) fail(error_kind::config, where + " must be a boolean");
  } else if (type == "rational") {
    if (!(value.is_string() || value.is_number_integer()))
      fail(error_kind::config, where + " must be an integer or a p/q string");
  }
}

} // namespace switchlab
