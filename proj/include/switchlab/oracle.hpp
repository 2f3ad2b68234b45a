#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "decision_tree.hpp"
#include "error.hpp"
#include "formula.hpp"
#include "restriction.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "var_space.hpp"

namespace switchlab {

// ---- formula family ---------------------------------------------------------

// One CNF list per base word; the word's formula is the OR of its disjuncts.
// Literals may live anywhere in the space, not only in the owning word.
struct formula_family {
  std::vector<std::vector<dnf>> per_word;
};

inline void validate_family(const var_space& sp, const formula_family& fam) {
  if (fam.per_word.size() != sp.word_count())
    fail(error_kind::config, "family must carry one disjunct list per word");
  for (const auto& ds : fam.per_word)
    for (const dnf& d : ds) {
      if (d.kind != formula_kind::cnf)
        fail(error_kind::config, "family disjuncts must be CNFs");
      validate_dnf(sp, d);
    }
}

struct family_gen_params {
  std::uint64_t disjuncts_per_word = 2;
  std::uint64_t clauses_per_disjunct = 2;
  std::uint64_t width = 2;
};

// Clause variables are drawn distinct, so no clause can carry both signs of
// one variable. Fully deterministic in (seed, word, draw counter).
inline formula_family generate_family(const var_space& sp,
                                      const family_gen_params& gen,
                                      const counter_rng& rng) {
  if (gen.width < 1) fail(error_kind::config, "clause width must be >= 1");
  if (sp.var_count() < gen.width)
    fail(error_kind::config, "space too small for the requested clause width");
  formula_family fam;
  fam.per_word.resize(sp.word_count());
  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    std::uint64_t idx = 0;
    for (std::uint64_t d = 0; d < gen.disjuncts_per_word; ++d) {
      std::vector<conjunction> clauses;
      for (std::uint64_t c = 0; c < gen.clauses_per_disjunct; ++c) {
        conjunction cl;
        std::vector<std::uint64_t> used;
        while (cl.size() < gen.width) {
          std::uint64_t v =
              rng.bounded(rng_stream::family, wi, idx++, sp.var_count());
          bool fresh = true;
          for (std::uint64_t u : used) fresh = fresh && u != v;
          if (!fresh) continue;
          used.push_back(v);
          bool sign = rng.draw(rng_stream::family, wi, idx++) & 1;
          cl.push_back({sp.var_at(v), sign});
        }
        clauses.push_back(std::move(cl));
      }
      fam.per_word[wi].push_back(make_dnf(std::move(clauses), formula_kind::cnf));
    }
  }
  validate_family(sp, fam);
  return fam;
}

// ---- pipeline parameters ----------------------------------------------------

struct oracle_params {
  std::uint64_t b_min_scale = 2; // conditions apply to blocks at this scale up
  std::uint64_t a_min_scale = 2; // equivalence is claimed from this scale up
  std::map<unsigned, std::uint64_t> quota1; // surviving star blocks per group
  std::map<unsigned, std::uint64_t> quota2; // surviving star blocks per word
  canonical_params round1{2, 4}; // theta, height cap t
  canonical_params round2{2, 6}; // theta, height cap T
  std::uint64_t max_tries = 1000;
};

inline void validate_oracle_params(const var_space& sp,
                                   const oracle_params& p) {
  if (sp.tuple_arity() != 3)
    fail(error_kind::config,
         "the oracle pipeline needs three-coordinate variables");
  if (p.a_min_scale < p.b_min_scale)
    fail(error_kind::config, "aMin must be at least bMin");
  if (p.max_tries < 1) fail(error_kind::config, "maxTries must be >= 1");
  validate_params(p.round1);
  validate_params(p.round2);
  bool any = false;
  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    if (sp.scale_of_word(wi) < p.b_min_scale) continue;
    any = true;
    unsigned len = sp.word_at(wi).len;
    auto q1 = p.quota1.find(len);
    if (q1 == p.quota1.end() || q1->second < 1)
      fail(error_kind::config,
           "quota1 must give a positive count for word length " +
               std::to_string(len));
    if (q1->second > sp.y_range_of_word(wi))
      fail(error_kind::config, "quota1 exceeds the blocks per group");
    auto q2 = p.quota2.find(len);
    if (q2 == p.quota2.end() || q2->second < 1)
      fail(error_kind::config,
           "quota2 must give a positive count for word length " +
               std::to_string(len));
    if (q2->second > sp.y_range_of_word(wi))
      fail(error_kind::config, "quota2 exceeds the collapsed blocks per word");
  }
  if (!any)
    fail(error_kind::config, "no word reaches bMin; nothing to build");
}

// ---- round one --------------------------------------------------------------

// Fixes every remaining star below the scale threshold to the first-stage
// constant. The result is a working assignment, not a sampled event: block
// labels keep what the draw said, so event validation does not apply to it.
inline restriction fill_free_below(const restriction& r,
                                   std::uint64_t min_scale) {
  const var_space& sp = r.space();
  restriction out = r;
  out.set_stage("fill");
  const int fc = first_stage_constant(r.pol());
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (sp.scale_of_var(v) < min_scale && out.state(v) != var_state::zero &&
        out.state(v) != var_state::one)
      out.set_var(v, fc);
  return out;
}

namespace oracle_detail {

inline bool no_all_ones_blocks(const restriction& r, std::uint64_t min_scale) {
  const var_space& sp = r.space();
  for (std::uint64_t b = 0; b < sp.block_count(); ++b)
    if (sp.scale_of_block(b) >= min_scale &&
        r.bstate(b) == block_state::all_ones)
      return false;
  return true;
}

inline bool groups_meet_quota(const restriction& r,
                              const std::map<unsigned, std::uint64_t>& quota,
                              std::uint64_t min_scale) {
  const var_space& sp = r.space();
  for (std::uint64_t g = 0; g < sp.group_count(); ++g) {
    std::size_t wi = sp.word_of_group(g);
    if (sp.scale_of_word(wi) < min_scale) continue;
    auto it = quota.find(sp.word_at(wi).len);
    if (it == quota.end()) continue;
    std::uint64_t have = 0;
    std::uint64_t first = sp.group_first_block(g);
    for (std::uint64_t b = first; b < first + sp.group_size(g); ++b)
      if (r.bstate(b) == block_state::star_block) ++have;
    if (have < it->second) return false;
  }
  return true;
}

// paths of the dual tree that land on leaf 0, i.e. the branches on which the
// CNF disjunct itself is true
inline void collect_true_paths(const var_space& sp, const decision_tree& t,
                               std::size_t node, conjunction& path,
                               std::vector<conjunction>& out) {
  const decision_tree::node& n = t.at(node);
  if (n.is_leaf) {
    if (n.value == 0) out.push_back(path);
    return;
  }
  path.push_back({sp.var_at(n.var), false});
  collect_true_paths(sp, t, n.lo, path, out);
  path.back().positive = true;
  collect_true_paths(sp, t, n.hi, path, out);
  path.pop_back();
}

} // namespace oracle_detail

struct round_one_result {
  restriction rho;    // the accepted draw
  restriction h_rho;  // trimmed two-stage extension of the draw
  restriction filled; // h_rho with sub-threshold stars fixed
  std::vector<dnf> per_word; // flattened disjunction per word, empty below aMin
  std::uint64_t tries = 0;   // accepted trial index
};

inline round_one_result sample_good_rho(const var_space& sp,
                                        const formula_family& fam,
                                        const oracle_params& params,
                                        const counter_rng& rng) {
  validate_family(sp, fam);
  validate_oracle_params(sp, params);
  std::uint64_t fail_ones = 0, fail_quota = 0, fail_height = 0;
  for (std::uint64_t trial = 0; trial < params.max_tries; ++trial) {
    restriction rho = sample_rho(sp, {}, rng, trial, polarity::normal);
    if (!oracle_detail::no_all_ones_blocks(rho, params.b_min_scale)) {
      ++fail_ones;
      continue;
    }
    if (!oracle_detail::groups_meet_quota(rho, params.quota1,
                                          params.b_min_scale)) {
      ++fail_quota;
      continue;
    }
    std::vector<dnf> per_word(sp.word_count());
    bool ok = true;
    for (std::size_t wi = 0; wi < sp.word_count() && ok; ++wi) {
      if (sp.scale_of_word(wi) < params.a_min_scale) continue;
      std::vector<conjunction> branches;
      for (const dnf& disjunct : fam.per_word[wi]) {
        decision_tree t =
            canonical_tree(sp, dual(disjunct), rho, params.round1);
        if (tree_height(t) > params.round1.height_threshold) {
          ok = false;
          break;
        }
        conjunction path;
        oracle_detail::collect_true_paths(sp, t, t.root(), path, branches);
      }
      if (ok) per_word[wi] = make_dnf(std::move(branches));
    }
    if (!ok) {
      ++fail_height;
      continue;
    }
    round_one_result out;
    out.rho = std::move(rho);
    out.h_rho = extend_h(extend_g(out.rho), params.quota1);
    out.filled = fill_free_below(out.h_rho, params.b_min_scale);
    out.per_word = std::move(per_word);
    out.tries = trial;
    return out;
  }
  fail(error_kind::tries,
       "no acceptable first-round draw in " + std::to_string(params.max_tries) +
           " tries (all-ones " + std::to_string(fail_ones) + ", quota " +
           std::to_string(fail_quota) + ", height " +
           std::to_string(fail_height) + ")");
}

// ---- collapse map -----------------------------------------------------------

// After the first trim every group at scale >= bMin holds exactly quota1
// surviving star blocks, each with a single star left. Those stars become the
// variables of a space with one coordinate less, block j of collapsed group
// y1 standing for the j-th survivor of original group (a, y1).
struct collapse_map {
  // shared so that restrictions over the collapsed space stay valid when the
  // map moves around inside larger results
  std::shared_ptr<const var_space> collapsed_sp;
  std::vector<std::uint64_t> to_original;   // collapsed var -> original var
  std::vector<std::int64_t> from_original;  // original var -> collapsed or -1
  std::vector<std::size_t> word_map;        // collapsed word -> original word

  const var_space& collapsed() const {
    if (!collapsed_sp) fail(error_kind::internal, "collapse map without space");
    return *collapsed_sp;
  }
};

inline collapse_map build_collapse_map(const var_space& sp,
                                       const restriction& h_rho,
                                       const oracle_params& params) {
  collapse_map cm;
  std::vector<unsigned> lens;
  std::map<unsigned, std::uint64_t> override;
  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    if (sp.scale_of_word(wi) < params.b_min_scale) continue;
    unsigned len = sp.word_at(wi).len;
    lens.push_back(len);
    override[len] = params.quota1.at(len);
    cm.word_map.push_back(wi);
  }
  cm.collapsed_sp = std::make_shared<const var_space>(
      lens, sp.e1(), sp.e2(), sp.tuple_arity() - 1, override);
  cm.from_original.assign(sp.var_count(), -1);
  for (std::size_t wi : cm.word_map) {
    for (std::uint64_t g = 0; g < sp.group_count(); ++g) {
      if (sp.word_of_group(g) != wi) continue;
      std::uint64_t seen = 0;
      std::uint64_t first = sp.group_first_block(g);
      for (std::uint64_t b = first; b < first + sp.group_size(g); ++b) {
        if (h_rho.bstate(b) != block_state::star_block) continue;
        ++seen;
        std::uint64_t rep = 0, stars = 0;
        std::uint64_t v0 = sp.block_first_var(b);
        for (std::uint64_t v = v0; v < v0 + sp.block_size(b); ++v)
          if (h_rho.state(v) == var_state::star) {
            if (!stars) rep = v;
            ++stars;
          }
        if (stars != 1)
          fail(error_kind::internal,
               "surviving block does not hold exactly one star");
        cm.from_original[rep] =
            static_cast<std::int64_t>(cm.to_original.size());
        cm.to_original.push_back(rep);
      }
      if (seen != params.quota1.at(sp.word_at(wi).len))
        fail(error_kind::internal, "survivor count differs from the quota");
    }
  }
  if (cm.to_original.size() != cm.collapsed().var_count())
    fail(error_kind::internal, "collapse map does not fill the new space");
  return cm;
}

// Rewrites a formula over the original space into the collapsed space, using
// the filled assignment for everything the first round determined.
inline dnf translate_to_collapsed(const var_space& sp, const collapse_map& cm,
                                  const restriction& filled, const dnf& f) {
  if (f.kind != formula_kind::dnf)
    fail(error_kind::internal, "translation expects a dnf");
  std::vector<conjunction> terms;
  for (const conjunction& c : f.terms) {
    conjunction t;
    bool killed = false;
    for (const literal& l : c) {
      std::uint64_t v = sp.index_of(l.var);
      if (auto bit = filled.value_of(v)) {
        if ((*bit == 1) != l.positive) {
          killed = true;
          break;
        }
        continue;
      }
      std::int64_t cv = cm.from_original[v];
      if (cv < 0)
        fail(error_kind::internal,
             "free variable outside the designated candidates");
      t.push_back({cm.collapsed().var_at(static_cast<std::uint64_t>(cv)),
                   l.positive});
    }
    if (!killed) terms.push_back(std::move(t));
  }
  dnf out = make_dnf(std::move(terms));
  validate_dnf(cm.collapsed(), out);
  return out;
}

// ---- round two --------------------------------------------------------------

struct round_two_result {
  restriction rho_hat; // flipped-polarity draw over the collapsed space
  restriction h_hat;   // trimmed extension of the draw
  std::vector<dnf> per_word_collapsed;  // translated, indexed by original word
  std::vector<decision_tree> trees;     // indexed by original word
  std::uint64_t tries = 0;
};

inline round_two_result second_round(const var_space& sp,
                                     const collapse_map& cm,
                                     const round_one_result& r1,
                                     const oracle_params& params,
                                     const counter_rng& rng) {
  std::vector<dnf> translated(sp.word_count());
  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    if (sp.scale_of_word(wi) < params.a_min_scale) continue;
    translated[wi] =
        translate_to_collapsed(sp, cm, r1.filled, r1.per_word[wi]);
  }

  std::uint64_t fail_zeros = 0, fail_quota = 0, fail_height = 0;
  for (std::uint64_t trial = 0; trial < params.max_tries; ++trial) {
    restriction rho_hat =
        sample_rho(cm.collapsed(), {}, rng, trial, polarity::flipped);
    // under flipped polarity the all_ones label means every variable fell to
    // 0 at the first stage; such a block would silence its clause for good
    if (!oracle_detail::no_all_ones_blocks(rho_hat, 0)) {
      ++fail_zeros;
      continue;
    }
    if (!oracle_detail::groups_meet_quota(rho_hat, params.quota2, 0)) {
      ++fail_quota;
      continue;
    }
    std::vector<decision_tree> trees(sp.word_count());
    bool ok = true;
    for (std::size_t wi = 0; wi < sp.word_count() && ok; ++wi) {
      if (sp.scale_of_word(wi) < params.a_min_scale) continue;
      trees[wi] =
          canonical_tree(cm.collapsed(), translated[wi], rho_hat, params.round2);
      ok = tree_height(trees[wi]) <= params.round2.height_threshold;
    }
    if (!ok) {
      ++fail_height;
      continue;
    }
    round_two_result out;
    out.rho_hat = std::move(rho_hat);
    out.h_hat = extend_h(extend_g(out.rho_hat), params.quota2);
    out.per_word_collapsed = std::move(translated);
    out.trees = std::move(trees);
    out.tries = trial;
    return out;
  }
  fail(error_kind::tries,
       "no acceptable second-round draw in " +
           std::to_string(params.max_tries) + " tries (all-zeros " +
           std::to_string(fail_zeros) + ", quota " + std::to_string(fail_quota) +
           ", height " + std::to_string(fail_height) + ")");
}

// The j-th designated variable of a word survives both trims: its block
// outlived the first round, its collapsed image outlived the second.
inline std::vector<std::vector<std::uint64_t>> designated_sets(
    const var_space& sp, const collapse_map& cm, const restriction& h_hat) {
  std::vector<std::vector<std::uint64_t>> out(sp.word_count());
  for (std::size_t ci = 0; ci < cm.word_map.size(); ++ci) {
    std::size_t wi = cm.word_map[ci];
    for (std::uint64_t cb = 0; cb < cm.collapsed().block_count(); ++cb) {
      if (cm.collapsed().word_of_block(cb) != ci) continue;
      if (h_hat.bstate(cb) != block_state::star_block) continue;
      std::uint64_t v0 = cm.collapsed().block_first_var(cb);
      std::uint64_t rep = 0, stars = 0;
      for (std::uint64_t cv = v0; cv < v0 + cm.collapsed().block_size(cb); ++cv)
        if (h_hat.state(cv) == var_state::star) {
          if (!stars) rep = cv;
          ++stars;
        }
      if (stars != 1)
        fail(error_kind::internal,
             "surviving collapsed block does not hold exactly one star");
      out[wi].push_back(cm.to_original[rep]);
    }
    for (std::size_t i = 1; i < out[wi].size(); ++i)
      if (out[wi][i - 1] >= out[wi][i])
        fail(error_kind::internal, "designated set out of order");
  }
  return out;
}

// ---- completion -------------------------------------------------------------

struct stage_entry {
  std::string stage;
  std::uint64_t var = 0;
  int value = 0;

  friend bool operator==(const stage_entry&, const stage_entry&) = default;
};

struct oracle_table {
  std::vector<std::int8_t> bits; // total 0/1 assignment in the end
  std::vector<std::vector<std::uint64_t>> designated; // per original word
  std::vector<int> word_value; // decision per walked word, -1 elsewhere
  std::vector<stage_entry> log;
};

// Answers undetermined queries with 1, then settles each word's designated
// set: all 1 when the word's tree accepted, one designated 0 otherwise. The
// loop never rewrites a bit once set.
inline oracle_table heller_complete(const var_space& sp,
                                    const collapse_map& cm,
                                    const round_one_result& r1,
                                    const round_two_result& r2,
                                    const oracle_params& params) {
  oracle_table t;
  t.bits.assign(sp.var_count(), -1);
  t.designated = designated_sets(sp, cm, r2.h_hat);
  t.word_value.assign(sp.word_count(), -1);

  auto put = [&](const char* stage, std::uint64_t v, int bit) {
    if (t.bits[v] != -1)
      fail(error_kind::internal, "completion rewrites an assigned bit");
    t.bits[v] = static_cast<std::int8_t>(bit);
    t.log.push_back({stage, v, bit});
  };
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (auto bit = r1.filled.value_of(v)) put("round1", v, *bit);
  for (std::uint64_t cv = 0; cv < cm.collapsed().var_count(); ++cv)
    if (auto bit = r2.h_hat.value_of(cv))
      put("round2", cm.to_original[cv], *bit);

  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    if (sp.scale_of_word(wi) < params.a_min_scale) continue;
    std::string word = to_string(sp.word_at(wi));
    const decision_tree& tr = r2.trees[wi];
    std::size_t cur = tr.root();
    while (!tr.at(cur).is_leaf) {
      std::uint64_t ov = cm.to_original[tr.at(cur).var];
      if (t.bits[ov] == -1) put(("walk:" + word).c_str(), ov, 1);
      cur = t.bits[ov] ? tr.at(cur).hi : tr.at(cur).lo;
    }
    int v_a = tr.at(cur).value;
    t.word_value[wi] = v_a;

    std::vector<std::uint64_t> unset;
    for (std::uint64_t dv : t.designated[wi])
      if (t.bits[dv] == -1) unset.push_back(dv);
    if (v_a == 1) {
      for (std::uint64_t dv : unset) put(("designate:" + word).c_str(), dv, 1);
    } else {
      if (unset.empty())
        fail(error_kind::budget,
             "designated set of word " + word +
                 " was exhausted before its turn");
      put(("designate:" + word).c_str(), unset[0], 0);
      for (std::size_t i = 1; i < unset.size(); ++i)
        put(("designate:" + word).c_str(), unset[i], 1);
    }
  }

  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (t.bits[v] == -1) put("fill", v, 1);
  return t;
}

// ---- equivalence ------------------------------------------------------------

struct equivalence_row {
  std::size_t word = 0;
  bool formula_value = false;
  bool game_value = false;
  bool equal = false;
};

struct equivalence_report {
  std::vector<equivalence_row> rows;
  bool all_equal = true;
};

// Both sides recomputed from the finished table alone: the formula side by
// direct evaluation, the game side by the for-all / exists / for-all scan
// over the word's coordinates.
inline equivalence_report verify_equivalence(const var_space& sp,
                                             const formula_family& fam,
                                             const oracle_table& t,
                                             std::uint64_t a_min_scale) {
  validate_family(sp, fam);
  if (sp.tuple_arity() != 3)
    fail(error_kind::config, "equivalence scan needs three coordinates");
  equivalence_report rep;
  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    if (sp.scale_of_word(wi) < a_min_scale) continue;
    equivalence_row row;
    row.word = wi;
    row.formula_value = false;
    for (const dnf& disjunct : fam.per_word[wi])
      if (eval_dnf(sp, disjunct, t.bits)) {
        row.formula_value = true;
        break;
      }
    row.game_value = true;
    for (std::uint64_t g = 0; g < sp.group_count() && row.game_value; ++g) {
      if (sp.word_of_group(g) != wi) continue;
      bool exists = false;
      std::uint64_t first = sp.group_first_block(g);
      for (std::uint64_t b = first; b < first + sp.group_size(g) && !exists;
           ++b) {
        bool all = true;
        std::uint64_t v0 = sp.block_first_var(b);
        for (std::uint64_t v = v0; v < v0 + sp.block_size(b); ++v)
          all = all && t.bits[v] == 1;
        exists = all;
      }
      row.game_value = exists;
    }
    row.equal = row.formula_value == row.game_value;
    rep.all_equal = rep.all_equal && row.equal;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- full pipeline ----------------------------------------------------------

struct oracle_run {
  round_one_result r1;
  collapse_map cm;
  round_two_result r2;
  oracle_table table;
  equivalence_report eq;
  std::uint64_t master_seed = 0;
};

inline oracle_run build_oracle(const var_space& sp, const formula_family& fam,
                               const oracle_params& params,
                               std::uint64_t master_seed) {
  oracle_run run;
  run.master_seed = master_seed;
  counter_rng rng1(master_seed);
  run.r1 = sample_good_rho(sp, fam, params, rng1);
  run.cm = build_collapse_map(sp, run.r1.h_rho, params);
  // a distinct derived seed keeps the second round's draws independent of
  // the first round's trial numbering
  counter_rng rng2(rng_detail::mix4(master_seed, 0x726f756e64ULL, 2, 0));
  run.r2 = second_round(sp, run.cm, run.r1, params, rng2);
  run.table = heller_complete(sp, run.cm, run.r1, run.r2, params);
  run.eq = verify_equivalence(sp, fam, run.table, params.a_min_scale);
  return run;
}

// ---- artifacts --------------------------------------------------------------

inline njson table_to_json(const var_space& sp, const oracle_run& run) {
  njson j;
  j["seed"] = run.master_seed;
  j["tries"] = njson{{"round1", run.r1.tries}, {"round2", run.r2.tries}};
  std::string bits(sp.var_count(), '0');
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (run.table.bits[v] == 1) bits[v] = '1';
  j["bits"] = bits;
  njson designated = njson::array();
  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    if (run.table.designated[wi].empty()) continue;
    njson e;
    e["word"] = to_string(sp.word_at(wi));
    njson vars = njson::array();
    for (std::uint64_t v : run.table.designated[wi])
      vars.push_back(var_to_json(sp.var_at(v)));
    e["vars"] = std::move(vars);
    designated.push_back(std::move(e));
  }
  j["designated"] = std::move(designated);
  njson values = njson::array();
  for (std::size_t wi = 0; wi < sp.word_count(); ++wi) {
    if (run.table.word_value[wi] < 0) continue;
    values.push_back(njson{{"word", to_string(sp.word_at(wi))},
                           {"value", run.table.word_value[wi]}});
  }
  j["wordValue"] = std::move(values);
  njson log = njson::array();
  for (const stage_entry& e : run.table.log)
    log.push_back(njson{{"stage", e.stage}, {"var", e.var}, {"value", e.value}});
  j["stageLog"] = std::move(log);
  njson eq = njson::array();
  for (const equivalence_row& r : run.eq.rows)
    eq.push_back(njson{{"word", to_string(sp.word_at(r.word))},
                       {"formula", r.formula_value},
                       {"game", r.game_value},
                       {"equal", r.equal}});
  j["equivalence"] = std::move(eq);
  j["allEqual"] = run.eq.all_equal;
  return j;
}

// flat bitmap, variable v at bit v, little-endian within each byte
inline std::vector<std::uint8_t> table_bitmap(const oracle_table& t) {
  std::vector<std::uint8_t> bytes((t.bits.size() + 7) / 8, 0);
  for (std::size_t v = 0; v < t.bits.size(); ++v)
    if (t.bits[v] == 1) bytes[v / 8] |= static_cast<std::uint8_t>(1u << (v % 8));
  return bytes;
}

inline njson bitmap_sidecar(const var_space& sp) {
  njson j;
  j["vars"] = sp.var_count();
  j["encoding"] = "bit v of the map is variable v, little-endian bytes";
  return j;
}

} // namespace switchlab
