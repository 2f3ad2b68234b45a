#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "error.hpp"
#include "formula.hpp"
#include "restriction.hpp"
#include "var_space.hpp"

namespace switchlab {

struct canonical_params {
  std::uint64_t small_block_threshold = 2; // scale bound, blocks below it are "small"
  std::uint64_t height_threshold = 0;      // failure cutoff on phase-2 branch length
};

inline void validate_params(const canonical_params& p) {
  if (p.small_block_threshold < 2)
    fail(error_kind::config, "smallBlockThreshold must be at least 2");
}

// One phase-2 round of the canonical process: the live term, the blocks
// queried for it in ascending order, the queried representative and the
// answer per block, and the positive round-start stars of those blocks.
struct failure_round {
  std::size_t conj = 0;
  std::vector<std::uint64_t> blocks;
  std::vector<std::uint64_t> reps;
  std::vector<int> answers;
  std::vector<std::uint64_t> gamma;

  friend bool operator==(const failure_round&, const failure_round&) = default;
};

class decision_tree {
public:
  struct node {
    bool is_leaf = true;
    int value = 0;
    std::uint64_t var = 0;
    std::size_t lo = 0, hi = 0;
    std::vector<failure_round> trace; // leaves only: the rounds on this branch
  };

  std::size_t add_leaf(int value, std::vector<failure_round> trace) {
    nodes_.push_back(
        {true, value, 0, 0, 0, std::move(trace)});
    return nodes_.size() - 1;
  }
  std::size_t add_internal(std::uint64_t var, std::size_t lo, std::size_t hi) {
    nodes_.push_back({false, 0, var, lo, hi, {}});
    return nodes_.size() - 1;
  }

  const node& at(std::size_t i) const { return nodes_.at(i); }
  std::size_t root() const {
    if (nodes_.empty()) fail(error_kind::internal, "empty tree");
    return root_;
  }
  void set_root(std::size_t r) { root_ = r; }
  std::size_t node_count() const { return nodes_.size(); }

  // set only by the canonical builder; foreign trees have no phase marker
  std::optional<std::uint64_t> phase1_queries;

private:
  std::vector<node> nodes_;
  std::size_t root_ = 0;
};

inline int eval_tree(const var_space& sp, const decision_tree& t,
                     const std::vector<std::int8_t>& point) {
  std::size_t cur = t.root();
  for (;;) {
    const decision_tree::node& n = t.at(cur);
    if (n.is_leaf) return n.value;
    std::int8_t bit = point.at(n.var);
    if (bit != 0 && bit != 1) {
      var_id id = sp.var_at(n.var);
      std::string coords = to_string(id.b);
      for (std::uint64_t y : id.ys) coords += "," + std::to_string(y);
      fail(error_kind::data,
           "assignment misses queried variable (" + coords + ")");
    }
    cur = bit ? n.hi : n.lo;
  }
}

inline std::uint64_t tree_height(const decision_tree& t) {
  struct rec {
    const decision_tree& t;
    std::uint64_t run(std::size_t i) const {
      const decision_tree::node& n = t.at(i);
      if (n.is_leaf) return 0;
      return 1 + std::max(run(n.lo), run(n.hi));
    }
  };
  return rec{t}.run(t.root());
}

// true iff no variable repeats on any root-to-leaf path
inline bool tree_paths_query_once(const decision_tree& t) {
  struct rec {
    const decision_tree& t;
    std::vector<std::uint64_t> seen;
    bool run(std::size_t i) {
      const decision_tree::node& n = t.at(i);
      if (n.is_leaf) return true;
      for (std::uint64_t v : seen)
        if (v == n.var) return false;
      seen.push_back(n.var);
      bool ok = run(n.lo) && run(n.hi);
      seen.pop_back();
      return ok;
    }
  };
  return rec{t, {}}.run(t.root());
}

namespace tree_detail {

inline std::uint64_t scale_of_block(const var_space& sp, std::uint64_t b) {
  return std::uint64_t(1) << sp.word_at(sp.word_of_block(b)).len;
}

// Shared precomputation for the canonical construction and the failure
// search: base values from the event, its stars grouped by block, the
// minimal star of each star block (the query target), and the stars living
// in blocks below the scale threshold (queried wholesale in phase 1).
struct engine {
  const var_space& sp;
  const dnf& f;
  const restriction& rho;
  std::uint64_t theta;
  int fc; // first-stage constant, also the value g forces

  std::vector<std::int8_t> val; // -1 where unvalued
  std::vector<std::uint64_t> small_stars;     // ascending
  std::vector<std::uint64_t> small_free;      // block representatives among them
  std::vector<std::uint64_t> rep_of_block;    // ~0 when the block has no star
  std::vector<std::vector<std::uint64_t>> stars_of_block;

  engine(const var_space& space, const dnf& formula, const restriction& r,
         const canonical_params& p)
      : sp(space), f(formula), rho(r), theta(p.small_block_threshold),
        fc(first_stage_constant(r.pol())) {
    validate_params(p);
    validate_dnf(sp, f);
    if (f.kind != formula_kind::dnf)
      fail(error_kind::data, "canonical trees are built for dnf form");
    validate_event(r);
    val.assign(sp.var_count(), -1);
    for (std::uint64_t v = 0; v < sp.var_count(); ++v)
      if (auto bit = r.value_of(v)) val[v] = static_cast<std::int8_t>(*bit);
    rep_of_block.assign(sp.block_count(), ~std::uint64_t(0));
    stars_of_block.assign(sp.block_count(), {});
    for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
      std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
      for (std::uint64_t v = first; v < first + size; ++v) {
        if (r.state(v) != var_state::star) continue;
        stars_of_block[b].push_back(v);
        if (rep_of_block[b] == ~std::uint64_t(0)) rep_of_block[b] = v;
      }
      if (!stars_of_block[b].empty() && scale_of_block(sp, b) < theta) {
        for (std::uint64_t v : stars_of_block[b]) small_stars.push_back(v);
        small_free.push_back(rep_of_block[b]);
      }
    }
    std::sort(small_stars.begin(), small_stars.end());
    std::sort(small_free.begin(), small_free.end());
  }

  std::optional<int> value(std::uint64_t v) const {
    return val[v] < 0 ? std::nullopt : std::optional<int>(val[v]);
  }

  // a phase-1 branch is consistent when every queried non-representative
  // star took the value g would have forced on it
  bool consistent_branch() const {
    for (std::uint64_t v : small_stars) {
      if (rep_of_block[sp.block_of_var(v)] == v) continue;
      if (val[v] != fc) return false;
    }
    return true;
  }

  // the round for the live term `c`: blocks of its residual stars ascending,
  // with each block's positive round-start stars (sorted within the block)
  struct round_plan {
    std::vector<std::uint64_t> blocks;
    std::vector<std::vector<std::uint64_t>> gamma_chunks;
  };

  round_plan plan_round(std::size_t c, const conj_view& view) const {
    round_plan plan;
    for (std::size_t pos : view.residual) {
      std::uint64_t b = sp.block_of_var(sp.index_of(f.terms[c][pos].var));
      if (std::find(plan.blocks.begin(), plan.blocks.end(), b) ==
          plan.blocks.end())
        plan.blocks.push_back(b);
    }
    std::sort(plan.blocks.begin(), plan.blocks.end());
    plan.gamma_chunks.resize(plan.blocks.size());
    for (std::size_t pos : view.residual) {
      const literal& l = f.terms[c][pos];
      if (!l.positive) continue;
      std::uint64_t v = sp.index_of(l.var);
      std::uint64_t b = sp.block_of_var(v);
      std::size_t j =
          std::lower_bound(plan.blocks.begin(), plan.blocks.end(), b) -
          plan.blocks.begin();
      auto& chunk = plan.gamma_chunks[j];
      if (std::find(chunk.begin(), chunk.end(), v) == chunk.end())
        chunk.push_back(v);
    }
    for (auto& chunk : plan.gamma_chunks)
      std::sort(chunk.begin(), chunk.end());
    return plan;
  }

  // rep := answer, every other star of the block := the g constant
  void fill_block(std::uint64_t b, int answer) {
    for (std::uint64_t v : stars_of_block[b]) {
      if (val[v] != -1)
        fail(error_kind::internal, "phase-2 block touched twice");
      val[v] = static_cast<std::int8_t>(v == rep_of_block[b] ? answer : fc);
    }
  }
  void unfill_block(std::uint64_t b) {
    for (std::uint64_t v : stars_of_block[b]) val[v] = -1;
  }
};

struct builder : engine {
  decision_tree tree;

  using engine::engine;

  std::size_t leaf(int value, const std::vector<failure_round>& trace) {
    return tree.add_leaf(value, trace);
  }

  std::size_t phase2(std::vector<failure_round>& trace,
                     std::int64_t prev_live) {
    auto live = first_live_conjunction(
        sp, f, [&](std::uint64_t v) { return value(v); });
    if (!live) return leaf(0, trace);
    // the term just filled may now be satisfied at its own index; a residual
    // term must sit strictly beyond it
    if (live->view.status == conj_status::satisfied)
      return leaf(1, trace);
    if (static_cast<std::int64_t>(live->index) <= prev_live)
      fail(error_kind::internal, "live term index failed to increase");

    round_plan plan = plan_round(live->index, live->view);
    failure_round rec;
    rec.conj = live->index;
    return block_step(plan, 0, rec, trace, live->index);
  }

  std::size_t block_step(const round_plan& plan, std::size_t j,
                         failure_round& rec,
                         std::vector<failure_round>& trace,
                         std::size_t conj) {
    if (j == plan.blocks.size()) {
      trace.push_back(rec);
      std::size_t sub = phase2(trace, static_cast<std::int64_t>(conj));
      trace.pop_back();
      return sub;
    }
    std::uint64_t b = plan.blocks[j];
    std::uint64_t rep = rep_of_block[b];
    rec.blocks.push_back(b);
    rec.reps.push_back(rep);
    for (std::uint64_t v : plan.gamma_chunks[j]) rec.gamma.push_back(v);
    std::size_t child[2];
    for (int a = 0; a < 2; ++a) {
      fill_block(b, a);
      rec.answers.push_back(a);
      child[a] = block_step(plan, j + 1, rec, trace, conj);
      rec.answers.pop_back();
      unfill_block(b);
    }
    rec.blocks.pop_back();
    rec.reps.pop_back();
    for (std::size_t n = plan.gamma_chunks[j].size(); n > 0; --n)
      rec.gamma.pop_back();
    return tree.add_internal(rep, child[0], child[1]);
  }

  std::size_t phase1(std::size_t i) {
    if (i == small_stars.size()) {
      std::vector<failure_round> trace;
      if (!consistent_branch()) return leaf(0, trace);
      return phase2(trace, -1);
    }
    std::uint64_t v = small_stars[i];
    std::size_t child[2];
    for (int a = 0; a < 2; ++a) {
      val[v] = static_cast<std::int8_t>(a);
      child[a] = phase1(i + 1);
    }
    val[v] = -1;
    return tree.add_internal(v, child[0], child[1]);
  }

  decision_tree run() {
    tree.set_root(phase1(0));
    tree.phase1_queries = small_stars.size();
    return std::move(tree);
  }
};

} // namespace tree_detail

// The canonical tree: phase 1 queries every small-block star in ascending
// order; branches that contradict the g extension end in leaf 0 after the
// full prefix. A consistent branch then runs rounds: take the first live
// term, query the minimal star of each block holding one of its residual
// stars (ascending), fill the block with the answer plus g constants, and
// stop at leaf 1 when the term comes true or leaf 0 when nothing stays live.
// Each leaf carries its rounds for the encoder.
inline decision_tree canonical_tree(const var_space& sp, const dnf& f,
                                    const restriction& rho,
                                    const canonical_params& params) {
  tree_detail::builder b(sp, f, rho, params);
  return b.run();
}

// (phase-1 query count, longest phase-2 branch); total height is their sum
inline std::pair<std::uint64_t, std::uint64_t> tree_height_profile(
    const decision_tree& t) {
  if (!t.phase1_queries)
    fail(error_kind::data, "tree carries no phase marker");
  std::uint64_t k = *t.phase1_queries;
  std::uint64_t h = tree_height(t);
  if (h < k) fail(error_kind::data, "phase marker exceeds tree height");
  return {k, h - k};
}

// Exhaustive check that the tree decides the formula under every completion
// of the g extension: free variables are the stars g leaves open.
inline bool verify_tree_decides(const var_space& sp, const dnf& f,
                                const restriction& rho,
                                const decision_tree& t,
                                std::uint64_t budget = 24) {
  restriction g = extend_g(rho);
  std::vector<std::uint64_t> free_vars;
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (g.state(v) == var_state::star) free_vars.push_back(v);
  if (free_vars.size() > budget)
    fail(error_kind::budget,
         "completion check over " + std::to_string(free_vars.size()) +
             " free variables exceeds budget " + std::to_string(budget));
  std::vector<std::int8_t> point(sp.var_count(), -1);
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (auto bit = g.value_of(v)) point[v] = static_cast<std::int8_t>(*bit);
  for (std::uint64_t mask = 0;
       mask < (std::uint64_t(1) << free_vars.size()); ++mask) {
    for (std::size_t j = 0; j < free_vars.size(); ++j)
      point[free_vars[j]] = static_cast<std::int8_t>((mask >> j) & 1);
    if (eval_tree(sp, t, point) != (eval_dnf(sp, f, point) ? 1 : 0))
      return false;
  }
  return true;
}

struct failure_evidence {
  restriction tau;
  std::vector<failure_round> rounds;

  std::uint64_t query_count() const {
    std::uint64_t n = 0;
    for (const failure_round& r : rounds) n += r.answers.size();
    return n;
  }
};

namespace tree_detail {

struct searcher : engine {
  std::uint64_t h;

  searcher(const var_space& space, const dnf& formula, const restriction& r,
           const canonical_params& p)
      : engine(space, formula, r, p), h(p.height_threshold) {}

  bool dfs(std::vector<failure_round>& trace, std::uint64_t count,
           std::int64_t prev_live) {
    auto live = first_live_conjunction(
        sp, f, [&](std::uint64_t v) { return value(v); });
    if (!live || live->view.status == conj_status::satisfied) return false;
    if (static_cast<std::int64_t>(live->index) <= prev_live)
      fail(error_kind::internal, "live term index failed to increase");
    round_plan plan = plan_round(live->index, live->view);
    failure_round rec;
    rec.conj = live->index;
    return block_dfs(plan, 0, rec, trace, count, live->index);
  }

  bool block_dfs(const round_plan& plan, std::size_t j, failure_round& rec,
                 std::vector<failure_round>& trace, std::uint64_t count,
                 std::size_t conj) {
    if (j == plan.blocks.size()) {
      trace.push_back(rec);
      if (dfs(trace, count, static_cast<std::int64_t>(conj))) return true;
      trace.pop_back();
      return false;
    }
    std::uint64_t b = plan.blocks[j];
    rec.blocks.push_back(b);
    rec.reps.push_back(rep_of_block[b]);
    for (std::uint64_t v : plan.gamma_chunks[j]) rec.gamma.push_back(v);
    for (int a = 0; a < 2; ++a) {
      fill_block(b, a);
      rec.answers.push_back(a);
      if (count + 1 == h) { // the cutoff includes this answer
        trace.push_back(rec);
        return true;
      }
      if (block_dfs(plan, j + 1, rec, trace, count + 1, conj)) return true;
      rec.answers.pop_back();
      unfill_block(b);
    }
    rec.blocks.pop_back();
    rec.reps.pop_back();
    for (std::size_t n = plan.gamma_chunks[j].size(); n > 0; --n)
      rec.gamma.pop_back();
    return false;
  }

  restriction tau_restriction() const {
    restriction tau(sp, rho.pol(), "tau");
    for (std::uint64_t v : small_stars)
      tau.set_var(v, static_cast<int>(val[v]));
    return tau;
  }

  std::optional<failure_evidence> run() {
    if (small_free.size() > 25)
      fail(error_kind::budget, "phase-1 branch space too large to search");
    std::uint64_t branches = std::uint64_t(1) << small_free.size();
    for (std::uint64_t m = 0; m < branches; ++m) {
      for (std::uint64_t v : small_stars) val[v] = static_cast<std::int8_t>(fc);
      for (std::size_t j = 0; j < small_free.size(); ++j)
        val[small_free[j]] = static_cast<std::int8_t>(
            (m >> (small_free.size() - 1 - j)) & 1);
      if (h == 0) return failure_evidence{tau_restriction(), {}};
      std::vector<failure_round> trace;
      if (dfs(trace, 0, -1))
        return failure_evidence{tau_restriction(), std::move(trace)};
    }
    return std::nullopt;
  }
};

} // namespace tree_detail

// First witness that the tree fails the height cutoff: the first consistent
// phase-1 branch (free representatives in ascending lexicographic order, the
// forced stars at the g constant) whose phase-2 subtree reaches h queries,
// with the rounds truncated exactly at the h-th answer. NONE when every
// branch stays below h.
inline std::optional<failure_evidence> failure_set_member(
    const var_space& sp, const dnf& f, const restriction& rho,
    const canonical_params& params) {
  tree_detail::searcher s(sp, f, rho, params);
  return s.run();
}

} // namespace switchlab
