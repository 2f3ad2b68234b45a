#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "var_space.hpp"

namespace switchlab {

enum class var_state : unsigned char { unset, zero, one, star };
enum class block_state : unsigned char {
  undetermined,
  all_ones,   // every variable fixed at the first stage; no block draw
  zero_block, // second stage forced the stars to the block constant
  star_block  // second stage kept the stars free
};
enum class polarity : unsigned char { normal, flipped };

// State names follow the normal-polarity reading. Under flipped polarity the
// first stage fixes variables to 0 ("all_ones" then means all-zeros) and a
// zero_block forces its stars to 1; only the constants swap, never the
// structure.
inline int first_stage_constant(polarity p) {
  return p == polarity::normal ? 1 : 0;
}
inline int block_stage_constant(polarity p) {
  return p == polarity::normal ? 0 : 1;
}

inline const char* to_string(var_state s) {
  switch (s) {
    case var_state::unset: return "unset";
    case var_state::zero: return "0";
    case var_state::one: return "1";
    case var_state::star: return "*";
  }
  return "?";
}

inline const char* to_string(block_state s) {
  switch (s) {
    case block_state::undetermined: return "undetermined";
    case block_state::all_ones: return "allOnes";
    case block_state::zero_block: return "zeroBlock";
    case block_state::star_block: return "starBlock";
  }
  return "?";
}

// Star probabilities of the two-stage process. Defaults are 1/M with M the
// block's own scale; overrides apply one probability to every scale and must
// be dyadic so sampling thresholds are exact.
struct dist_params {
  std::optional<rational> var_star;
  std::optional<rational> block_star;

  friend bool operator==(const dist_params&, const dist_params&) = default;
};

namespace dist_detail {

struct dyadic {
  std::uint64_t num;
  unsigned log2_den;
};

inline dyadic as_dyadic(const rational& q, const char* what) {
  unsigned ld = 0;
  std::uint64_t num = 0;
  if (q < 0 || q > 1)
    fail(error_kind::config, std::string(what) + " must lie in [0,1]");
  if (!is_dyadic(q, &ld, &num))
    fail(error_kind::config,
         std::string(what) + " must be dyadic, got " + rational_to_string(q));
  return {num, ld};
}

} // namespace dist_detail

// Partial 0/1 assignment over a fixed space with per-block second-stage
// state. The forced masks mark values imposed deterministically on top of a
// sampled outcome; underlying_event() peels them off again, which is what
// makes "the extension adds no probability" checkable.
class restriction {
public:
  restriction() = default;

  restriction(const var_space& space, polarity pol, std::string stage)
      : sp_(&space),
        pol_(pol),
        stage_(std::move(stage)),
        vars_(space.var_count(), var_state::unset),
        blocks_(space.block_count(), block_state::undetermined),
        var_forced_(space.var_count(), false),
        block_forced_(space.block_count(), false) {}

  const var_space& space() const {
    if (!sp_) fail(error_kind::internal, "restriction without a space");
    return *sp_;
  }
  polarity pol() const { return pol_; }
  const std::string& stage() const { return stage_; }
  void set_stage(std::string s) { stage_ = std::move(s); }

  var_state state(std::uint64_t v) const { return vars_.at(v); }
  block_state bstate(std::uint64_t b) const { return blocks_.at(b); }
  bool var_forced(std::uint64_t v) const { return var_forced_.at(v); }
  bool block_forced(std::uint64_t b) const { return block_forced_.at(b); }

  std::optional<int> value_of(std::uint64_t v) const {
    switch (vars_.at(v)) {
      case var_state::zero: return 0;
      case var_state::one: return 1;
      default: return std::nullopt;
    }
  }

  void set_var(std::uint64_t v, var_state s, bool forced = false) {
    vars_.at(v) = s;
    var_forced_.at(v) = forced;
  }
  void set_var(std::uint64_t v, int bit, bool forced = false) {
    set_var(v, bit ? var_state::one : var_state::zero, forced);
  }
  void set_block(std::uint64_t b, block_state s, bool forced = false) {
    blocks_.at(b) = s;
    block_forced_.at(b) = forced;
  }

  // equality deliberately ignores the stage tag
  friend bool operator==(const restriction& a, const restriction& b) {
    return a.pol_ == b.pol_ && a.vars_ == b.vars_ && a.blocks_ == b.blocks_ &&
           a.var_forced_ == b.var_forced_ &&
           a.block_forced_ == b.block_forced_;
  }

private:
  const var_space* sp_ = nullptr;
  polarity pol_ = polarity::normal;
  std::string stage_;
  std::vector<var_state> vars_;
  std::vector<block_state> blocks_;
  std::vector<bool> var_forced_, block_forced_;
};

namespace event_detail {

// star probability of a variable or block at the given scale
inline dist_detail::dyadic star_prob(const std::optional<rational>& ovr,
                                     unsigned scale_log2, const char* what) {
  if (ovr) return dist_detail::as_dyadic(*ovr, what);
  return {1, scale_log2};
}

inline unsigned scale_log2_of_block(const var_space& sp, std::uint64_t b) {
  return sp.word_at(sp.word_of_block(b)).len;
}

} // namespace event_detail

// Checks that r is a complete, structurally consistent outcome of the
// two-stage process: no unset/undetermined entries, stars only in star
// blocks, block-constant values only in zero blocks, all_ones blocks fully
// fixed at the first stage, zero blocks with at least one zeroed star, star
// blocks with at least one star. Forced entries are checked against the same
// shape after unforcing.
inline void validate_event(const restriction& r) {
  const var_space& sp = r.space();
  const int fc = first_stage_constant(r.pol());
  const int bc = block_stage_constant(r.pol());
  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    block_state bs = r.bstate(b);
    if (bs == block_state::undetermined)
      fail(error_kind::data, "event has an undetermined block");
    std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
    std::uint64_t stars = 0, zeroed = 0;
    for (std::uint64_t v = first; v < first + size; ++v) {
      switch (r.state(v)) {
        case var_state::unset:
          fail(error_kind::data, "event has an unset variable");
        case var_state::star:
          if (bs != block_state::star_block)
            fail(error_kind::data, "star outside a star block");
          ++stars;
          break;
        default: {
          int val = *r.value_of(v);
          if (val == bc && bc != fc) {
            if (bs != block_state::zero_block)
              fail(error_kind::data,
                   "block-constant value outside a zero block");
            ++zeroed;
          }
          break;
        }
      }
    }
    if (bs == block_state::all_ones && (stars || zeroed))
      fail(error_kind::data, "all_ones block with stars or zeroed variables");
    if (bs == block_state::zero_block && zeroed == 0)
      fail(error_kind::data, "zero block without a zeroed variable");
    if (bs == block_state::star_block && stars == 0)
      fail(error_kind::data, "star block without a star");
  }
}

// Exact probability of a total event under the two-stage distribution.
// Product over variables of P(first-stage outcome) times product over
// blocks that received a second-stage draw of P(that draw).
inline rational exact_probability(const restriction& r,
                                  const dist_params& dist = {}) {
  validate_event(r);
  const var_space& sp = r.space();
  const int fc = first_stage_constant(r.pol());
  rational prob(1);
  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    unsigned sl = event_detail::scale_log2_of_block(sp, b);
    auto vp = event_detail::star_prob(dist.var_star, sl, "starProbVar");
    rational pv(static_cast<unsigned long>(vp.num));
    pv /= rational(pow2(vp.log2_den));
    std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
    for (std::uint64_t v = first; v < first + size; ++v) {
      bool starred = r.state(v) == var_state::star || *r.value_of(v) != fc;
      prob *= starred ? pv : rational(1) - pv;
    }
    if (r.bstate(b) != block_state::all_ones) {
      auto bp = event_detail::star_prob(dist.block_star, sl, "starProbBlock");
      rational pb(static_cast<unsigned long>(bp.num));
      pb /= rational(pow2(bp.log2_den));
      prob *= r.bstate(b) == block_state::star_block ? pb : rational(1) - pb;
    }
  }
  return prob;
}

// One draw of the two-stage process. Every decision is a pure function of
// (rng master seed, stream, trial, canonical index), so outcomes do not
// depend on evaluation order.
inline restriction sample_rho(const var_space& sp, const dist_params& dist,
                              const counter_rng& rng, std::uint64_t trial,
                              polarity pol = polarity::normal) {
  restriction r(sp, pol, "rho");
  const int fc = first_stage_constant(pol);
  const int bc = block_stage_constant(pol);
  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    unsigned sl = event_detail::scale_log2_of_block(sp, b);
    auto vp = event_detail::star_prob(dist.var_star, sl, "starProbVar");
    auto bp = event_detail::star_prob(dist.block_star, sl, "starProbBlock");
    std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
    std::uint64_t stars = 0;
    for (std::uint64_t v = first; v < first + size; ++v) {
      bool star = rng.bernoulli_dyadic(rng_stream::var_stage, trial, v, vp.num,
                                       vp.log2_den);
      if (star) {
        r.set_var(v, var_state::star);
        ++stars;
      } else {
        r.set_var(v, fc);
      }
    }
    if (stars == 0) {
      r.set_block(b, block_state::all_ones);
    } else if (rng.bernoulli_dyadic(rng_stream::block_stage, trial, b, bp.num,
                                    bp.log2_den)) {
      r.set_block(b, block_state::star_block);
    } else {
      r.set_block(b, block_state::zero_block);
      for (std::uint64_t v = first; v < first + size; ++v)
        if (r.state(v) == var_state::star) r.set_var(v, bc);
    }
  }
  return r;
}

// In every star block, fixes all stars except the one with the smallest last
// coordinate to the first-stage constant. Deterministic, so the underlying
// event keeps its probability; idempotent because a processed block has one
// star left.
inline restriction extend_g(const restriction& r) {
  validate_event(r);
  restriction out = r;
  const var_space& sp = r.space();
  const int fc = first_stage_constant(r.pol());
  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    if (out.bstate(b) != block_state::star_block) continue;
    std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
    bool kept = false;
    for (std::uint64_t v = first; v < first + size; ++v) {
      if (out.state(v) != var_state::star) continue;
      if (!kept)
        kept = true;
      else
        out.set_var(v, fc, true);
    }
  }
  out.set_stage("g(" + r.stage() + ")");
  return out;
}

// Converts surplus star blocks to zero blocks so that every group at a word
// length listed in quota keeps exactly that many star blocks, the ones with
// the smallest next-to-last coordinate. Remaining stars of a converted block
// go to the block constant.
inline restriction extend_h(const restriction& r,
                            const std::map<unsigned, std::uint64_t>& quota) {
  restriction out = r;
  const var_space& sp = r.space();
  const int bc = block_stage_constant(r.pol());
  for (std::uint64_t g = 0; g < sp.group_count(); ++g) {
    unsigned len = sp.word_at(sp.word_of_group(g)).len;
    auto it = quota.find(len);
    if (it == quota.end()) continue;
    std::uint64_t want = it->second;
    std::uint64_t first = sp.group_first_block(g), size = sp.group_size(g);
    std::uint64_t have = 0;
    for (std::uint64_t b = first; b < first + size; ++b)
      if (out.bstate(b) == block_state::star_block) ++have;
    if (have < want) {
      block_id id = sp.block_at(first);
      id.ys.pop_back();
      std::string coords;
      for (std::uint64_t y : id.ys) coords += "," + std::to_string(y);
      fail(error_kind::data,
           "group (" + to_string(id.b) + coords + ") has " +
               std::to_string(have) + " star blocks, needs " +
               std::to_string(want));
    }
    std::uint64_t kept = 0;
    for (std::uint64_t b = first; b < first + size; ++b) {
      if (out.bstate(b) != block_state::star_block) continue;
      if (kept < want) {
        ++kept;
        continue;
      }
      out.set_block(b, block_state::zero_block, true);
      std::uint64_t vf = sp.block_first_var(b), vs = sp.block_size(b);
      for (std::uint64_t v = vf; v < vf + vs; ++v)
        if (out.state(v) == var_state::star) out.set_var(v, bc, true);
    }
  }
  out.set_stage("h(" + r.stage() + ")");
  return out;
}

// Reverts every forced value, recovering the sampled outcome beneath g/h.
inline restriction underlying_event(const restriction& r) {
  restriction out = r;
  const var_space& sp = r.space();
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (out.var_forced(v)) out.set_var(v, var_state::star);
  for (std::uint64_t b = 0; b < sp.block_count(); ++b)
    if (out.block_forced(b)) out.set_block(b, block_state::star_block);
  out.set_stage("event(" + r.stage() + ")");
  return out;
}

// Union of two partial assignments. A value may refine a star; two values on
// one variable clash even when equal, since the assigned domains must be
// disjoint.
inline restriction compose(const restriction& r1, const restriction& r2) {
  if (!(r1.space() == r2.space()))
    fail(error_kind::data, "compose across different spaces");
  if (r1.pol() != r2.pol())
    fail(error_kind::data, "compose across different polarities");
  const var_space& sp = r1.space();
  restriction out = r1;
  std::string clashes;
  for (std::uint64_t v = 0; v < sp.var_count(); ++v) {
    var_state a = r1.state(v), b = r2.state(v);
    if (b == var_state::unset) continue;
    bool a_val = a == var_state::zero || a == var_state::one;
    bool b_val = b == var_state::zero || b == var_state::one;
    if (a_val && b_val) {
      var_id id = sp.var_at(v);
      clashes += clashes.empty() ? "" : " ";
      clashes += to_string(id.b);
      for (std::uint64_t y : id.ys) clashes += "," + std::to_string(y);
      continue;
    }
    if (a == var_state::unset || b_val)
      out.set_var(v, b, r2.var_forced(v));
  }
  if (!clashes.empty())
    fail(error_kind::data, "compose domains overlap at: " + clashes);
  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    block_state s1 = r1.bstate(b), s2 = r2.bstate(b);
    if (s2 == block_state::undetermined) continue;
    if (s1 == block_state::undetermined)
      out.set_block(b, s2, r2.block_forced(b));
    else if (s1 != s2)
      fail(error_kind::data, "compose block states conflict at block " +
                                 std::to_string(b));
  }
  out.set_stage("compose(" + r1.stage() + "," + r2.stage() + ")");
  return out;
}

// Enumerates every positive-probability outcome of the two-stage process
// exactly once, in canonical order: blocks vary odometer-style with the last
// block fastest; within a block, outcomes order by star mask, a zero block
// before the star block of the same mask.
//
// Per block of size s there are 2^(s+1) - 1 outcomes, so the total count is
// guarded by the budget.
inline void enumerate_restrictions(
    const var_space& sp, const dist_params& dist, std::uint64_t budget,
    const std::function<void(const restriction&, const rational&)>& fn,
    polarity pol = polarity::normal) {
  const int fc = first_stage_constant(pol);
  const int bc = block_stage_constant(pol);
  std::uint64_t nb = sp.block_count();

  bigint total(1);
  for (std::uint64_t b = 0; b < nb; ++b) {
    std::uint64_t size = sp.block_size(b);
    if (size > 62) fail(error_kind::budget, "block too large to enumerate");
    total *= bigint((std::uint64_t(1) << (size + 1)) - 1);
    if (total > bigint(static_cast<unsigned long>(budget)))
      fail(error_kind::budget,
           "enumeration would exceed budget of " + std::to_string(budget) +
               " outcomes (count so far " + total.get_str() + ")");
  }

  // per-block outcome tables
  struct outcome {
    std::uint64_t mask;
    block_state st;
    rational prob;
  };
  std::vector<std::vector<outcome>> tables(nb);
  for (std::uint64_t b = 0; b < nb; ++b) {
    unsigned sl = event_detail::scale_log2_of_block(sp, b);
    auto vp = event_detail::star_prob(dist.var_star, sl, "starProbVar");
    auto bp = event_detail::star_prob(dist.block_star, sl, "starProbBlock");
    rational pv(static_cast<unsigned long>(vp.num));
    pv /= rational(pow2(vp.log2_den));
    rational pb(static_cast<unsigned long>(bp.num));
    pb /= rational(pow2(bp.log2_den));
    std::uint64_t size = sp.block_size(b);
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << size); ++mask) {
      rational base(1);
      for (std::uint64_t i = 0; i < size; ++i)
        base *= (mask >> i) & 1 ? pv : rational(1) - pv;
      if (mask == 0) {
        tables[b].push_back({0, block_state::all_ones, base});
      } else {
        tables[b].push_back(
            {mask, block_state::zero_block, base * (rational(1) - pb)});
        tables[b].push_back({mask, block_state::star_block, base * pb});
      }
    }
  }

  restriction ev(sp, pol, "enumerated");
  std::vector<std::size_t> idx(nb, 0);
  auto apply_block = [&](std::uint64_t b) {
    const outcome& o = tables[b][idx[b]];
    std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
    for (std::uint64_t i = 0; i < size; ++i) {
      if (!((o.mask >> i) & 1))
        ev.set_var(first + i, fc);
      else if (o.st == block_state::star_block)
        ev.set_var(first + i, var_state::star);
      else
        ev.set_var(first + i, bc);
    }
    ev.set_block(b, o.st);
  };

  if (nb == 0) {
    fn(ev, rational(1));
    return;
  }
  for (std::uint64_t b = 0; b < nb; ++b) apply_block(b);
  for (;;) {
    rational prob(1);
    for (std::uint64_t b = 0; b < nb; ++b) prob *= tables[b][idx[b]].prob;
    if (prob != 0) fn(ev, prob);
    std::uint64_t b = nb;
    while (b > 0) {
      --b;
      if (++idx[b] < tables[b].size()) {
        apply_block(b);
        break;
      }
      idx[b] = 0;
      apply_block(b);
      if (b == 0) return;
    }
  }
}

} // namespace switchlab
