#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "decision_tree.hpp"
#include "error.hpp"
#include "formula.hpp"
#include "rational.hpp"
#include "restriction.hpp"
#include "var_space.hpp"

namespace switchlab {

// one queried block: which positions of the live term lie in it, and
// whether another block of the same round follows
struct block_record {
  std::vector<bool> membership;
  bool continuation = false;

  friend bool operator==(const block_record&, const block_record&) = default;
};

struct code_bundle {
  restriction rho_tau_sigma;
  std::string tau_code; // one symbol per small-block variable: '0' '1' '-'
  std::vector<block_record> beta_prime;
  std::vector<bool> pi_prime;                   // one answer per record
  std::vector<std::vector<bool>> gamma_prime;   // one mask per round
};

// the four code components, measured in bits
struct bundle_bits {
  std::uint64_t tau = 0, beta = 0, pi = 0, gamma = 0;

  std::uint64_t total() const { return tau + beta + pi + gamma; }
};

inline bundle_bits bit_lengths(const code_bundle& b) {
  bundle_bits out;
  if (std::uint64_t L = b.tau_code.size()) {
    // ceil(L * log2(3)) computed exactly: 3^L is never a power of two
    bigint p = bigint_pow(bigint(3), L);
    out.tau = mpz_sizeinbase(p.get_mpz_t(), 2);
  }
  for (const block_record& r : b.beta_prime)
    out.beta += r.membership.size() + 1;
  out.pi = b.pi_prime.size();
  for (const auto& mask : b.gamma_prime) out.gamma += mask.size();
  return out;
}

namespace encoding_detail {

inline std::vector<std::uint64_t> small_block_vars(const var_space& sp,
                                                   std::uint64_t theta) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    if (tree_detail::scale_of_block(sp, b) >= theta) continue;
    std::uint64_t first = sp.block_first_var(b);
    for (std::uint64_t v = first; v < first + sp.block_size(b); ++v)
      out.push_back(v);
  }
  return out; // ascending: blocks are contiguous ascending ranges
}

// a block whose stars all received values is re-read as an event outcome:
// any star at the block constant makes it a zero block, none leaves no
// stars at all, which is the all-ones outcome
inline void reinterpret_block(restriction& r, std::uint64_t b) {
  const var_space& sp = r.space();
  const int bc = block_stage_constant(r.pol());
  std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
  bool zeroed = false;
  for (std::uint64_t v = first; v < first + size; ++v) {
    if (r.state(v) == var_state::star)
      fail(error_kind::internal, "reinterpreted block still has stars");
    if (*r.value_of(v) == bc) zeroed = true;
  }
  r.set_block(b, zeroed ? block_state::zero_block : block_state::all_ones);
}

} // namespace encoding_detail

// The injection step: composes rho with the phase-1 answers tau and the
// per-round wrong-answer assignments sigma (positive stars of the queried
// blocks to the first-stage constant, their other stars to the block
// constant), re-reading every touched block as an event outcome, and emits
// the positional codes the decoder needs.
inline code_bundle encode_failure(const var_space& sp, const dnf& f,
                                  const restriction& rho,
                                  const failure_evidence& ev,
                                  const canonical_params& params) {
  validate_event(rho);
  validate_dnf(sp, f);
  const int fc = first_stage_constant(rho.pol());

  code_bundle out;
  out.rho_tau_sigma = rho;
  out.rho_tau_sigma.set_stage("rhoTauSigma");

  std::vector<std::uint64_t> smalls =
      encoding_detail::small_block_vars(sp, params.small_block_threshold);

  // tau: every assigned small star flows into the event
  std::vector<bool> touched(sp.block_count(), false);
  out.tau_code.reserve(smalls.size());
  for (std::uint64_t v : smalls) {
    var_state s = ev.tau.state(v);
    if (s == var_state::zero || s == var_state::one) {
      if (rho.state(v) != var_state::star)
        fail(error_kind::internal, "tau assigns a variable rho already fixed");
      out.rho_tau_sigma.set_var(v, s == var_state::one ? 1 : 0);
      touched[sp.block_of_var(v)] = true;
      out.tau_code.push_back(s == var_state::one ? '1' : '0');
    } else {
      out.tau_code.push_back('-');
    }
  }

  // sigma: per round, gamma stars to the first-stage constant, the other
  // stars of each queried block to the block constant
  for (const failure_round& r : ev.rounds) {
    if (r.conj >= f.terms.size())
      fail(error_kind::internal, "evidence names a term outside the formula");
    const conjunction& term = f.terms[r.conj];
    if (r.blocks.size() != r.answers.size() ||
        r.blocks.size() != r.reps.size())
      fail(error_kind::internal, "evidence round is not aligned");
    for (std::uint64_t b : r.blocks) {
      if (touched[b])
        fail(error_kind::internal, "sigma domains collide on a block");
      touched[b] = true;
      if (rho.bstate(b) != block_state::star_block)
        fail(error_kind::internal, "queried block is not a star block");
      std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
      for (std::uint64_t v = first; v < first + size; ++v) {
        if (rho.state(v) != var_state::star) continue;
        bool in_gamma =
            std::find(r.gamma.begin(), r.gamma.end(), v) != r.gamma.end();
        out.rho_tau_sigma.set_var(v, in_gamma ? fc : 1 - fc);
      }
      out.rho_tau_sigma.set_block(b, block_state::undetermined);
    }

    // one record per block, in query order
    for (std::size_t j = 0; j < r.blocks.size(); ++j) {
      block_record rec;
      rec.membership.assign(f.width, false);
      for (std::size_t p = 0; p < term.size(); ++p)
        if (sp.block_of_var(sp.index_of(term[p].var)) == r.blocks[j])
          rec.membership[p] = true;
      rec.continuation = j + 1 < r.blocks.size();
      out.beta_prime.push_back(std::move(rec));
      out.pi_prime.push_back(r.answers[j] == 1);
    }

    std::vector<bool> mask(f.width, false);
    for (std::size_t p = 0; p < term.size(); ++p) {
      if (!term[p].positive) continue;
      std::uint64_t v = sp.index_of(term[p].var);
      if (std::find(r.gamma.begin(), r.gamma.end(), v) != r.gamma.end())
        mask[p] = true;
    }
    out.gamma_prime.push_back(std::move(mask));
  }

  for (std::uint64_t b = 0; b < sp.block_count(); ++b)
    if (touched[b]) encoding_detail::reinterpret_block(out.rho_tau_sigma, b);
  validate_event(out.rho_tau_sigma);
  return out;
}

// Inverts encode_failure: replays the rounds against the event, replacing
// each sigma by the recorded answers, then strips every touched block back
// to stars. Malformed bundles surface as data errors or as a reconstruction
// whose re-encoding differs.
inline restriction decode_failure(const var_space& sp, const dnf& f,
                                  const code_bundle& bundle,
                                  const canonical_params& params) {
  validate_dnf(sp, f);
  validate_event(bundle.rho_tau_sigma);
  const restriction& event = bundle.rho_tau_sigma;
  const int fc = first_stage_constant(event.pol());
  const int bc = block_stage_constant(event.pol());

  if (bundle.pi_prime.size() != bundle.beta_prime.size())
    fail(error_kind::data, "answer bits do not match block records");

  std::vector<std::uint64_t> smalls =
      encoding_detail::small_block_vars(sp, params.small_block_threshold);
  if (bundle.tau_code.size() != smalls.size())
    fail(error_kind::data, "tau code length does not match the space");
  for (std::size_t i = 0; i < smalls.size(); ++i) {
    char c = bundle.tau_code[i];
    if (c == '-') continue;
    if (c != '0' && c != '1')
      fail(error_kind::data, "tau code holds a foreign symbol");
    auto bit = event.value_of(smalls[i]);
    if (!bit || *bit != (c == '1' ? 1 : 0))
      fail(error_kind::data, "tau code disagrees with the event");
  }

  std::vector<std::int8_t> val(sp.var_count(), -1);
  for (std::uint64_t v = 0; v < sp.var_count(); ++v)
    if (auto bit = event.value_of(v)) val[v] = static_cast<std::int8_t>(*bit);

  struct touched_block {
    std::uint64_t block;
    std::vector<std::uint64_t> domain;
  };
  std::vector<touched_block> touched;

  std::size_t rec_i = 0, round_i = 0;
  std::int64_t prev_live = -1;
  while (rec_i < bundle.beta_prime.size()) {
    auto live = first_live_conjunction(
        sp, f, [&](std::uint64_t v) -> std::optional<int> {
          if (val[v] < 0) return std::nullopt;
          return val[v];
        });
    if (!live)
      fail(error_kind::data, "no live term for a pending record group");
    std::size_t c = live->index;
    if (static_cast<std::int64_t>(c) <= prev_live)
      fail(error_kind::data, "recovered live terms are not increasing");
    prev_live = static_cast<std::int64_t>(c);
    const conjunction& term = f.terms[c];

    // this round's blocks, one per record until the continuation bit drops
    std::vector<std::uint64_t> blocks;
    for (;;) {
      if (rec_i >= bundle.beta_prime.size())
        fail(error_kind::data, "record group runs past the bundle");
      const block_record& rec = bundle.beta_prime[rec_i++];
      std::uint64_t blk = ~std::uint64_t(0);
      for (std::size_t p = 0; p < rec.membership.size(); ++p) {
        if (!rec.membership[p]) continue;
        if (p >= term.size())
          fail(error_kind::data, "membership position outside the live term");
        std::uint64_t b = sp.block_of_var(sp.index_of(term[p].var));
        if (blk == ~std::uint64_t(0))
          blk = b;
        else if (blk != b)
          fail(error_kind::data, "record positions span two blocks");
      }
      if (blk == ~std::uint64_t(0))
        fail(error_kind::data, "record identifies no block");
      if (!blocks.empty() && blk <= blocks.back())
        fail(error_kind::data, "round blocks are not increasing");
      blocks.push_back(blk);
      if (!rec.continuation) break;
    }

    if (round_i >= bundle.gamma_prime.size())
      fail(error_kind::data, "round lacks a gamma mask");
    const std::vector<bool>& mask = bundle.gamma_prime[round_i++];
    std::vector<std::uint64_t> gamma;
    for (std::size_t p = 0; p < mask.size(); ++p) {
      if (!mask[p]) continue;
      if (p >= term.size())
        fail(error_kind::data, "gamma position outside the live term");
      if (!term[p].positive)
        fail(error_kind::data, "gamma marks a negative literal");
      std::uint64_t v = sp.index_of(term[p].var);
      if (std::find(gamma.begin(), gamma.end(), v) == gamma.end())
        gamma.push_back(v);
    }
    for (std::uint64_t v : gamma) {
      std::uint64_t b = sp.block_of_var(v);
      if (std::find(blocks.begin(), blocks.end(), b) == blocks.end())
        fail(error_kind::data, "gamma star outside the round's blocks");
    }

    // replace sigma by the recorded answers, block by block
    std::size_t pi_i = rec_i - blocks.size();
    for (std::uint64_t b : blocks) {
      std::vector<std::uint64_t> domain;
      std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
      for (std::uint64_t v = first; v < first + size; ++v) {
        bool sigma_zero = val[v] == bc;
        bool sigma_one =
            std::find(gamma.begin(), gamma.end(), v) != gamma.end();
        if (sigma_zero || sigma_one) domain.push_back(v);
      }
      if (domain.empty())
        fail(error_kind::data, "queried block shows no sigma values");
      int answer = bundle.pi_prime[pi_i++] ? 1 : 0;
      for (std::size_t j = 0; j < domain.size(); ++j)
        val[domain[j]] = static_cast<std::int8_t>(j == 0 ? answer : fc);
      touched.push_back({b, std::move(domain)});
    }
  }
  if (round_i != bundle.gamma_prime.size())
    fail(error_kind::data, "unused gamma masks in the bundle");

  restriction out = event;
  for (const touched_block& t : touched) {
    for (std::uint64_t v : t.domain) out.set_var(v, var_state::star);
    out.set_block(t.block, block_state::star_block);
  }
  for (std::size_t i = 0; i < smalls.size(); ++i) {
    if (bundle.tau_code[i] == '-') continue;
    out.set_var(smalls[i], var_state::star);
    out.set_block(sp.block_of_var(smalls[i]), block_state::star_block);
  }
  out.set_stage("decoded");
  validate_event(out);
  return out;
}

// Exact probability accounting for the injection: the event's probability
// against the original's, with the certified lower bound on their ratio.
// Only changes at blocks of scale >= the small-block threshold count; each
// such block contributes a state change and its stars moved to the
// first-stage constant contribute one change apiece. The bound base is the
// smallest scale at or above the threshold, minus one; the first-stage odds
// (1-1/M)/(1/M) = M-1 and the matching block odds make every counted change
// worth at least that factor under the default distribution.
struct ratio_result {
  rational p_event;     // Pr(rho tau sigma)
  rational p_original;  // Pr(rho)
  std::uint64_t block_changes = 0;
  std::uint64_t star_to_one = 0;
  bigint bound;
  bool holds = false;
};

inline ratio_result ratio_certificate(const var_space& sp,
                                      const restriction& rho,
                                      const code_bundle& bundle,
                                      const canonical_params& params) {
  validate_event(rho);
  validate_event(bundle.rho_tau_sigma);
  const int fc = first_stage_constant(rho.pol());

  ratio_result out;
  out.p_event = exact_probability(bundle.rho_tau_sigma);
  out.p_original = exact_probability(rho);

  std::uint64_t theta_min = 0;
  for (std::size_t w = 0; w < sp.word_count(); ++w) {
    std::uint64_t scale = std::uint64_t(1) << sp.word_at(w).len;
    if (scale >= params.small_block_threshold &&
        (theta_min == 0 || scale < theta_min))
      theta_min = scale;
  }

  for (std::uint64_t b = 0; b < sp.block_count(); ++b) {
    if (tree_detail::scale_of_block(sp, b) < params.small_block_threshold)
      continue;
    if (rho.bstate(b) != bundle.rho_tau_sigma.bstate(b)) ++out.block_changes;
    std::uint64_t first = sp.block_first_var(b), size = sp.block_size(b);
    for (std::uint64_t v = first; v < first + size; ++v)
      if (rho.state(v) == var_state::star) {
        auto bit = bundle.rho_tau_sigma.value_of(v);
        if (bit && *bit == fc) ++out.star_to_one;
      }
  }

  out.bound = theta_min == 0
                  ? bigint(1)
                  : bigint_pow(bigint(static_cast<unsigned long>(theta_min - 1)),
                               out.block_changes + out.star_to_one);
  out.holds = out.p_event >= rational(out.bound) * out.p_original;
  return out;
}

} // namespace switchlab
