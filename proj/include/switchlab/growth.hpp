#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "rational.hpp"

namespace switchlab {

// guard on every tower evaluation: values above this many bits are refused,
// never truncated
inline constexpr std::uint64_t default_growth_budget_bits = std::uint64_t(1)
                                                            << 20;

namespace growth_detail {

inline void check_bits(const bigint& v, std::uint64_t budget_bits) {
  if (mpz_sizeinbase(v.get_mpz_t(), 2) > budget_bits)
    fail(error_kind::budget, "tower value exceeds the bit budget of " +
                                 std::to_string(budget_bits) + " bits");
}

// 2^e with the budget applied to the result size
inline bigint guarded_pow2(const bigint& e, std::uint64_t budget_bits) {
  if (e < 0) fail(error_kind::internal, "negative tower exponent");
  if (!e.fits_ulong_p() || e.get_ui() + 1 > budget_bits)
    fail(error_kind::budget, "tower value exceeds the bit budget of " +
                                 std::to_string(budget_bits) + " bits");
  return pow2(e.get_ui());
}

} // namespace growth_detail

// exp_0(n) = n, exp_{k+1}(n) = 2^{exp_k(n)}
inline bigint exp_tower(unsigned k, const bigint& n,
                        std::uint64_t budget_bits = default_growth_budget_bits) {
  growth_detail::check_bits(n, budget_bits);
  bigint v = n;
  for (unsigned i = 0; i < k; ++i)
    v = growth_detail::guarded_pow2(v, budget_bits);
  return v;
}

// Smallest value strictly above n on any of the towers exp_j(B+i),
// i = 1..D, where B = exp_{k-2}(2) and B+D = exp_{k-1}(2); k = 1 degenerates
// to B = 1. Values at or below B report B+1, the least element of the whole
// family.
inline bigint f_k(unsigned k, const bigint& n,
                  std::uint64_t budget_bits = default_growth_budget_bits) {
  if (k < 1) fail(error_kind::config, "f_k needs k >= 1");
  if (n < 0) fail(error_kind::config, "f_k is defined on naturals");
  growth_detail::check_bits(n, budget_bits);
  bigint base = k == 1 ? bigint(1) : exp_tower(k - 2, bigint(2), budget_bits);
  bigint top = exp_tower(k - 1, bigint(2), budget_bits);
  if (n <= base) return base + 1;

  bigint best(0);
  for (bigint start = base + 1; start <= top; ++start) {
    bigint x = start;
    while (x <= n) x = growth_detail::guarded_pow2(x, budget_bits);
    if (best == 0 || x < best) best = x;
  }
  return best;
}

struct growth_fn {
  enum class family : unsigned char { exp_tower, frac_exp };
  family kind = family::frac_exp;
  unsigned k = 2;
};

inline bigint eval_growth(const growth_fn& fn, const bigint& n,
                          std::uint64_t budget_bits = default_growth_budget_bits) {
  if (fn.kind == growth_fn::family::exp_tower)
    return exp_tower(fn.k, n, budget_bits);
  return f_k(fn.k, n, budget_bits);
}

inline bigint iterate_growth(const growth_fn& fn, std::uint64_t times,
                             const bigint& n,
                             std::uint64_t budget_bits = default_growth_budget_bits) {
  bigint v = n;
  for (std::uint64_t i = 0; i < times; ++i) v = eval_growth(fn, v, budget_bits);
  return v;
}

// one checkpoint row: l-fold iteration should stay below 2^n, m-fold should
// reach it; the exact ratio of the l-iterate to 2^n tracks the trend
struct growth_row {
  std::uint64_t n = 0;
  bigint f;
  bigint iter_l;
  bigint pow2n;
  bool pass_l = false;
  bigint iter_m;
  bool pass_m = false;
  rational ratio_l;
};

inline std::vector<growth_row> growth_report(
    unsigned k, std::uint64_t lo, std::uint64_t hi, std::uint64_t l,
    std::uint64_t m,
    std::uint64_t budget_bits = default_growth_budget_bits) {
  if (lo > hi) fail(error_kind::config, "empty growth range");
  growth_fn fn{growth_fn::family::frac_exp, k};
  std::vector<growth_row> rows;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    growth_row row;
    row.n = n;
    row.f = f_k(k, bigint(static_cast<unsigned long>(n)), budget_bits);
    row.iter_l =
        iterate_growth(fn, l, bigint(static_cast<unsigned long>(n)), budget_bits);
    row.pow2n = pow2(n);
    row.pass_l = row.iter_l < row.pow2n;
    row.iter_m =
        iterate_growth(fn, m, bigint(static_cast<unsigned long>(n)), budget_bits);
    row.pass_m = row.iter_m >= row.pow2n;
    row.ratio_l = rational(row.iter_l) / rational(row.pow2n);
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace switchlab
