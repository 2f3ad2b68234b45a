#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "error.hpp"

namespace switchlab {

using rational = mpq_class;
using bigint = mpz_class;

// Rationals serialize as "num/den" with den always present, even "3/1",
// so parsers never need two grammars.
inline std::string rational_to_string(const rational& q) {
  rational c = q;
  c.canonicalize();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    rational q;
    if (slash == std::string::npos) {
      q = rational(bigint(s), 1);
    } else {
      q = rational(bigint(s.substr(0, slash)), bigint(s.substr(slash + 1)));
    }
    if (q.get_den() == 0) fail(error_kind::data, "rational with zero denominator: " + s);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    fail(error_kind::data, "unparseable rational: " + s);
  }
}

inline rational rational_pow(const rational& base, unsigned long e) {
  rational r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), e);
  r.canonicalize();
  return r;
}

inline bigint bigint_pow(const bigint& base, unsigned long e) {
  bigint r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline bigint pow2(unsigned long e) { return bigint_pow(bigint(2), e); }

// True iff q = a/2^k for integer a: exact-threshold sampling only supports
// dyadic probabilities.
inline bool is_dyadic(const rational& q, unsigned* log2_den = nullptr,
                      std::uint64_t* num = nullptr) {
  rational c = q;
  c.canonicalize();
  const bigint& den = c.get_den();
  // den is positive and canonical; dyadic iff den is a power of two.
  mp_bitcnt_t low = mpz_scan1(den.get_mpz_t(), 0);
  bigint shifted = den >> low;
  if (shifted != 1) return false;
  if (low > 64) return false;
  if (log2_den) *log2_den = static_cast<unsigned>(low);
  if (num) {
    if (!c.get_num().fits_ulong_p() && c.get_num() > 0) return false;
    if (c.get_num() < 0) return false;
    *num = static_cast<std::uint64_t>(c.get_num().get_ui());
  }
  return true;
}

} // namespace switchlab
