#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>

#include <mpfr.h>

#include "error.hpp"
#include "rational.hpp"

namespace switchlab {

// 256-bit floating point with round-to-nearest everywhere; enough headroom
// that the bound comparisons below are nowhere near the precision limit
class extfloat {
public:
  static constexpr mpfr_prec_t precision = 256;

  extfloat() { mpfr_init2(v_, precision); mpfr_set_zero(v_, 1); }
  explicit extfloat(std::uint64_t x) : extfloat() { mpfr_set_ui(v_, x, MPFR_RNDN); }
  explicit extfloat(double x) : extfloat() { mpfr_set_d(v_, x, MPFR_RNDN); }
  explicit extfloat(const rational& q) : extfloat() {
    mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN);
  }
  extfloat(const extfloat& o) : extfloat() { mpfr_set(v_, o.v_, MPFR_RNDN); }
  extfloat(extfloat&& o) noexcept : extfloat() { mpfr_swap(v_, o.v_); }
  extfloat& operator=(extfloat o) noexcept { mpfr_swap(v_, o.v_); return *this; }
  ~extfloat() { mpfr_clear(v_); }

  friend extfloat operator+(const extfloat& a, const extfloat& b) {
    extfloat r; mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN); return r;
  }
  friend extfloat operator-(const extfloat& a, const extfloat& b) {
    extfloat r; mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN); return r;
  }
  friend extfloat operator*(const extfloat& a, const extfloat& b) {
    extfloat r; mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN); return r;
  }
  friend extfloat operator/(const extfloat& a, const extfloat& b) {
    extfloat r; mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN); return r;
  }
  extfloat operator-() const {
    extfloat r; mpfr_neg(r.v_, v_, MPFR_RNDN); return r;
  }

  friend bool operator<(const extfloat& a, const extfloat& b) {
    return mpfr_cmp(a.v_, b.v_) < 0;
  }
  friend bool operator>=(const extfloat& a, const extfloat& b) {
    return mpfr_cmp(a.v_, b.v_) >= 0;
  }
  friend bool operator<=(const extfloat& a, const extfloat& b) {
    return mpfr_cmp(a.v_, b.v_) <= 0;
  }

  static extfloat log2_of(const extfloat& x) {
    extfloat r; mpfr_log2(r.v_, x.v_, MPFR_RNDN); return r;
  }
  // 2^x; silently saturates to +inf / +0 outside the exponent range, which
  // the log-domain comparisons never rely on
  static extfloat exp2_of(const extfloat& x) {
    extfloat r; mpfr_exp2(r.v_, x.v_, MPFR_RNDN); return r;
  }
  static extfloat euler() {
    extfloat one(std::uint64_t(1));
    extfloat r; mpfr_exp(r.v_, one.v_, MPFR_RNDN); return r;
  }

  bool is_negative() const { return mpfr_sgn(v_) < 0; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  // shortest-ish scientific form, deterministic across runs
  std::string str(int digits = 10) const {
    char buf[128];
    std::string fmt = "%." + std::to_string(digits) + "Re";
    mpfr_snprintf(buf, sizeof buf, fmt.c_str(), v_);
    return buf;
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

private:
  mpfr_t v_;
};

} // namespace switchlab
