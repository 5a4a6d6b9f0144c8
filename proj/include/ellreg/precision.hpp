#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <string>
#include <utility>

#include "ellreg/errors.hpp"

namespace ellreg::num {

// Working precision for all arithmetic in the current thread.  Values are
// immutable after construction, so mixing values created under different
// contexts is safe; each operation rounds at the precision active when it
// runs, carrying guard_bits of extra headroom internally.
struct PrecisionContext {
  long bits = 256;
  long guard_bits = 32;

  long work_bits() const { return bits + guard_bits; }
};

const PrecisionContext& ctx();
void set_ctx(const PrecisionContext& c);

long digits_of(const PrecisionContext& c);     // decimal digits at c.bits
long bits_for_digits(long digits);

class ScopedPrecision {
 public:
  explicit ScopedPrecision(long bits, long guard_bits = 32) : saved_(ctx()) {
    if (bits < 64) raise(ErrorKind::DomainError, "precision below 64 bits");
    set_ctx(PrecisionContext{bits, guard_bits});
  }
  ~ScopedPrecision() { set_ctx(saved_); }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  PrecisionContext saved_;
};

// log2 of |x| + |y| given log2 terms; -inf stands for an exact zero term.
double log2_add(double a, double b);

// Arbitrary-precision real carrying a heuristic absolute error bound,
// stored as log2 of the bound (-inf for exact values).  Propagation is
// first-order: good enough to size truncation cutoffs and to report
// trustworthy digit counts, not a rigorous enclosure.
class BigReal {
 public:
  BigReal();
  explicit BigReal(long prec_bits);
  BigReal(const BigReal& o);
  BigReal(BigReal&& o) noexcept;
  BigReal& operator=(const BigReal& o);
  BigReal& operator=(BigReal&& o) noexcept;
  ~BigReal();

  static BigReal from_long(long v);
  static BigReal from_double(double v);
  static BigReal from_mpz(const mpz_class& v);
  static BigReal from_mpq(const mpq_class& v);
  static BigReal from_string(const std::string& s);
  static BigReal nan();
  static BigReal zero();
  static BigReal pi();
  static BigReal euler_gamma();
  static BigReal log2const();

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

  long prec() const { return mpfr_get_prec(v_); }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sgn() const { return mpfr_sgn(v_); }

  // log2 of the absolute error bound; -HUGE_VAL means exact.
  double err_log2() const { return elog2_; }
  double err() const { return std::exp2(elog2_); }
  BigReal& set_err_log2(double e) {
    elog2_ = e;
    return *this;
  }
  BigReal& set_exact() { return set_err_log2(-HUGE_VAL); }
  BigReal& bump_err_log2(double e) {
    elog2_ = log2_add(elog2_, e);
    return *this;
  }

  // log2 of |value| (very negative for 0); used by error propagation.
  double mag_log2() const;

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }
  mpz_class round_to_mpz() const;
  mpq_class to_mpq_exact() const;  // the held dyadic value, exactly
  std::string to_decimal(long digits) const;

  BigReal round_to(long prec_bits) const;

  friend int cmp(const BigReal& a, const BigReal& b) {
    return mpfr_cmp(a.v_, b.v_);
  }
  bool operator<(const BigReal& o) const { return cmp(*this, o) < 0; }
  bool operator>(const BigReal& o) const { return cmp(*this, o) > 0; }
  bool operator<=(const BigReal& o) const { return cmp(*this, o) <= 0; }
  bool operator>=(const BigReal& o) const { return cmp(*this, o) >= 0; }
  bool operator==(const BigReal& o) const { return mpfr_equal_p(v_, o.v_); }

  BigReal operator-() const;

 private:
  mpfr_t v_;
  double elog2_;

  friend BigReal operator+(const BigReal& a, const BigReal& b);
  friend BigReal operator-(const BigReal& a, const BigReal& b);
  friend BigReal operator*(const BigReal& a, const BigReal& b);
  friend BigReal operator/(const BigReal& a, const BigReal& b);
  friend BigReal abs(const BigReal& a);
  friend BigReal sqrt(const BigReal& a);
  friend BigReal log(const BigReal& a);
  friend BigReal exp(const BigReal& a);
  friend BigReal sin(const BigReal& a);
  friend BigReal cos(const BigReal& a);
  friend BigReal atan2(const BigReal& y, const BigReal& x);
  friend BigReal pow_si(const BigReal& a, long e);
  friend BigReal mul_2si(const BigReal& a, long e);
  friend BigReal floor(const BigReal& a);
  friend BigReal eint_neg(const BigReal& a);
};

BigReal operator+(const BigReal& a, const BigReal& b);
BigReal operator-(const BigReal& a, const BigReal& b);
BigReal operator*(const BigReal& a, const BigReal& b);
BigReal operator/(const BigReal& a, const BigReal& b);
BigReal abs(const BigReal& a);
BigReal sqrt(const BigReal& a);
BigReal log(const BigReal& a);
BigReal exp(const BigReal& a);
BigReal sin(const BigReal& a);
BigReal cos(const BigReal& a);
BigReal atan2(const BigReal& y, const BigReal& x);
BigReal pow_si(const BigReal& a, long e);
BigReal mul_2si(const BigReal& a, long e);  // exact scaling by 2^e
BigReal floor(const BigReal& a);

inline BigReal operator+(const BigReal& a, long b) { return a + BigReal::from_long(b); }
inline BigReal operator-(const BigReal& a, long b) { return a - BigReal::from_long(b); }
inline BigReal operator*(const BigReal& a, long b) { return a * BigReal::from_long(b); }
inline BigReal operator/(const BigReal& a, long b) { return a / BigReal::from_long(b); }
inline BigReal operator+(long a, const BigReal& b) { return BigReal::from_long(a) + b; }
inline BigReal operator-(long a, const BigReal& b) { return BigReal::from_long(a) - b; }
inline BigReal operator*(long a, const BigReal& b) { return BigReal::from_long(a) * b; }
inline BigReal operator/(long a, const BigReal& b) { return BigReal::from_long(a) / b; }

class BigComplex {
 public:
  BigComplex() : re_(), im_() {}
  BigComplex(BigReal re, BigReal im) : re_(std::move(re)), im_(std::move(im)) {}
  explicit BigComplex(const BigReal& re) : re_(re), im_(BigReal::zero()) {}
  static BigComplex from_long(long re, long im = 0);
  static BigComplex zero() { return from_long(0); }
  static BigComplex one() { return from_long(1); }
  static BigComplex i() { return from_long(0, 1); }

  const BigReal& re() const { return re_; }
  const BigReal& im() const { return im_; }
  BigReal& re() { return re_; }
  BigReal& im() { return im_; }

  // shared error bound: log2 of the component-wise bound
  double err_log2() const { return std::max(re_.err_log2(), im_.err_log2()); }
  double err() const { return std::exp2(err_log2()); }
  BigComplex& bump_err_log2(double e) {
    re_.bump_err_log2(e);
    im_.bump_err_log2(e);
    return *this;
  }

  bool is_zero() const { return re_.is_zero() && im_.is_zero(); }
  bool is_finite() const { return re_.is_finite() && im_.is_finite(); }
  double mag_log2() const { return log2_add(re_.mag_log2(), im_.mag_log2()); }

  BigComplex operator-() const { return BigComplex(-re_, -im_); }
  bool operator==(const BigComplex& o) const {
    return re_ == o.re_ && im_ == o.im_;
  }

 private:
  BigReal re_, im_;
};

BigComplex operator+(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a, const BigComplex& b);
BigComplex operator*(const BigComplex& a, const BigComplex& b);
BigComplex operator/(const BigComplex& a, const BigComplex& b);
BigComplex operator*(const BigComplex& a, const BigReal& b);
BigComplex operator/(const BigComplex& a, const BigReal& b);
BigComplex conj(const BigComplex& a);
BigReal abs2(const BigComplex& a);
BigReal abs(const BigComplex& a);
BigReal arg(const BigComplex& a);   // atan2(im, re), in (-pi, pi]
BigComplex log(const BigComplex& a);
BigComplex exp(const BigComplex& a);
BigComplex sqrt(const BigComplex& a);  // principal branch
BigComplex expi(const BigReal& theta);
BigComplex pow_si(const BigComplex& a, long e);

inline BigComplex operator+(const BigComplex& a, const BigReal& b) {
  return BigComplex(a.re() + b, a.im());
}
inline BigComplex operator-(const BigComplex& a, const BigReal& b) {
  return BigComplex(a.re() - b, a.im());
}
inline BigComplex operator-(const BigReal& a, const BigComplex& b) {
  return BigComplex(a - b.re(), -b.im());
}
inline BigComplex operator*(const BigReal& a, const BigComplex& b) { return b * a; }
inline BigComplex operator+(const BigComplex& a, long b) {
  return BigComplex(a.re() + b, a.im());
}
inline BigComplex operator-(const BigComplex& a, long b) {
  return BigComplex(a.re() - b, a.im());
}
inline BigComplex operator-(long a, const BigComplex& b) {
  return BigComplex(a - b.re(), -b.im());
}
inline BigComplex operator*(const BigComplex& a, long b) {
  return a * BigReal::from_long(b);
}
inline BigComplex operator/(const BigComplex& a, long b) {
  return a / BigReal::from_long(b);
}
inline BigComplex mul_2si(const BigComplex& a, long e) {
  return BigComplex(mul_2si(a.re(), e), mul_2si(a.im(), e));
}

}  // namespace ellreg::num
