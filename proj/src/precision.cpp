#include "ellreg/precision.hpp"

#include <algorithm>
#include <cstring>

namespace ellreg::num {

namespace {

thread_local PrecisionContext g_ctx{256, 32};

long work_prec() { return std::max<long>(g_ctx.work_bits(), MPFR_PREC_MIN); }

// log2 of one rounding ulp of r, or -inf when the operation was exact
double ulp_term(mpfr_srcptr r, int ternary) {
  if (ternary == 0 || !mpfr_regular_p(r)) return -HUGE_VAL;
  return static_cast<double>(mpfr_get_exp(r)) -
         static_cast<double>(mpfr_get_prec(r)) + 1.0;
}

}  // namespace

const PrecisionContext& ctx() { return g_ctx; }
void set_ctx(const PrecisionContext& c) { g_ctx = c; }

long digits_of(const PrecisionContext& c) {
  return static_cast<long>(static_cast<double>(c.bits) * 0.30102999566398);
}

long bits_for_digits(long digits) {
  return static_cast<long>(static_cast<double>(digits) / 0.30102999566398) + 8;
}

double log2_add(double a, double b) {
  if (a == -HUGE_VAL) return b;
  if (b == -HUGE_VAL) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp2(lo - hi)) * 1.4426950408889634;
}

BigReal::BigReal() : elog2_(HUGE_VAL) { mpfr_init2(v_, work_prec()); }

BigReal::BigReal(long prec_bits) : elog2_(HUGE_VAL) {
  mpfr_init2(v_, std::max<long>(prec_bits, MPFR_PREC_MIN));
}

BigReal::BigReal(const BigReal& o) : elog2_(o.elog2_) {
  mpfr_init2(v_, mpfr_get_prec(o.v_));
  mpfr_set(v_, o.v_, MPFR_RNDN);
}

BigReal::BigReal(BigReal&& o) noexcept : elog2_(o.elog2_) {
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_swap(v_, o.v_);
}

BigReal& BigReal::operator=(const BigReal& o) {
  if (this != &o) {
    mpfr_set_prec(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
    elog2_ = o.elog2_;
  }
  return *this;
}

BigReal& BigReal::operator=(BigReal&& o) noexcept {
  if (this != &o) {
    mpfr_swap(v_, o.v_);
    elog2_ = o.elog2_;
  }
  return *this;
}

BigReal::~BigReal() { mpfr_clear(v_); }

BigReal BigReal::from_long(long v) {
  BigReal r;
  int t = mpfr_set_si(r.v_, v, MPFR_RNDN);
  r.elog2_ = ulp_term(r.v_, t);
  return r;
}

BigReal BigReal::from_double(double v) {
  BigReal r;
  int t = mpfr_set_d(r.v_, v, MPFR_RNDN);
  r.elog2_ = ulp_term(r.v_, t);
  return r;
}

BigReal BigReal::from_mpz(const mpz_class& v) {
  BigReal r;
  int t = mpfr_set_z(r.v_, v.get_mpz_t(), MPFR_RNDN);
  r.elog2_ = ulp_term(r.v_, t);
  return r;
}

BigReal BigReal::from_mpq(const mpq_class& v) {
  BigReal r;
  int t = mpfr_set_q(r.v_, v.get_mpq_t(), MPFR_RNDN);
  r.elog2_ = ulp_term(r.v_, t);
  return r;
}

BigReal BigReal::from_string(const std::string& s) {
  BigReal r;
  if (s.find('/') != std::string::npos) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) raise(ErrorKind::ParseError, "bad rational: " + s);
    q.canonicalize();
    return from_mpq(q);
  }
  int t = mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN);
  if (t == -1 && !mpfr_nan_p(r.v_)) raise(ErrorKind::ParseError, "bad number: " + s);
  r.elog2_ = ulp_term(r.v_, 1);
  if (mpfr_zero_p(r.v_)) r.elog2_ = -HUGE_VAL;
  return r;
}

BigReal BigReal::nan() { return BigReal(); }

BigReal BigReal::zero() {
  BigReal r;
  mpfr_set_zero(r.v_, 1);
  r.elog2_ = -HUGE_VAL;
  return r;
}

BigReal BigReal::pi() {
  BigReal r;
  int t = mpfr_const_pi(r.v_, MPFR_RNDN);
  r.elog2_ = ulp_term(r.v_, t);
  return r;
}

BigReal BigReal::euler_gamma() {
  BigReal r;
  int t = mpfr_const_euler(r.v_, MPFR_RNDN);
  r.elog2_ = ulp_term(r.v_, t);
  return r;
}

BigReal BigReal::log2const() {
  BigReal r;
  int t = mpfr_const_log2(r.v_, MPFR_RNDN);
  r.elog2_ = ulp_term(r.v_, t);
  return r;
}

double BigReal::mag_log2() const {
  if (mpfr_zero_p(v_)) return -HUGE_VAL;
  if (!mpfr_number_p(v_)) return HUGE_VAL;
  return static_cast<double>(mpfr_get_exp(v_));
}

mpz_class BigReal::round_to_mpz() const {
  if (!is_finite()) raise(ErrorKind::DomainError, "rounding non-finite value");
  mpz_class z;
  mpfr_get_z(z.get_mpz_t(), v_, MPFR_RNDN);
  return z;
}

mpq_class BigReal::to_mpq_exact() const {
  if (!is_finite()) raise(ErrorKind::DomainError, "no rational value");
  if (mpfr_zero_p(v_)) return mpq_class(0);
  mpz_class m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), v_);
  mpq_class q(m);
  if (e >= 0) {
    mpz_mul_2exp(mpq_numref(q.get_mpq_t()), mpq_numref(q.get_mpq_t()), e);
  } else {
    mpz_mul_2exp(mpq_denref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()), -e);
  }
  q.canonicalize();
  return q;
}

std::string BigReal::to_decimal(long digits) const {
  if (mpfr_nan_p(v_)) return "nan";
  if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
  if (mpfr_zero_p(v_)) return "0";
  mpfr_exp_t e;
  char* s = mpfr_get_str(nullptr, &e, 10, digits, v_, MPFR_RNDN);
  std::string d(s);
  mpfr_free_str(s);
  std::string sign;
  if (d[0] == '-') {
    sign = "-";
    d.erase(0, 1);
  }
  while (d.size() > 1 && d.back() == '0') d.pop_back();
  std::string out = sign + d.substr(0, 1);
  if (d.size() > 1) out += "." + d.substr(1);
  out += "e" + std::to_string(static_cast<long>(e) - 1);
  return out;
}

BigReal BigReal::round_to(long prec_bits) const {
  BigReal r(prec_bits);
  int t = mpfr_set(r.v_, v_, MPFR_RNDN);
  r.elog2_ = log2_add(elog2_, ulp_term(r.v_, t));
  return r;
}

BigReal BigReal::operator-() const {
  BigReal r(prec());
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  r.elog2_ = elog2_;
  return r;
}

BigReal operator+(const BigReal& a, const BigReal& b) {
  BigReal r;
  int t = mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
  r.elog2_ = log2_add(log2_add(a.elog2_, b.elog2_), ulp_term(r.v_, t));
  return r;
}

BigReal operator-(const BigReal& a, const BigReal& b) {
  BigReal r;
  int t = mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
  r.elog2_ = log2_add(log2_add(a.elog2_, b.elog2_), ulp_term(r.v_, t));
  return r;
}

BigReal operator*(const BigReal& a, const BigReal& b) {
  BigReal r;
  int t = mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
  double e = log2_add(a.elog2_ + b.mag_log2(), b.elog2_ + a.mag_log2());
  r.elog2_ = log2_add(e, ulp_term(r.v_, t));
  return r;
}

BigReal operator/(const BigReal& a, const BigReal& b) {
  BigReal r;
  int t = mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
  double mb = b.mag_log2() - 1;
  double e = log2_add(a.elog2_ - mb, b.elog2_ + r.mag_log2() - mb);
  r.elog2_ = log2_add(e, ulp_term(r.v_, t));
  return r;
}

BigReal abs(const BigReal& a) {
  BigReal r(a.prec());
  mpfr_abs(r.v_, a.v_, MPFR_RNDN);
  r.elog2_ = a.elog2_;
  return r;
}

BigReal sqrt(const BigReal& a) {
  if (a.sgn() < 0) raise(ErrorKind::DomainError, "sqrt of negative real");
  BigReal r;
  int t = mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
  double e = a.elog2_ == -HUGE_VAL ? -HUGE_VAL : a.elog2_ - r.mag_log2();
  r.elog2_ = log2_add(e, ulp_term(r.v_, t));
  return r;
}

BigReal log(const BigReal& a) {
  if (a.sgn() <= 0) raise(ErrorKind::DomainError, "log of non-positive real");
  BigReal r;
  int t = mpfr_log(r.v_, a.v_, MPFR_RNDN);
  double e = a.elog2_ == -HUGE_VAL ? -HUGE_VAL : a.elog2_ - (a.mag_log2() - 1);
  r.elog2_ = log2_add(e, ulp_term(r.v_, t));
  return r;
}

BigReal exp(const BigReal& a) {
  BigReal r;
  int t = mpfr_exp(r.v_, a.v_, MPFR_RNDN);
  double e = a.elog2_ == -HUGE_VAL ? -HUGE_VAL : a.elog2_ + r.mag_log2();
  r.elog2_ = log2_add(e, ulp_term(r.v_, t));
  return r;
}

BigReal sin(const BigReal& a) {
  BigReal r;
  int t = mpfr_sin(r.v_, a.v_, MPFR_RNDN);
  r.elog2_ = log2_add(a.elog2_, ulp_term(r.v_, t));
  return r;
}

BigReal cos(const BigReal& a) {
  BigReal r;
  int t = mpfr_cos(r.v_, a.v_, MPFR_RNDN);
  r.elog2_ = log2_add(a.elog2_, ulp_term(r.v_, t));
  return r;
}

BigReal atan2(const BigReal& y, const BigReal& x) {
  BigReal r;
  int t = mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
  double m = std::max(x.mag_log2(), y.mag_log2()) - 1;
  double e = std::max(x.elog2_, y.elog2_);
  if (e != -HUGE_VAL) e -= m;
  r.elog2_ = log2_add(e, ulp_term(r.v_, t));
  return r;
}

BigReal pow_si(const BigReal& a, long e) {
  BigReal r;
  int t = mpfr_pow_si(r.v_, a.v_, e, MPFR_RNDN);
  double rel = a.elog2_ == -HUGE_VAL
                   ? -HUGE_VAL
                   : a.elog2_ - (a.mag_log2() - 1) +
                         std::log2(static_cast<double>(std::max(1L, std::abs(e))));
  double err = rel == -HUGE_VAL ? -HUGE_VAL : rel + r.mag_log2();
  r.elog2_ = log2_add(err, ulp_term(r.v_, t));
  return r;
}

BigReal mul_2si(const BigReal& a, long e) {
  BigReal r(a.prec());
  mpfr_mul_2si(r.v_, a.v_, e, MPFR_RNDN);
  r.elog2_ = a.elog2_ == -HUGE_VAL ? -HUGE_VAL : a.elog2_ + static_cast<double>(e);
  return r;
}

BigReal floor(const BigReal& a) {
  BigReal r;
  int t = mpfr_rint_floor(r.v_, a.v_, MPFR_RNDN);
  r.elog2_ = log2_add(a.elog2_, ulp_term(r.v_, t));
  return r;
}

BigReal eint_neg(const BigReal& a) {
  BigReal r, m;
  mpfr_neg(m.raw(), a.v_, MPFR_RNDN);
  int t = mpfr_eint(r.v_, m.raw(), MPFR_RNDN);
  mpfr_neg(r.v_, r.v_, MPFR_RNDN);
  double drv = -a.to_double() * 1.4426950408889634 -
               std::max(a.mag_log2(), -64.0);
  double e = a.elog2_ == -HUGE_VAL ? -HUGE_VAL : a.elog2_ + drv;
  r.elog2_ = log2_add(e, ulp_term(r.v_, t));
  return r;
}

BigComplex BigComplex::from_long(long re, long im) {
  return BigComplex(BigReal::from_long(re), BigReal::from_long(im));
}

BigComplex operator+(const BigComplex& a, const BigComplex& b) {
  return BigComplex(a.re() + b.re(), a.im() + b.im());
}

BigComplex operator-(const BigComplex& a, const BigComplex& b) {
  return BigComplex(a.re() - b.re(), a.im() - b.im());
}

BigComplex operator*(const BigComplex& a, const BigComplex& b) {
  return BigComplex(a.re() * b.re() - a.im() * b.im(),
                    a.re() * b.im() + a.im() * b.re());
}

BigComplex operator*(const BigComplex& a, const BigReal& b) {
  return BigComplex(a.re() * b, a.im() * b);
}

BigComplex operator/(const BigComplex& a, const BigReal& b) {
  return BigComplex(a.re() / b, a.im() / b);
}

BigComplex operator/(const BigComplex& a, const BigComplex& b) {
  BigReal d = abs2(b);
  return BigComplex((a.re() * b.re() + a.im() * b.im()) / d,
                    (a.im() * b.re() - a.re() * b.im()) / d);
}

BigComplex conj(const BigComplex& a) { return BigComplex(a.re(), -a.im()); }

BigReal abs2(const BigComplex& a) {
  return a.re() * a.re() + a.im() * a.im();
}

BigReal abs(const BigComplex& a) {
  BigReal r;
  int t = mpfr_hypot(r.raw(), a.re().raw(), a.im().raw(), MPFR_RNDN);
  r.set_err_log2(log2_add(std::max(a.re().err_log2(), a.im().err_log2()),
                          ulp_term(r.raw(), t)));
  return r;
}

BigReal arg(const BigComplex& a) { return atan2(a.im(), a.re()); }

BigComplex log(const BigComplex& a) {
  return BigComplex(log(abs(a)), arg(a));
}

BigComplex exp(const BigComplex& a) {
  BigReal m = exp(a.re());
  BigReal c, s;
  mpfr_sin_cos(s.raw(), c.raw(), a.im().raw(), MPFR_RNDN);
  double e = log2_add(a.im().err_log2(), -static_cast<double>(c.prec()) + 1);
  c.set_err_log2(e);
  s.set_err_log2(e);
  return BigComplex(m * c, m * s);
}

BigComplex expi(const BigReal& theta) {
  BigReal c, s;
  mpfr_sin_cos(s.raw(), c.raw(), theta.raw(), MPFR_RNDN);
  double e = log2_add(theta.err_log2(), -static_cast<double>(c.prec()) + 1);
  c.set_err_log2(e);
  s.set_err_log2(e);
  return BigComplex(std::move(c), std::move(s));
}

BigComplex sqrt(const BigComplex& a) {
  if (a.im().is_zero() && a.re().sgn() >= 0)
    return BigComplex(sqrt(a.re()), BigReal::zero());
  BigReal m = sqrt(abs(a));
  BigReal half = mul_2si(arg(a), -1);
  return expi(half) * m;
}

BigComplex pow_si(const BigComplex& a, long e) {
  if (e == 0) return BigComplex::one();
  unsigned long n = e > 0 ? e : -e;
  BigComplex base = a, acc = BigComplex::one();
  bool first = true;
  while (n) {
    if (n & 1) {
      acc = first ? base : acc * base;
      first = false;
    }
    n >>= 1;
    if (n) base = base * base;
  }
  if (e < 0) return BigComplex::one() / acc;
  return acc;
}

}  // namespace ellreg::num
