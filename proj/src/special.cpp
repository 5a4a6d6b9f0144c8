#include "ellreg/special.hpp"

#include <deque>
#include <mutex>

namespace ellreg::num {

const mpq_class& bernoulli_mpq(unsigned n) {
  static std::mutex mu;
  static std::deque<mpq_class> cache{mpq_class(1), mpq_class(-1, 2)};
  std::lock_guard<std::mutex> lock(mu);
  while (cache.size() <= n) {
    unsigned m = cache.size();
    // sum_{j=0}^{m} C(m+1, j) B_j = 0
    mpq_class s(0);
    mpz_class binom;
    for (unsigned j = 0; j < m; ++j) {
      mpz_bin_uiui(binom.get_mpz_t(), m + 1, j);
      s += mpq_class(binom) * cache[j];
    }
    cache.push_back(-s / mpq_class(m + 1));
  }
  return cache[n];
}

namespace {

BigReal pi_sq_over_6() {
  BigReal p = BigReal::pi();
  return p * p / 6;
}

// sum x^n / n^2 for |x| <= ~0.25
BigComplex li2_series(const BigComplex& x) {
  long wb = ctx().work_bits();
  BigComplex acc = x;
  BigComplex p = x;
  for (long n = 2; n < 8 * wb; ++n) {
    p = p * x;
    BigComplex term = p / (n * n);
    acc = acc + term;
    if (term.mag_log2() < -(wb + 4)) {
      acc.bump_err_log2(term.mag_log2());
      return acc;
    }
  }
  raise(ErrorKind::NonConvergence, "li2 series did not reach tolerance");
}

// sum_{k>=1} B_{k-1} u^k / k!  with u = -log(1-x); converges for |u| < 2*pi
// and covers the annulus the series and the two reductions leave open.
BigComplex li2_log_series(const BigComplex& x) {
  long wb = ctx().work_bits();
  BigComplex u = -log(BigComplex::one() - x);
  BigComplex u2 = u * u;
  // k = 1 and k = 2 terms; only even Bernoulli numbers appear afterwards.
  BigComplex acc = u - u2 / 4;
  BigComplex c = u;  // u^(2j+1) / (2j+1)!
  for (unsigned j = 1; j < static_cast<unsigned>(8 * wb); ++j) {
    c = c * u2 / static_cast<long>(2 * j * (2 * j + 1));
    BigComplex term = c * BigReal::from_mpq(bernoulli_mpq(2 * j));
    acc = acc + term;
    if (term.mag_log2() < -(wb + 4)) {
      acc.bump_err_log2(term.mag_log2());
      return acc;
    }
  }
  raise(ErrorKind::NonConvergence, "li2 log-series did not reach tolerance");
}

}  // namespace

BigComplex li2(const BigComplex& x) {
  if (!x.is_finite()) raise(ErrorKind::DomainError, "li2 of non-finite value");
  if (x.is_zero()) return BigComplex::zero();
  if (x.im().is_zero() && x.re() == BigReal::from_long(1))
    return BigComplex(pi_sq_over_6());

  BigComplex z = x;
  // Affine corrections accumulated by the two reductions: result = sign * li2(z) + add.
  int sign = 1;
  BigComplex add = BigComplex::zero();

  // |z| > 1: z -> 1/z, using li2(z) = -li2(1/z) - pi^2/6 - log^2(-z)/2.
  if (cmp(abs2(z), BigReal::from_long(1)) > 0) {
    BigComplex l = log(-z);
    add = add - BigComplex(pi_sq_over_6()) - mul_2si(l * l, -1);
    z = BigComplex::one() / z;
    sign = -sign;
  }
  // Re z > 1/2: z -> 1-z, using li2(z) = pi^2/6 - log(z)log(1-z) - li2(1-z).
  if (cmp(mul_2si(z.re(), 1), BigReal::from_long(1)) > 0) {
    BigComplex w = BigComplex::one() - z;
    BigComplex corr = BigComplex(pi_sq_over_6()) - log(z) * log(w);
    add = sign == 1 ? add + corr : add - corr;
    z = w;
    sign = -sign;
  }

  BigComplex core = cmp(abs2(z), BigReal::from_mpq(mpq_class(1, 16))) <= 0
                        ? li2_series(z)
                        : li2_log_series(z);
  BigComplex r = sign == 1 ? add + core : add - core;
  r.bump_err_log2(-static_cast<double>(ctx().bits) +
                  static_cast<double>(ctx().guard_bits) / 4 +
                  std::max(0.0, r.mag_log2()));
  return r;
}

BigReal bloch_wigner_D(const BigComplex& x) {
  if (!x.is_finite()) return BigReal::zero();
  if (x.im().is_zero()) return BigReal::zero();
  if (x.is_zero()) return BigReal::zero();
  BigComplex l = li2(x);
  BigReal loga = mul_2si(log(abs2(x)), -1);
  BigReal d = l.im() + arg(BigComplex::one() - x) * loga;
  return d;
}

BigReal jay(const BigComplex& x) {
  if (x.is_zero()) raise(ErrorKind::DomainError, "jay at 0");
  if (x.im().is_zero() && x.re() == BigReal::from_long(1))
    return BigReal::zero();
  BigReal loga = mul_2si(log(abs2(x)), -1);
  BigReal logb = mul_2si(log(abs2(BigComplex::one() - x)), -1);
  return loga * logb;
}

BigReal exp_integral_E1(const BigReal& x) {
  if (!(x.sgn() > 0)) raise(ErrorKind::DomainError, "E1 needs x > 0");
  return eint_neg(x);
}

BigComplex agm(const BigComplex& a0, const BigComplex& b0) {
  if (a0.is_zero() || b0.is_zero())
    raise(ErrorKind::DomainError, "agm of zero");
  {
    BigComplex r = a0 / b0;
    if (r.im().is_zero() && r.re().sgn() <= 0)
      raise(ErrorKind::DomainError, "agm ratio on the negative real axis");
  }
  long wb = ctx().work_bits();
  BigComplex a = a0, b = b0;
  for (long it = 0; it < 4 * ctx().bits; ++it) {
    BigComplex diff = a - b;
    if (diff.is_zero() || diff.mag_log2() - a.mag_log2() < -(wb - 8)) {
      BigComplex r = mul_2si(a + b, -1);
      r.bump_err_log2(diff.mag_log2());
      return r;
    }
    BigComplex an = mul_2si(a + b, -1);
    BigComplex g = sqrt(a * b);
    int c = cmp(abs2(an - g), abs2(an + g));
    if (c > 0) {
      g = -g;
    } else if (c == 0 && (g / an).im().sgn() < 0) {
      g = -g;
    }
    a = an;
    b = g;
  }
  raise(ErrorKind::NonConvergence, "agm iteration limit");
}

}  // namespace ellreg::num
