#include "ellreg/lfun.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <utility>

#include "ellreg/errors.hpp"
#include "ellreg/special.hpp"

namespace ellreg::lfun {

namespace {

using num::ctx;
using num::digits_of;
using num::expi;
using num::mul_2si;

// Terms of the split sums decay like e^{-2 pi n scale / sqrt(M)}; this many
// of them push the tail below the working precision, with the documented
// constant bits * ln 2 + ln M in the exponent.  Slow halves (scale < 1)
// get proportionally more terms.
long truncation_length(long M, double scale) {
  double bits = static_cast<double>(ctx().bits);
  double base = std::sqrt(static_cast<double>(M)) / (2.0 * M_PI) *
                (bits * M_LN2 + std::log(static_cast<double>(M)));
  return static_cast<long>(std::ceil(base * std::max(1.0, 1.0 / scale))) + 8;
}

// Gamma(s, x) for the three integer arguments the completed sum needs.
BigReal upper_gamma(int s, const BigReal& x) {
  switch (s) {
    case 0: return num::exp_integral_E1(x);
    case 1: return exp(-x);
    case 2: return exp(-x) * (1 + x);
    default: raise(ErrorKind::DomainError, "upper_gamma wants s in {0,1,2}");
  }
}

// One half of the incomplete-gamma split:
//   sum_n b~_n (sqrt(M)/(2 pi n))^s Gamma(s, 2 pi n scale / sqrt(M))
// with b~ the plain or conjugated coefficients.  Accumulation is chunked in
// fixed order (partials of 256 terms, combined ascending) so the result does
// not depend on how callers are scheduled.
BigComplex split_half(const std::vector<BigComplex>& b, bool conj_b, int s,
                      long M, const BigReal& scale) {
  double scale_d = std::exp2(scale.mag_log2());
  long n_max = truncation_length(M, scale_d);
  if (static_cast<long>(b.size()) <= n_max)
    raise(ErrorKind::InternalError,
          "coefficient stream too short for the requested cut parameter");

  BigReal sqrtM = sqrt(BigReal::from_long(M));
  BigReal two_pi = mul_2si(BigReal::pi(), 1);
  BigReal step = two_pi * scale / sqrtM;  // Gamma argument is step * n
  BigReal wbase = sqrtM / two_pi;         // weight is (wbase / n)^s

  std::vector<BigComplex> parts;
  BigComplex chunk = BigComplex::zero();
  for (long n = 1; n <= n_max; ++n) {
    if (!b[n].is_zero()) {
      BigReal g = upper_gamma(s, step * n);
      if (s >= 1) {
        BigReal w = wbase / n;
        g = g * (s == 2 ? w * w : w);
      }
      chunk = chunk + (conj_b ? conj(b[n]) : b[n]) * g;
    }
    if (n % 256 == 0) {
      parts.push_back(chunk);
      chunk = BigComplex::zero();
    }
  }
  parts.push_back(chunk);
  BigComplex total = BigComplex::zero();
  for (const BigComplex& p : parts) total = total + p;

  // first dropped term: |b_n| <= n, weight <= M, gamma factor <= e^{-x_n}
  double tail = -static_cast<double>(ctx().bits) +
                std::log2(static_cast<double>(M)) +
                std::log2(static_cast<double>(n_max) + 1.0) + 3.0;
  total.bump_err_log2(tail);
  return total;
}

// The twisted stream is built from the primitive character attached to chi:
// an induced character vanishes on residues sharing a factor with its
// modulus, but the Artin factorization of L(E/F, s) wants the primitive
// avatar, whose values there are the nonzero conductor-level ones.
std::vector<BigComplex> twist_stream(const std::vector<long>& a,
                                     const DirichletCharacter& chi_in) {
  DirichletCharacter chi = chi_in.primitive();
  long zord = chi.zeta_order();
  BigReal two_pi = mul_2si(BigReal::pi(), 1);
  std::vector<BigComplex> roots(zord);
  roots[0] = BigComplex::one();
  for (long j = 1; j < zord; ++j) roots[j] = expi(two_pi * j / zord);
  std::vector<BigComplex> b(a.size(), BigComplex::zero());
  for (size_t n = 1; n < a.size(); ++n) {
    long t = chi.value_exponent(static_cast<long>(n));
    if (t >= 0 && a[n] != 0) b[n] = roots[t] * a[n];
  }
  return b;
}

std::vector<long> divisors_of(long v) {
  std::vector<long> divs;
  for (long d = 1; d * d <= v; ++d)
    if (v % d == 0) {
      divs.push_back(d);
      if (d != v / d) divs.push_back(v / d);
    }
  std::sort(divs.begin(), divs.end());
  return divs;
}

BigReal residual_gate() {
  // 10^(-0.4 * decimal digits)
  BigReal e = BigReal::from_long(-2) * digits_of(ctx()) / 5;
  return exp(e * log(BigReal::from_long(10)));
}

// Core of calibrate once the coefficient stream is in hand.
TwistedLData calibrate_impl(long conductor, const DirichletCharacter& chi,
                            std::vector<BigComplex> b) {
  long mc = chi.conductor();
  long NM = conductor * mc * mc;

  BigReal A1 = BigReal::from_long(1);
  BigReal A2 = BigReal::from_mpq(mpq_class(13, 10));
  BigReal A3 = BigReal::from_mpq(mpq_class(17, 10));

  long best_level = 0;
  BigComplex best_w;
  BigReal best_res;
  bool have_best = false;

  for (long M : divisors_of(NM)) {
    BigComplex s1a1 = split_half(b, false, 1, M, A1);
    BigComplex s2a1 = split_half(b, true, 1, M, 1 / A1);
    BigComplex s1a2 = split_half(b, false, 1, M, A2);
    BigComplex s2a2 = split_half(b, true, 1, M, 1 / A2);
    BigComplex den = s2a2 - s2a1;
    if (den.mag_log2() < -static_cast<double>(ctx().bits) / 2) continue;
    BigComplex w = (s1a2 - s1a1) / den;

    BigComplex s1a3 = split_half(b, false, 1, M, A3);
    BigComplex s2a3 = split_half(b, true, 1, M, 1 / A3);
    BigReal res = abs((s1a3 - w * s2a3) - (s1a1 - w * s2a1));
    if (!have_best || res < best_res) {
      have_best = true;
      best_level = M;
      best_w = w;
      best_res = res;
    }
  }

  BigReal gate = residual_gate();
  if (!have_best || best_res > gate)
    raise(ErrorKind::CalibrationFailed,
          "no candidate level satisfies the functional equation "
          "(level-lowering twist or wrong conductor?)");
  BigReal w_defect = abs(abs(best_w) - 1);
  if (w_defect > gate && w_defect > best_res * 10)
    raise(ErrorKind::CalibrationFailed,
          "pseudo-eigenvalue is off the unit circle");

  return TwistedLData{chi, best_level, best_w, std::move(b), best_res, true};
}

long stream_length_for(long conductor, const DirichletCharacter& chi) {
  long mc = chi.conductor();
  return truncation_length(conductor * mc * mc, 1.0 / 1.7) + 8;
}

}  // namespace

std::vector<BigComplex> twisted_coefficients(const EllipticCurveData& E,
                                             const DirichletCharacter& chi,
                                             long n_max, ApCache* cache) {
  if (n_max < 1) raise(ErrorKind::DomainError, "n_max must be positive");
  return twist_stream(curve::an_coefficients(E, n_max, cache), chi);
}

BigComplex lambda_value(const TwistedLData& T, int s, const BigReal& cutA) {
  if (!T.calibrated)
    raise(ErrorKind::NotCalibrated, "lambda_value needs a calibrated twist");
  if (s < 0 || s > 2)
    raise(ErrorKind::DomainError, "lambda_value supports s in {0,1,2}");
  if (!(BigReal::zero() < cutA))
    raise(ErrorKind::DomainError, "cutA must be positive");
  BigComplex first = split_half(T.coeffs, false, s, T.level, cutA);
  BigComplex second = split_half(T.coeffs, true, 2 - s, T.level, 1 / cutA);
  return first - T.w * second;
}

TwistedLData calibrate(const EllipticCurveData& E,
                       const DirichletCharacter& chi, ApCache* cache) {
  long n_need = stream_length_for(E.conductor, chi);
  return calibrate_impl(E.conductor, chi,
                        twisted_coefficients(E, chi, n_need, cache));
}

LambdaChi lvalues_all(const EllipticCurveData& E, const AbelianField& F,
                      ApCache* cache, bool parallel) {
  std::vector<DirichletCharacter> chis = chars::characters_of(F);
  long n = static_cast<long>(chis.size());

  long n_need = 1;
  for (const DirichletCharacter& chi : chis)
    n_need = std::max(n_need, stream_length_for(E.conductor, chi));
  std::vector<long> a = curve::an_coefficients(E, n_need, cache);

  std::vector<std::optional<TwistedLData>> twists(chis.size());
  std::vector<BigComplex> lprime0(chis.size());
  std::vector<BigComplex> l2(chis.size());
  std::vector<std::exception_ptr> errs(chis.size());

  BigReal one = BigReal::from_long(1);
  BigReal four_pi2;
  {
    BigReal pi = BigReal::pi();
    four_pi2 = mul_2si(pi * pi, 2);
  }

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      TwistedLData T = calibrate_impl(E.conductor, chis[i],
                                      twist_stream(a, chis[i]));
      lprime0[i] = lambda_value(T, 0, one);
      l2[i] = lambda_value(T, 2, one) * (four_pi2 / T.level);
      twists[i] = std::move(T);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  }
  for (long i = 0; i < n; ++i)
    if (errs[i]) std::rethrow_exception(errs[i]);

  LambdaChi out;
  out.chis = std::move(chis);
  out.lprime0 = std::move(lprime0);
  out.l2 = std::move(l2);
  out.product_lprime0 = BigComplex::one();
  out.lef2 = BigComplex::one();
  for (long i = 0; i < n; ++i) {
    out.twists.push_back(std::move(*twists[i]));
    out.product_lprime0 = out.product_lprime0 * out.lprime0[i];
    out.lef2 = out.lef2 * out.l2[i];
  }
  return out;
}

LocalFactorResult local_factor_identity(const EllipticCurveData& E,
                                        const AbelianField& F, long p,
                                        const mpq_class& x0) {
  if (p < 2) raise(ErrorKind::DomainError, "p must be a prime >= 2");
  if (E.conductor % p == 0)
    raise(ErrorKind::RamifiedPrime, "p divides the conductor of E");
  if (F.m % p == 0)
    raise(ErrorKind::RamifiedPrime, "p ramifies in F");

  long app = curve::ap(E, p);
  BigReal X = BigReal::from_mpq(x0);
  BigComplex lhs = BigComplex::one();
  for (const DirichletCharacter& chi : chars::characters_of(F)) {
    BigComplex c = chi.value(p);
    BigComplex factor = BigComplex::one() - c * (X * app) + c * c * (X * X * p);
    lhs = lhs * factor;
  }

  chars::SplittingData sd = chars::splitting_data(F, p);
  mpz_class t_prev = 2, tf = app;
  for (long k = 2; k <= sd.f; ++k) {
    mpz_class t_next = app * tf - p * t_prev;
    t_prev = tf;
    tf = t_next;
  }

  auto mpq_pow = [](const mpq_class& q, unsigned long e) {
    mpq_class r;
    mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), e);
    mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), e);
    return r;
  };
  mpq_class xf = mpq_pow(x0, static_cast<unsigned long>(sd.f));
  mpz_class pf;
  mpz_ui_pow_ui(pf.get_mpz_t(), static_cast<unsigned long>(p),
                static_cast<unsigned long>(sd.f));
  mpq_class factor = 1 - mpq_class(tf) * xf + mpq_class(pf) * xf * xf;
  mpq_class rhs_q = mpq_pow(factor, static_cast<unsigned long>(sd.g));

  LocalFactorResult out{lhs, BigComplex(BigReal::from_mpq(rhs_q)),
                        BigReal::zero()};
  out.defect = abs(out.lhs - out.rhs);
  return out;
}

}  // namespace ellreg::lfun
