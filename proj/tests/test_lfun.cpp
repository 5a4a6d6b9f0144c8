#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "ellreg/lfun.hpp"
#include "test_support.hpp"

using namespace ellreg::lfun;
using namespace ellreg::num;
using ellreg::Error;
using ellreg::chars::AbelianField;
using ellreg::chars::characters_of;
using ellreg::chars::DirichletCharacter;
using ellreg::curve::EllipticCurveData;
using ts::close;

namespace {

const EllipticCurveData& c11a1() {
  static EllipticCurveData E =
      EllipticCurveData::make("11a1", {0, -1, 1, -10, -20}, 11);
  return E;
}
const EllipticCurveData& c37a1() {
  static EllipticCurveData E =
      EllipticCurveData::make("37a1", {0, 0, 1, -1, 0}, 37);
  return E;
}

// shared long coefficient stream for the slow-convergence cross-checks
const std::vector<long>& an_140k() {
  static std::vector<long> a = ellreg::curve::an_coefficients(c11a1(), 140000);
  return a;
}

DirichletCharacter trivial_chi() { return characters_of(AbelianField::rationals())[0]; }

// the quartic character mod 5 sending 2 to i
DirichletCharacter quartic_chi() {
  for (const DirichletCharacter& chi : characters_of(AbelianField::make(5, {}))) {
    long t = chi.value_exponent(2);
    if (t >= 0 && 4 * t == chi.zeta_order()) return chi;
  }
  REQUIRE(false);
  throw std::logic_error("unreachable");
}

std::complex<double> chi_double(const DirichletCharacter& chi, long n) {
  long t = chi.value_exponent(n);
  if (t < 0) return 0.0;
  double th = 2.0 * M_PI * double(t) / double(chi.zeta_order());
  return {std::cos(th), std::sin(th)};
}

bool is_prime_small(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("lfun");

TEST_CASE("twisted coefficient stream") {
  ScopedPrecision sp(128);
  auto a = ellreg::curve::an_coefficients(c11a1(), 130);

  // trivial character reproduces a_n
  auto b0 = twisted_coefficients(c11a1(), trivial_chi(), 130);
  for (long n = 1; n <= 130; ++n) {
    CHECK(close(b0[n].re(), BigReal::from_long(a[n]), -100.0));
    CHECK(b0[n].im().mag_log2() < -100);
  }

  DirichletCharacter chi = quartic_chi();
  auto b = twisted_coefficients(c11a1(), chi, 130);
  // a_2 = -2 and chi(2) = i give b_2 = -2i
  CHECK(close(b[2], BigComplex::from_long(0, -2), -100.0));
  // chi ramifies at 5
  CHECK(b[5].is_zero());
  CHECK(b[10].is_zero());
  CHECK(b[25].is_zero());
  // multiplicativity and the good-prime recursion with nebentypus chi^2
  CHECK(close(b[6], b[2] * b[3], -100.0));
  BigComplex chi3 = chi.value(3);
  CHECK(close(b[9], b[3] * b[3] - chi3 * chi3 * 3, -100.0));
  // bad prime: b_{121} = b_11^2
  CHECK(close(b[121], b[11] * b[11], -100.0));

  // the trivial character of the mod-5 group is induced from conductor 1,
  // so its stream keeps the Euler factor at 5
  DirichletCharacter ind = characters_of(AbelianField::make(5, {}))[0];
  for (const DirichletCharacter& c : characters_of(AbelianField::make(5, {})))
    if (c.is_trivial()) ind = c;
  CHECK(ind.conductor() == 1);
  auto bi = twisted_coefficients(c11a1(), ind, 130);
  CHECK(close(bi[5].re(), BigReal::from_long(a[5]), -100.0));
  CHECK(!bi[5].is_zero());

  CHECK_THROWS_AS(twisted_coefficients(c11a1(), chi, 0), Error);
}

TEST_CASE("calibration on the untwisted curves") {
  ScopedPrecision sp(128);
  TwistedLData T11 = calibrate(c11a1(), trivial_chi());
  CHECK(T11.calibrated);
  CHECK(T11.level == 11);
  CHECK(close(T11.w, -BigComplex::one(), -80.0));
  CHECK(abs(abs(T11.w) - 1) < ts::R("1e-25"));
  CHECK(T11.residual < ts::R("1e-20"));

  // rank-one curve: w = +1 and the completed value at s=1 vanishes
  TwistedLData T37 = calibrate(c37a1(), trivial_chi());
  CHECK(T37.level == 37);
  CHECK(close(T37.w, BigComplex::one(), -60.0));
  BigComplex lam1 = lambda_value(T37, 1, BigReal::from_long(1));
  CHECK(lam1.mag_log2() < -60);
}

TEST_CASE("calibration of a primitive quartic twist") {
  ScopedPrecision sp(128);
  DirichletCharacter chi = quartic_chi();
  TwistedLData T = calibrate(c11a1(), chi);
  CHECK(T.level == 275);  // 11 * 5^2 for a primitive twist coprime to N
  CHECK(abs(abs(T.w) - 1) < ts::R("1e-20"));

  TwistedLData Tc = calibrate(c11a1(), chi.conjugate());
  CHECK(Tc.level == 275);
  // conjugate twist has the conjugate pseudo-eigenvalue, and their product
  // is 1
  CHECK(close(Tc.w, conj(T.w), -60.0));
  CHECK(close(T.w * Tc.w, BigComplex::one(), -60.0));

  // the full functional equation ties the two twists across s = 0 and s = 2
  BigReal A = BigReal::from_mpq(mpq_class(11, 10));
  BigComplex left = lambda_value(T, 0, A);
  BigComplex right = -T.w * lambda_value(Tc, 2, 1 / A);
  CHECK(abs(left - right) < T.residual * 100 + ts::R("1e-30"));
}

TEST_CASE("calibration refuses a wrong conductor") {
  ScopedPrecision sp(96);
  EllipticCurveData fake =
      EllipticCurveData::make("fake", {0, -1, 1, -10, -20}, 7);
  CHECK_THROWS_AS(calibrate(fake, trivial_chi()), Error);
}

TEST_CASE("lambda_value: cut independence, guards, and L(E,1)") {
  ScopedPrecision sp(128);
  TwistedLData T = calibrate(c11a1(), trivial_chi());

  for (int s : {0, 1, 2}) {
    BigComplex v1 = lambda_value(T, s, BigReal::from_long(1));
    BigComplex v2 = lambda_value(T, s, BigReal::from_mpq(mpq_class(13, 10)));
    CHECK(abs(v1 - v2) < T.residual * 10 + ts::R("1e-35"));
  }

  // s = 0 equals L'(f,0): via w = -1 it must match Lambda(2), evaluated at
  // an unrelated cut
  BigComplex l0 = lambda_value(T, 0, BigReal::from_mpq(mpq_class(6, 5)));
  BigComplex l2 = lambda_value(T, 2, BigReal::from_mpq(mpq_class(10, 9)));
  CHECK(abs(l0 - (-T.w * l2)) < T.residual * 100 + ts::R("1e-30"));
  CHECK(l0.re() > BigReal::zero());
  CHECK(l0.im().mag_log2() < -80);

  // Lambda(1) = (sqrt(11)/2 pi) L(E,1); a slowly convergent smoothed
  // Dirichlet sum gives an independent low-precision value of L(E,1).
  // Gaussian smoothing e^{-(n/X)^2} leaves an O(X^{-1/2}) envelope from the
  // critical strip, so the comparison is only good to a couple of decimals.
  const std::vector<long>& a = an_140k();
  double X = 30000.0;
  double oracle = 0.0;
  for (long n = 1; n <= 140000; ++n) {
    double t = double(n) / X;
    oracle += double(a[n]) / double(n) * std::exp(-t * t);
  }
  CHECK(oracle > 0.2);
  CHECK(oracle < 0.3);
  BigComplex lam1 = lambda_value(T, 1, BigReal::from_long(1));
  BigReal l_of_1 =
      (lam1 * (mul_2si(BigReal::pi(), 1) / sqrt(BigReal::from_long(11)))).re();
  CHECK(close(l_of_1, BigReal::from_double(oracle), -5.0));

  // guards
  TwistedLData raw{trivial_chi(), 11, BigComplex::one(), {}, BigReal::zero(),
                   false};
  CHECK_THROWS_AS(lambda_value(raw, 0, BigReal::from_long(1)), Error);
  CHECK_THROWS_AS(lambda_value(T, 3, BigReal::from_long(1)), Error);
  CHECK_THROWS_AS(lambda_value(T, 1, BigReal::zero()), Error);
}

TEST_CASE("lvalues_all over the rationals and a quartic field") {
  ScopedPrecision sp(128);
  LambdaChi one_row = lvalues_all(c11a1(), AbelianField::rationals());
  REQUIRE(one_row.chis.size() == 1);
  CHECK(close(one_row.product_lprime0, one_row.lprime0[0], -120.0));
  CHECK(close(one_row.lef2, one_row.l2[0], -120.0));
  CHECK(one_row.lprime0[0].re() > BigReal::zero());
  CHECK(one_row.l2[0].re() > BigReal::zero());

  AbelianField F = AbelianField::make(5, {});
  LambdaChi tab = lvalues_all(c11a1(), F);
  REQUIRE(tab.chis.size() == 4);

  BigComplex prod_w = BigComplex::one();
  for (size_t i = 0; i < tab.chis.size(); ++i) {
    // nonvanishing with a sane magnitude envelope
    double m = tab.lprime0[i].mag_log2();
    CHECK(m > -10.0);
    CHECK(m < 10.0);
    prod_w = prod_w * tab.twists[i].w;

    // conjugate character rows are conjugate values
    for (size_t j = 0; j < tab.chis.size(); ++j) {
      if (tab.chis[j] == tab.chis[i].conjugate()) {
        CHECK(close(tab.lprime0[j], conj(tab.lprime0[i]), -60.0));
        CHECK(close(tab.l2[j], conj(tab.l2[i]), -60.0));
      }
    }
  }
  // product of pseudo-eigenvalues is +-1
  CHECK(abs(abs(prod_w) - 1) < ts::R("1e-18"));
  CHECK(prod_w.im().mag_log2() < -60);

  // aggregates are real and reordering the characters leaves them unchanged
  CHECK(tab.product_lprime0.im().mag_log2() < -55);
  CHECK(tab.lef2.im().mag_log2() < -55);
  BigComplex rev = BigComplex::one();
  for (size_t i = tab.chis.size(); i-- > 0;) rev = rev * tab.lprime0[i];
  CHECK(close(rev, tab.product_lprime0, -110.0));
}

TEST_CASE("local Euler factor identity") {
  ScopedPrecision sp(192);
  AbelianField F = AbelianField::make(5, {});

  // p = 2 is inert: both sides equal 1 + 8 X^4 + 16 X^8 at X = 1/7
  LocalFactorResult r = local_factor_identity(c11a1(), F, 2, mpq_class(1, 7));
  mpq_class x(1, 7), x4 = x * x * x * x;
  mpq_class expect = 1 + 8 * x4 + 16 * x4 * x4;
  CHECK(close(r.rhs, BigComplex(BigReal::from_mpq(expect)), -150.0));
  CHECK(r.defect < ts::R("1e-30"));

  // p = 31 = 1 mod 5 is fully split: rhs = (1 - a_p X + p X^2)^4
  long a31 = ellreg::curve::ap(c11a1(), 31);
  LocalFactorResult s = local_factor_identity(c11a1(), F, 31, mpq_class(2, 9));
  mpq_class y(2, 9);
  mpq_class base = 1 - a31 * y + 31 * y * y;
  mpq_class expect4 = base * base * base * base;
  CHECK(close(s.rhs, BigComplex(BigReal::from_mpq(expect4)), -150.0));
  CHECK(s.defect < ts::R("1e-40"));

  // ramified inputs are refused
  CHECK_THROWS_AS(local_factor_identity(c11a1(), F, 11, x), Error);
  CHECK_THROWS_AS(local_factor_identity(c11a1(), F, 5, x), Error);

  // the defect is pure rounding: it shrinks as precision grows
  double d64, d256;
  {
    ScopedPrecision p1(64);
    d64 = local_factor_identity(c11a1(), F, 3, mpq_class(1, 5)).defect.mag_log2();
  }
  {
    ScopedPrecision p2(256);
    d256 =
        local_factor_identity(c11a1(), F, 3, mpq_class(1, 5)).defect.mag_log2();
  }
  CHECK(d64 < -40.0);
  CHECK(d256 < -215.0);
  CHECK(d256 < d64 - 100.0);
}

TEST_CASE("partial Euler product meets the smoothed Dirichlet sum") {
  // Both evaluations of prod_chi L(f x chi, 5/2) are slow to converge: the
  // Euler product is cut at p <= 10^4 (tail ~ sum_{p>1e4} 8 sqrt(p) p^{-5/2}
  // ~ 1e-4) and the Dirichlet series is summed to 1.4e5 with Gaussian
  // smoothing of scale 1e4 (bias ~ 1/X ~ 1e-4).  The envelope for the match
  // is 1e-3.
  AbelianField F = AbelianField::make(5, {});
  std::vector<DirichletCharacter> chis;
  for (const DirichletCharacter& c : characters_of(F))
    chis.push_back(c.primitive());
  const std::vector<long>& a = an_140k();
  const long ncut = 140000;
  using cd = std::complex<double>;

  std::vector<cd> A(ncut + 1, 0.0);
  for (long n = 1; n <= ncut; ++n) A[n] = double(a[n]) * chi_double(chis[0], n);
  for (size_t k = 1; k < chis.size(); ++k) {
    std::vector<cd> b(ncut + 1, 0.0);
    for (long n = 1; n <= ncut; ++n)
      b[n] = double(a[n]) * chi_double(chis[k], n);
    std::vector<cd> C(ncut + 1, 0.0);
    for (long d = 1; d <= ncut; ++d) {
      if (A[d] == cd(0.0)) continue;
      for (long e = 1; d * e <= ncut; ++e) C[d * e] += A[d] * b[e];
    }
    A = std::move(C);
  }
  cd smoothed = 0.0;
  for (long n = 1; n <= ncut; ++n) {
    double t = double(n) / 10000.0;
    smoothed += A[n] * std::pow(double(n), -2.5) * std::exp(-t * t);
  }

  cd euler = 1.0;
  for (long p = 2; p <= 10000; ++p) {
    if (!is_prime_small(p)) continue;
    double ap = double(a[p]);  // a at a prime index
    if (11 % p == 0) {
      // bad prime: linear local factor per character
      for (const auto& chi : chis) euler /= (1.0 - ap * chi_double(chi, p) * std::pow(double(p), -2.5));
      continue;
    }
    for (const auto& chi : chis) {
      cd cp = chi_double(chi, p);
      cd loc = 1.0 - ap * cp * std::pow(double(p), -2.5) +
               cp * cp * std::pow(double(p), -4.0);
      euler /= loc;
    }
  }

  CHECK(std::abs(smoothed.imag()) < 1e-6);
  CHECK(std::abs(euler.imag()) < 1e-6);
  CHECK(std::abs(smoothed - euler) < 1e-3);
}

TEST_SUITE_END();
