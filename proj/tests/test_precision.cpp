#include "doctest.h"
#include "ellreg/precision.hpp"
#include "test_support.hpp"

using namespace ellreg::num;
using ts::close;
using ts::R;
using ts::Rq;

TEST_SUITE_BEGIN("precision");

TEST_CASE("context defaults and scoping") {
  CHECK(ctx().bits >= 64);
  long before = ctx().bits;
  {
    ScopedPrecision sp(512);
    CHECK(ctx().bits == 512);
    {
      ScopedPrecision inner(128, 16);
      CHECK(ctx().bits == 128);
      CHECK(ctx().guard_bits == 16);
    }
    CHECK(ctx().bits == 512);
  }
  CHECK(ctx().bits == before);
  CHECK_THROWS_AS(ScopedPrecision bad(32), ellreg::Error);
}

TEST_CASE("construction and exact roundtrips") {
  ScopedPrecision sp(192);
  BigReal x = Rq(1, 3);
  CHECK(x.err_log2() < -180);
  CHECK(x.err_log2() > -260);

  BigReal d = BigReal::from_double(0.8125);
  CHECK(d.err_log2() == -HUGE_VAL);
  CHECK(d.to_mpq_exact() == mpq_class(13, 16));

  CHECK(BigReal::from_long(-7).to_mpq_exact() == mpq_class(-7));
  CHECK(R("1/3") == Rq(1, 3));
  CHECK(R("2.5e3").to_mpq_exact() == mpq_class(2500));
  CHECK_THROWS_AS(R("zzz"), ellreg::Error);
  CHECK(BigReal::zero().is_zero());
  CHECK(BigReal::nan().is_nan());
}

TEST_CASE("field arithmetic hits exact rationals") {
  ScopedPrecision sp(256);
  BigReal a = Rq(1, 3), b = Rq(1, 6);
  CHECK(close(a + b, Rq(1, 2), -250.0));
  CHECK(close(a * b, Rq(1, 18), -250.0));
  CHECK(close(a / b, BigReal::from_long(2), -250.0));
  CHECK(close(a - b, Rq(1, 6), -250.0));
  CHECK((-a).sgn() == -1);
  CHECK(abs(-a) == a);
  CHECK(close(pow_si(Rq(3, 2), 5), Rq(243, 32), -240.0));
  CHECK(close(pow_si(Rq(3, 2), -2), Rq(4, 9), -240.0));
  CHECK(mul_2si(a, 3).to_mpq_exact() == a.to_mpq_exact() * 8);
}

TEST_CASE("error model tracks additive accumulation") {
  ScopedPrecision sp(128);
  BigReal s = BigReal::zero();
  for (int i = 1; i <= 1000; ++i) s = s + Rq(1, i);
  // ~2000 rounded ops, each an ulp of a value of size ~8
  CHECK(s.err_log2() < -128 + 20);
  CHECK(s.err_log2() > -160);
  BigReal p = BigReal::pi();
  CHECK(p.err_log2() < -150);
}

TEST_CASE("transcendental functions at 256 bits") {
  ScopedPrecision sp(256);
  BigReal two = BigReal::from_long(2);
  CHECK(close(exp(log(two)), two, -250.0));
  CHECK(close(log(exp(two)), two, -250.0));
  CHECK(close(sin(BigReal::pi()), BigReal::zero(), -250.0));
  CHECK(close(sqrt(two) * sqrt(two), two, -250.0));
  CHECK(close(atan2(BigReal::from_long(1), BigReal::from_long(1)),
              BigReal::pi() / 4, -250.0));
  CHECK(close(atan2(BigReal::zero(), BigReal::from_long(-1)), BigReal::pi(),
              -250.0));
  CHECK_THROWS_AS(log(BigReal::zero()), ellreg::Error);
  CHECK_THROWS_AS(sqrt(BigReal::from_long(-1)), ellreg::Error);
}

TEST_CASE("decimal rendering") {
  ScopedPrecision sp(128);
  CHECK(BigReal::from_long(1234).to_decimal(8) == "1.234e3");
  CHECK(BigReal::from_long(-5).to_decimal(4) == "-5e0");
  CHECK(BigReal::zero().to_decimal(10) == "0");
  CHECK(Rq(1, 8).to_decimal(6) == "1.25e-1");
  std::string pi = BigReal::pi().to_decimal(20);
  CHECK(pi.substr(0, 12) == "3.1415926535");
}

TEST_CASE("complex ring and polar pieces") {
  ScopedPrecision sp(256);
  BigComplex a(Rq(1, 1), Rq(2, 1));
  BigComplex b(Rq(3, 1), Rq(4, 1));
  BigComplex p = a * b;
  CHECK(close(p, BigComplex(BigReal::from_long(-5), BigReal::from_long(10)),
              -250.0));
  BigComplex q = p / b;
  CHECK(close(q, a, -248.0));
  CHECK(close(abs2(a), BigReal::from_long(5), -250.0));
  CHECK(close(abs(BigComplex(Rq(3, 1), Rq(4, 1))), BigReal::from_long(5),
              -248.0));
  CHECK(close(conj(a).im(), -a.im(), -250.0));

  BigComplex i = BigComplex::i();
  CHECK(close(arg(i), BigReal::pi() / 2, -250.0));
  CHECK(close(sqrt(BigComplex::from_long(-1)), i, -250.0));
  CHECK(close(exp(log(b)), b, -245.0));
  CHECK(close(expi(BigReal::pi() / 2), i, -250.0));
  CHECK(close(pow_si(i, 3), -i, -250.0));
  CHECK(close(pow_si(b, -2) * pow_si(b, 2), BigComplex::one(), -245.0));
}

TEST_CASE("principal square root stays on the good half-plane") {
  ScopedPrecision sp(128);
  for (int k = 0; k < 50; ++k) {
    BigComplex z(BigReal::from_double(ts::uniform(-4, 4)),
                 BigReal::from_double(ts::uniform(-4, 4)));
    if (z.is_zero()) continue;
    BigComplex s = sqrt(z);
    CHECK(close(s * s, z, -110.0));
    CHECK(s.re().sgn() >= 0);
  }
}

TEST_SUITE_END();
