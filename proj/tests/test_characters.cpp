#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "ellreg/characters.hpp"
#include "test_support.hpp"

using namespace ellreg::chars;
using namespace ellreg::num;
using ts::close;

TEST_SUITE_BEGIN("characters");

TEST_CASE("unit group decompositions") {
  const UnitGroup& u5 = UnitGroup::of(5);
  CHECK(u5.phi == 4);
  CHECK(u5.orders == std::vector<long>{4});
  CHECK(u5.gens == std::vector<long>{2});

  const UnitGroup& u8 = UnitGroup::of(8);
  CHECK(u8.phi == 4);
  CHECK(u8.orders == std::vector<long>{2, 2});

  const UnitGroup& u16 = UnitGroup::of(16);
  CHECK(u16.phi == 8);
  CHECK(u16.orders == std::vector<long>{2, 4});

  const UnitGroup& u15 = UnitGroup::of(15);
  CHECK(u15.phi == 8);
  CHECK(u15.exponent == 4);

  const UnitGroup& u1 = UnitGroup::of(1);
  CHECK(u1.phi == 1);
  CHECK(u1.gens.empty());

  // dlog tables really invert exponentiation
  for (long m : {5L, 8L, 12L, 15L, 16L, 21L}) {
    const UnitGroup& ug = UnitGroup::of(m);
    for (long a = 1; a < m; ++a) {
      if (std::gcd(a, m) != 1) continue;
      const auto* k = ug.dlog_of(a);
      REQUIRE(k != nullptr);
      long prod = 1;
      for (size_t i = 0; i < ug.gens.size(); ++i) {
        long p = 1;
        for (long t = 0; t < (*k)[i]; ++t) p = p * ug.gens[i] % m;
        prod = prod * p % m;
      }
      CHECK(prod == a);
    }
  }
}

TEST_CASE("fields from the three spec-grade examples") {
  AbelianField f5 = AbelianField::make(5, {});
  CHECK(f5.d == 4);
  CHECK(!f5.is_real);
  CHECK(f5.H == std::vector<long>{1});

  AbelianField f11 = AbelianField::make(11, {10});
  CHECK(f11.d == 5);
  CHECK(f11.is_real);
  CHECK(f11.H == std::vector<long>{1, 10});

  AbelianField f5q = AbelianField::make(5, {4});
  CHECK(f5q.d == 2);
  CHECK(f5q.is_real);

  AbelianField q = AbelianField::rationals();
  CHECK(q.d == 1);
  CHECK(q.is_real);

  CHECK_THROWS_AS(AbelianField::make(10, {5}), ellreg::Error);
}

TEST_CASE("characters_of counts, orders, closure") {
  AbelianField f5 = AbelianField::make(5, {});
  auto chars = characters_of(f5);
  REQUIRE(chars.size() == 4);
  std::multiset<long> orders;
  for (auto& c : chars) orders.insert(c.order());
  CHECK(orders == std::multiset<long>{1, 2, 4, 4});
  CHECK(chars[0].is_trivial());
  // closed under conjugation
  for (auto& c : chars) {
    bool found = false;
    for (auto& d : chars) found = found || d == c.conjugate();
    CHECK(found);
  }

  AbelianField f11 = AbelianField::make(11, {10});
  auto c11 = characters_of(f11);
  REQUIRE(c11.size() == 5);
  for (auto& c : c11) CHECK(c.even());

  AbelianField f5q = AbelianField::make(5, {4});
  auto cq = characters_of(f5q);
  REQUIRE(cq.size() == 2);
  CHECK(cq[0].is_trivial());
  CHECK(cq[1].order() == 2);
  std::vector<long> legendre;
  for (long a = 1; a <= 4; ++a)
    legendre.push_back(cq[1].value(a).re().to_long());
  CHECK(legendre == std::vector<long>{1, -1, -1, 1});
}

TEST_CASE("character values as exact roots of unity") {
  ScopedPrecision sp(192);
  AbelianField f5 = AbelianField::make(5, {});
  auto chars = characters_of(f5);
  const DirichletCharacter& quad = chars[1];
  CHECK(quad.order() == 2);
  CHECK(quad.value(7).re().to_long() == -1);  // chi(2) = -1
  for (auto& c : chars) CHECK(c.value(5).is_zero());
  for (auto& c : chars) CHECK(c.value(10).is_zero());

  // an order-4 character with chi(2) = i has chi(3) = -i since 3 = 2^3
  const DirichletCharacter* quartic_i = nullptr;
  for (auto& c : chars)
    if (c.order() == 4 && close(c.value(2), BigComplex::i(), -180.0))
      quartic_i = &c;
  REQUIRE(quartic_i != nullptr);
  CHECK(close(quartic_i->value(3), -BigComplex::i(), -180.0));

  // multiplicativity at the exponent level, all pairs mod 21
  AbelianField f21 = AbelianField::make(21, {});
  for (auto& c : characters_of(f21)) {
    long L = c.zeta_order();
    for (long a = 1; a < 21; ++a)
      for (long b = a; b < 21; ++b) {
        if (std::gcd(a * b, 21L) != 1) continue;
        CHECK((c.value_exponent(a) + c.value_exponent(b)) % L ==
              c.value_exponent(a * b % 21));
      }
  }
}

TEST_CASE("orthogonality exact over moduli up to 200") {
  // Over the full dual, the multiset { t_chi(a) : chi } of zeta_L exponents
  // is exactly each multiple of L/r taken phi(m)/r times, where r is the
  // multiplicative order of a; the sum of those roots of unity is phi(m)
  // for a = 1 and 0 otherwise, with no floating point involved.
  for (long m : {3L, 5L, 8L, 11L, 15L, 24L, 35L, 100L, 200L}) {
    AbelianField F = AbelianField::make(m, {});
    auto chars = characters_of(F);
    long L = UnitGroup::of(m).exponent;
    long phi = UnitGroup::of(m).phi;
    for (long a = 1; a < m; ++a) {
      if (std::gcd(a, m) != 1) continue;
      long r = 1, x = a;
      while (x != 1) {
        x = x * a % m;
        ++r;
      }
      std::map<long, long> count;
      for (auto& c : chars) count[c.value_exponent(a)]++;
      CHECK(count.size() == static_cast<size_t>(r));
      for (long j = 0; j < r; ++j) {
        CHECK(count[j * (L / r)] == phi / r);
      }
    }
  }
}

TEST_CASE("subgroup orthogonality: sum over dual of G") {
  AbelianField F = AbelianField::make(11, {10});
  auto chars = characters_of(F);
  for (long a = 1; a < 11; ++a) {
    std::map<long, long> count;
    for (auto& c : chars) count[c.value_exponent(a)]++;
    if (F.in_H(a)) {
      CHECK(count[0] == F.d);
    } else {
      // five 5th roots of unity, one each
      CHECK(count.size() == 5);
      for (auto& [t, k] : count) CHECK(k == 1);
    }
  }
}

TEST_CASE("conductors and induced values") {
  for (long m : {12L, 15L, 21L}) {
    AbelianField F = AbelianField::make(m, {});
    for (auto& c : characters_of(F)) {
      long f = c.conductor();
      CHECK(m % f == 0);
      if (c.is_trivial()) CHECK(f == 1);
      // exactly one primitive character mod f induces c: equality of values
      // compared exactly as fractions t/L
      AbelianField sub = AbelianField::make(f, {});
      int matches = 0;
      for (auto& cf : characters_of(sub)) {
        bool match = true;
        for (long a = 1; a < m; ++a) {
          if (std::gcd(a, m) != 1) continue;
          if (c.value_exponent(a) * cf.zeta_order() !=
              cf.value_exponent(a % f) * c.zeta_order())
            match = false;
        }
        if (match) {
          ++matches;
          CHECK(cf.conductor() == f);
        }
      }
      CHECK(matches == 1);
    }
  }
  // mod 15: the three non-principal characters factoring through mod 5
  int with_cond5 = 0;
  for (auto& c : characters_of(AbelianField::make(15, {})))
    if (c.conductor() == 5) ++with_cond5;
  CHECK(with_cond5 == 3);
}

TEST_CASE("primitive avatars") {
  for (long m : {12L, 15L, 21L, 45L}) {
    for (auto& c : characters_of(AbelianField::make(m, {}))) {
      DirichletCharacter p = c.primitive();
      CHECK(p.modulus() == c.conductor());
      CHECK(p.conductor() == c.conductor());
      CHECK(p.order() == c.order());
      // values agree on residues coprime to the full modulus, exactly
      for (long a = 1; a < m; ++a) {
        if (std::gcd(a, m) != 1) continue;
        CHECK(c.value_exponent(a) * p.zeta_order() ==
              p.value_exponent(a) * c.zeta_order());
      }
      // a primitive character is its own avatar
      CHECK(p.primitive() == p);
      // the avatar is nonzero wherever only the extra part of m intervenes
      for (long a = 1; a < m; ++a)
        if (std::gcd(a, m) != 1 && std::gcd(a, c.conductor()) == 1)
          CHECK(p.value_exponent(a) >= 0);
    }
  }
}

TEST_CASE("parity counts") {
  for (auto [m, gens, want_even] :
       std::vector<std::tuple<long, std::vector<long>, long>>{
           {5, {}, 2}, {11, {10}, 5}, {7, {}, 3}, {8, {}, 2}, {15, {}, 4}}) {
    AbelianField F = AbelianField::make(m, gens);
    auto chars = characters_of(F);
    long even = 0;
    for (auto& c : chars)
      if (c.even()) ++even;
    CHECK(even == want_even);
    if (F.is_real) CHECK(even == F.d);
    if (!F.is_real) CHECK(even == F.d / 2);
  }
}

TEST_CASE("galois orbits") {
  AbelianField f5 = AbelianField::make(5, {});
  auto chars = characters_of(f5);
  auto orbits = galois_orbits(chars);
  REQUIRE(orbits.size() == 3);
  CHECK(orbits[0].size() == 1);
  CHECK(orbits[1].size() == 1);
  CHECK(orbits[2].size() == 2);

  AbelianField f11 = AbelianField::make(11, {10});
  auto orb11 = galois_orbits(characters_of(f11));
  REQUIRE(orb11.size() == 2);
  CHECK(orb11[0].size() == 1);
  CHECK(orb11[1].size() == 4);

  AbelianField q = AbelianField::rationals();
  auto orbq = galois_orbits(characters_of(q));
  REQUIRE(orbq.size() == 1);
  CHECK(orbq[0].size() == 1);
}

TEST_CASE("splitting data") {
  AbelianField f5 = AbelianField::make(5, {});
  auto s7 = splitting_data(f5, 7);
  CHECK(s7.f == 4);
  CHECK(s7.g == 1);
  auto s11 = splitting_data(f5, 11);
  CHECK(s11.f == 1);
  CHECK(s11.g == 4);
  CHECK_THROWS_AS(splitting_data(f5, 5), ellreg::Error);

  AbelianField f11 = AbelianField::make(11, {10});
  auto s23 = splitting_data(f11, 23);
  CHECK(s23.f == 1);
  CHECK(s23.g == 5);
  // 2 generates (Z/11)^x so its coset has order 5 in G
  auto s2 = splitting_data(f11, 2);
  CHECK(s2.f == 5);
  CHECK(s2.g == 1);

  AbelianField q = AbelianField::rationals();
  CHECK(splitting_data(q, 13).f == 1);
}

TEST_SUITE_END();
