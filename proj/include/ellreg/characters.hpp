#pragma once

#include <vector>

#include "ellreg/precision.hpp"

namespace ellreg::chars {

using num::BigComplex;

// (Z/mZ)^x decomposed into cyclic factors with fixed generators: the least
// primitive root for each odd prime power, and the -1, 5 presentation at
// powers of two.  Exponent vectors on these generators drive all character
// arithmetic exactly.
struct UnitGroup {
  long m = 1;
  long phi = 1;
  long exponent = 1;                    // lcm of the component orders
  std::vector<long> gens;               // CRT-lifted residues mod m
  std::vector<long> orders;
  std::vector<std::vector<long>> dlog;  // per residue a in [0, m); empty if gcd(a,m)>1

  static const UnitGroup& of(long m);

  bool coprime(long a) const;
  long reduce(long a) const;            // representative in [0, m)
  const std::vector<long>* dlog_of(long a) const;
};

class DirichletCharacter {
 public:
  // exps[i] in [0, orders[i]): the character sends gens[i] to
  // e^{2 pi i exps[i]/orders[i]}.
  DirichletCharacter(long m, std::vector<long> exps);

  long modulus() const { return m_; }
  const std::vector<long>& exponents() const { return exps_; }
  long order() const { return order_; }
  long conductor() const { return conductor_; }
  bool even() const { return even_; }

  bool is_trivial() const { return order_ == 1; }

  // exponent t with chi(a) = e^{2 pi i t / L}, L = exponent of the unit
  // group; -1 when gcd(a, m) > 1.
  long value_exponent(long a) const;
  long zeta_order() const;

  BigComplex value(long a) const;

  DirichletCharacter power(long k) const;
  DirichletCharacter conjugate() const;

  // The primitive character of modulus conductor() inducing this one; self
  // when already primitive.  Values agree on arguments coprime to the
  // modulus, and differ exactly on residues coprime to the conductor but
  // not to the modulus (where the induced character vanishes).
  DirichletCharacter primitive() const;

  bool operator==(const DirichletCharacter& o) const {
    return m_ == o.m_ && exps_ == o.exps_;
  }

 private:
  long m_;
  std::vector<long> exps_;
  long order_;
  long conductor_;
  bool even_;
};

struct AbelianField {
  long m = 1;
  std::vector<long> subgroup_gens;
  std::vector<long> H;        // sorted residues of the subgroup
  std::vector<long> cosets;   // minimal representatives, sorted; cosets[0] = 1
  long d = 1;                 // [ (Z/m)^x : H ] = [F : Q]
  bool is_real = true;

  static AbelianField make(long m, const std::vector<long>& subgroup_gens);
  static AbelianField rationals() { return make(1, {}); }

  bool in_H(long a) const;
  long coset_rep(long a) const;
};

std::vector<DirichletCharacter> characters_of(const AbelianField& F);

BigComplex character_value(const DirichletCharacter& chi, long a);

std::vector<std::vector<size_t>> galois_orbits(
    const std::vector<DirichletCharacter>& chars);

struct SplittingData {
  long f;  // residue degree: order of the coset pH in G
  long g;  // number of primes above p: d / f
};

SplittingData splitting_data(const AbelianField& F, long p);

}  // namespace ellreg::chars
