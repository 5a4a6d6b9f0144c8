#pragma once

#include <optional>
#include <vector>

#include "ellreg/precision.hpp"

namespace ellreg::num {

struct RationalGuess {
  mpz_class num;
  mpz_class den;       // > 0, gcd(num, den) = 1
  BigReal residual;    // |x - num/den|
  mpz_class height;    // max(|num|, den)

  mpq_class value() const { return mpq_class(num, den); }
};

// Continued-fraction convergents of x, stopping at the first one within tol
// and height bound; that convergent is also the one of least height.
std::optional<RationalGuess> rational_reconstruct(const BigReal& x,
                                                  const mpz_class& max_height,
                                                  const BigReal& tol);

// In-place LLL reduction with exact rational Gram-Schmidt data,
// delta = delta_num/delta_den (default 0.99).
void lll_reduce(std::vector<std::vector<mpz_class>>& basis,
                long delta_num = 99, long delta_den = 100);

// Smallest integer vector (max-norm, then lexicographic absolute value, then
// leading coefficient positive) with |c_i| <= coeff_bound and
// |sum c_i v_i| <= 10^(-digits/2), searched by scaled-lattice reduction with
// scale 10^(0.8 digits) at the ambient precision.  None if the reduced basis
// offers no qualifying vector.
std::optional<std::vector<mpz_class>> integer_relation(
    const std::vector<BigReal>& v, const mpz_class& coeff_bound);

}  // namespace ellreg::num
