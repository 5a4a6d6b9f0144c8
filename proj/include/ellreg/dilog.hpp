#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ellreg/characters.hpp"
#include "ellreg/curve.hpp"
#include "ellreg/precision.hpp"

namespace ellreg::dilog {

using curve::PeriodLattice;
using curve::TorusPoint;
using num::BigComplex;
using num::BigReal;

// Formal Z-linear combination of torus points.  Construction reduces every
// point to the fundamental square, merges duplicates, and drops zero terms.
struct Divisor {
  std::vector<std::pair<long, TorusPoint>> terms;

  static Divisor make(const std::vector<std::pair<long, TorusPoint>>& raw);
  long degree() const;
};

// One divisor per coset representative of G = (Z/m)^x / H.
struct GaloisDivisor {
  std::vector<std::pair<long, Divisor>> orbit;

  const Divisor& at(long sigma) const;
};

// Character-weighted sums over the orbit and the resulting regulator values.
struct CharacterSums {
  std::vector<chars::DirichletCharacter> chis;
  std::vector<BigComplex> s_d;  // sum_sigma chi(sigma) D(ell^sigma)
  std::vector<BigComplex> s_j;  // sum_sigma chi(sigma) J(ell^sigma)
  std::vector<BigComplex> mu;   // -s_d/(2 pi) even, -s_j/(4 pi Im tau) odd
  std::vector<std::string> warnings;
};

// Precision-driven truncation index for the q-series sums below.
long q_series_cutoff(const PeriodLattice& L);

// Elliptic dilogarithm: two-sided sum of the Bloch-Wigner function over the
// q-orbit of u(P).  extra_terms widens the truncation beyond the
// precision-driven cutoff (validation aid).
BigReal elliptic_D(const PeriodLattice& L, const TorusPoint& P,
                   long extra_terms = 0);
BigReal elliptic_D(const PeriodLattice& L, const Divisor& D,
                   long extra_terms = 0);

// Elliptic counterpart of log|x| log|1-x| with its cubic correction term.
BigReal elliptic_J(const PeriodLattice& L, const TorusPoint& P,
                   long extra_terms = 0);
BigReal elliptic_J(const PeriodLattice& L, const Divisor& D,
                   long extra_terms = 0);

// Raw J sum at unreduced lattice coordinates z = r + s tau; the reduced
// version above equals this at the fundamental representative.  Exposed so
// translation invariance can be checked directly.
BigReal elliptic_J_at(const PeriodLattice& L, const BigReal& r,
                      const BigReal& s, long extra_terms = 0);

// Convolution divisor sum_{i,j} m_i n_j [P_i - Q_j] of two degree-zero
// divisors whose weighted point sums vanish on the torus.
Divisor beta_convolution(const Divisor& divF, const Divisor& divG);

// Eisenstein-Kronecker series sum over 0 < |m + n tau| <= cutoff_R of
//   e^{2 pi i (s m - r n)} * conj(lambda) / |lambda|^4,   lambda = m + n tau,
// accumulated annulus by annulus (k-1 < |lambda| <= k), lexicographic within
// an annulus.  The attached error estimate is C / cutoff_R with C = 7/Im tau
// from the integral bound on the 1/|lambda|^3 tail.  Serial and OpenMP
// evaluation orders coincide, so results agree bit for bit.
BigComplex kronecker_sum(const PeriodLattice& L, const TorusPoint& z,
                         long cutoff_R, bool parallel = true);

// Validates the conjugation compatibility of the orbit: the divisor at
// rep(c * sigma), c the class of -1, must equal the complex conjugate of the
// divisor at sigma as a multiset, to tolerance 2^(-bits/2).
bool conjugation_compatible(const chars::AbelianField& F,
                            const PeriodLattice& L, const GaloisDivisor& ell);

CharacterSums character_sums(const chars::AbelianField& F,
                             const PeriodLattice& L, const GaloisDivisor& ell);

}  // namespace ellreg::dilog
