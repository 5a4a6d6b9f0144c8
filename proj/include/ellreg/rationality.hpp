#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ellreg/characters.hpp"
#include "ellreg/curve.hpp"
#include "ellreg/dilog.hpp"
#include "ellreg/lfun.hpp"
#include "ellreg/reconstruct.hpp"

namespace ellreg::rat {

using chars::AbelianField;
using chars::DirichletCharacter;
using curve::ApCache;
using curve::EllipticCurveData;
using dilog::GaloisDivisor;
using num::BigComplex;
using num::BigReal;
using num::RationalGuess;

enum class Verdict { PASS, FAIL, INDETERMINATE };

const char* to_string(Verdict v);

// Acceptance gate for rational fits at the ambient precision:
// 10^(-digits/2), with digits the decimal count of the active context.
BigReal accept_tol();

// One character's line in a rationality check: the regulator sum on its
// side of the parity split, the quotient expected to be rational, and the
// accepted fraction when the continued-fraction fit passes the gate.
struct ChiRow {
  DirichletCharacter chi{1, {}};
  bool even = true;
  long level = 0;        // functional-equation level of the twist
  BigComplex w;          // pseudo-eigenvalue
  BigReal residual;      // calibration residual of the twist
  BigComplex lprime0;    // L'(f x chi, 0)
  BigComplex l2;         // L(f x chi, 2)
  BigComplex s_d;        // sum_sigma chi(sigma) D(ell^sigma)
  BigComplex s_j;        // sum_sigma chi(sigma) J(ell^sigma)
  BigComplex ratio;      // quotient tested for rationality
  std::optional<RationalGuess> guess;
  bool indeterminate = false;  // divisor side indistinguishable from zero
  std::string note;
};

struct RationalityReport {
  std::vector<ChiRow> rows;
  Verdict verdict = Verdict::FAIL;
  bool revalidated = false;  // PASS was confirmed at 1.5x the precision
  std::vector<std::string> warnings;
};

// Per-character test of the first-derivative identity: for even chi the
// quotient pi L'(f x chi, 0) / S_D(chi) should be rational, for odd chi
// pi Im(tau) L'(f x chi, 0) / S_J(chi).  A character whose regulator sum
// falls below ten times its own error estimate is marked indeterminate
// rather than divided through.  PASS requires an accepted fraction for
// every character, fractions constant on Galois orbits, and agreement when
// everything is recomputed at 1.5x the working precision.
RationalityReport theorem1_check(const EllipticCurveData& E,
                                 const AbelianField& F,
                                 const GaloisDivisor& ell,
                                 const mpz_class& max_height = 100000000,
                                 ApCache* cache = nullptr);

// Group matrix a(sigma_i^{-1} sigma_j) over the cosets of F; a holds one
// value per entry of F.cosets, in order.
std::vector<std::vector<BigComplex>> group_matrix(
    const AbelianField& F, const std::vector<BigComplex>& a);

// Determinant by Gaussian elimination with modulus pivoting.
BigComplex determinant(std::vector<std::vector<BigComplex>> m);

// Half-size blocks for a complex field: reps lists one representative per
// coset of <c> in G, c the class of -1, and the blocks evaluate x resp. y
// at rep_i^{-1} rep_j (a well-defined element of G).  When x is even and y
// is odd under multiplication by c,
//   det(group_matrix(x + y)) = 2^d det(even_block) det(odd_block).
struct ConjugationBlocks {
  std::vector<long> reps;
  std::vector<std::vector<BigComplex>> even_block;
  std::vector<std::vector<BigComplex>> odd_block;
};

ConjugationBlocks conjugation_blocks(const AbelianField& F,
                                     const std::vector<BigComplex>& x,
                                     const std::vector<BigComplex>& y);

// Determinant form of the rationality statement.  Over a real field the
// quotient L(E/F, 2) / (pi^d det A) is tested, A the group matrix of the
// values D(ell^sigma); over a complex field the matrix splits into the two
// half-size blocks above, built from D and J values, and the quotient is
// L(E/F, 2) Im(tau)^{d/2} / (pi^d det D-block det J-block).  The report
// also records whether the group matrix satisfies its exact eigenvector
// identity A v_chi = S_D(chi) v_chi, v_chi = (chi(sigma_j))_j.
struct CorollaryReport {
  Verdict verdict = Verdict::FAIL;
  bool complex_case = false;
  BigComplex det_full;  // d x d group matrix of D values
  BigComplex det_d;     // D block (equals det_full over a real field)
  BigComplex det_j;     // J block (one, by convention, over a real field)
  BigComplex ratio;
  std::optional<RationalGuess> guess;
  bool eigen_ok = false;
  bool revalidated = false;
  std::vector<std::string> warnings;
};

CorollaryReport corollary_check(const EllipticCurveData& E,
                                const AbelianField& F,
                                const GaloisDivisor& ell,
                                const mpz_class& max_height = 100000000,
                                ApCache* cache = nullptr);

// Derivative-to-value comparison over the whole field:
//   pi^{2d} prod_chi L'(f x chi, 0) / L(E/F, 2)
// is tested for rationality and cross-checked against the exact value
// sign * prod_chi M_chi / 4^d forced by the functional equations, where
// M_chi is the level of the twist and sign = (-1)^d prod_chi w_chi.
// Multiplying the quotient by dfact = d! converts to the convention where
// the d-th derivative of L(E/F, s) at 0 replaces the product of first
// derivatives.
struct Prop13Report {
  Verdict verdict = Verdict::FAIL;
  BigComplex ratio;
  std::optional<RationalGuess> guess;
  mpq_class expected_abs;  // prod levels / 4^d
  int expected_sign = 0;   // (-1)^d prod w, rounded to the nearest unit
  mpz_class dfact = 1;     // d!
  bool matches_expected = false;
  bool revalidated = false;
  std::vector<std::string> warnings;
};

Prop13Report prop13_check(const EllipticCurveData& E, const AbelianField& F,
                          const mpz_class& max_height = 100000000,
                          ApCache* cache = nullptr);

// Integer-relation search over a pool of candidate divisors: looks for
// integers c_k, not all zero and bounded by coeff_bound, a denominator
// h <= coeff_bound, and integers p_chi with
//   sum_k c_k S(chi, ell_k) = (p_chi / h) * target_chi   for every chi,
// where target_chi is pi L'(f x chi, 0) for even chi and
// pi Im(tau) L'(f x chi, 0) for odd chi and S is the matching regulator
// sum.  Candidates come from one reduced lattice per h (smallest h wins);
// a hit is re-verified in exact arithmetic against accept_tol() and then
// recomputed at 1.5x the precision before being returned.  The report
// describes the combined divisor sum_k c_k ell_k.
struct SearchResult {
  std::vector<mpz_class> coeffs;   // c_k, first nonzero entry positive
  long denominator = 1;            // h
  std::vector<mpq_class> ratios;   // r_chi = p_chi / h, reduced
  RationalityReport report;
};

std::optional<SearchResult> search_divisor(
    const EllipticCurveData& E, const AbelianField& F,
    const std::vector<GaloisDivisor>& pool, const mpz_class& coeff_bound,
    ApCache* cache = nullptr);

}  // namespace ellreg::rat
