#pragma once

#include <gmpxx.h>

#include <vector>

#include "ellreg/characters.hpp"
#include "ellreg/curve.hpp"
#include "ellreg/precision.hpp"

namespace ellreg::lfun {

using chars::AbelianField;
using chars::DirichletCharacter;
using curve::ApCache;
using curve::EllipticCurveData;
using num::BigComplex;
using num::BigReal;

// Coefficients b_n of the twisted Dirichlet series sum b_n n^{-s}:
// b_n = a_n chi*(n) for every n, where chi* is the primitive character
// attached to chi, vanishing exactly when n shares a factor with the
// conductor of chi.  This is the unique multiplicative stream with
// b_p = a_p chi*(p), the good-prime recursion
// b_{p^{k+1}} = b_p b_{p^k} - chi*(p)^2 p b_{p^{k-1}} (nebentypus chi^2),
// and b_{p^k} = b_p^k at primes dividing the conductor of the curve.
// Index 0 is unused and set to zero.
std::vector<BigComplex> twisted_coefficients(const EllipticCurveData& E,
                                             const DirichletCharacter& chi,
                                             long n_max,
                                             ApCache* cache = nullptr);

// A twist f x chi with its completed-L data: the level M of the twisted
// form, the pseudo-eigenvalue w in Lambda(s) = -w Lambda~(2-s) (~ marking
// the conjugate twist), the coefficient stream, and the residual of the
// functional-equation consistency probe that fixed M and w.
struct TwistedLData {
  DirichletCharacter chi;
  long level = 0;
  BigComplex w;
  std::vector<BigComplex> coeffs;
  BigReal residual;
  bool calibrated = false;
};

// Completed value Lambda(s) = M^{s/2} (2 pi)^{-s} Gamma(s) L(s) for
// s in {0, 1, 2}, evaluated by the incomplete-gamma split at cut parameter
// cutA > 0:
//   Lambda(s) = sum_n b_n (sqrt(M)/2 pi n)^s     Gamma(s,   2 pi n cutA / sqrt(M))
//             - w sum_n conj(b_n) (sqrt(M)/2 pi n)^{2-s} Gamma(2-s, 2 pi n / (cutA sqrt(M)))
// with Gamma(2,x) = e^{-x}(1+x), Gamma(1,x) = e^{-x}, Gamma(0,x) = E_1(x).
// The result is independent of cutA up to the recorded residual.  Throws
// NotCalibrated when T has no calibration, DomainError for bad s or cutA,
// InternalError when the stored coefficient stream is too short for cutA.
BigComplex lambda_value(const TwistedLData& T, int s, const BigReal& cutA);

// Fixes the level and pseudo-eigenvalue numerically: for each divisor M of
// N m^2, solve for w from agreement of lambda_value at cut parameters 1 and
// 1.3 (linear in w), probe at 1.7, and keep the M with the smallest probe
// residual.  Requires the winner's residual to be at most 10^(-0.4 * decimal
// digits) and | |w| - 1 | to pass the same gate; otherwise throws
// CalibrationFailed (e.g. for level-lowering twists, which this toolkit
// refuses rather than guesses).
TwistedLData calibrate(const EllipticCurveData& E,
                       const DirichletCharacter& chi,
                       ApCache* cache = nullptr);

// Per-character table of the two special values the rationality statements
// consume, plus their products over the character group.
struct LambdaChi {
  std::vector<DirichletCharacter> chis;
  std::vector<TwistedLData> twists;
  std::vector<BigComplex> lprime0;  // L'(f x chi, 0) = Lambda(f x chi, 0)
  std::vector<BigComplex> l2;       // L(f x chi, 2)
  BigComplex product_lprime0;       // prod_chi L'(f x chi, 0)
  BigComplex lef2;                  // L(E/F, 2) = prod_chi L(f x chi, 2)
};

LambdaChi lvalues_all(const EllipticCurveData& E, const AbelianField& F,
                      ApCache* cache = nullptr, bool parallel = true);

// Factorization identity for the degree-2d local Euler factor at a prime p
// unramified in F and good for E:
//   prod_chi (1 - a_p chi(p) X + chi(p)^2 p X^2)
//     = (1 - t_f X^f + p^f X^{2f})^g
// with (f, g) the splitting data of p and t_k the trace recursion t_0 = 2,
// t_1 = a_p, t_k = a_p t_{k-1} - p t_{k-2}.  The left side is evaluated
// numerically at X = x0, the right side exactly in rational arithmetic, and
// defect = |lhs - rhs| shrinks to rounding level as precision grows.
struct LocalFactorResult {
  BigComplex lhs;
  BigComplex rhs;
  BigReal defect;
};

LocalFactorResult local_factor_identity(const EllipticCurveData& E,
                                        const AbelianField& F, long p,
                                        const mpq_class& x0);

}  // namespace ellreg::lfun
