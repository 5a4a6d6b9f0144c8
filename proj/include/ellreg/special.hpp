#pragma once

#include "ellreg/precision.hpp"

namespace ellreg::num {

// Exact Bernoulli number B_n (B_1 = -1/2), cached and thread-safe.
const mpq_class& bernoulli_mpq(unsigned n);

// Dilogarithm, principal branch, cut on [1, inf).  Values on the cut follow
// the sign of the imaginary part of x (signed zeros honored), i.e. the
// standard limit from above for im = +0.
BigComplex li2(const BigComplex& x);

// Bloch-Wigner dilogarithm D(x) = Im Li2(x) + arg(1-x) log|x|.
// Exactly 0 for real, infinite and boundary inputs (0, 1, infinity).
BigReal bloch_wigner_D(const BigComplex& x);

// J(x) = log|x| log|1-x|, with J(1) = 0.
BigReal jay(const BigComplex& x);

// E1(x) = int_x^inf e^{-t}/t dt, x > 0.
BigReal exp_integral_E1(const BigReal& x);

// Arithmetic-geometric mean with the good square-root branch at every step
// (|a' - b'| <= |a' + b'|, ties resolved toward Im(b'/a') >= 0).
BigComplex agm(const BigComplex& a, const BigComplex& b);

}  // namespace ellreg::num
