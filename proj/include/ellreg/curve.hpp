#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ellreg/precision.hpp"

namespace ellreg::curve {

using num::BigComplex;
using num::BigReal;

struct EllipticCurveData {
  std::string label;
  mpq_class a1, a2, a3, a4, a6;
  long conductor = 0;
  // derived standard quantities
  mpq_class b2, b4, b6, b8, c4, c6, disc;

  static EllipticCurveData make(const std::string& label,
                                const std::array<mpq_class, 5>& a,
                                long conductor);
};

struct PeriodLattice {
  BigReal omega1;    // real period, > 0
  BigComplex omega2;
  BigComplex tau;    // omega2/omega1, Im > 0; Re is 0 or 1/2
  BigReal q;         // e^{2 pi i tau}, real, 0 < |q| < 1; q < 0 iff disc < 0
  BigReal im_tau;
  bool half_twist = false;  // true when Re(tau) = 1/2 (disc < 0)
};

// Point of C/(Z + tau Z) in lattice coordinates z = r + s tau, both in [0,1).
struct TorusPoint {
  bool exact = true;
  mpq_class r_q, s_q;
  BigReal r_n, s_n;

  static TorusPoint origin() { return from_exact(0, 0); }
  static TorusPoint from_exact(mpq_class r, mpq_class s);
  static TorusPoint from_numeric(const BigReal& r, const BigReal& s);

  BigReal r_val() const { return exact ? BigReal::from_mpq(r_q) : r_n; }
  BigReal s_val() const { return exact ? BigReal::from_mpq(s_q) : s_n; }
  bool is_exact_origin() const { return exact && r_q == 0 && s_q == 0; }

  TorusPoint negate() const;
  TorusPoint add(const TorusPoint& o) const;  // exact+exact only
  TorusPoint scale(long n) const;             // exact only
};

// Complex conjugation on the torus: z -> conj(z) maps (r, s) to
// (r + 2 s Re(tau), -s) modulo the lattice; exact for exact points.
TorusPoint conjugate_point(const TorusPoint& P, const PeriodLattice& L);

// u = e^{2 pi i (r + s tau)}
BigComplex torus_u(const TorusPoint& P, const PeriodLattice& L);

struct CurvePoint {
  bool infinity = false;
  BigComplex x, y;
};

// Trace of Frobenius for a good prime.  Exhaustive per-x solution count on
// the b-model below 10^4, quadratic-character sum on the short model above;
// both run on the OpenMP kernel unless parallel = false.
long ap(const EllipticCurveData& E, long p, long bound = 1000000,
        bool parallel = true);

// Bad-prime coefficient: 0 for additive reduction, +-1 for split/non-split
// multiplicative reduction.
long ap_bad(const EllipticCurveData& E, long p);

// Plain-text a_p cache, lines "p<TAB>a_p", one file per curve label.
class ApCache {
 public:
  ApCache() = default;
  ApCache(const std::string& dir, const std::string& label);
  std::optional<long> lookup(long p) const;
  void store(long p, long a);  // appends to the backing file when open
  size_t size() const { return table_.size(); }

 private:
  std::map<long, long> table_;
  std::string path_;
};

std::vector<long> an_coefficients(const EllipticCurveData& E, long n_max,
                                  ApCache* cache = nullptr);

PeriodLattice periods(const EllipticCurveData& E);

CurvePoint weierstrass_p(const EllipticCurveData& E, const PeriodLattice& L,
                         const TorusPoint& z);

TorusPoint elliptic_log(const EllipticCurveData& E, const PeriodLattice& L,
                        const CurvePoint& P);

namespace kernel {
// sum over x in [0,p) of the quadratic character of
// c3 x^3 + c2 x^2 + c1 x + c0 mod p; serial and OpenMP variants agree
// bit for bit (integer arithmetic).
long chi_sum_serial(long p, long c3, long c2, long c1, long c0);
long chi_sum_omp(long p, long c3, long c2, long c1, long c0);
}  // namespace kernel

}  // namespace ellreg::curve
