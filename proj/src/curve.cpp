#include "ellreg/curve.hpp"

#include <omp.h>

#include "ellreg/special.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ellreg::curve {

using num::ctx;
using num::ScopedPrecision;

EllipticCurveData EllipticCurveData::make(const std::string& label,
                                          const std::array<mpq_class, 5>& a,
                                          long conductor) {
  EllipticCurveData E;
  E.label = label;
  E.a1 = a[0];
  E.a2 = a[1];
  E.a3 = a[2];
  E.a4 = a[3];
  E.a6 = a[4];
  E.conductor = conductor;
  E.b2 = E.a1 * E.a1 + 4 * E.a2;
  E.b4 = 2 * E.a4 + E.a1 * E.a3;
  E.b6 = E.a3 * E.a3 + 4 * E.a6;
  E.b8 = E.a1 * E.a1 * E.a6 + 4 * E.a2 * E.a6 - E.a1 * E.a3 * E.a4 +
         E.a2 * E.a3 * E.a3 - E.a4 * E.a4;
  E.c4 = E.b2 * E.b2 - 24 * E.b4;
  E.c6 = -E.b2 * E.b2 * E.b2 + 36 * E.b2 * E.b4 - 216 * E.b6;
  E.disc = -E.b2 * E.b2 * E.b8 - 8 * E.b4 * E.b4 * E.b4 -
           27 * E.b6 * E.b6 + 9 * E.b2 * E.b4 * E.b6;
  if (E.disc == 0) raise(ErrorKind::DomainError, "singular Weierstrass data");
  if (E.c4 * E.c4 * E.c4 - E.c6 * E.c6 != 1728 * E.disc)
    raise(ErrorKind::InternalError, "invariant identity failed");
  if (conductor <= 0) raise(ErrorKind::DomainError, "conductor must be positive");
  return E;
}

namespace {

long mod_reduce(const mpz_class& z, long p) {
  long r = mpz_fdiv_ui(z.get_mpz_t(), static_cast<unsigned long>(p));
  return r;
}

long mod_inverse(long a, long p) {
  long t = 0, nt = 1, r = p, nr = a % p;
  while (nr != 0) {
    long quo = r / nr;
    std::swap(t -= quo * nt, nt);
    std::swap(r -= quo * nr, nr);
  }
  if (r != 1) raise(ErrorKind::BadReduction, "non-invertible denominator");
  return t < 0 ? t + p : t;
}

// rational mod p; BadReduction when p divides the denominator
long mod_of(const mpq_class& q, long p) {
  long num = mod_reduce(q.get_num(), p);
  long den = mod_reduce(q.get_den(), p);
  if (den == 0) raise(ErrorKind::BadReduction, "denominator divisible by p");
  if (den == 1) return num;
  return num * mod_inverse(den, p) % p;
}

long eval_cubic_mod(long p, long c3, long c2, long c1, long c0, long x) {
  long v = c3;
  v = (v * x + c2) % p;
  v = (v * x + c1) % p;
  v = (v * x + c0) % p;
  return v;
}

std::vector<uint8_t> qr_table(long p, bool parallel) {
  std::vector<uint8_t> qr(p, 0);
  long half = (p - 1) / 2;
#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 1; i <= half; ++i) qr[i * i % p] = 1;
  return qr;
}

long chi_run(const std::vector<uint8_t>& qr, long p, long c3, long c2, long c1,
             long c0, long lo, long hi) {
  long g = eval_cubic_mod(p, c3, c2, c1, c0, lo);
  long g1 = eval_cubic_mod(p, c3, c2, c1, c0, (lo + 1) % p);
  long g2 = eval_cubic_mod(p, c3, c2, c1, c0, (lo + 2) % p);
  long d1 = (g1 - g + p) % p;
  long d2 = ((g2 - 2 * g1 + g) % p + p) % p;
  long d3 = 6 * c3 % p;
  long s = 0;
  for (long x = lo; x < hi; ++x) {
    if (g != 0) s += qr[g] ? 1 : -1;
    g += d1;
    if (g >= p) g -= p;
    d1 += d2;
    if (d1 >= p) d1 -= p;
    d2 += d3;
    if (d2 >= p) d2 -= p;
  }
  return s;
}

}  // namespace

namespace kernel {

namespace {
// chi_run's difference tables need coefficients already in [0, p)
long norm_mod(long c, long p) { return ((c % p) + p) % p; }
}  // namespace

long chi_sum_serial(long p, long c3, long c2, long c1, long c0) {
  c3 = norm_mod(c3, p), c2 = norm_mod(c2, p);
  c1 = norm_mod(c1, p), c0 = norm_mod(c0, p);
  std::vector<uint8_t> qr = qr_table(p, false);
  return chi_run(qr, p, c3, c2, c1, c0, 0, p);
}

long chi_sum_omp(long p, long c3, long c2, long c1, long c0) {
  c3 = norm_mod(c3, p), c2 = norm_mod(c2, p);
  c1 = norm_mod(c1, p), c0 = norm_mod(c0, p);
  std::vector<uint8_t> qr = qr_table(p, true);
  int nt = std::max(1, omp_get_max_threads());
  long chunk = (p + nt - 1) / nt;
  std::vector<long> partial(nt, 0);
#pragma omp parallel for schedule(static, 1)
  for (int t = 0; t < nt; ++t) {
    long lo = t * chunk;
    long hi = std::min(p, lo + chunk);
    if (lo < hi) partial[t] = chi_run(qr, p, c3, c2, c1, c0, lo, hi);
  }
  long s = 0;
  for (long v : partial) s += v;
  return s;
}

}  // namespace kernel

namespace {

long brute_force_count(const EllipticCurveData& E, long p) {
  long a1 = mod_of(E.a1, p), a2 = mod_of(E.a2, p), a3 = mod_of(E.a3, p),
       a4 = mod_of(E.a4, p), a6 = mod_of(E.a6, p);
  long count = 1;  // infinity
  for (long x = 0; x < p; ++x)
    for (long y = 0; y < p; ++y) {
      long lhs = (y * y + a1 * x % p * y + a3 * y) % p;
      long rhs = ((x * x % p * x) % p + a2 * x % p * x + a4 * x + a6) % p;
      if ((lhs - rhs) % p == 0) ++count;
    }
  return count;
}

}  // namespace

long ap(const EllipticCurveData& E, long p, long bound, bool parallel) {
  if (p < 2) raise(ErrorKind::DomainError, "p must be prime");
  if (E.conductor % p == 0)
    raise(ErrorKind::BadReduction, "prime divides the conductor");
  if (p > bound) raise(ErrorKind::BoundExceeded, "prime above configured bound");

  long a;
  if (p < 5) {
    a = p + 1 - brute_force_count(E, p);
  } else if (p < 10000) {
    // exhaustive per-x count on the b-model (2y + a1x + a3)^2 = g(x)
    long c3 = 4 % p, c2 = mod_of(E.b2, p), c1 = mod_of(2 * E.b4, p),
         c0 = mod_of(E.b6, p);
    long s = parallel ? kernel::chi_sum_omp(p, c3, c2, c1, c0)
                      : kernel::chi_sum_serial(p, c3, c2, c1, c0);
    a = -s;  // #affine = p + s, so a_p = p + 1 - (p + s + 1)
  } else {
    // character sum on the short model Y^2 = X^3 - 27 c4 X - 54 c6
    long c1 = mod_of(-27 * E.c4, p), c0 = mod_of(-54 * E.c6, p);
    long s = parallel ? kernel::chi_sum_omp(p, 1, 0, c1, c0)
                      : kernel::chi_sum_serial(p, 1, 0, c1, c0);
    a = -s;
  }
  if (a * a > 4 * p) raise(ErrorKind::InternalError, "Hasse bound violated");
  return a;
}

long ap_bad(const EllipticCurveData& E, long p) {
  if (E.conductor % p != 0)
    raise(ErrorKind::DomainError, "prime does not divide the conductor");
  if ((E.conductor / p) % p == 0) return 0;  // additive
  if (p < 5) {
    // count nonsingular points of the reduction directly
    long a1 = mod_of(E.a1, p), a2 = mod_of(E.a2, p), a3 = mod_of(E.a3, p),
         a4 = mod_of(E.a4, p), a6 = mod_of(E.a6, p);
    long ns = 1;  // infinity is smooth
    for (long x = 0; x < p; ++x)
      for (long y = 0; y < p; ++y) {
        long f = ((y * y + a1 * x % p * y + a3 * y) % p -
                  ((x * x % p * x) % p + a2 * x % p * x + a4 * x + a6) % p) %
                 p;
        if ((f % p + p) % p != 0) continue;
        long fx = ((3 * x % p * x + 2 * a2 * x + a4) % p - a1 * y % p) % p;
        long fy = (2 * y + a1 * x + a3) % p;
        if (((fx % p + p) % p) != 0 || ((fy % p + p) % p) != 0) ++ns;
      }
    return p - ns;
  }
  // multiplicative: split iff the node slope is rational, i.e. the double
  // root offset 3 x0 = -c6 / (4 c4) is a square mod p
  long c4m = mod_of(E.c4, p), c6m = mod_of(E.c6, p);
  if (c4m == 0) raise(ErrorKind::InternalError, "additive pattern at p^1 || N");
  long v = (p - c6m) % p * mod_inverse(4 * c4m % p, p) % p;
  if (v == 0) raise(ErrorKind::InternalError, "degenerate node slope");
  // Euler criterion
  long e = (p - 1) / 2, b = v, r = 1;
  while (e) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r == 1 ? 1 : -1;
}

ApCache::ApCache(const std::string& dir, const std::string& label) {
  path_ = dir + "/" + label + ".ap";
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long p = 0, a = 0;
    if (!(ss >> p >> a) || p < 2 ||
        static_cast<double>(a) * a > 4.0 * static_cast<double>(p))
      raise(ErrorKind::ParseError,
            path_ + ":" + std::to_string(lineno) + ": bad cache line");
    table_[p] = a;
  }
}

std::optional<long> ApCache::lookup(long p) const {
  auto it = table_.find(p);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

void ApCache::store(long p, long a) {
  if (table_.count(p)) return;
  table_[p] = a;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  out << p << '\t' << a << '\n';
}

std::vector<long> an_coefficients(const EllipticCurveData& E, long n_max,
                                  ApCache* cache) {
  if (n_max < 1) raise(ErrorKind::DomainError, "n_max must be >= 1");
  std::vector<long> a(n_max + 1, 0);
  a[1] = 1;
  std::vector<int32_t> spf(n_max + 1, 0);
  for (long i = 2; i <= n_max; ++i) {
    if (spf[i]) continue;
    for (long j = i; j <= n_max; j += i)
      if (!spf[j]) spf[j] = static_cast<int32_t>(i);
  }
  for (long p = 2; p <= n_max; ++p) {
    if (spf[p] != p) continue;
    long app;
    if (E.conductor % p == 0) {
      app = ap_bad(E, p);
    } else if (cache) {
      auto hit = cache->lookup(p);
      if (hit) {
        app = *hit;
      } else {
        app = ap(E, p);
        cache->store(p, app);
      }
    } else {
      app = ap(E, p);
    }
    a[p] = app;
    // prime powers
    long prev = 1, cur = app;
    for (long pk = p; pk <= n_max / p;) {
      pk *= p;
      long next = E.conductor % p == 0 ? cur * app : app * cur - p * prev;
      prev = cur;
      cur = next;
      a[pk] = cur;
    }
  }
  for (long n = 2; n <= n_max; ++n) {
    if (a[n] != 0 || n < 2) continue;
    long p = spf[n], pk = 1, m = n;
    while (m % p == 0) {
      m /= p;
      pk *= p;
    }
    if (m == 1) continue;  // prime power, already set
    a[n] = a[pk] * a[m];
  }
  return a;
}

namespace {

using num::BigComplex;
using num::BigReal;

BigReal acos_big(const BigReal& x) {
  BigReal one = BigReal::from_long(1);
  return atan2(sqrt(one - x * x), x);
}

// E4, E6 as q-series with real q
void eisenstein(const BigReal& q, BigReal& e4, BigReal& e6) {
  long wb = ctx().work_bits();
  BigReal one = BigReal::from_long(1);
  e4 = one;
  e6 = one;
  BigReal qn = q;
  double lq = q.mag_log2();
  for (long n = 1;; ++n) {
    BigReal frac = qn / (one - qn);
    BigReal n2 = BigReal::from_long(n * n);
    BigReal t4 = n2 * BigReal::from_long(n) * frac;
    e4 = e4 + 240 * t4;
    e6 = e6 - 504 * t4 * n2;
    qn = qn * q;
    if (static_cast<double>(n + 1) * lq + 6 * std::log2(static_cast<double>(n + 2)) <
        -(wb + 8))
      break;
    if (n > 4 * wb) raise(ErrorKind::NonConvergence, "Eisenstein series stalled");
  }
}

}  // namespace

PeriodLattice periods(const EllipticCurveData& E) {
  using namespace num;
  BigReal g2 = BigReal::from_mpq(E.c4 / 12);
  BigReal g3 = BigReal::from_mpq(E.c6 / 216);
  BigReal pi = BigReal::pi();
  PeriodLattice L;

  if (E.disc > 0) {
    // three real roots of 4X^3 - g2 X - g3 by the cosine method on
    // X^3 + pc X + qc with pc = -g2/4, qc = -g3/4
    BigReal pc = -mul_2si(g2, -2);
    BigReal qc = -mul_2si(g3, -2);
    BigReal m = mul_2si(sqrt(-pc / 3), 1);
    BigReal cos3phi = 3 * qc / (pc * m);
    BigReal phi = acos_big(cos3phi) / 3;
    BigReal third = mul_2si(pi, 1) / 3;
    std::vector<BigReal> roots{m * cos(phi), m * cos(phi - third),
                               m * cos(phi - mul_2si(third, 1))};
    std::sort(roots.begin(), roots.end(),
              [](const BigReal& x, const BigReal& y) { return y < x; });
    const BigReal &e1 = roots[0], &e2 = roots[1], &e3 = roots[2];
    BigReal w1 = pi / agm(BigComplex(sqrt(e1 - e3)), BigComplex(sqrt(e1 - e2))).re();
    BigReal nu = pi / agm(BigComplex(sqrt(e1 - e3)), BigComplex(sqrt(e2 - e3))).re();
    L.omega1 = w1;
    L.im_tau = nu / w1;
    L.half_twist = false;
    L.tau = BigComplex(BigReal::zero(), L.im_tau);
    L.omega2 = BigComplex(BigReal::zero(), nu);
    L.q = exp(-mul_2si(pi, 1) * L.im_tau);
  } else {
    // single real root by Newton from a double-precision Cardano seed
    double g2d = g2.to_double(), g3d = g3.to_double();
    double pc = -g2d / 4, qc = -g3d / 4;
    double dd = qc * qc / 4 + pc * pc * pc / 27;
    double sq = std::sqrt(std::max(dd, 0.0));
    double seed = std::cbrt(-qc / 2 + sq) + std::cbrt(-qc / 2 - sq);
    BigReal e1 = BigReal::from_double(seed);
    for (int it = 0; it < 64; ++it) {
      BigReal f = ((mul_2si(e1 * e1, 2) - g2) * e1 - g3);
      BigReal fp = 3 * mul_2si(e1 * e1, 2) - g2;
      BigReal step = f / fp;
      e1 = e1 - step;
      if (step.is_zero() || step.mag_log2() - e1.mag_log2() < -(ctx().work_bits()))
        break;
    }
    BigReal gam2 = (3 * e1 * e1 - g2) / 4;
    if (gam2.sgn() <= 0) raise(ErrorKind::InternalError, "root pattern mismatch");
    BigReal threehalf_e1 = mul_2si(3 * e1, -1);
    BigReal r = sqrt(threehalf_e1 * threehalf_e1 + gam2);
    BigReal sr = sqrt(r);
    BigReal w1 = mul_2si(pi, 1) / agm(BigComplex(mul_2si(sr, 1)),
                                      BigComplex(sqrt(mul_2si(r, 1) + 3 * e1)))
                                    .re();
    BigReal nu = mul_2si(pi, 1) / agm(BigComplex(mul_2si(sr, 1)),
                                      BigComplex(sqrt(mul_2si(r, 1) - 3 * e1)))
                                    .re();
    L.omega1 = w1;
    L.im_tau = nu / mul_2si(w1, 1);
    L.half_twist = true;
    L.tau = BigComplex(BigReal::from_mpq(mpq_class(1, 2)), L.im_tau);
    L.omega2 = BigComplex(mul_2si(w1, -1), mul_2si(nu, -1));
    L.q = -exp(-pi * nu / w1);
  }

  // round-trip validation through the Eisenstein series of q
  BigReal e4, e6;
  eisenstein(L.q, e4, e6);
  BigReal scale = mul_2si(pi, 1) / L.omega1;
  BigReal s2 = scale * scale;
  BigReal c4_back = s2 * s2 * e4;
  BigReal c6_back = s2 * s2 * s2 * e6;
  BigReal c4_in = BigReal::from_mpq(E.c4);
  BigReal c6_in = BigReal::from_mpq(E.c6);
  double tol = -static_cast<double>(ctx().bits) / 2;
  bool ok4 = E.c4 == 0 ? c4_back.mag_log2() < tol + c6_in.mag_log2() / 1.5
                       : (abs(c4_back - c4_in) / abs(c4_in)).mag_log2() < tol;
  bool ok6 = E.c6 == 0 ? c6_back.mag_log2() < tol + c4_in.mag_log2() * 1.5
                       : (abs(c6_back - c6_in) / abs(c6_in)).mag_log2() < tol;
  if (!ok4 || !ok6)
    raise(ErrorKind::InternalError, "period lattice failed the E4/E6 round-trip");
  return L;
}

TorusPoint TorusPoint::from_exact(mpq_class r, mpq_class s) {
  r.canonicalize();
  s.canonicalize();
  auto reduce = [](mpq_class& v) {
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), v.get_num().get_mpz_t(), v.get_den().get_mpz_t());
    v -= mpq_class(fl);
  };
  reduce(r);
  reduce(s);
  TorusPoint P;
  P.exact = true;
  P.r_q = r;
  P.s_q = s;
  return P;
}

TorusPoint TorusPoint::from_numeric(const BigReal& r, const BigReal& s) {
  TorusPoint P;
  P.exact = false;
  P.r_n = r - floor(r);
  P.s_n = s - floor(s);
  return P;
}

TorusPoint TorusPoint::negate() const {
  if (exact) return from_exact(-r_q, -s_q);
  return from_numeric(-r_n, -s_n);
}

TorusPoint TorusPoint::add(const TorusPoint& o) const {
  if (!exact || !o.exact)
    raise(ErrorKind::DomainError, "torus addition requires exact points");
  return from_exact(r_q + o.r_q, s_q + o.s_q);
}

TorusPoint TorusPoint::scale(long n) const {
  if (!exact) raise(ErrorKind::DomainError, "torus scaling requires exact points");
  return from_exact(mpq_class(n) * r_q, mpq_class(n) * s_q);
}

TorusPoint conjugate_point(const TorusPoint& P, const PeriodLattice& L) {
  if (P.exact) {
    mpq_class shift = L.half_twist ? P.s_q : mpq_class(0);
    return TorusPoint::from_exact(P.r_q + shift, -P.s_q);
  }
  BigReal shift = L.half_twist ? P.s_n : BigReal::zero();
  return TorusPoint::from_numeric(P.r_n + shift, -P.s_n);
}

BigComplex torus_u(const TorusPoint& P, const PeriodLattice& L) {
  using namespace num;
  BigReal r = P.r_val(), s = P.s_val();
  BigReal two_pi = mul_2si(BigReal::pi(), 1);
  BigReal angle = L.half_twist ? two_pi * (r + mul_2si(s, -1)) : two_pi * r;
  BigReal mag = exp(-two_pi * s * L.im_tau);
  return expi(angle) * mag;
}

namespace {

// x-series and y-series of the torus parameterization:
//   p(z)  = -(2 pi / w1)^2 * xs,  xs = 1/12 + u/(1-u)^2 + sum_n [...]
//   p'(z) = -i (2 pi / w1)^3 * ys, ys = u(1+u)/(1-u)^3 + sum_n [...]
void wp_series(const BigComplex& u, const BigReal& q, BigComplex& xs,
               BigComplex& ys) {
  using namespace num;
  long wb = ctx().work_bits();
  BigComplex one = BigComplex::one();
  BigComplex du = one - u;
  BigComplex du2 = du * du;
  xs = BigComplex(BigReal::from_mpq(mpq_class(1, 12))) + u / du2;
  ys = u * (one + u) / (du2 * du);
  BigReal qn = q;
  double lq = q.mag_log2();
  double lui = -u.mag_log2();  // log2 |1/u|
  for (long n = 1;; ++n) {
    BigComplex a = u * qn;          // q^n u
    BigComplex b = conj(u) * (qn / abs2(u));  // q^n / u
    BigComplex da = one - a, db = one - b;
    BigReal dq = BigReal::from_long(1) - qn;
    xs = xs + a / (da * da) + b / (db * db) -
         mul_2si(BigComplex(qn / (dq * dq)), 1);
    ys = ys + a * (one + a) / (da * da * da) - b * (one + b) / (db * db * db);
    qn = qn * q;
    double worst = (static_cast<double>(n + 1)) * lq + std::max(0.0, lui);
    if (worst < -(wb + 8)) {
      xs.bump_err_log2(worst + 2);
      ys.bump_err_log2(worst + 3);
      break;
    }
    if (n > 64 * wb) raise(ErrorKind::NonConvergence, "wp series stalled");
  }
}

struct ModelMap {
  BigReal xfac;   // p = -xfac * xs, xfac = (2 pi / w1)^2
  BigReal yfac;   // p' = -i * yfac * ys
};

ModelMap model_map(const PeriodLattice& L) {
  using namespace num;
  BigReal s = mul_2si(BigReal::pi(), 1) / L.omega1;
  return ModelMap{s * s, s * s * s};
}

BigComplex curve_residual(const EllipticCurveData& E, const BigComplex& x,
                          const BigComplex& y) {
  using namespace num;
  BigComplex a1 = BigComplex(BigReal::from_mpq(E.a1));
  BigComplex a2 = BigComplex(BigReal::from_mpq(E.a2));
  BigComplex a3 = BigComplex(BigReal::from_mpq(E.a3));
  BigComplex a4 = BigComplex(BigReal::from_mpq(E.a4));
  BigComplex a6 = BigComplex(BigReal::from_mpq(E.a6));
  return y * y + a1 * x * y + a3 * y -
         (x * x * x + a2 * x * x + a4 * x + a6);
}

double residual_scale_log2(const BigComplex& x, const BigComplex& y) {
  return std::max({0.0, 3 * x.mag_log2(), 2 * y.mag_log2()});
}

}  // namespace

CurvePoint weierstrass_p(const EllipticCurveData& E, const PeriodLattice& L,
                         const TorusPoint& z) {
  using namespace num;
  if (z.is_exact_origin()) raise(ErrorKind::PoleAtLattice, "z in the lattice");
  if (!z.exact) {
    double rm = z.r_n.mag_log2(), sm = z.s_n.mag_log2();
    double near = -static_cast<double>(ctx().bits) / 2;
    bool r0 = z.r_n.is_zero() || rm < near || (1 - z.r_n).mag_log2() < near;
    bool s0 = z.s_n.is_zero() || sm < near || (1 - z.s_n).mag_log2() < near;
    if (r0 && s0) raise(ErrorKind::PoleAtLattice, "z too close to the lattice");
  }
  BigComplex u = torus_u(z, L);
  BigComplex xs, ys;
  wp_series(u, L.q, xs, ys);
  ModelMap mm = model_map(L);
  BigComplex wp = -(mm.xfac * xs);
  BigComplex wpp = BigComplex(BigReal::zero(), -mm.yfac) * ys;
  BigComplex x = wp - BigReal::from_mpq(E.b2 / 12);
  BigComplex y = mul_2si(wpp - BigReal::from_mpq(E.a1) * x -
                             BigReal::from_mpq(E.a3),
                         -1);
  BigComplex resid = curve_residual(E, x, y);
  if (resid.mag_log2() - residual_scale_log2(x, y) >
      -static_cast<double>(ctx().bits) / 2)
    raise(ErrorKind::InternalError, "parameterization failed the curve equation");
  return CurvePoint{false, x, y};
}

namespace {

// one Newton solve from a given starting z (torus coordinates as complex
// number r + s*tau); returns empty when the iteration escapes
std::optional<TorusPoint> newton_log(const PeriodLattice& L,
                                     const BigComplex& t_x, int max_iter,
                                     BigComplex z) {
  using namespace num;
  BigReal one = BigReal::from_long(1);
  BigReal two_pi = mul_2si(BigReal::pi(), 1);
  long wb = ctx().work_bits();
  for (int it = 0; it < max_iter; ++it) {
    // reduce to the fundamental domain
    BigReal s = z.im() / L.im_tau;
    BigReal r = L.half_twist ? z.re() - mul_2si(s, -1) : z.re();
    r = r - floor(r);
    s = s - floor(s);
    TorusPoint cur = TorusPoint::from_numeric(r, s);
    BigComplex u = torus_u(cur, L);
    if ((u - BigComplex::one()).mag_log2() < -wb / 2 - 4) {
      // fell into the pole; nudge off
      z = z + BigComplex(BigReal::from_mpq(mpq_class(1, 7)),
                         BigReal::from_mpq(mpq_class(1, 11)) * L.im_tau);
      continue;
    }
    BigComplex xs, ys;
    wp_series(u, L.q, xs, ys);
    BigComplex f = xs - t_x;
    if (f.mag_log2() - std::max(t_x.mag_log2(), 0.0) < -(wb - 8)) {
      return TorusPoint::from_numeric(r, s);
    }
    BigComplex denom = BigComplex(BigReal::zero(), two_pi) * ys;
    if (!denom.is_finite() || denom.is_zero()) return std::nullopt;
    BigComplex step = f / denom;
    if (step.mag_log2() > 3) return std::nullopt;
    z = BigComplex(r, BigReal::zero()) +
        BigComplex(L.half_twist ? mul_2si(s, -1) : BigReal::zero(),
                   s * L.im_tau) -
        step;
  }
  return std::nullopt;
}

}  // namespace

TorusPoint elliptic_log(const EllipticCurveData& E, const PeriodLattice& L,
                        const CurvePoint& P) {
  using namespace num;
  if (P.infinity) return TorusPoint::origin();
  {
    BigComplex resid = curve_residual(E, P.x, P.y);
    double scale = residual_scale_log2(P.x, P.y);
    double tol = std::max(P.x.err_log2() + 4.0,
                          -static_cast<double>(ctx().bits) / 2 + scale);
    if (resid.mag_log2() > tol)
      raise(ErrorKind::NotOnCurve, "curve equation residual too large");
  }
  ModelMap mm = model_map(L);
  BigComplex wp = P.x + BigReal::from_mpq(E.b2 / 12);
  BigComplex wpp = mul_2si(P.y, 1) + BigReal::from_mpq(E.a1) * P.x +
                   BigReal::from_mpq(E.a3);
  BigComplex t_x = -(wp / mm.xfac);
  BigComplex t_y = wpp / BigComplex(BigReal::zero(), -mm.yfac);

  // 2-torsion: wp' = 0; compare against the three half-period points
  if (wpp.mag_log2() - std::max(0.0, wp.mag_log2() * 1.5) <
      -static_cast<double>(ctx().bits) / 2) {
    mpq_class half(1, 2);
    for (auto [r, s] : {std::pair<mpq_class, mpq_class>{half, 0},
                        {0, half},
                        {half, half}}) {
      TorusPoint cand = TorusPoint::from_exact(r, s);
      CurvePoint back = weierstrass_p(E, L, cand);
      if ((back.x - P.x).mag_log2() - std::max(0.0, P.x.mag_log2()) <
          -static_cast<double>(ctx().bits) / 2)
        return cand;
    }
    raise(ErrorKind::NotOnCurve, "vanishing derivative off the 2-torsion");
  }

  // coarse seeding at low precision
  std::vector<std::pair<double, std::pair<double, double>>> seeds;
  {
    ScopedPrecision sp(64, 16);
    BigComplex t_low = BigComplex(t_x.re().round_to(64), t_x.im().round_to(64));
    const int K = 24;
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        if (i == 0 && j == 0) continue;
        TorusPoint g = TorusPoint::from_exact(mpq_class(i, K), mpq_class(j, K));
        BigComplex u = torus_u(g, L);
        BigComplex xs, ys;
        wp_series(u, L.q, xs, ys);
        double dist = abs2(xs - t_low).mag_log2();
        seeds.push_back({dist, {static_cast<double>(i) / K,
                                static_cast<double>(j) / K}});
      }
    std::sort(seeds.begin(), seeds.end());
    seeds.resize(8);
  }

  for (auto& [dist, rs] : seeds) {
    BigReal r = BigReal::from_double(rs.first);
    BigReal s = BigReal::from_double(rs.second);
    BigComplex z = BigComplex(r, BigReal::zero()) +
                   BigComplex(L.half_twist ? mul_2si(s, -1) : BigReal::zero(),
                              s * L.im_tau);
    auto got = newton_log(L, t_x, 80, z);
    if (!got) continue;
    // resolve the +-z ambiguity by the odd coordinate
    BigComplex u = torus_u(*got, L);
    BigComplex xs, ys;
    wp_series(u, L.q, xs, ys);
    TorusPoint out = *got;
    if (cmp(abs2(ys - t_y), abs2(ys + t_y)) > 0) out = got->negate();
    // round-trip gate
    CurvePoint back = weierstrass_p(E, L, out);
    double scale = std::max(0.0, P.x.mag_log2());
    if ((back.x - P.x).mag_log2() - scale <
            -static_cast<double>(ctx().bits) / 2 &&
        (back.y - P.y).mag_log2() - std::max(0.0, P.y.mag_log2()) <
            -static_cast<double>(ctx().bits) / 2 + 4)
      return out;
  }
  raise(ErrorKind::NotOnCurve, "no torus preimage located");
}

}  // namespace ellreg::curve
