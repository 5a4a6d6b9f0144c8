#include "ellreg/dilog.hpp"

#include <algorithm>
#include <cmath>

#include "ellreg/special.hpp"

namespace ellreg::dilog {

using num::ctx;

namespace {

double merge_tol_log2() { return -static_cast<double>(ctx().bits) / 2; }

// distance on R/Z, as a log2 magnitude
double mod1_dist_log2(const num::BigReal& a, const num::BigReal& b) {
  using namespace num;
  BigReal d = abs(a - b);
  d = d - floor(d);
  BigReal alt = 1 - d;
  return std::min(d.mag_log2(), alt.mag_log2());
}

bool same_point(const TorusPoint& P, const TorusPoint& Q) {
  if (P.exact && Q.exact) return P.r_q == Q.r_q && P.s_q == Q.s_q;
  double tol = merge_tol_log2();
  return mod1_dist_log2(P.r_val(), Q.r_val()) <= tol &&
         mod1_dist_log2(P.s_val(), Q.s_val()) <= tol;
}

TorusPoint point_sub(const TorusPoint& P, const TorusPoint& Q) {
  if (P.exact && Q.exact) return P.add(Q.negate());
  return TorusPoint::from_numeric(P.r_val() - Q.r_val(),
                                  P.s_val() - Q.s_val());
}

}  // namespace

Divisor Divisor::make(const std::vector<std::pair<long, TorusPoint>>& raw) {
  Divisor out;
  for (const auto& [c, p] : raw) {
    if (c == 0) continue;
    TorusPoint red = p.exact ? TorusPoint::from_exact(p.r_q, p.s_q)
                             : TorusPoint::from_numeric(p.r_n, p.s_n);
    bool merged = false;
    for (auto& [c0, p0] : out.terms)
      if (same_point(p0, red)) {
        c0 += c;
        merged = true;
        break;
      }
    if (!merged) out.terms.push_back({c, red});
  }
  std::erase_if(out.terms, [](const auto& t) { return t.first == 0; });
  return out;
}

long Divisor::degree() const {
  long d = 0;
  for (const auto& [c, p] : terms) d += c;
  return d;
}

const Divisor& GaloisDivisor::at(long sigma) const {
  for (const auto& [s, d] : orbit)
    if (s == sigma) return d;
  raise(ErrorKind::DomainError, "no divisor attached to this coset");
}

long q_series_cutoff(const PeriodLattice& L) {
  double lq = L.q.mag_log2();  // log2 |q| < 0
  long wb = ctx().work_bits();
  return static_cast<long>(std::ceil((wb + 16) / (-lq))) + 8;
}

namespace {

// true when every u(P) q^n is real, forcing the Bloch-Wigner terms to vanish
bool real_ray(const PeriodLattice& L, const TorusPoint& P) {
  if (!P.exact) return false;
  mpq_class ang = P.r_q;
  if (L.half_twist) ang += P.s_q / 2;
  ang *= 2;
  return ang.get_den() == 1;
}

}  // namespace

BigReal elliptic_D(const PeriodLattice& L, const TorusPoint& P,
                   long extra_terms) {
  using namespace num;
  if (P.is_exact_origin()) return BigReal::zero();
  if (real_ray(L, P)) return BigReal::zero();
  BigComplex x = curve::torus_u(P, L);
  long N = q_series_cutoff(L) + extra_terms;
  BigReal sum = BigReal::zero();
  BigComplex w = x;
  for (long n = 0; n <= N; ++n) {
    sum = sum + num::bloch_wigner_D(w);
    w = w * L.q;
  }
  w = x;
  for (long n = 1; n <= N; ++n) {
    w = w / L.q;
    sum = sum + num::bloch_wigner_D(w);
  }
  double lq = L.q.mag_log2();
  double tail = N * lq + std::log2(8.0 * (1.0 + (N + 2) * (-lq)));
  sum.bump_err_log2(tail);
  return sum;
}

BigReal elliptic_D(const PeriodLattice& L, const Divisor& D,
                   long extra_terms) {
  BigReal sum = BigReal::zero();
  for (const auto& [c, p] : D.terms)
    sum = sum + elliptic_D(L, p, extra_terms) * c;
  return sum;
}

BigReal elliptic_J_at(const PeriodLattice& L, const BigReal& r,
                      const BigReal& s, long extra_terms) {
  using namespace num;
  BigReal two_pi = mul_2si(BigReal::pi(), 1);
  BigReal angle = L.half_twist ? two_pi * (r + mul_2si(s, -1)) : two_pi * r;
  BigComplex x = expi(angle) * exp(-two_pi * s * L.im_tau);
  long N = q_series_cutoff(L) + extra_terms +
           static_cast<long>(std::ceil(std::fabs(s.to_double()))) + 1;
  BigReal sum = BigReal::zero();
  BigComplex w = x;
  for (long n = 0; n <= N; ++n) {
    sum = sum + num::jay(w);
    w = w * L.q;
  }
  BigComplex xinv = conj(x) / abs2(x);
  w = xinv;
  for (long n = 1; n <= N; ++n) {
    w = w * L.q;
    sum = sum - num::jay(w);
  }
  // cubic correction (1/3) log^2|q| * (t^3 - 3/2 t^2 + 1/2 t) at t = s
  BigReal lq = log(abs(L.q));
  BigReal b3 = ((s - BigReal::from_mpq(mpq_class(3, 2))) * s +
                BigReal::from_mpq(mpq_class(1, 2))) *
               s;
  sum = sum + lq * lq * b3 / 3;
  double lq2 = L.q.mag_log2();
  double tail = N * lq2 + std::log2(8.0 * (1.0 + (N + 2) * (-lq2)) *
                                    (1.0 + (N + 2) * (-lq2)));
  sum.bump_err_log2(tail);
  return sum;
}

BigReal elliptic_J(const PeriodLattice& L, const TorusPoint& P,
                   long extra_terms) {
  if (P.is_exact_origin()) return BigReal::zero();
  return elliptic_J_at(L, P.r_val(), P.s_val(), extra_terms);
}

BigReal elliptic_J(const PeriodLattice& L, const Divisor& D,
                   long extra_terms) {
  BigReal sum = BigReal::zero();
  for (const auto& [c, p] : D.terms)
    sum = sum + elliptic_J(L, p, extra_terms) * c;
  return sum;
}

Divisor beta_convolution(const Divisor& divF, const Divisor& divG) {
  using namespace num;
  if (divF.degree() != 0 || divG.degree() != 0)
    raise(ErrorKind::DegreeNonZero, "inputs must have total degree zero");
  for (const Divisor* D : {&divF, &divG}) {
    BigReal sr = BigReal::zero(), ss = BigReal::zero();
    for (const auto& [c, p] : D->terms) {
      sr = sr + p.r_val() * c;
      ss = ss + p.s_val() * c;
    }
    BigReal dr = sr - floor(sr + BigReal::from_mpq(mpq_class(1, 2)));
    BigReal ds = ss - floor(ss + BigReal::from_mpq(mpq_class(1, 2)));
    double tol = -static_cast<double>(ctx().bits) / 2;
    if (dr.mag_log2() > tol || ds.mag_log2() > tol)
      raise(ErrorKind::AbelConditionFailed,
            "weighted point sum is not a lattice point");
  }
  std::vector<std::pair<long, TorusPoint>> raw;
  for (const auto& [m, p] : divF.terms)
    for (const auto& [n, q] : divG.terms)
      raw.push_back({m * n, point_sub(p, q)});
  return Divisor::make(raw);
}

BigComplex kronecker_sum(const PeriodLattice& L, const TorusPoint& z,
                         long cutoff_R, bool parallel) {
  using namespace num;
  if (cutoff_R < 10) raise(ErrorKind::DomainError, "cutoff_R must be >= 10");
  BigReal r = z.r_val(), s = z.s_val();
  BigReal two_pi = mul_2si(BigReal::pi(), 1);
  BigComplex p1 = expi(two_pi * s);   // phase step in m
  BigComplex p2 = expi(-two_pi * r);  // phase step in n
  double imt = L.im_tau.to_double();
  double retau = L.half_twist ? 0.5 : 0.0;
  long R = cutoff_R;
  long n_max = static_cast<long>(std::ceil(R / imt)) + 2;
  long m_max = R + (L.half_twist ? n_max / 2 : 0) + 4;

  std::vector<BigComplex> e1tab(2 * m_max + 1), e2tab(2 * n_max + 1);
  e1tab[m_max] = BigComplex::one();
  e2tab[n_max] = BigComplex::one();
  BigComplex p1c = conj(p1), p2c = conj(p2);
  for (long k = 1; k <= m_max; ++k) {
    e1tab[m_max + k] = e1tab[m_max + k - 1] * p1;
    e1tab[m_max - k] = e1tab[m_max - k + 1] * p1c;
  }
  for (long k = 1; k <= n_max; ++k) {
    e2tab[n_max + k] = e2tab[n_max + k - 1] * p2;
    e2tab[n_max - k] = e2tab[n_max - k + 1] * p2c;
  }

  std::vector<BigReal> btab(2 * n_max + 1);
  for (long n = -n_max; n <= n_max; ++n) btab[n_max + n] = L.im_tau * n;

  std::vector<BigComplex> totals(R + 1);

  // The per-term arithmetic runs on preallocated mpfr scratch: the annulus
  // loops visit tens of millions of terms at large cutoffs, and wrapper
  // temporaries (one allocation per operation) would dominate the runtime.
  auto annulus = [&](long k) {
    double r_out2 = static_cast<double>(k) * k;
    double r_in2 = static_cast<double>(k - 1) * (k - 1);
    long n_hi = std::min<long>(n_max, static_cast<long>(std::floor(k / imt)) + 1);
    mpfr_prec_t prec = mpfr_get_prec(btab[n_max].raw());
    mpfr_t a, bb, t1, t2, t3, norm, inv, px, py, u, w, accre, accim;
    mpfr_inits2(prec, a, bb, t1, t2, t3, norm, inv, px, py, u, w, accre,
                accim, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_zero(accre, 1);
    mpfr_set_zero(accim, 1);
    long terms = 0;
    for (long n = -n_hi; n <= n_hi; ++n) {
      double c = n * retau;
      double e = (n * imt) * (n * imt);
      if (e > r_out2) continue;
      double hi = std::sqrt(r_out2 - e);
      double lo = r_in2 > e ? std::sqrt(r_in2 - e) : 0.0;
      mpfr_srcptr bv = btab[n_max + n].raw();
      mpfr_sqr(bb, bv, MPFR_RNDN);
      mpfr_srcptr e2r = e2tab[n_max + n].re().raw();
      mpfr_srcptr e2i = e2tab[n_max + n].im().raw();
      auto scan = [&](double tlo, double thi) {
        long m0 = static_cast<long>(std::ceil(tlo - c)) - 1;
        long m1 = static_cast<long>(std::floor(thi - c)) + 1;
        for (long m = m0; m <= m1; ++m) {
          if (m == 0 && n == 0) continue;
          double t = m + c;
          double v = t * t + e;
          double sq = std::sqrt(v);
          long kk = static_cast<long>(sq);
          if (static_cast<double>(kk) * kk < v) kk += 1;
          if (kk != k) continue;
          ++terms;
          if (L.half_twist) {
            mpfr_set_si(a, 2 * m + n, MPFR_RNDN);
            mpfr_div_2si(a, a, 1, MPFR_RNDN);
          } else {
            mpfr_set_si(a, m, MPFR_RNDN);
          }
          mpfr_sqr(t1, a, MPFR_RNDN);
          mpfr_add(norm, t1, bb, MPFR_RNDN);
          mpfr_sqr(t1, norm, MPFR_RNDN);
          mpfr_ui_div(inv, 1, t1, MPFR_RNDN);
          mpfr_srcptr e1r = e1tab[m_max + m].re().raw();
          mpfr_srcptr e1i = e1tab[m_max + m].im().raw();
          mpfr_mul(t1, e1r, e2r, MPFR_RNDN);
          mpfr_mul(t2, e1i, e2i, MPFR_RNDN);
          mpfr_sub(px, t1, t2, MPFR_RNDN);
          mpfr_mul(t1, e1r, e2i, MPFR_RNDN);
          mpfr_mul(t2, e1i, e2r, MPFR_RNDN);
          mpfr_add(py, t1, t2, MPFR_RNDN);
          mpfr_mul(u, a, inv, MPFR_RNDN);
          mpfr_mul(w, bv, inv, MPFR_RNDN);
          // (px + i py)(u - i w): re = px u + py w, im = py u - px w
          mpfr_mul(t1, px, u, MPFR_RNDN);
          mpfr_fma(t1, py, w, t1, MPFR_RNDN);
          mpfr_mul(t2, py, u, MPFR_RNDN);
          mpfr_mul(t3, px, w, MPFR_RNDN);
          mpfr_sub(t2, t2, t3, MPFR_RNDN);
          mpfr_add(accre, accre, t1, MPFR_RNDN);
          mpfr_add(accim, accim, t2, MPFR_RNDN);
        }
      };
      if (lo == 0.0) {
        scan(-hi, hi);
      } else {
        scan(lo, hi);
        scan(-hi, -lo);
      }
    }
    BigComplex local = BigComplex::zero();
    if (terms > 0) {
      mpfr_set(local.re().raw(), accre, MPFR_RNDN);
      mpfr_set(local.im().raw(), accim, MPFR_RNDN);
      // every term is bounded by 1/|lambda|^3 on its annulus; fold the
      // rounding of ~20 scratch operations per term into one absolute bound
      double lam_min = k >= 2 ? static_cast<double>(k - 1)
                              : std::min(1.0, imt) * 0.5;
      double err = -3.0 * std::log2(lam_min) +
                   std::log2(20.0 * static_cast<double>(terms) + 1.0) + 4.0 -
                   static_cast<double>(prec);
      local.re().set_err_log2(err);
      local.im().set_err_log2(err);
    }
    totals[k] = local;
    mpfr_clears(a, bb, t1, t2, t3, norm, inv, px, py, u, w, accre, accim,
                static_cast<mpfr_ptr>(nullptr));
  };

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long k = 1; k <= R; ++k) annulus(k);

  BigComplex K = BigComplex::zero();
  for (long k = 1; k <= R; ++k) K = K + totals[k];
  K.bump_err_log2(std::log2(7.0 / (imt * R)));
  return K;
}

namespace {

Divisor conjugate_divisor(const Divisor& D, const PeriodLattice& L) {
  std::vector<std::pair<long, TorusPoint>> raw;
  for (const auto& [c, p] : D.terms)
    raw.push_back({c, curve::conjugate_point(p, L)});
  return Divisor::make(raw);
}

bool divisors_match(const Divisor& A, const Divisor& B) {
  if (A.terms.size() != B.terms.size()) return false;
  std::vector<bool> used(B.terms.size(), false);
  for (const auto& [c, p] : A.terms) {
    bool found = false;
    for (size_t j = 0; j < B.terms.size(); ++j) {
      if (used[j] || B.terms[j].first != c) continue;
      if (same_point(B.terms[j].second, p)) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

bool conjugation_compatible(const chars::AbelianField& F,
                            const PeriodLattice& L, const GaloisDivisor& ell) {
  long c = F.m == 1 ? 0 : F.coset_rep(F.m - 1);
  for (long sigma : F.cosets) {
    long target = F.m == 1 ? 0 : F.coset_rep(c * sigma % F.m);
    Divisor want = conjugate_divisor(ell.at(sigma), L);
    if (!divisors_match(want, ell.at(target))) return false;
  }
  return true;
}

CharacterSums character_sums(const chars::AbelianField& F,
                             const PeriodLattice& L, const GaloisDivisor& ell) {
  using namespace num;
  if (!conjugation_compatible(F, L, ell))
    raise(ErrorKind::ConjugationMismatch,
          "orbit is not closed under complex conjugation");
  CharacterSums out;
  out.chis = chars::characters_of(F);

  size_t d = F.cosets.size();
  std::vector<BigReal> dv(d), jv(d);
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < d; ++i) {
    dv[i] = elliptic_D(L, ell.at(F.cosets[i]));
    jv[i] = elliptic_J(L, ell.at(F.cosets[i]));
  }

  BigReal two_pi = mul_2si(BigReal::pi(), 1);
  for (const auto& chi : out.chis) {
    BigComplex sd = BigComplex::zero(), sj = BigComplex::zero();
    for (size_t i = 0; i < d; ++i) {
      BigComplex cv = chi.value(F.cosets[i]);
      sd = sd + cv * dv[i];
      sj = sj + cv * jv[i];
    }
    BigComplex m = chi.even() ? -(sd / two_pi)
                                 : -(sj / (two_pi * L.im_tau)) / 2;
    double scale = 0.0;
    for (size_t i = 0; i < d; ++i)
      scale = std::max({scale, dv[i].mag_log2(), jv[i].mag_log2()});
    double tol = -static_cast<double>(ctx().bits) / 2 + scale +
                 std::log2(static_cast<double>(2 * d));
    if (chi.even() && sj.mag_log2() > tol)
      out.warnings.push_back("even character: J-sum failed to cancel");
    if (!chi.even() && sd.mag_log2() > tol)
      out.warnings.push_back("odd character: D-sum failed to cancel");
    out.s_d.push_back(sd);
    out.s_j.push_back(sj);
    out.mu.push_back(m);
  }
  return out;
}

}  // namespace ellreg::dilog
