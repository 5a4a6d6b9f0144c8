#include "ellreg/rationality.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ellreg/errors.hpp"

namespace ellreg::rat {
namespace {

using chars::character_value;
using chars::galois_orbits;
using curve::PeriodLattice;
using dilog::character_sums;
using dilog::CharacterSums;
using dilog::Divisor;
using num::ctx;
using num::digits_of;
using num::lll_reduce;
using num::mul_2si;

using num::rational_reconstruct;

BigReal R(long n) { return BigReal::from_long(n); }

long inverse_mod(long a, long m) {
  long t = 0, nt = 1, r = m, nr = ((a % m) + m) % m;
  while (nr != 0) {
    long q = r / nr;
    t = std::exchange(nt, t - q * nt);
    r = std::exchange(nr, r - q * nr);
  }
  if (r != 1) raise(ErrorKind::DomainError, "residue is not invertible");
  return ((t % m) + m) % m;
}

// Product in G = (Z/m)^x / H, reduced to the coset representative.
long mulG(const AbelianField& F, long a, long b) {
  return F.coset_rep((a % F.m) * (b % F.m) % F.m);
}

size_t coset_index(const AbelianField& F, long sigma) {
  auto it = std::lower_bound(F.cosets.begin(), F.cosets.end(), sigma);
  if (it == F.cosets.end() || *it != sigma)
    raise(ErrorKind::InternalError, "element is not a coset representative");
  return size_t(it - F.cosets.begin());
}

// |v| below ten times its own error estimate (or exactly zero): dividing
// by v would launder noise into a confident-looking quotient.
bool near_zero(const BigComplex& v) {
  if (v.is_zero()) return true;
  double err = v.err_log2();
  if (err == -HUGE_VAL || err < -16777216.0) return false;  // effectively exact
  return abs(v) < mul_2si(R(10), (long)std::ceil(err));
}

BigReal pow_int(const BigReal& x, long k) {
  BigReal out = R(1);
  for (long i = 0; i < k; ++i) out = out * x;
  return out;
}

// Everything a per-character rationality row needs, computed once per
// precision level.
struct RowInputs {
  PeriodLattice L;
  CharacterSums cs;
  lfun::LambdaChi lv;
};

RowInputs row_inputs(const EllipticCurveData& E, const AbelianField& F,
                     const GaloisDivisor& ell, ApCache* cache) {
  RowInputs in{curve::periods(E), {}, {}};
  in.cs = character_sums(F, in.L, ell);
  in.lv = lfun::lvalues_all(E, F, cache);
  if (in.lv.chis.size() != in.cs.chis.size())
    raise(ErrorKind::InternalError, "character tables disagree");
  for (size_t i = 0; i < in.lv.chis.size(); ++i)
    if (!(in.lv.chis[i] == in.cs.chis[i]))
      raise(ErrorKind::InternalError, "character tables disagree");
  return in;
}

std::vector<ChiRow> theorem1_rows(const EllipticCurveData& E,
                                  const AbelianField& F,
                                  const GaloisDivisor& ell,
                                  const mpz_class& max_height, ApCache* cache,
                                  std::vector<std::string>& warnings) {
  RowInputs in = row_inputs(E, F, ell, cache);
  warnings.insert(warnings.end(), in.cs.warnings.begin(),
                  in.cs.warnings.end());
  BigReal pi = BigReal::pi();
  BigReal tol = accept_tol();
  std::vector<ChiRow> rows;
  rows.reserve(in.lv.chis.size());
  for (size_t i = 0; i < in.lv.chis.size(); ++i) {
    ChiRow row;
    row.chi = in.lv.chis[i];
    row.even = row.chi.even();
    row.level = in.lv.twists[i].level;
    row.w = in.lv.twists[i].w;
    row.residual = in.lv.twists[i].residual;
    row.lprime0 = in.lv.lprime0[i];
    row.l2 = in.lv.l2[i];
    row.s_d = in.cs.s_d[i];
    row.s_j = in.cs.s_j[i];
    BigComplex target = row.even ? row.lprime0 * pi
                                 : row.lprime0 * (pi * in.L.im_tau);
    const BigComplex& S = row.even ? row.s_d : row.s_j;
    if (near_zero(S)) {
      row.indeterminate = true;
      row.note = "regulator sum indistinguishable from zero here";
      rows.push_back(std::move(row));
      continue;
    }
    row.ratio = target / S;
    BigReal sc = abs(row.ratio);  // gate scales with the quotient size
    if (sc < R(1)) sc = R(1);
    if (!(abs(row.ratio.im()) <= tol * sc)) {
      row.note = "quotient has a nonvanishing imaginary part";
      rows.push_back(std::move(row));
      continue;
    }
    row.guess = rational_reconstruct(row.ratio.re(), max_height, tol * sc);
    if (!row.guess) row.note = "no fraction within the height bound fits";
    rows.push_back(std::move(row));
  }
  return rows;
}

Verdict rows_verdict(const std::vector<ChiRow>& rows) {
  bool any_indet = false;
  for (const ChiRow& r : rows) {
    if (r.indeterminate) {
      any_indet = true;
      continue;
    }
    if (!r.guess) return Verdict::FAIL;
  }
  return any_indet ? Verdict::INDETERMINATE : Verdict::PASS;
}

bool orbits_consistent(const std::vector<ChiRow>& rows) {
  std::vector<DirichletCharacter> chis;
  chis.reserve(rows.size());
  for (const ChiRow& r : rows) chis.push_back(r.chi);
  for (const auto& orbit : galois_orbits(chis)) {
    const RationalGuess* first = nullptr;
    for (size_t idx : orbit) {
      if (!rows[idx].guess) continue;
      if (!first) {
        first = &*rows[idx].guess;
        continue;
      }
      if (first->num != rows[idx].guess->num ||
          first->den != rows[idx].guess->den)
        return false;
    }
  }
  return true;
}

bool same_guesses(const std::vector<ChiRow>& a, const std::vector<ChiRow>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].guess || !b[i].guess) return false;
    if (a[i].guess->num != b[i].guess->num ||
        a[i].guess->den != b[i].guess->den)
      return false;
  }
  return true;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::PASS:
      return "PASS";
    case Verdict::FAIL:
      return "FAIL";
    case Verdict::INDETERMINATE:
      return "INDETERMINATE";
  }
  return "FAIL";
}

BigReal accept_tol() {
  BigReal e = R(-digits_of(ctx())) / 2;
  return exp(e * log(R(10)));
}

RationalityReport theorem1_check(const EllipticCurveData& E,
                                 const AbelianField& F,
                                 const GaloisDivisor& ell,
                                 const mpz_class& max_height,
                                 ApCache* cache) {
  RationalityReport rep;
  rep.rows = theorem1_rows(E, F, ell, max_height, cache, rep.warnings);
  rep.verdict = rows_verdict(rep.rows);
  if (!orbits_consistent(rep.rows)) {
    rep.verdict = Verdict::FAIL;
    rep.warnings.push_back("rational fits differ within a Galois orbit");
  }
  if (rep.verdict != Verdict::PASS) return rep;
  num::ScopedPrecision hi(ctx().bits * 3 / 2);
  std::vector<std::string> scratch;
  auto again = theorem1_rows(E, F, ell, max_height, cache, scratch);
  if (same_guesses(rep.rows, again)) {
    rep.revalidated = true;
  } else {
    rep.verdict = Verdict::FAIL;
    rep.warnings.push_back("higher-precision recomputation rejected the fit");
  }
  return rep;
}

std::vector<std::vector<BigComplex>> group_matrix(
    const AbelianField& F, const std::vector<BigComplex>& a) {
  if (a.size() != F.cosets.size())
    raise(ErrorKind::DomainError, "one value per coset representative");
  size_t d = F.cosets.size();
  std::vector<std::vector<BigComplex>> A(d, std::vector<BigComplex>(d));
  for (size_t i = 0; i < d; ++i) {
    long inv = inverse_mod(F.cosets[i], F.m);
    for (size_t j = 0; j < d; ++j)
      A[i][j] = a[coset_index(F, mulG(F, inv, F.cosets[j]))];
  }
  return A;
}

BigComplex determinant(std::vector<std::vector<BigComplex>> m) {
  size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) raise(ErrorKind::DomainError, "matrix is not square");
  BigComplex det = BigComplex::one();
  for (size_t k = 0; k < n; ++k) {
    size_t piv = k;
    BigReal best = abs2(m[k][k]);
    for (size_t i = k + 1; i < n; ++i) {
      BigReal v = abs2(m[i][k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv != k) {
      std::swap(m[piv], m[k]);
      det = -det;
    }
    if (m[k][k].is_zero()) return BigComplex::zero();
    det = det * m[k][k];
    for (size_t i = k + 1; i < n; ++i) {
      BigComplex f = m[i][k] / m[k][k];
      for (size_t j = k; j < n; ++j) m[i][j] = m[i][j] - f * m[k][j];
    }
  }
  return det;
}

ConjugationBlocks conjugation_blocks(const AbelianField& F,
                                     const std::vector<BigComplex>& x,
                                     const std::vector<BigComplex>& y) {
  if (F.is_real)
    raise(ErrorKind::DomainError, "conjugation blocks need a complex field");
  if (x.size() != F.cosets.size() || y.size() != F.cosets.size())
    raise(ErrorKind::DomainError, "one value per coset representative");
  long c = F.coset_rep(F.m - 1);
  ConjugationBlocks out;
  std::vector<char> used(F.cosets.size(), 0);
  for (size_t i = 0; i < F.cosets.size(); ++i) {
    if (used[i]) continue;
    used[i] = 1;
    out.reps.push_back(F.cosets[i]);
    used[coset_index(F, mulG(F, F.cosets[i], c))] = 1;
  }
  size_t h = out.reps.size();
  out.even_block.assign(h, std::vector<BigComplex>(h));
  out.odd_block.assign(h, std::vector<BigComplex>(h));
  for (size_t i = 0; i < h; ++i) {
    long inv = inverse_mod(out.reps[i], F.m);
    for (size_t j = 0; j < h; ++j) {
      size_t at = coset_index(F, mulG(F, inv, out.reps[j]));
      out.even_block[i][j] = x[at];
      out.odd_block[i][j] = y[at];
    }
  }
  return out;
}

namespace {

struct OrbitValues {
  std::vector<BigComplex> dv, jv;
};

OrbitValues orbit_values(const AbelianField& F, const PeriodLattice& L,
                         const GaloisDivisor& ell) {
  OrbitValues out;
  out.dv.reserve(F.cosets.size());
  out.jv.reserve(F.cosets.size());
  for (long s : F.cosets) {
    const Divisor& D = ell.at(s);
    out.dv.push_back(BigComplex(dilog::elliptic_D(L, D)));
    out.jv.push_back(BigComplex(dilog::elliptic_J(L, D)));
  }
  return out;
}

CorollaryReport corollary_once(const EllipticCurveData& E,
                               const AbelianField& F, const GaloisDivisor& ell,
                               const mpz_class& max_height, ApCache* cache) {
  CorollaryReport rep;
  rep.complex_case = !F.is_real;
  RowInputs in = row_inputs(E, F, ell, cache);
  rep.warnings.insert(rep.warnings.end(), in.cs.warnings.begin(),
                      in.cs.warnings.end());
  OrbitValues ov = orbit_values(F, in.L, ell);
  auto A = group_matrix(F, ov.dv);
  rep.det_full = determinant(A);

  // Exact eigenvector identity of the group matrix:
  //   (A v_chi)_i = sum_j a(s_i^{-1} s_j) chi(s_j) = S_D(chi) chi(s_i).
  BigReal tol = accept_tol();
  rep.eigen_ok = true;
  size_t d = F.cosets.size();
  for (size_t t = 0; t < in.cs.chis.size(); ++t) {
    std::vector<BigComplex> v(d);
    for (size_t j = 0; j < d; ++j)
      v[j] = character_value(in.cs.chis[t], F.cosets[j]);
    BigReal sc = abs(in.cs.s_d[t]);
    if (sc < R(1)) sc = R(1);
    for (size_t i = 0; i < d && rep.eigen_ok; ++i) {
      BigComplex lhs = BigComplex::zero();
      for (size_t j = 0; j < d; ++j) lhs = lhs + A[i][j] * v[j];
      if (!(abs(lhs - in.cs.s_d[t] * v[i]) <= tol * sc))
        rep.eigen_ok = false;
    }
  }
  if (!rep.eigen_ok)
    rep.warnings.push_back("group matrix eigenvector identity failed");

  BigReal pi = BigReal::pi();
  BigComplex num;
  BigComplex dets;
  if (F.is_real) {
    rep.det_d = rep.det_full;
    rep.det_j = BigComplex::one();
    dets = rep.det_full;
    num = in.lv.lef2;
  } else {
    ConjugationBlocks blocks = conjugation_blocks(F, ov.dv, ov.jv);
    rep.det_d = determinant(blocks.even_block);
    rep.det_j = determinant(blocks.odd_block);
    dets = rep.det_d * rep.det_j;
    num = in.lv.lef2 * pow_int(in.L.im_tau, F.d / 2);
  }
  if (near_zero(dets)) {
    rep.verdict = Verdict::INDETERMINATE;
    rep.warnings.push_back("determinant indistinguishable from zero here");
    return rep;
  }
  rep.ratio = num / (dets * pow_int(pi, F.d));
  BigReal sc = abs(rep.ratio);
  if (sc < R(1)) sc = R(1);
  if (!(abs(rep.ratio.im()) <= tol * sc)) {
    rep.verdict = Verdict::FAIL;
    rep.warnings.push_back("quotient has a nonvanishing imaginary part");
    return rep;
  }
  rep.guess = rational_reconstruct(rep.ratio.re(), max_height, tol * sc);
  rep.verdict = (rep.guess && rep.eigen_ok) ? Verdict::PASS : Verdict::FAIL;
  return rep;
}

}  // namespace

CorollaryReport corollary_check(const EllipticCurveData& E,
                                const AbelianField& F,
                                const GaloisDivisor& ell,
                                const mpz_class& max_height, ApCache* cache) {
  CorollaryReport rep = corollary_once(E, F, ell, max_height, cache);
  if (rep.verdict != Verdict::PASS) return rep;
  num::ScopedPrecision hi(ctx().bits * 3 / 2);
  CorollaryReport again = corollary_once(E, F, ell, max_height, cache);
  if (again.guess && rep.guess && again.guess->num == rep.guess->num &&
      again.guess->den == rep.guess->den && again.verdict == Verdict::PASS) {
    rep.revalidated = true;
  } else {
    rep.verdict = Verdict::FAIL;
    rep.warnings.push_back("higher-precision recomputation rejected the fit");
  }
  return rep;
}

namespace {

Prop13Report prop13_once(const EllipticCurveData& E, const AbelianField& F,
                         const mpz_class& max_height, ApCache* cache) {
  Prop13Report rep;
  lfun::LambdaChi lv = lfun::lvalues_all(E, F, cache);
  long d = F.d;
  mpz_fac_ui(rep.dfact.get_mpz_t(), (unsigned long)d);

  mpz_class lev = 1;
  for (const auto& T : lv.twists) lev *= T.level;
  mpz_class four_d;
  mpz_ui_pow_ui(four_d.get_mpz_t(), 4, (unsigned long)d);
  rep.expected_abs = mpq_class(lev, four_d);
  rep.expected_abs.canonicalize();

  BigComplex pw = BigComplex::one();
  for (const auto& T : lv.twists) pw = pw * T.w;
  if (d % 2) pw = -pw;
  rep.expected_sign = pw.re() > R(0) ? 1 : -1;

  if (near_zero(lv.lef2)) {
    rep.verdict = Verdict::INDETERMINATE;
    rep.warnings.push_back("L(E/F, 2) indistinguishable from zero here");
    return rep;
  }
  rep.ratio = lv.product_lprime0 * pow_int(BigReal::pi(), 2 * d) / lv.lef2;
  BigReal tol = accept_tol();
  BigReal sc = abs(rep.ratio);
  if (sc < R(1)) sc = R(1);
  if (!(abs(rep.ratio.im()) <= tol * sc)) {
    rep.verdict = Verdict::FAIL;
    rep.warnings.push_back("quotient has a nonvanishing imaginary part");
    return rep;
  }
  // The cross-check constant is known in advance, so the reconstruction
  // window must be wide enough to contain it even when the caller's bound
  // is tuned for the modest fractions of the per-character quotients.
  mpz_class hb = max_height;
  if (rep.expected_abs.get_num() > hb) hb = rep.expected_abs.get_num();
  if (rep.expected_abs.get_den() > hb) hb = rep.expected_abs.get_den();
  rep.guess = rational_reconstruct(rep.ratio.re(), hb, tol * sc);
  rep.matches_expected =
      rep.guess &&
      rep.guess->value() == mpq_class(rep.expected_sign) * rep.expected_abs;
  rep.verdict = rep.matches_expected ? Verdict::PASS : Verdict::FAIL;
  if (rep.guess && !rep.matches_expected)
    rep.warnings.push_back(
        "fitted fraction disagrees with the functional-equation product");
  return rep;
}

}  // namespace

Prop13Report prop13_check(const EllipticCurveData& E, const AbelianField& F,
                          const mpz_class& max_height, ApCache* cache) {
  Prop13Report rep = prop13_once(E, F, max_height, cache);
  if (rep.verdict != Verdict::PASS) return rep;
  num::ScopedPrecision hi(ctx().bits * 3 / 2);
  Prop13Report again = prop13_once(E, F, max_height, cache);
  if (again.verdict == Verdict::PASS && again.guess && rep.guess &&
      again.guess->num == rep.guess->num &&
      again.guess->den == rep.guess->den) {
    rep.revalidated = true;
  } else {
    rep.verdict = Verdict::FAIL;
    rep.warnings.push_back("higher-precision recomputation rejected the fit");
  }
  return rep;
}

namespace {

// Parity-matched regulator sums of every pool entry divided by the
// derivative targets: the search works on y[k][i] = S(chi_i, ell_k) / t_i.
struct SearchData {
  PeriodLattice L;
  lfun::LambdaChi lv;
  std::vector<BigComplex> target;
  std::vector<std::vector<BigComplex>> y;  // [pool][character]
};

SearchData search_data(const EllipticCurveData& E, const AbelianField& F,
                       const std::vector<GaloisDivisor>& pool,
                       ApCache* cache) {
  SearchData sd{curve::periods(E), lfun::lvalues_all(E, F, cache), {}, {}};
  BigReal pi = BigReal::pi();
  size_t n = sd.lv.chis.size();
  sd.target.resize(n);
  for (size_t i = 0; i < n; ++i) {
    sd.target[i] = sd.lv.chis[i].even()
                       ? sd.lv.lprime0[i] * pi
                       : sd.lv.lprime0[i] * (pi * sd.L.im_tau);
    if (near_zero(sd.target[i]))
      raise(ErrorKind::PrecisionTooLow,
            "derivative value indistinguishable from zero; raise the "
            "working precision");
  }
  sd.y.resize(pool.size());
  for (size_t k = 0; k < pool.size(); ++k) {
    CharacterSums cs = character_sums(F, sd.L, pool[k]);
    sd.y[k].resize(n);
    for (size_t i = 0; i < n; ++i)
      sd.y[k][i] =
          (sd.lv.chis[i].even() ? cs.s_d[i] : cs.s_j[i]) / sd.target[i];
  }
  return sd;
}

// True residuals of a candidate in exact arithmetic: max_i of
// |sum_k c_k y[k][i] - r_i|.
std::vector<BigReal> candidate_residuals(const SearchData& sd,
                                         const std::vector<mpz_class>& c,
                                         const std::vector<mpq_class>& r) {
  size_t n = sd.target.size();
  std::vector<BigReal> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    BigComplex combo = BigComplex::zero();
    for (size_t k = 0; k < sd.y.size(); ++k)
      combo = combo + sd.y[k][i] * BigComplex(BigReal::from_mpz(c[k]));
    out.push_back(abs(combo - BigComplex(BigReal::from_mpq(r[i]))));
  }
  return out;
}

bool residuals_pass(const std::vector<BigReal>& res, const BigReal& tol) {
  for (const BigReal& r : res)
    if (!(r <= tol)) return false;
  return true;
}

}  // namespace

std::optional<SearchResult> search_divisor(
    const EllipticCurveData& E, const AbelianField& F,
    const std::vector<GaloisDivisor>& pool, const mpz_class& coeff_bound,
    ApCache* cache) {
  if (pool.empty()) raise(ErrorKind::DomainError, "empty candidate pool");
  if (coeff_bound < 1 || !coeff_bound.fits_slong_p())
    raise(ErrorKind::DomainError, "coefficient bound out of range");
  SearchData sd = search_data(E, F, pool, cache);
  size_t K = pool.size();
  size_t n = sd.target.size();
  BigReal tol = accept_tol();

  // Column scale for the lattice: one unit of rounding error stays far
  // below the acceptance gate.
  mpz_class W;
  mpz_ui_pow_ui(W.get_mpz_t(), 10,
                (unsigned long)((digits_of(ctx()) * 4) / 5));
  BigReal Wr = BigReal::from_mpz(W);
  std::vector<std::vector<mpz_class>> zre(K, std::vector<mpz_class>(n));
  std::vector<std::vector<mpz_class>> zim(K, std::vector<mpz_class>(n));
  for (size_t k = 0; k < K; ++k)
    for (size_t i = 0; i < n; ++i) {
      zre[k][i] = (Wr * sd.y[k][i].re()).round_to_mpz();
      zim[k][i] = (Wr * sd.y[k][i].im()).round_to_mpz();
    }

  long hmax = coeff_bound.get_si();
  size_t dim = K + n;        // unknowns (c, p)
  size_t cols = dim + 2 * n;  // identity block plus Re/Im residual columns
  for (long h = 1; h <= hmax; ++h) {
    std::vector<std::vector<mpz_class>> basis(
        dim, std::vector<mpz_class>(cols, 0));
    for (size_t k = 0; k < K; ++k) {
      basis[k][k] = 1;
      for (size_t i = 0; i < n; ++i) {
        basis[k][dim + 2 * i] = h * zre[k][i];
        basis[k][dim + 2 * i + 1] = h * zim[k][i];
      }
    }
    for (size_t i = 0; i < n; ++i) {
      basis[K + i][K + i] = 1;
      basis[K + i][dim + 2 * i] = -W;
    }
    lll_reduce(basis);
    for (const auto& row : basis) {
      std::vector<mpz_class> c(row.begin(), row.begin() + K);
      bool all_zero = true;
      bool too_big = false;
      for (const mpz_class& v : c) {
        if (v != 0) all_zero = false;
        mpz_class a = v < 0 ? mpz_class(-v) : v;
        if (a > coeff_bound) too_big = true;
      }
      if (all_zero || too_big) continue;
      std::vector<mpq_class> r(n);
      for (size_t i = 0; i < n; ++i) {
        r[i] = mpq_class(row[K + i], mpz_class(h));
        r[i].canonicalize();
      }
      if (!residuals_pass(candidate_residuals(sd, c, r), tol)) continue;

      // Anti-coincidence pass: everything again at 1.5x the precision.
      {
        num::ScopedPrecision hi(ctx().bits * 3 / 2);
        SearchData sd2 = search_data(E, F, pool, cache);
        if (!residuals_pass(candidate_residuals(sd2, c, r), accept_tol()))
          continue;
      }

      bool flip = false;
      for (const mpz_class& v : c) {
        if (v != 0) {
          flip = v < 0;
          break;
        }
      }
      if (flip) {
        for (mpz_class& v : c) v = -v;
        for (mpq_class& q : r) q = -q;
      }

      SearchResult out;
      out.coeffs = c;
      out.denominator = h;
      out.ratios = r;

      // Describe the combined divisor sum_k c_k ell_k.
      GaloisDivisor comb;
      for (long s : F.cosets) {
        std::vector<std::pair<long, curve::TorusPoint>> terms;
        for (size_t k = 0; k < K; ++k) {
          long ck = c[k].get_si();
          for (const auto& t : pool[k].at(s).terms)
            terms.push_back({ck * t.first, t.second});
        }
        comb.orbit.push_back({s, Divisor::make(terms)});
      }
      CharacterSums cc = character_sums(F, sd.L, comb);
      out.report.verdict = Verdict::PASS;
      out.report.revalidated = true;
      for (size_t i = 0; i < n; ++i) {
        ChiRow rw;
        rw.chi = sd.lv.chis[i];
        rw.even = rw.chi.even();
        rw.level = sd.lv.twists[i].level;
        rw.w = sd.lv.twists[i].w;
        rw.residual = sd.lv.twists[i].residual;
        rw.lprime0 = sd.lv.lprime0[i];
        rw.l2 = sd.lv.l2[i];
        rw.s_d = cc.s_d[i];
        rw.s_j = cc.s_j[i];
        rw.ratio = (rw.even ? cc.s_d[i] : cc.s_j[i]) / sd.target[i];
        mpz_class den = r[i].get_den();
        mpz_class nm = r[i].get_num();
        mpz_class anm = nm < 0 ? mpz_class(-nm) : nm;
        rw.guess = RationalGuess{
            nm, den, abs(rw.ratio - BigComplex(BigReal::from_mpq(r[i]))),
            anm > den ? anm : den};
        out.report.rows.push_back(std::move(rw));
      }
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace ellreg::rat
