#include "ellreg/reconstruct.hpp"

#include <algorithm>

namespace ellreg::num {

std::optional<RationalGuess> rational_reconstruct(const BigReal& x,
                                                  const mpz_class& max_height,
                                                  const BigReal& tol) {
  if (!(tol.sgn() > 0)) raise(ErrorKind::DomainError, "tol must be positive");
  if (!x.is_finite()) return std::nullopt;
  mpq_class target = x.to_mpq_exact();
  mpq_class tolq = tol.to_mpq_exact();

  mpz_class p_prev(1), q_prev(0);  // h_{-1}
  mpz_class p_cur(0), q_cur(1);    // placeholder, replaced by h_0 below
  mpq_class rem = target;
  bool first = true;
  while (true) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), rem.get_num().get_mpz_t(),
               rem.get_den().get_mpz_t());
    mpz_class p, q;
    if (first) {
      p = a;
      q = 1;
    } else {
      p = a * p_cur + p_prev;
      q = a * q_cur + q_prev;
    }
    mpz_class height = std::max(mpz_class(abs(p)), q);
    if (height > max_height) return std::nullopt;
    mpq_class conv(p, q);
    conv.canonicalize();
    mpq_class diff = abs(target - conv);
    if (diff <= tolq) {
      RationalGuess g;
      g.num = conv.get_num();
      g.den = conv.get_den();
      g.residual = BigReal::from_mpq(diff);
      g.height = std::max(mpz_class(abs(g.num)), g.den);
      return g;
    }
    mpq_class frac = rem - mpq_class(a);
    if (frac == 0) return std::nullopt;  // expansion exhausted, nothing qualified
    rem = mpq_class(1) / frac;
    if (!first) {
      p_prev = p_cur;
      q_prev = q_cur;
    }
    p_cur = p;
    q_cur = q;
    first = false;
  }
}

namespace {

using Row = std::vector<mpz_class>;

mpz_class dot_zz(const Row& a, const Row& b) {
  mpz_class s(0);
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Full Gram-Schmidt recomputation: mu (lower triangular) and the squared
// norms B_i of the orthogonalized rows, all exact.  Desk-scale dimensions
// keep this O(n^3) recompute affordable and simple.
struct Gso {
  std::vector<std::vector<mpq_class>> mu;
  std::vector<mpq_class> B;

  void compute(const std::vector<Row>& b) {
    size_t n = b.size();
    mu.assign(n, std::vector<mpq_class>(n, mpq_class(0)));
    B.assign(n, mpq_class(0));
    // bstar_i expressed via dot products: maintain r_ij = <b_i, b*_j>
    std::vector<std::vector<mpq_class>> r(n, std::vector<mpq_class>(n));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j <= i; ++j) {
        mpq_class s(dot_zz(b[i], b[j]));
        for (size_t k = 0; k < j; ++k) s -= mu[j][k] * r[i][k];
        r[i][j] = s;
        if (j < i) mu[i][j] = B[j] == 0 ? mpq_class(0) : s / B[j];
      }
      B[i] = r[i][i];
      mu[i][i] = 1;
    }
  }
};

}  // namespace

void lll_reduce(std::vector<Row>& basis, long delta_num, long delta_den) {
  size_t n = basis.size();
  if (n < 2) return;
  mpq_class delta(delta_num, delta_den);
  Gso g;
  g.compute(basis);
  size_t k = 1;
  long steps = 0;
  while (k < n) {
    if (++steps > 200000)
      raise(ErrorKind::NonConvergence, "lll step budget exhausted");
    for (size_t j = k; j-- > 0;) {
      mpq_class m = g.mu[k][j];
      if (abs(m) * 2 > 1) {
        mpq_class half(1, 2);
        mpq_class shifted = m + half;
        mpz_class r;
        mpz_fdiv_q(r.get_mpz_t(), shifted.get_num().get_mpz_t(),
                   shifted.get_den().get_mpz_t());
        for (size_t t = 0; t < basis[k].size(); ++t)
          basis[k][t] -= r * basis[j][t];
        g.compute(basis);
      }
    }
    mpq_class lhs = g.B[k];
    mpq_class rhs = (delta - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.B[k - 1];
    if (lhs >= rhs) {
      ++k;
    } else {
      std::swap(basis[k], basis[k - 1]);
      g.compute(basis);
      k = k > 1 ? k - 1 : 1;
    }
  }
}

namespace {

void canonicalize_sign(Row& c) {
  for (const mpz_class& x : c) {
    if (x != 0) {
      if (x < 0)
        for (mpz_class& y : c) y = -y;
      return;
    }
  }
}

// true when a beats b: smaller max-norm, then lexicographically smaller
// absolute values
bool better_candidate(const Row& a, const Row& b) {
  mpz_class ma(0), mb(0);
  for (const auto& x : a) ma = std::max(ma, mpz_class(abs(x)));
  for (const auto& x : b) mb = std::max(mb, mpz_class(abs(x)));
  if (ma != mb) return ma < mb;
  for (size_t i = 0; i < a.size(); ++i) {
    mpz_class xa(abs(a[i])), xb(abs(b[i]));
    if (xa != xb) return xa < xb;
  }
  return false;
}

}  // namespace

std::optional<std::vector<mpz_class>> integer_relation(
    const std::vector<BigReal>& v, const mpz_class& coeff_bound) {
  size_t n = v.size();
  if (n < 2) raise(ErrorKind::DomainError, "need at least two values");
  long digits = digits_of(ctx());

  mpz_class margin;
  mpz_ui_pow_ui(margin.get_mpz_t(), 10,
                static_cast<unsigned long>(0.3 * static_cast<double>(digits)));
  if (coeff_bound * coeff_bound * static_cast<long>(n) > margin)
    raise(ErrorKind::PrecisionTooLow,
          "coefficient bound exceeds the lattice scale margin");

  double err_cap = -0.9 * static_cast<double>(digits) * 3.3219280948874;
  for (const BigReal& x : v) {
    if (!x.is_finite()) raise(ErrorKind::DomainError, "non-finite input");
    if (x.err_log2() > err_cap)
      raise(ErrorKind::PrecisionTooLow, "input error bound too large");
  }

  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10,
                static_cast<unsigned long>(0.8 * static_cast<double>(digits)));
  BigReal scale_r = BigReal::from_mpz(scale);

  std::vector<Row> basis(n, Row(n + 1, mpz_class(0)));
  for (size_t i = 0; i < n; ++i) {
    basis[i][i] = 1;
    basis[i][n] = (v[i] * scale_r).round_to_mpz();
  }
  lll_reduce(basis);

  BigReal tol = pow_si(BigReal::from_long(10), -(digits / 2));
  std::optional<Row> best;
  for (const Row& row : basis) {
    Row c(row.begin(), row.begin() + n);
    bool zero = std::all_of(c.begin(), c.end(),
                            [](const mpz_class& x) { return x == 0; });
    if (zero) continue;
    bool bounded = std::all_of(c.begin(), c.end(), [&](const mpz_class& x) {
      return abs(x) <= coeff_bound;
    });
    if (!bounded) continue;
    BigReal resid = BigReal::zero();
    for (size_t i = 0; i < n; ++i) resid = resid + BigReal::from_mpz(c[i]) * v[i];
    if (cmp(abs(resid), tol) > 0) continue;
    canonicalize_sign(c);
    if (!best || better_candidate(c, *best)) best = c;
  }
  if (!best) return std::nullopt;
  return std::vector<mpz_class>(best->begin(), best->end());
}

}  // namespace ellreg::num
