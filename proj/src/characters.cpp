#include "ellreg/characters.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

namespace ellreg::chars {

namespace {

long mod_pow(long b, long e, long m) {
  long r = 1 % m;
  b %= m;
  if (b < 0) b += m;
  while (e > 0) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

long mult_order(long a, long m) {
  long r = a % m, k = 1;
  while (r != 1) {
    r = r * (a % m) % m;
    if (++k > m) raise(ErrorKind::InternalError, "order loop");
  }
  return k;
}

// x = g mod pe, x = 1 mod (m/pe)
long crt_lift(long g, long pe, long m) {
  long q = m / pe;
  if (q == 1) return g;
  for (long x = g; x < m; x += pe)
    if (x % q == 1) return x;
  raise(ErrorKind::InternalError, "crt lift");
}

std::vector<std::pair<long, long>> prime_powers(long m) {
  std::vector<std::pair<long, long>> out;
  for (long p = 2; p * p <= m; ++p) {
    if (m % p) continue;
    long pe = 1;
    while (m % p == 0) {
      m /= p;
      pe *= p;
    }
    out.emplace_back(p, pe);
  }
  if (m > 1) out.emplace_back(m, m);
  return out;
}

}  // namespace

bool UnitGroup::coprime(long a) const { return std::gcd(reduce(a), m) == 1 || m == 1; }

long UnitGroup::reduce(long a) const {
  long r = a % m;
  return r < 0 ? r + m : r;
}

const std::vector<long>* UnitGroup::dlog_of(long a) const {
  long r = reduce(a);
  if (m == 1) return &dlog[0];
  if (std::gcd(r, m) != 1) return nullptr;
  return &dlog[r];
}

const UnitGroup& UnitGroup::of(long m) {
  if (m < 1) raise(ErrorKind::DomainError, "modulus must be positive");
  static std::mutex mu;
  static std::map<long, UnitGroup> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;

  UnitGroup ug;
  ug.m = m;
  if (m == 1) {
    ug.dlog = {{}};
  } else {
    long phi = 1;
    for (auto [p, pe] : prime_powers(m)) {
      long phi_pe = pe / p * (p - 1);
      phi *= phi_pe;
      if (p == 2) {
        if (pe == 2) continue;  // trivial factor
        if (pe == 4) {
          ug.gens.push_back(crt_lift(3, 4, m));
          ug.orders.push_back(2);
        } else {
          ug.gens.push_back(crt_lift(pe - 1, pe, m));
          ug.orders.push_back(2);
          ug.gens.push_back(crt_lift(5, pe, m));
          ug.orders.push_back(pe / 4);
        }
      } else {
        long g = 0;
        for (long c = 2; c < pe; ++c) {
          if (std::gcd(c, pe) != 1) continue;
          if (mult_order(c, pe) == phi_pe) {
            g = c;
            break;
          }
        }
        ug.gens.push_back(crt_lift(g, pe, m));
        ug.orders.push_back(phi_pe);
      }
    }
    ug.phi = phi;
    ug.exponent = 1;
    for (long n : ug.orders) ug.exponent = std::lcm(ug.exponent, n);

    ug.dlog.assign(m, {});
    std::vector<long> idx(ug.gens.size(), 0);
    // enumerate all exponent tuples; product identifies the residue
    while (true) {
      long a = 1;
      for (size_t i = 0; i < ug.gens.size(); ++i)
        a = a * mod_pow(ug.gens[i], idx[i], m) % m;
      ug.dlog[a] = idx;
      size_t i = 0;
      for (; i < idx.size(); ++i) {
        if (++idx[i] < ug.orders[i]) break;
        idx[i] = 0;
      }
      if (i == idx.size()) break;
      if (ug.gens.empty()) break;
    }
    if (ug.gens.empty()) ug.dlog[1] = {};
  }
  return cache.emplace(m, std::move(ug)).first->second;
}

DirichletCharacter::DirichletCharacter(long m, std::vector<long> exps)
    : m_(m), exps_(std::move(exps)) {
  const UnitGroup& ug = UnitGroup::of(m);
  if (exps_.size() != ug.gens.size())
    raise(ErrorKind::DomainError, "exponent vector length mismatch");
  order_ = 1;
  for (size_t i = 0; i < exps_.size(); ++i) {
    exps_[i] %= ug.orders[i];
    if (exps_[i] < 0) exps_[i] += ug.orders[i];
    long g = std::gcd(exps_[i], ug.orders[i]);
    order_ = std::lcm(order_, ug.orders[i] / g);
  }
  even_ = value_exponent(m_ - 1) == 0 || m_ <= 2;

  conductor_ = m_;
  for (long dd = 1; dd <= m_; ++dd) {
    if (m_ % dd) continue;
    bool factors = true;
    for (long a = 1 + dd; a < m_ + 1 && factors; a += dd) {
      long r = a % m_;
      if (r == 1 || std::gcd(r, m_) != 1) continue;
      if (value_exponent(r) != 0) factors = false;
    }
    if (factors) {
      conductor_ = dd;
      break;
    }
  }
}

long DirichletCharacter::zeta_order() const {
  return UnitGroup::of(m_).exponent;
}

long DirichletCharacter::value_exponent(long a) const {
  const UnitGroup& ug = UnitGroup::of(m_);
  const std::vector<long>* k = ug.dlog_of(a);
  if (!k) return -1;
  long L = ug.exponent;
  long t = 0;
  for (size_t i = 0; i < exps_.size(); ++i) {
    long step = L / ug.orders[i];
    t = (t + exps_[i] * (*k)[i] % L * step) % L;
  }
  return t;
}

BigComplex DirichletCharacter::value(long a) const {
  using namespace num;
  long t = value_exponent(a);
  if (t < 0) return BigComplex::zero();
  long L = zeta_order();
  long g = std::gcd(t, L);
  long tt = t / g, ll = L / g;
  // exact special angles keep report values clean
  if (tt == 0) return BigComplex::one();
  if (ll == 2) return -BigComplex::one();
  if (ll == 4) return tt == 1 ? BigComplex::i() : -BigComplex::i();
  BigReal ang = mul_2si(BigReal::pi() * tt, 1) / ll;
  return expi(ang);
}

DirichletCharacter DirichletCharacter::power(long k) const {
  std::vector<long> e = exps_;
  const UnitGroup& ug = UnitGroup::of(m_);
  for (size_t i = 0; i < e.size(); ++i) {
    long kk = k % ug.orders[i];
    if (kk < 0) kk += ug.orders[i];
    e[i] = e[i] * kk % ug.orders[i];
  }
  return DirichletCharacter(m_, e);
}

DirichletCharacter DirichletCharacter::conjugate() const { return power(-1); }

DirichletCharacter DirichletCharacter::primitive() const {
  if (conductor_ == m_) return *this;
  const UnitGroup& big = UnitGroup::of(m_);
  const UnitGroup& small = UnitGroup::of(conductor_);
  std::vector<long> exps0(small.gens.size());
  for (size_t i = 0; i < small.gens.size(); ++i) {
    // lift the small generator to a residue coprime to the full modulus
    long lift = small.gens[i];
    while (std::gcd(lift, m_) != 1) lift += conductor_;
    long t = value_exponent(lift);
    // chi factors through the conductor, so chi(lift) is an orders[i]-th
    // root of unity: t * orders[i] is a multiple of the big exponent
    if (t < 0 || (t * small.orders[i]) % big.exponent != 0)
      raise(ErrorKind::InternalError, "conductor inconsistent with values");
    exps0[i] = (t * small.orders[i] / big.exponent) % small.orders[i];
  }
  return DirichletCharacter(conductor_, exps0);
}

AbelianField AbelianField::make(long m, const std::vector<long>& gens) {
  const UnitGroup& ug = UnitGroup::of(m);
  AbelianField F;
  F.m = m;
  F.subgroup_gens = gens;
  if (m == 1) {
    F.H = {0};
    F.cosets = {0};
    return F;
  }
  for (long g : gens) {
    if (!ug.coprime(g))
      raise(ErrorKind::DomainError, "subgroup generator not coprime to modulus");
  }
  std::set<long> H{1};
  bool grew = true;
  while (grew) {
    grew = false;
    std::set<long> next = H;
    for (long h : H)
      for (long g : gens)
        if (next.insert(h * ug.reduce(g) % m).second) grew = true;
    H = next;
  }
  F.H.assign(H.begin(), H.end());

  std::set<long> seen;
  std::set<long> reps;
  for (long a = 1; a < m; ++a) {
    if (std::gcd(a, m) != 1 || seen.count(a)) continue;
    long rep = a;
    for (long h : F.H) {
      long x = a * h % m;
      seen.insert(x);
      rep = std::min(rep, x);
    }
    reps.insert(rep);
  }
  F.cosets.assign(reps.begin(), reps.end());
  F.d = static_cast<long>(F.cosets.size());
  if (ug.phi != F.d * static_cast<long>(F.H.size()))
    raise(ErrorKind::InternalError, "index computation mismatch");
  F.is_real = F.in_H(m - 1) || m <= 2;
  if (!F.is_real && F.d % 2 != 0)
    raise(ErrorKind::InternalError, "complex field of odd degree");
  return F;
}

bool AbelianField::in_H(long a) const {
  if (m == 1) return true;
  long r = a % m;
  if (r < 0) r += m;
  return std::binary_search(H.begin(), H.end(), r);
}

long AbelianField::coset_rep(long a) const {
  if (m == 1) return 0;
  long r = a % m;
  if (r < 0) r += m;
  if (std::gcd(r, m) != 1)
    raise(ErrorKind::DomainError, "residue not in the unit group");
  long rep = m;
  for (long h : H) rep = std::min(rep, r * h % m);
  return rep;
}

std::vector<DirichletCharacter> characters_of(const AbelianField& F) {
  const UnitGroup& ug = UnitGroup::of(F.m);
  std::vector<DirichletCharacter> out;
  std::vector<long> idx(ug.gens.size(), 0);
  while (true) {
    DirichletCharacter chi(F.m, idx);
    bool trivial_on_H = true;
    for (long h : F.H)
      if (chi.value_exponent(h) != 0) {
        trivial_on_H = false;
        break;
      }
    if (trivial_on_H) out.push_back(chi);
    size_t i = 0;
    for (; i < idx.size(); ++i) {
      if (++idx[i] < ug.orders[i]) break;
      idx[i] = 0;
    }
    if (i == idx.size()) break;
  }
  if (static_cast<long>(out.size()) != F.d)
    raise(ErrorKind::InternalError, "character count != degree");
  std::stable_sort(out.begin(), out.end(),
                   [](const DirichletCharacter& a, const DirichletCharacter& b) {
                     if (a.order() != b.order()) return a.order() < b.order();
                     return a.exponents() < b.exponents();
                   });
  return out;
}

BigComplex character_value(const DirichletCharacter& chi, long a) {
  return chi.value(a);
}

std::vector<std::vector<size_t>> galois_orbits(
    const std::vector<DirichletCharacter>& chars) {
  std::vector<std::vector<size_t>> orbits;
  std::vector<bool> used(chars.size(), false);
  for (size_t i = 0; i < chars.size(); ++i) {
    if (used[i]) continue;
    std::vector<size_t> orbit;
    long n = chars[i].order();
    for (long k = 1; k <= n; ++k) {
      if (std::gcd(k, n) != 1) continue;
      DirichletCharacter p = chars[i].power(k);
      for (size_t j = 0; j < chars.size(); ++j) {
        if (!used[j] && chars[j] == p) {
          used[j] = true;
          orbit.push_back(j);
        }
      }
    }
    std::sort(orbit.begin(), orbit.end());
    orbits.push_back(orbit);
  }
  return orbits;
}

SplittingData splitting_data(const AbelianField& F, long p) {
  if (F.m > 1 && p % F.m == 0)
    raise(ErrorKind::RamifiedPrime, "prime divides the modulus");
  if (F.m > 1 && std::gcd(p % F.m, F.m) != 1)
    raise(ErrorKind::RamifiedPrime, "prime shares a factor with the modulus");
  if (F.m == 1) return {1, 1};
  long f = 1;
  long r = p % F.m;
  long x = r;
  while (!F.in_H(x)) {
    x = x * r % F.m;
    if (++f > F.m) raise(ErrorKind::InternalError, "splitting order loop");
  }
  return {f, F.d / f};
}

}  // namespace ellreg::chars
