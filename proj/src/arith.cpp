#include "cmkernel/arith.hpp"

#include <cmath>

namespace cmk {

long valuation(const Int& x, const Int& p) {
  if (x == 0) throw std::domain_error("valuation of zero undefined");
  Int n = abs(x);
  long v = 0;
  Int q, r;
  while (true) {
    mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
    if (r != 0) break;
    n = q;
    ++v;
  }
  return v;
}

long valuation(const Rat& x, const Int& p) {
  if (x == 0) throw std::domain_error("valuation of zero undefined");
  return valuation(Int(x.get_num()), p) - valuation(Int(x.get_den()), p);
}

int kronecker(const Int& a, const Int& n) {
  return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}

namespace {

// (a,b)_p for odd p via the standard valuation formula.
int hilbert_odd(const Rat& a, const Rat& b, const Int& p) {
  long al = valuation(a, p), be = valuation(b, p);
  Rat pa = al >= 0 ? Rat(pow_int(p, al)) : Rat(1, pow_int(p, -al));
  Rat pb = be >= 0 ? Rat(pow_int(p, be)) : Rat(1, pow_int(p, -be));
  Rat ua = a / pa, ub = b / pb;
  // reduce units mod p
  Int num_a = ua.get_num() % p, den_a = ua.get_den() % p;
  Int num_b = ub.get_num() % p, den_b = ub.get_den() % p;
  Int inv;
  mpz_invert(inv.get_mpz_t(), den_a.get_mpz_t(), p.get_mpz_t());
  Int ra = (num_a * inv) % p;
  mpz_invert(inv.get_mpz_t(), den_b.get_mpz_t(), p.get_mpz_t());
  Int rb = (num_b * inv) % p;
  int leg_a = kronecker(ra, p), leg_b = kronecker(rb, p);
  int eps = ((p - 1) / 2) % 2 == 1 ? -1 : 1;  // (-1|p)
  int r = 1;
  if ((al % 2 != 0) && (be % 2 != 0)) r *= eps;
  if (be % 2 != 0) r *= leg_a;
  if (al % 2 != 0) r *= leg_b;
  return r;
}

// Reduce a rational unit at 2 to an odd integer mod 8.
long odd_part_mod8(const Rat& u) {
  Int num = u.get_num(), den = u.get_den();
  Int inv;
  Int eight(8);
  Int d8 = den % eight;
  if (d8 < 0) d8 += eight;
  mpz_invert(inv.get_mpz_t(), d8.get_mpz_t(), eight.get_mpz_t());
  Int r = (num * inv) % eight;
  if (r < 0) r += eight;
  return r.get_si();
}

int hilbert_two(const Rat& a, const Rat& b) {
  long al = valuation(a, Int(2)), be = valuation(b, Int(2));
  Rat pa = al >= 0 ? Rat(pow_int(Int(2), al)) : Rat(1, pow_int(Int(2), -al));
  Rat pb = be >= 0 ? Rat(pow_int(Int(2), be)) : Rat(1, pow_int(Int(2), -be));
  long ua = odd_part_mod8(a / pa), ub = odd_part_mod8(b / pb);
  auto eps = [](long u) { return ((u - 1) / 2) % 2; };         // mod 2
  auto om = [](long u) { return ((u * u - 1) / 8) % 2; };      // mod 2
  long e = eps(ua) * eps(ub) + (al % 2 + 2) % 2 * om(ub) + (be % 2 + 2) % 2 * om(ua);
  return e % 2 == 0 ? 1 : -1;
}

}  // namespace

int hilbert(const Rat& a, const Rat& b, const Place& v) {
  if (a == 0 || b == 0) throw std::domain_error("hilbert symbol needs nonzero arguments");
  if (v.infinite) return (a < 0 && b < 0) ? -1 : 1;
  if (v.p == 2) return hilbert_two(a, b);
  return hilbert_odd(a, b, v.p);
}

int SymbolTable::hilbert(const Rat& a, const Rat& b, const Place& v) const {
  auto key = std::make_tuple(a, b, v.infinite, v.p);
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  int val = cmk::hilbert(a, b, v);
  std::lock_guard<std::mutex> lk(mu_);
  cache_.emplace(std::move(key), val);
  return val;
}

std::vector<Place> hilbert_support(const Rat& a, const Rat& b) {
  std::vector<Place> out;
  out.push_back(Place::arch());
  out.push_back(Place::finite(Int(2)));
  Int prod = abs(a.get_num() * a.get_den() * b.get_num() * b.get_den());
  Int p(3);
  while (prod % 2 == 0) prod /= 2;
  Int m = prod;
  // trial division; desk scale inputs only
  for (Int d(3); d * d <= m; d += 2) {
    if (m % d == 0) {
      out.push_back(Place::finite(d));
      while (m % d == 0) m /= d;
    }
  }
  if (m > 1) out.push_back(Place::finite(m));
  return out;
}

bool is_fundamental_discriminant(const Int& minusD) {
  if (minusD >= 0) return false;
  Int m = minusD;
  Int r = m % 4;
  if (r < 0) r += 4;
  if (r == 1) {
    // must be squarefree
    Int n = abs(m);
    for (Int d(2); d * d <= n; ++d)
      if (n % (d * d) == 0) return false;
    return true;
  }
  if (r == 0) {
    Int q = m / 4;
    Int rq = q % 4;
    if (rq < 0) rq += 4;
    if (rq != 2 && rq != 3) return false;
    Int n = abs(q);
    for (Int d(2); d * d <= n; ++d)
      if (n % (d * d) == 0) return false;
    return true;
  }
  return false;
}

int omega_local_unit(const Int& D, const Int& p, const Int& u) {
  // Build a positive integer U with U ≡ u mod p^k (k generous) and U ≡ 1 mod
  // the prime-to-p part of D; then omega_p(u) = kronecker(-D, U).
  Int pk = pow_int(p, 6);
  Int M = D;
  while (M % p == 0) M /= p;
  Int mod = pk * M;
  Int u_n = u % pk;
  if (u_n < 0) u_n += pk;
  const Int& u_ref = u_n;
  // CRT
  Int U;
  if (M == 1) {
    U = u_ref;
  } else {
    Int inv_pk_mod_M, inv_M_mod_pk;
    mpz_invert(inv_pk_mod_M.get_mpz_t(), pk.get_mpz_t(), M.get_mpz_t());
    mpz_invert(inv_M_mod_pk.get_mpz_t(), M.get_mpz_t(), pk.get_mpz_t());
    U = u_ref * M * inv_M_mod_pk + pk * inv_pk_mod_M;
    U %= mod;
  }
  if (U < 0) U += mod;
  if (U == 0) U = mod;
  int s = kronecker(-D, U);
  if (s == 0) throw std::logic_error("omega_local_unit: argument not a unit");
  return s;
}

int omega_local(const Int& D, const Place& v, const Rat& x) {
  if (x == 0) throw std::domain_error("omega_local at zero");
  if (v.infinite) return x > 0 ? 1 : -1;
  const Int& p = v.p;
  long vd = valuation(Int(D), p);
  long vx = valuation(x, p);
  Rat unit = x;
  if (vx >= 0)
    unit /= Rat(pow_int(p, vx));
  else
    unit *= Rat(pow_int(p, -vx));
  if (vd == 0) {
    // unramified: unit part maps to 1, omega_p(p) = kronecker(-D, p)
    int s = kronecker(-D, p);
    return (vx % 2 == 0) ? 1 : s;
  }
  // ramified: unit character by CRT; omega_p(p) from the global product:
  // 1 = prod_v omega_v(p) = omega_inf(p) * omega_p(p) * prod_{q != p} omega_q(p).
  Int num = unit.get_num(), den = unit.get_den();
  Int pk = pow_int(p, 6);
  Int dmod = den % pk;
  if (dmod < 0) dmod += pk;
  Int inv;
  mpz_invert(inv.get_mpz_t(), dmod.get_mpz_t(), pk.get_mpz_t());
  Int ured = (num * inv) % pk;
  if (ured < 0) ured += pk;
  int s_unit = omega_local_unit(D, p, ured);
  if (vx == 0) return s_unit;
  // omega_p(p) from the global product formula: only q | D, q != p contribute
  // nontrivially (unramified places are trivial on units, omega_inf(p) = 1).
  int prod_others = 1;
  Int M = D;
  while (M % p == 0) M /= p;
  for (Int q(2); M > 1; ++q) {
    if (M % q != 0) continue;
    prod_others *= omega_local_unit(D, q, p);
    while (M % q == 0) M /= q;
  }
  int omega_p_of_p = prod_others;  // inverse of +-1 is itself
  int s = s_unit;
  if (vx % 2 != 0) s *= omega_p_of_p;
  return s;
}

Rat generalized_bernoulli_L0(const Int& D) {
  if (!is_fundamental_discriminant(-D))
    throw std::domain_error("-D must be a fundamental discriminant < 0");
  // omega is odd exactly when -D < 0; L(0) = -B_{1,omega} = -(1/D) sum a*omega(a).
  Int s(0);
  for (Int a(1); a < D; ++a) {
    int k = kronecker(-D, a);
    s += Int(k) * a;
  }
  return make_rat(-s, D);
}

Cx local_epsilon_omega(const Place& v, const Int& D) {
  if (v.infinite) return Cx(0.0, 1.0);
  const Int& p = v.p;
  long e = valuation(Int(D), p);
  if (e == 0)
    throw std::domain_error("omega unramified at p, epsilon factor is 1 -- use trivial branch");
  Int q = pow_int(p, e);
  double qd = q.get_d();
  Cx s(0.0, 0.0);
  for (Int u(1); u < q; ++u) {
    if (u % p == 0) continue;
    int om = omega_local_unit(D, p, u);
    double frac = u.get_d() / qd;
    s += static_cast<double>(om) * std::polar(1.0, -2.0 * M_PI * frac);
  }
  return s / std::sqrt(qd);
}

Int lift_omega_root(const Int& D, const Int& p, unsigned prec) {
  // minimal polynomial of omega_E: D odd: x^2 - x + (1+D)/4 ; D = 4m: x^2 + m.
  Int b, c;
  if (D % 2 != 0) {
    b = -1;
    c = (1 + D) / 4;
  } else {
    b = 0;
    c = D / 4;
  }
  if (p == 2 && D % 2 == 0) throw std::domain_error("2 not split");
  // find root mod p
  Int r(-1);
  for (Int x(0); x < p; ++x) {
    if (((x * x + b * x + c) % p) == 0) {
      r = x;
      break;
    }
  }
  if (r < 0) throw std::domain_error("p not split: no root of minimal polynomial");
  Int mod = p;
  for (unsigned i = 1; i < prec; ++i) {
    Int next_mod = mod * p;
    // Newton: r <- r - f(r)/f'(r) mod next_mod
    Int f = (r * r + b * r + c) % next_mod;
    Int fp = (2 * r + b) % next_mod;
    Int inv;
    if (mpz_invert(inv.get_mpz_t(), fp.get_mpz_t(), next_mod.get_mpz_t()) == 0)
      throw std::domain_error("Hensel lift failed (p ramified?)");
    r = (r - f * inv) % next_mod;
    if (r < 0) r += next_mod;
    mod = next_mod;
  }
  return r;
}

Cx root_of_unity(long k, long n) {
  long kk = ((k % n) + n) % n;
  return std::polar(1.0, 2.0 * M_PI * static_cast<double>(kk) / static_cast<double>(n));
}

}  // namespace cmk
