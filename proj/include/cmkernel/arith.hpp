// Exact integer/rational arithmetic substrate: p-adic valuations, quadratic
// symbols (Kronecker, Legendre, Hilbert), ramified-character Gauss sums and
// generalized Bernoulli numbers. Everything here is exact except the
// complex-valued epsilon factors, which are unimodular to machine precision.
#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

namespace cmk {

using Int = mpz_class;
using Rat = mpq_class;
using Cx  = std::complex<double>;

inline Rat make_rat(const Int& num, const Int& den) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// A place of Q: a finite prime or the archimedean place.
struct Place {
  bool infinite = false;
  Int p = 0;  // valid when !infinite

  static Place arch() { return Place{true, 0}; }
  static Place finite(Int prime) { return Place{false, std::move(prime)}; }
  bool operator==(const Place& o) const {
    return infinite == o.infinite && (infinite || p == o.p);
  }
  bool operator<(const Place& o) const {
    if (infinite != o.infinite) return !infinite;  // finite places first
    return p < o.p;
  }
};

// ord_p of a nonzero rational. Throws on x == 0.
long valuation(const Rat& x, const Int& p);
long valuation(const Int& x, const Int& p);

// Kronecker symbol (a|n), fully general.
int kronecker(const Int& a, const Int& n);
inline int kronecker(long a, long n) { return kronecker(Int(a), Int(n)); }

// Hilbert symbol (a,b)_v for nonzero rationals, v a finite prime or infinity.
int hilbert(const Rat& a, const Rat& b, const Place& v);

// Memoized symbol evaluations; insert-only and safe for concurrent use.
class SymbolTable {
 public:
  int hilbert(const Rat& a, const Rat& b, const Place& v) const;

 private:
  mutable std::mutex mu_;
  mutable std::map<std::tuple<Rat, Rat, bool, Int>, int> cache_;
};

// The finite places where hilbert(a,b,.) could be nontrivial: 2, infinity and
// the primes dividing numerator/denominator of a and b.
std::vector<Place> hilbert_support(const Rat& a, const Rat& b);

// omega_D = kronecker(-D, .) attached to the imaginary quadratic field of
// fundamental discriminant -D (D > 0). Checks D is fundamental.
bool is_fundamental_discriminant(const Int& minusD);

// Local component omega_p restricted to Z_p^x, evaluated at a unit u
// (u an integer prime to p). Computed by CRT against the global character.
int omega_local_unit(const Int& D, const Int& p, const Int& u);

// omega_v(x) for x a nonzero rational, at any place. For v | D this combines
// the unit character with omega_v(p)^{ord}, where omega_v(p) is pinned by the
// global product formula prod_v omega_v(x) = 1.
int omega_local(const Int& D, const Place& v, const Rat& x);

// L(0, omega_D) = -B_{1,omega} as an exact rational, for the odd character
// attached to fundamental discriminant -D < 0. Even characters are rejected.
Rat generalized_bernoulli_L0(const Int& D);

// Epsilon factor eps_p(1/2, omega_p, psi_p^0) for p | D, computed as a
// normalized Gauss sum with psi_p(x) = e^{-2 pi i {x}_p}. The archimedean
// place returns i. Primes not dividing D are rejected: the factor there is 1.
Cx local_epsilon_omega(const Place& v, const Int& D);

// Hensel lift of a root of x^2 - x + (1+D)/4 (D odd) or x^2 + D/4 (D even),
// i.e. of the minimal polynomial of the integral basis element, mod p^prec.
// Requires p split in Q(sqrt(-D)).
Int lift_omega_root(const Int& D, const Int& p, unsigned prec);

inline Int pow_int(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

// Root of unity e^{2 pi i k/n}.
Cx root_of_unity(long k, long n);

}  // namespace cmk
