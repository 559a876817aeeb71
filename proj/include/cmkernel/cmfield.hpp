// The imaginary quadratic field E = Q(sqrt(-D)), its orders and ideals,
// class and ray class groups, finite-order Hecke characters with their local
// components, and truncated Hecke L-series with certified tails.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cmkernel/arith.hpp"

namespace cmk {

// Primitive positive-definite binary quadratic form a x^2 + b xy + c y^2.
struct QuadForm {
  Int a, b, c;

  Int disc() const { return b * b - 4 * a * c; }
  QuadForm reduced() const;
  bool is_reduced() const;
  bool operator==(const QuadForm& o) const { return a == o.a && b == o.b && c == o.c; }
  bool operator<(const QuadForm& o) const;
};

// Gaussian composition of forms of equal discriminant, returned reduced.
QuadForm compose(const QuadForm& f, const QuadForm& g);
std::vector<QuadForm> reduced_forms(const Int& disc);

// An element a + b*omega of E written over the integral basis (1, omega),
// omega = (1+sqrt(-D))/2 for odd D, sqrt(-D/4) for D = 0 mod 4.
struct EElt {
  Rat x, y;
  bool is_zero() const { return x == 0 && y == 0; }
};

class CMFieldData;

// An O_E-lattice in E with Z-basis in Hermite form [[a,0],[b,c]] over
// (1, omega), scaled by a positive rational denominator.
class EIdeal {
 public:
  EIdeal() = default;
  EIdeal(const CMFieldData* field, std::vector<EElt> gens);
  static EIdeal unit_ideal(const CMFieldData* field);
  static EIdeal principal(const CMFieldData* field, const EElt& g);

  EIdeal mul(const EIdeal& o) const;
  EIdeal conj() const;
  EIdeal inverse() const;  // fractional inverse
  Rat norm() const;        // covolume in O_E, multiplicative
  std::array<EElt, 2> basis() const;
  bool contains(const EElt& v) const;
  bool operator==(const EIdeal& o) const;

  // Shortest-vector based principal generator; nullopt if not principal.
  std::optional<EElt> principal_gen() const;

  const CMFieldData* field() const { return field_; }

 private:
  const CMFieldData* field_ = nullptr;
  // rows of the basis matrix over (1, omega), entries rational
  std::array<std::array<Rat, 2>, 2> rows_{};
  mutable std::optional<Rat> norm_cache_;
  void hnf(std::vector<std::array<Rat, 2>> rows);
};

// The field E = Q(sqrt(-D)) with -D fundamental.
class CMFieldData {
 public:
  explicit CMFieldData(Int D);

  const Int& D() const { return D_; }
  Int delta() const;         // squarefree kernel: E = Q(sqrt(-delta))
  long unit_order() const { return w_; }         // |O_E^x|
  long class_number() const { return hE_; }
  int omega(const Int& n) const { return kronecker(-D_, n); }

  // Norm and arithmetic of elements over the integral basis.
  Rat norm(const EElt& v) const;
  Rat trace(const EElt& v) const;
  EElt mul(const EElt& u, const EElt& v) const;
  EElt conj(const EElt& v) const;
  EElt omega_elt() const { return EElt{Rat(0), Rat(1)}; }

  // Embedding data: omega = (s_om + sqrt(-Delta_om))/den_om with exact ints.
  // D odd: omega = (1 + sqrt(-D))/2. D = 4m: omega = sqrt(-m).
  struct OmegaShape {
    Int s;      // rational part numerator
    Int delta;  // radicand
    Int den;    // denominator (1 or 2)
  };
  OmegaShape omega_shape() const;

  // Splitting of a rational prime: +1 split, -1 inert, 0 ramified.
  int splitting(const Int& p) const { return omega(p); }

  // A prime ideal above split or ramified p.
  EIdeal prime_above(const Int& p) const;

  // index of the reduced-forms class of an ideal (c = 1 classes)
  const std::vector<QuadForm>& form_classes() const { return forms_; }
  long class_index_of_form(const QuadForm& f) const;
  long class_index_of_ideal(const EIdeal& I) const;  // via form of the ideal
  long compose_classes(long i, long j) const { return comp_table_[i][j]; }
  long inverse_class(long i) const;

 private:
  Int D_;
  long w_;
  long hE_;
  std::vector<QuadForm> forms_;
  std::vector<std::vector<long>> comp_table_;
};

// Classes of proper O_c-ideals via reduced forms of discriminant -D c^2.
struct RingClassGroup {
  Int D;
  Int conductor;
  std::vector<QuadForm> forms;
  std::vector<std::vector<long>> table;
  long order() const { return static_cast<long>(forms.size()); }
};
RingClassGroup class_group(const CMFieldData& field, const Int& conductor);

// Ray class group of E of modulus c*O_E: ideals prime to c modulo principal
// ideals with generator congruent to 1 mod c O_E. Element = (form class of
// the ideal, residue datum), with the unit-image quotient folded in.
class RayClassGroup {
 public:
  RayClassGroup(const CMFieldData* field, Int c);

  long order() const { return static_cast<long>(table_.size()); }
  const CMFieldData& field() const { return *field_; }
  const Int& modulus() const { return c_; }

  // class of an integral ideal prime to c
  long class_of(const EIdeal& I) const;
  long mul(long i, long j) const { return table_[i][j]; }
  long inv(long i) const;
  long identity() const { return 0; }

  // canonical generator list (indices) with orders; characters are specified
  // by one root-of-unity exponent per generator.
  const std::vector<long>& generators() const { return gens_; }
  const std::vector<long>& generator_orders() const { return gen_orders_; }
  // exponent vector of element i over generators()
  const std::vector<std::vector<long>>& exponents() const { return expvecs_; }

  // order predicted by the unit/residue exact sequence (dual path to the
  // enumeration); exposed for tests.
  long order_by_exact_sequence() const;

  // representative integral ideal for class i
  const EIdeal& rep(long i) const { return reps_[i]; }

  // ray class of a local unit u at a prime p | c (u integral, prime to p),
  // i.e. the class of the idele that is u at p and 1 elsewhere.
  long class_of_local_unit(const Int& p, const EElt& u) const;

 private:
  const CMFieldData* field_;
  Int c_;
  std::vector<EIdeal> reps_;
  std::vector<std::vector<long>> table_;
  std::vector<long> gens_, gen_orders_;
  std::vector<std::vector<long>> expvecs_;
  struct Detail;
  std::shared_ptr<Detail> det_;
  void build();
  void finalize_generators();
};

struct LocalCharData {
  enum Kind { Split, Inert, Ramified, RamifiedConductor } kind;
  Cx alpha{1.0, 0.0};  // split: chi_p(pi,1); inert: chi_p(pi); ram: chi_p(pi_E)
  Cx beta{1.0, 0.0};   // split: chi_p(1,pi)
};

// A finite-order Hecke character chi of a ray class group of E.
class HeckeCharacter {
 public:
  HeckeCharacter(std::shared_ptr<const RayClassGroup> grp, std::vector<long> gen_exponents);
  static HeckeCharacter trivial(std::shared_ptr<const RayClassGroup> grp);

  const RayClassGroup& group() const { return *grp_; }
  Cx value_on_class(long i) const { return values_[i]; }
  Cx value(const EIdeal& I) const { return values_[grp_->class_of(I)]; }
  bool is_trivial() const;

  // chi*(t) = chi(conj t); and the norm-type test chi* == chi.
  HeckeCharacter star() const;
  bool is_norm_type() const;

  // local data at a rational prime away from the modulus; p | c flags ramified.
  LocalCharData local(const Int& p) const;

  // restriction chi_0 to Q: chi_0(q) = chi(q O_E) on primes q prime to cD,
  // returned as values on (Z/modulus)^x together with its conductor.
  struct BaseRestriction {
    Int modulus;
    Int conductor;
    std::function<Cx(const Int&)> value;  // on integers prime to modulus
    bool trivial;
  };
  BaseRestriction restrict_to_base() const;

  bool multiplicativity_ok() const;  // full-table check

 private:
  std::shared_ptr<const RayClassGroup> grp_;
  std::vector<Cx> values_;
};

// Truncated Hecke L-series with a certified tail bound (s real > 1).
struct LValue {
  Cx value;
  double tail_bound;
  Int truncation;  // norms up to this bound were summed
};
LValue hecke_L(const HeckeCharacter& chi, double s, double target_abs_err);

// Number of integral O_E-ideals of norm n (conductor 1), oracle-grade.
long ideal_count(const CMFieldData& field, const Int& n);

// Riemann zeta and Dirichlet L(s, omega_D) at real s > 1 by Euler-Maclaurin,
// with errors far below 1e-12 at desk scale.
double riemann_zeta(double s);
double dirichlet_L_omega(const Int& D, double s);

// Completed Dirichlet L(s, omega) = G_1(s+1) * L_fin(s, omega) used by the
// analytic kernel machinery (gamma factor included).
double L_omega_completed(const Int& D, double s);

}  // namespace cmk
