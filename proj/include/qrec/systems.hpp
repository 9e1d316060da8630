#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qrec/expsum.hpp"
#include "qrec/linalg.hpp"
#include "qrec/poly.hpp"
#include "qrec/real.hpp"

namespace qrec {

/// Z^r acting by translation on G = Z/m_1 x ... x Z/m_s with uniform
/// measure. Elements are stored as flat indices, last coordinate fastest.
class FiniteSystem {
 public:
  static constexpr std::size_t kDefaultCap = std::size_t{1} << 24;

  /// action[j] is the image of the j-th standard basis vector of Z^r.
  FiniteSystem(std::vector<std::uint64_t> moduli, std::vector<std::vector<std::int64_t>> action,
               std::size_t cap = kDefaultCap);

  /// Z/m with T x = x + 1.
  static FiniteSystem rotation(std::uint64_t m);
  /// Z/m_1 x Z/m_2 with the coordinate action of Z^2.
  static FiniteSystem grid(std::uint64_t m1, std::uint64_t m2);

  std::size_t size() const { return size_; }
  std::size_t rank() const { return action_.size(); }
  const std::vector<std::uint64_t>& moduli() const { return moduli_; }
  const std::vector<std::vector<std::uint64_t>>& action() const { return action_; }
  /// lcm of the moduli; n -> P(n) mod G has a period dividing it.
  std::uint64_t exponent() const { return exponent_; }

  std::vector<std::uint64_t> coords(std::size_t x) const;
  std::size_t index(std::span<const std::uint64_t> coords) const;
  std::size_t add(std::size_t x, std::size_t y) const;
  std::size_t negate(std::size_t x) const;
  /// Phi(v) for v in Z^r.
  std::size_t image(std::span<const Int> v) const;
  /// Phi(k e_j)
  std::size_t generator_multiple(std::size_t j, const Int& k) const;

  /// Subgroup Phi(k Z^r), sorted.
  std::vector<std::size_t> subgroup(const Int& k) const;
  bool ergodic() const { return subgroup(Int(1)).size() == size_; }

 private:
  std::vector<std::uint64_t> moduli_;
  std::vector<std::vector<std::uint64_t>> action_;
  std::vector<std::size_t> stride_;
  std::size_t size_;
  std::uint64_t exponent_;
};

/// Subset of G as a membership bitmap.
class MeasSet {
 public:
  MeasSet(const FiniteSystem& sys, std::vector<bool> members);
  static MeasSet from_indices(const FiniteSystem& sys, const std::vector<std::size_t>& members);
  static MeasSet full(const FiniteSystem& sys);
  /// Each element included independently with the given probability.
  static MeasSet random(const FiniteSystem& sys, double density, std::uint64_t seed);

  std::size_t universe() const { return bits_.size(); }
  std::size_t count() const { return count_; }
  Rat measure() const {
    Rat m(Int(static_cast<unsigned long>(count_)), Int(static_cast<unsigned long>(bits_.size())));
    m.canonicalize();
    return m;
  }
  bool contains(std::size_t x) const { return bits_[x]; }
  const std::vector<bool>& bits() const { return bits_; }
  std::vector<std::size_t> elements() const;

 private:
  std::vector<bool> bits_;
  std::size_t count_;
};

/// Cosets of Phi(k Z^r) inside a coset of Phi(k0 Z^r) (the whole group by default).
struct Partition {
  std::vector<std::size_t> representatives;  // least flat index of each part, ascending
  std::vector<std::vector<std::size_t>> parts;
};

Partition ergodic_components(const FiniteSystem& sys, const Int& k);

struct EquidistReport {
  bool equidistributed = true;
  Rat density;                // nu(B) on the ambient component
  Rat worst_ratio;            // max over T^q-components of density / nu(B)
  std::size_t witness = 0;    // representative of the worst component
};

/// (q, delta)-equidistribution of B for T on the whole group.
EquidistReport equidist_check(const FiniteSystem& sys, const MeasSet& b, const Int& q, const Rat& delta);

/// Same test for the restricted action of T^k on the coset rep + Phi(k Z^r).
EquidistReport equidist_check_on(const FiniteSystem& sys, const MeasSet& b, const Int& k, std::size_t rep,
                                 const Int& q, const Rat& delta);

struct IncrementStep {
  Int q;
  Int k;                   // cumulative index after this step
  std::size_t component;   // representative of the chosen T^k-component
  Rat density;             // density of B in it
};

struct IncrementTrace {
  Rat initial_density;
  std::vector<IncrementStep> steps;
  Int k = 1;
  std::size_t component = 0;
  Rat final_density;
};

/// Passes to denser T^{q^j}-components until B is (q, delta)-equidistributed
/// for the restricted action. Among components above the threshold the
/// densest wins, then the least representative.
IncrementTrace measure_increment(const FiniteSystem& sys, const MeasSet& b, const Int& q, const Rat& delta);

/// J <= log(1/eps) / log(1 + delta), equivalently k <= q^(...).
bool increment_bound_holds(const IncrementTrace& trace, const Rat& delta);

struct CharCoefficient {
  std::vector<std::uint64_t> frequency;  // chi(x) = e(sum_i f_i x_i / m_i)
  Complex value;                         // (1/|G|) sum_{x in B} conj(chi(x))
};

struct SpectralReport {
  Real norm = 0;                        // ||h||_2 from the character coefficients
  Real norm_from_components = 0;        // sqrt(||P 1_B||^2 - mu^2), exact inside the root
  Rat projection_sq;                    // ||P_{T^q} 1_B||^2
  std::vector<CharCoefficient> coefficients;  // nontrivial chi with chi^q = 1
};

/// Projection of 1_B onto the nontrivial characters of finite order dividing q.
SpectralReport spectral_projection_norm(const FiniteSystem& sys, const MeasSet& b, const Int& q);

/// Sum over all characters of |coefficient|^2; equals mu(B) by Parseval.
Real fourier_mass(const FiniteSystem& sys, const MeasSet& b);

struct Deviation {
  Rat squared;  // exact
  Real value;
};

/// ||mu(B) - (1/N) sum_{n=1}^N T^{k P(n)} 1_B||_2
Deviation mean_ergodic_deviation(const FiniteSystem& sys, const MeasSet& b, const PolyVec& p, const Int& k,
                                 std::uint64_t n_terms);

struct RecurrenceRow {
  Int n;
  Rat measure;  // mu(B cap T^{k P(n)} B)
  bool above = false;
};

struct RecurrenceScan {
  std::vector<RecurrenceRow> rows;
  std::optional<Int> first_above;
  std::optional<Int> first_positive;
  Rat best;
};

/// Exact intersection measures for n in [lo, hi]. Rows are flagged when the
/// measure exceeds `threshold` (when given).
RecurrenceScan recurrence_search(const FiniteSystem& sys, const MeasSet& b, const PolyVec& p, const Int& k,
                                 long lo, long hi, const std::optional<Real>& threshold = std::nullopt);

struct FamilyMember {
  PolyVec poly;
  Int declared_complexity;
};

struct SarkozyOptions {
  QBoundOptions qbound;
  std::optional<Rat> delta;  // eps^4 / 12 when absent
};

struct MemberOutcome {
  Int complexity;
  std::optional<Int> n;  // first n in one period with a positive return
  Rat measure;
};

struct SarkozyReport {
  unsigned degree = 0;
  Int complexity_bound;
  QBound q;
  Rat delta;
  IncrementTrace trace;
  Int k;
  std::vector<MemberOutcome> members;
  bool success = false;
  bool within_bound = false;  // k <= q^(log(1/eps)/log(1+delta))
};

/// One k from the measure increment with q = qbound(D, r, Q, eps^2/2),
/// checked for every family member over one full period of n.
/// Throws VerificationError when a member breaks its declared complexity
/// or is not hyperplane-fleeing.
SarkozyReport uniform_sarkozy_experiment(const FiniteSystem& sys, const MeasSet& b,
                                         const std::vector<FamilyMember>& family, double eps,
                                         const SarkozyOptions& opt = {});

struct ObstructionWitness {
  unsigned k;
  std::optional<std::uint64_t> a0;  // B and T^{k(a1 n + a0)} B disjoint for every n
};

struct ObstructionReport {
  std::vector<ObstructionWitness> witnesses;
  bool all_defeated = false;
};

/// For each k <= k0, the least a0 in [0, |G|) such that a1 n + a0 never
/// returns (exhaustive over one period of n).
ObstructionReport linear_family_obstruction(const FiniteSystem& sys, const MeasSet& b, const Int& a1, unsigned k0);

struct BogStage {
  Int complexity;          // |r_D| K^D
  std::optional<QBound> q; // absent when the density makes the check vacuous
  Rat density;
  bool equidistributed = false;
  std::size_t component = 0;
};

struct BogReport {
  Int k;
  std::vector<BogStage> stages;
  unsigned stage_bound = 0;  // ceil(log(1/eps) / log(1+delta))
  Rat delta;
  std::size_t targets = 0;   // residues c checked
  std::size_t failures = 0;  // residues with no return along P_{k,c}
  std::optional<std::uint64_t> first_failure;
  bool verified = false;
};

struct BogOptions {
  QBoundOptions qbound;
  std::optional<Rat> delta;
};

/// Iteration for B in a Z^2 system with P_{k,c}(n) = (k c - R(k n), k n).
/// r_coeffs are monomial coefficients of R with R(0) = 0 and deg R >= 2.
/// Throws VerificationError when the stage count exceeds its bound.
BogReport bogolyubov_iterate(const FiniteSystem& sys, const MeasSet& b, const std::vector<Int>& r_coeffs,
                             double eps, const BogOptions& opt = {});

/// ceil(log(1/eps) / log(1+delta))
unsigned increment_step_bound(double eps, const Rat& delta);

/// Exact rational value of a double.
Rat exact_rat(double x);

}  // namespace qrec
