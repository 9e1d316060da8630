#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrec/linalg.hpp"
#include "qrec/poly.hpp"
#include "qrec/real.hpp"

namespace qrec {

/// x -> e((a_1 x_1 + ... + a_r x_r) / q), kept in reduced form so that
/// gcd(a_1, ..., a_r, q) = 1 and the image has exactly q elements.
class Character {
 public:
  /// Reduces residues mod q and divides out gcd(a, q).
  Character(const Int& q, std::vector<Int> residues);
  static Character trivial(std::size_t r) { return Character(Int(1), std::vector<Int>(r)); }

  const Int& modulus() const { return q_; }
  const std::vector<Int>& residues() const { return a_; }
  std::size_t dim() const { return a_.size(); }

 private:
  Int q_;
  std::vector<Int> a_;
};

struct SumReport {
  Int q;
  Real magnitude;   // |sum| / q, in [0, 1]
  Int q_prime;      // gcd of the nonconstant coefficients of P.a with q
  Int reduced_q;    // q / q_prime
};

/// (1/q) sum_{n=1}^{q} chi(P(n)). P must have integer monomial
/// coefficients and q must fit in 62 bits.
SumReport char_sum(const Character& chi, const PolyVec& p);

struct HuaRow {
  std::uint64_t q;
  Real worst_magnitude;
  Int q_prime;  // q' of the worst trial
};

/// For each q in [1, q_max]: the largest normalized sum over `trials`
/// random degree-D polynomials (leading coefficient nonzero mod q) whose
/// nonconstant coefficients have gcd with q at most Q. Deterministic in
/// the seed; parallel over q.
std::vector<HuaRow> hua_decay_scan(unsigned degree, const Int& complexity_cap, std::uint64_t q_max,
                                   unsigned trials, std::uint64_t seed);

/// Magnitude of the normalized sum of e(f(n)/q) for a single integer
/// polynomial given by monomial coefficients.
Real poly_sum_magnitude(const std::vector<Int>& monomial_coeffs, std::uint64_t q);

/// (1/N) sum_{n=1}^{N} e(<P(n), theta>)
Complex partial_weyl_avg(const PolyVec& p, const std::vector<Real>& theta, std::uint64_t n_terms);

struct QBoundOptions {
  double hua_constant = 10.0;  // assumed constant in the Hua-type bound
  double hua_eps = 0.0;        // 0 selects 1/(2D)
  std::uint64_t q0_cap = 100000;
};

struct QBound {
  std::uint64_t q0;  // threshold beyond which the assumed bound is < eps
  Int q;             // lcm{1, ..., q0}
};

/// Smallest q0 with C (q/Q)^(hua_eps - 1/D) < eps for all q >= q0, and
/// q = lcm{1..q0}. Throws CapExceeded when q0 exceeds the configured cap.
QBound qbound(unsigned degree, unsigned dim, const Int& complexity, double eps, const QBoundOptions& opt = {});

/// Only the threshold q0 (no lcm is formed).
std::uint64_t qbound_threshold(unsigned degree, const Int& complexity, double eps, const QBoundOptions& opt = {});

/// lcm{1, ..., n}
Int lcm_upto(std::uint64_t n);

}  // namespace qrec
