#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrec/linalg.hpp"
#include "qrec/poly.hpp"

namespace qrec {

/// Square integer matrix u with (u - I) nilpotent (hence det u = 1).
class UnipotentMat {
 public:
  /// Throws std::invalid_argument when u is not unipotent.
  explicit UnipotentMat(IntMat u);

  const IntMat& matrix() const { return u_; }
  std::size_t size() const { return u_.rows(); }
  /// Least k with (u - I)^k = 0.
  unsigned nilpotency() const { return nil_; }

 private:
  IntMat u_;
  unsigned nil_;
};

/// Square matrix of integer-valued polynomials in one variable.
class PolyMatrix {
 public:
  PolyMatrix(std::size_t n, std::vector<IntValuedPoly> entries);
  std::size_t size() const { return n_; }
  const IntValuedPoly& operator()(std::size_t i, std::size_t j) const { return e_[i * n_ + j]; }
  IntMat eval(const Int& n) const;

 private:
  std::size_t n_;
  std::vector<IntValuedPoly> e_;
};

/// u^n = sum_{k < m} binom(n, k) (u - I)^k, valid for every integer n.
PolyMatrix unipotent_power_poly(const UnipotentMat& u);

/// u^e for any integer e, including negative and very large exponents.
IntMat unipotent_power(const UnipotentMat& u, const Int& e);

// Trace-zero coordinates. Basis: {E_ij : i != j} and {E_ii - E_{i+1,i+1}},
// ordered lexicographically by (i, j) with the diagonal element keyed at (i, i).
std::size_t tracezero_dim(std::size_t d);
std::vector<Int> tracezero_coords(const IntMat& x);
IntMat tracezero_matrix(std::span<const Int> coords, std::size_t d);

/// Matrix of X -> g X g^-1 on trace-zero matrices. Requires det g = 1.
IntMat adjoint_map(const IntMat& g);

/// Monic p(t) = t^n + a_{n-1} t^{n-1} + ... + a_0 with a_{n-1} = 0.
class CompanionMatrix {
 public:
  /// coeffs = a_0..a_{n-1}. Throws std::invalid_argument if a_{n-1} != 0.
  explicit CompanionMatrix(std::vector<Int> coeffs);

  std::size_t degree() const { return a_.size(); }
  const std::vector<Int>& coeffs() const { return a_; }
  /// Subdiagonal ones, last column -a_0 ... -a_{n-1}.
  IntMat matrix() const;

 private:
  std::vector<Int> a_;
};

CompanionMatrix companion(std::vector<Int> coeffs);

/// Coefficients c_0..c_n of det(tI - A) (Faddeev-LeVerrier, exact).
std::vector<Int> charpoly(const IntMat& a);

/// I + E_{1,d}
IntMat gamma0(std::size_t d);

/// gamma0 c_p gamma0^-1 - c_p for each sample companion (coefficient
/// lists a_0..a_{d-1}). Throws VerificationError unless every sample gives
/// the same nonzero matrix with the expected pattern: (1,d-1) = 1,
/// (2,d) = -1, (1,d) = -1 when d = 2, zero elsewhere (1-based).
IntMat gamma0_identity(std::size_t d, const std::vector<std::vector<Int>>& samples);

/// Elementary generators I + E_ij of SL_d in hook order: for k = 1..d the
/// row entries E_kj (j > k), then the column entries E_ik (i > k).
std::vector<std::pair<std::size_t, std::size_t>> elementary_hook_order(std::size_t d);
std::vector<IntMat> elementary_generators(std::size_t d);

enum class OrbitAction { Linear, Adjoint };

/// Orbit u_1^{n_1} ... u_N^{n_N} v. Under the adjoint action the
/// generators are SL_d matrices acting by conjugation on trace-zero
/// matrices and the base point is given as a trace-zero matrix.
class OrbitSpec {
 public:
  static OrbitSpec linear(const std::vector<IntMat>& generators, std::vector<Int> v);
  static OrbitSpec adjoint(const std::vector<IntMat>& generators, const IntMat& base);

  OrbitAction action() const { return action_; }
  const std::vector<UnipotentMat>& acting() const { return acting_; }
  const std::vector<Int>& base() const { return v_; }
  std::size_t dim() const { return v_.size(); }
  std::size_t word_length() const { return acting_.size(); }

 private:
  OrbitSpec(OrbitAction a, std::vector<UnipotentMat> acting, std::vector<Int> v);
  OrbitAction action_;
  std::vector<UnipotentMat> acting_;
  std::vector<Int> v_;
};

/// u_1^{e_1} ... u_N^{e_N} v
std::vector<Int> apply_word(const OrbitSpec& spec, std::span<const Int> exponents);

/// S(n_1..n_N) = u_1^{n_1} ... u_N^{n_N} v as multivariate polynomials.
std::vector<MultiPoly> orbit_multipoly(const OrbitSpec& spec);

struct OrbitPolynomial {
  PolyVec substituted;  // S(n^(r+1), ..., n^((r+1)^N)), integer-valued
  PolyVec poly;         // substituted(scale * n), integer coefficients
  Int scale;
  int degree_before_rescale;
  Int degree_cap;       // (r+1)^(N+1) - r - 1
};

OrbitPolynomial orbit_poly(const OrbitSpec& spec);

/// Word exponents realizing orbit_poly(spec).poly at n:
/// e_j = (scale n)^((r+1)^j).
std::vector<Int> orbit_poly_exponents(const OrbitSpec& spec, const Int& scale, const Int& n);

/// All u_1^{k_1} ... u_N^{k_N} v with every k_i in [lo, hi], deduplicated
/// and sorted lexicographically.
std::vector<std::vector<Int>> word_orbit_points(const OrbitSpec& spec, long lo, long hi);

struct FleeingCertificate {
  unsigned word_length = 0;
  ExtInt index = ExtInt::infinity();  // Q; infinite when not full rank
  std::vector<std::vector<Int>> generators;
  std::vector<Int> invariant_factors;
  bool full_rank = false;
};

/// Z-span of the differences p - p_0. Any subgroup W with the points in
/// one coset contains this span, so |Z^r / W| <= Q.
FleeingCertificate fleeing_certificate(const std::vector<std::vector<Int>>& points, std::size_t ambient_rank);

struct OrbitSpanCertificate {
  FleeingCertificate certificate;      // span of Gamma_n v0; word_length = N
  unsigned stable_depth = 0;           // n: first depth whose span is generator-invariant
  std::vector<std::string> span_history;  // index (or "inf") at each depth
};

/// Exact Z-span of Gamma_n v0 = {u_1^{k_1}...u_n^{k_n} v0} (cyclic
/// generator indexing) for n = 1..depth. The span at depth n equals the
/// span of the full orbit once it is invariant under every generator.
/// `gamma_index` is the position of the generator that moves the base
/// point; N is the first cyclic position >= n holding it. Throws
/// VerificationError when no depth up to the cap stabilizes.
OrbitSpanCertificate certify_orbit_span(const std::vector<UnipotentMat>& acting, const std::vector<Int>& v0,
                                        unsigned depth, std::size_t gamma_index);

struct CompanionCertificate {
  std::size_t d = 0;
  IntMat v0 = IntMat(1, 1);
  OrbitSpanCertificate span;
  // Present when a companion sample was supplied.
  std::optional<FleeingCertificate> sample;
};

/// Certificate for the adjoint orbit of companion matrices in sl_d(Z).
/// v0 is computed from `companion_coeffs` (zeros when absent). With a
/// sample, Gamma_N c_p is also checked to be hyperplane-fleeing with
/// difference-lattice index dividing Q.
CompanionCertificate certify_companion_bounds(std::size_t d, unsigned depth,
                                              const std::optional<std::vector<Int>>& companion_coeffs = std::nullopt);

/// Data for the form x^2 - y^2 - z^2 realized inside sl_2(Z).
struct So21Setup {
  std::vector<IntMat> lambda_basis;  // images of e_x, e_y, e_z
  std::vector<IntMat> generators;    // [[1,2],[0,1]], [[1,0],[2,1]]
  IntMat gamma0 = IntMat(1, 1);                  // [[1,2],[0,1]] under X -> g X g^-1
  IntMat v0 = IntMat(1, 1);                    // [[4,-8],[0,-4]]
  std::vector<IntMat> acting;        // conjugation by each generator in (x,y,z) coordinates
  bool identity_resolved = false;    // gamma0 a_t gamma0^-1 - a_t = v0 on the tested range
  bool identity_printed_forward = false;  // printed [[1,-2],[0,1]] with X -> g X g^-1
  bool identity_printed_inverse = false;  // printed [[1,-2],[0,1]] with X -> g^-1 X g
};

IntMat so21_a(const Int& t);
So21Setup so21_setup(long t_range = 50);

/// Orbit-span certificate for Gamma acting on Lambda ~ Z^3.
OrbitSpanCertificate certify_so21_bounds(unsigned depth);

}  // namespace qrec
