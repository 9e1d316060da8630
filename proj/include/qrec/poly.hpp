#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "qrec/linalg.hpp"

namespace qrec {

/// Integer-valued univariate polynomial p(n) = sum_k c_k * binom(n, k),
/// stored in the binomial basis with integer c_k. The monomial view has
/// rational coefficients whose denominators divide deg!.
class IntValuedPoly {
 public:
  IntValuedPoly() = default;
  explicit IntValuedPoly(std::vector<Int> binomial_coeffs);

  static IntValuedPoly constant(const Int& c);
  /// Throws std::invalid_argument if the polynomial is not integer-valued.
  static IntValuedPoly from_monomial(const std::vector<Rat>& coeffs);
  static IntValuedPoly from_monomial(const std::vector<Int>& coeffs);
  static IntValuedPoly from_monomial(std::initializer_list<long> coeffs);

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<Int>& binomial_coeffs() const { return coeffs_; }

  std::vector<Rat> monomial() const;
  bool has_integer_monomial_coeffs() const;
  /// Monomial coefficients; throws if any is non-integral.
  std::vector<Int> integer_monomial() const;

  Int operator()(const Int& n) const;

  /// n -> p(scale * n)
  IntValuedPoly compose_scale(const Int& scale) const;

  friend IntValuedPoly operator+(const IntValuedPoly& a, const IntValuedPoly& b);
  friend IntValuedPoly operator-(const IntValuedPoly& a, const IntValuedPoly& b);
  friend IntValuedPoly operator*(const IntValuedPoly& a, const IntValuedPoly& b);
  bool operator==(const IntValuedPoly& o) const = default;

 private:
  void trim();
  std::vector<Int> coeffs_;
};

/// P : Z -> Z^r, one integer-valued polynomial per coordinate.
class PolyVec {
 public:
  explicit PolyVec(std::vector<IntValuedPoly> components);
  /// Each inner list holds monomial coefficients c_0, c_1, ... of one component.
  static PolyVec from_monomial(const std::vector<std::vector<Int>>& components);

  std::size_t dim() const { return comps_.size(); }
  int degree() const;
  const IntValuedPoly& operator[](std::size_t i) const { return comps_[i]; }
  const std::vector<IntValuedPoly>& components() const { return comps_; }

  std::vector<Int> eval(const Int& n) const;
  bool has_integer_monomial_coeffs() const;

  bool operator==(const PolyVec& o) const = default;

 private:
  std::vector<IntValuedPoly> comps_;
};

inline std::vector<Int> eval(const PolyVec& p, const Int& n) { return p.eval(n); }

/// Result of rescale_to_integer_coeffs: P'(n) = P(scale * n).
struct RescaledPolyVec {
  PolyVec poly;
  Int scale;
};

/// Composes with n -> D! n, which clears every denominator of an
/// integer-valued polynomial of degree D. The image of the result lies
/// inside the image of the input.
RescaledPolyVec rescale_to_integer_coeffs(const PolyVec& p);

/// Rows j = 1..D (monomial degree), columns i = 1..r (component). A
/// PolyVec of degree 0 yields a single zero row.
struct CoeffMatrix {
  IntMat matrix;
};

CoeffMatrix coeff_matrix(const PolyVec& p);

/// Least Q in the definition of multiplicative complexity: the largest
/// invariant factor of the coefficient matrix when it has column rank r,
/// infinity otherwise. Requires integer monomial coefficients.
ExtInt mult_complexity(const PolyVec& p);

/// True iff no nontrivial real combination of the components is constant.
bool hyperplane_fleeing(const PolyVec& p);

/// Sparse multivariate polynomial in the monomial basis with rational
/// coefficients (integer-valued on Z^N). Per-variable exponents never
/// exceed degree_cap.
class MultiPoly {
 public:
  using Exponents = std::vector<unsigned>;

  MultiPoly(std::size_t nvars, unsigned degree_cap);
  static MultiPoly constant(std::size_t nvars, unsigned degree_cap, const Rat& c);
  /// Embeds a univariate polynomial in variable `var`.
  static MultiPoly univariate(std::size_t nvars, unsigned degree_cap, std::size_t var, const IntValuedPoly& p);

  std::size_t nvars() const { return nvars_; }
  unsigned degree_cap() const { return cap_; }
  const std::map<Exponents, Rat>& terms() const { return terms_; }

  /// Adds coeff to the monomial; throws std::invalid_argument when an
  /// exponent exceeds the cap.
  void add_term(const Exponents& e, const Rat& coeff);
  unsigned max_var_degree() const;
  Rat eval(std::span<const Int> point) const;

  friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b);
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);

 private:
  std::size_t nvars_;
  unsigned cap_;
  std::map<Exponents, Rat> terms_;
};

/// n_j -> n^((r+1)^j), j = 1..N. Injective on monomials whose exponents
/// are at most r, so the nonconstant coefficients are carried over
/// unchanged. Throws std::invalid_argument if some exponent exceeds r.
PolyVec substitute_monomials(const std::vector<MultiPoly>& s, unsigned r);

/// (r+1)^(N+1) - r - 1
Int substitution_degree_cap(unsigned r, unsigned nvars);

}  // namespace qrec
