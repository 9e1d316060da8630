#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrec {

using Int = mpz_class;
using Rat = mpq_class;

/// Positive integer or infinity. Used for lattice indices and
/// multiplicative complexities, both of which are infinite in the
/// rank-deficient case.
class ExtInt {
 public:
  ExtInt(Int v) : value_(std::move(v)) {}
  static ExtInt infinity() { return ExtInt(); }

  bool is_infinite() const { return !value_.has_value(); }
  const Int& value() const;  // throws std::logic_error when infinite
  std::string str() const;   // "inf" or the decimal value

  bool operator==(const ExtInt& o) const;
  // Ordering with infinity as the top element.
  bool operator<=(const ExtInt& o) const;

 private:
  ExtInt() = default;
  std::optional<Int> value_;
};

/// Dense arbitrary-precision integer matrix, row-major. Dimensions are
/// fixed at construction and always positive.
class IntMat {
 public:
  IntMat(std::size_t rows, std::size_t cols);
  IntMat(std::size_t rows, std::size_t cols, std::vector<Int> entries);
  IntMat(std::initializer_list<std::initializer_list<long>> rows);

  static IntMat from_rows(const std::vector<std::vector<Int>>& rows);
  static IntMat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  const Int& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  Int& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const Int> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::vector<Int> row_vec(std::size_t i) const;
  std::vector<Int> col_vec(std::size_t j) const;
  const std::vector<Int>& entries() const { return data_; }

  IntMat transpose() const;
  bool is_zero() const;
  bool is_diagonal() const;

  void swap_rows(std::size_t a, std::size_t b);
  void swap_cols(std::size_t a, std::size_t b);
  // row[dst] += factor * row[src]
  void add_row_multiple(std::size_t dst, std::size_t src, const Int& factor);
  void add_col_multiple(std::size_t dst, std::size_t src, const Int& factor);
  void negate_row(std::size_t i);

  std::string str() const;

  friend IntMat operator*(const IntMat& a, const IntMat& b);
  friend IntMat operator+(const IntMat& a, const IntMat& b);
  friend IntMat operator-(const IntMat& a, const IntMat& b);
  friend IntMat operator*(const Int& s, const IntMat& a);
  friend std::vector<Int> operator*(const IntMat& a, std::span<const Int> v);
  bool operator==(const IntMat& o) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Int> data_;
};

/// Stacks row vectors into a matrix. All rows must share a length.
IntMat stack_rows(const std::vector<std::vector<Int>>& rows);

/// Exact determinant by fraction-free elimination.
Int determinant(const IntMat& a);

/// Exact inverse of a matrix with determinant +-1.
/// Throws std::invalid_argument otherwise.
IntMat unimodular_inverse(const IntMat& a);

IntMat matrix_power(const IntMat& a, unsigned long e);

/// U * A * V = diag(invariant_factors), with U and V unimodular and
/// each factor dividing the next. Trailing factors are zero when A is
/// rank deficient.
struct SnfDecomposition {
  std::vector<Int> invariant_factors;
  IntMat U;
  IntMat V;
};

// Pivoting picks the nonzero entry of least absolute value, ties going
// to the lowest (row, col), so decompositions are reproducible.
SnfDecomposition snf(const IntMat& a);

/// Invariant factors only (same pivoting as snf, transforms skipped).
std::vector<Int> invariant_factors(const IntMat& a);

/// Row Hermite normal form: upper echelon, positive pivots, entries
/// above each pivot reduced into [0, pivot). Zero rows are dropped; a
/// zero matrix yields a single zero row.
IntMat hnf(const IntMat& a);

/// Rank over Q via Bareiss elimination.
std::size_t rational_rank(const IntMat& a);

/// Sublattice of Z^r spanned by the rows of a generator matrix. The
/// basis is kept in Hermite normal form, so lattice equality is basis
/// equality.
class Lattice {
 public:
  explicit Lattice(const IntMat& generators);
  Lattice(std::size_t ambient_rank, const std::vector<std::vector<Int>>& generators);

  std::size_t ambient_rank() const { return ambient_; }
  std::size_t rank() const { return rank_; }
  const IntMat& basis() const { return basis_; }

  bool contains(std::span<const Int> v) const;
  bool operator==(const Lattice& o) const { return ambient_ == o.ambient_ && basis_ == o.basis_; }

 private:
  std::size_t ambient_;
  std::size_t rank_;
  IntMat basis_;
};

/// |Z^r / L| when L has full rank, infinity otherwise.
ExtInt lattice_index(const Lattice& lattice);

Int gcd_of(std::span<const Int> values);

}  // namespace qrec
