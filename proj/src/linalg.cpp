#include "qrec/linalg.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace qrec {

const Int& ExtInt::value() const {
  if (!value_) throw std::logic_error("ExtInt: value() on infinity");
  return *value_;
}

std::string ExtInt::str() const { return value_ ? value_->get_str() : std::string("inf"); }

bool ExtInt::operator==(const ExtInt& o) const {
  if (is_infinite() || o.is_infinite()) return is_infinite() == o.is_infinite();
  return *value_ == *o.value_;
}

bool ExtInt::operator<=(const ExtInt& o) const {
  if (o.is_infinite()) return true;
  if (is_infinite()) return false;
  return *value_ <= *o.value_;
}

IntMat::IntMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("IntMat: dimensions must be positive");
}

IntMat::IntMat(std::size_t rows, std::size_t cols, std::vector<Int> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("IntMat: dimensions must be positive");
  if (data_.size() != rows * cols) throw std::invalid_argument("IntMat: entry count does not match rows*cols");
}

IntMat::IntMat(std::initializer_list<std::initializer_list<long>> rows) : rows_(rows.size()), cols_(0) {
  if (rows_ == 0) throw std::invalid_argument("IntMat: dimensions must be positive");
  cols_ = rows.begin()->size();
  if (cols_ == 0) throw std::invalid_argument("IntMat: dimensions must be positive");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("IntMat: ragged rows");
    for (long v : r) data_.emplace_back(v);
  }
}

IntMat IntMat::from_rows(const std::vector<std::vector<Int>>& rows) { return stack_rows(rows); }

IntMat IntMat::identity(std::size_t n) {
  IntMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

std::vector<Int> IntMat::row_vec(std::size_t i) const {
  auto r = row(i);
  return {r.begin(), r.end()};
}

std::vector<Int> IntMat::col_vec(std::size_t j) const {
  std::vector<Int> out;
  out.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out.push_back((*this)(i, j));
  return out;
}

IntMat IntMat::transpose() const {
  IntMat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool IntMat::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Int& x) { return x == 0; });
}

bool IntMat::is_diagonal() const {
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (i != j && (*this)(i, j) != 0) return false;
  return true;
}

void IntMat::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
}

void IntMat::swap_cols(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
}

void IntMat::add_row_multiple(std::size_t dst, std::size_t src, const Int& factor) {
  if (factor == 0) return;
  for (std::size_t j = 0; j < cols_; ++j) (*this)(dst, j) += factor * (*this)(src, j);
}

void IntMat::add_col_multiple(std::size_t dst, std::size_t src, const Int& factor) {
  if (factor == 0) return;
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, dst) += factor * (*this)(i, src);
}

void IntMat::negate_row(std::size_t i) {
  for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = -(*this)(i, j);
}

std::string IntMat::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? ",[" : "[");
    for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j);
    os << ']';
  }
  os << ']';
  return os.str();
}

IntMat operator*(const IntMat& a, const IntMat& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("IntMat: incompatible product");
  IntMat c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Int& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

IntMat operator+(const IntMat& a, const IntMat& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("IntMat: incompatible sum");
  IntMat c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

IntMat operator-(const IntMat& a, const IntMat& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("IntMat: incompatible difference");
  IntMat c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

IntMat operator*(const Int& s, const IntMat& a) {
  IntMat c = a;
  for (auto& x : c.data_) x *= s;
  return c;
}

std::vector<Int> operator*(const IntMat& a, std::span<const Int> v) {
  if (v.size() != a.cols_) throw std::invalid_argument("IntMat: incompatible matrix-vector product");
  std::vector<Int> out(a.rows_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
  return out;
}

IntMat stack_rows(const std::vector<std::vector<Int>>& rows) {
  if (rows.empty() || rows.front().empty()) throw std::invalid_argument("stack_rows: empty input");
  const std::size_t n = rows.front().size();
  std::vector<Int> data;
  data.reserve(rows.size() * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw std::invalid_argument("stack_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return IntMat(rows.size(), n, std::move(data));
}

namespace {

// Bareiss elimination shared by rank and determinant. Returns the rank;
// on square full-rank input `det` receives the determinant.
std::size_t bareiss(IntMat m, Int* det) {
  const std::size_t rows = m.rows(), cols = m.cols();
  Int prev = 1;
  std::size_t rank = 0;
  int sign = 1;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && m(p, c) == 0) ++p;
    if (p == rows) continue;
    if (p != rank) {
      m.swap_rows(p, rank);
      sign = -sign;
    }
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        Int t = m(rank, c) * m(i, j) - m(i, c) * m(rank, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        m(i, j) = std::move(t);
      }
      m(i, c) = 0;
    }
    prev = m(rank, c);
    ++rank;
  }
  if (det) {
    if (rows == cols && rank == rows)
      *det = sign * m(rows - 1, cols - 1);
    else
      *det = 0;
  }
  return rank;
}

// Shared Smith reduction; transforms are updated when non-null.
void smith_in_place(IntMat& s, IntMat* u, IntMat* v) {
  const std::size_t m = s.rows(), n = s.cols();
  const std::size_t steps = std::min(m, n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (;;) {
      bool found = false;
      std::size_t pi = 0, pj = 0;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j) {
          if (s(i, j) == 0) continue;
          if (!found || mpz_cmpabs(s(i, j).get_mpz_t(), s(pi, pj).get_mpz_t()) < 0) {
            found = true;
            pi = i;
            pj = j;
          }
        }
      if (!found) return;
      if (pi != t) {
        s.swap_rows(t, pi);
        if (u) u->swap_rows(t, pi);
      }
      if (pj != t) {
        s.swap_cols(t, pj);
        if (v) v->swap_cols(t, pj);
      }

      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (s(i, t) == 0) continue;
        Int q = s(i, t) / s(t, t);
        q = -q;
        s.add_row_multiple(i, t, q);
        if (u) u->add_row_multiple(i, t, q);
        if (s(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (s(t, j) == 0) continue;
        Int q = s(t, j) / s(t, t);
        q = -q;
        s.add_col_multiple(j, t, q);
        if (v) v->add_col_multiple(j, t, q);
        if (s(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      // pivot must divide the remaining block
      bool divides = true;
      for (std::size_t i = t + 1; i < m && divides; ++i)
        for (std::size_t j = t + 1; j < n; ++j) {
          if (!mpz_divisible_p(s(i, j).get_mpz_t(), s(t, t).get_mpz_t())) {
            s.add_row_multiple(t, i, 1);
            if (u) u->add_row_multiple(t, i, 1);
            divides = false;
            break;
          }
        }
      if (divides) break;
    }
    if (s(t, t) < 0) {
      s.negate_row(t);
      if (u) u->negate_row(t);
    }
  }
}

}  // namespace

Int determinant(const IntMat& a) {
  if (!a.square()) throw std::invalid_argument("determinant: matrix not square");
  Int det;
  bareiss(a, &det);
  return det;
}

std::size_t rational_rank(const IntMat& a) { return bareiss(a, nullptr); }

IntMat unimodular_inverse(const IntMat& a) {
  if (!a.square()) throw std::invalid_argument("unimodular_inverse: matrix not square");
  const Int det = determinant(a);
  if (det != 1 && det != -1) throw std::invalid_argument("unimodular_inverse: determinant is not +-1");
  const std::size_t n = a.rows();
  std::vector<std::vector<Rat>> m(n, std::vector<Rat>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a(i, j);
    m[i][n + i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (m[p][c] == 0) ++p;
    std::swap(m[p], m[c]);
    const Rat piv = m[c][c];
    for (auto& x : m[c]) x /= piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || m[i][c] == 0) continue;
      const Rat f = m[i][c];
      for (std::size_t j = 0; j < 2 * n; ++j) m[i][j] -= f * m[c][j];
    }
  }
  IntMat inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rat x = m[i][n + j];
      x.canonicalize();
      inv(i, j) = x.get_num();
    }
  return inv;
}

IntMat matrix_power(const IntMat& a, unsigned long e) {
  if (!a.square()) throw std::invalid_argument("matrix_power: matrix not square");
  IntMat result = IntMat::identity(a.rows());
  IntMat base = a;
  while (e) {
    if (e & 1UL) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

SnfDecomposition snf(const IntMat& a) {
  IntMat s = a;
  IntMat u = IntMat::identity(a.rows());
  IntMat v = IntMat::identity(a.cols());
  smith_in_place(s, &u, &v);
  std::vector<Int> d;
  for (std::size_t t = 0; t < std::min(s.rows(), s.cols()); ++t) d.push_back(s(t, t));
  return {std::move(d), std::move(u), std::move(v)};
}

std::vector<Int> invariant_factors(const IntMat& a) {
  IntMat s = a;
  smith_in_place(s, nullptr, nullptr);
  std::vector<Int> d;
  for (std::size_t t = 0; t < std::min(s.rows(), s.cols()); ++t) d.push_back(s(t, t));
  return d;
}

IntMat hnf(const IntMat& a) {
  IntMat h = a;
  const std::size_t m = h.rows(), n = h.cols();
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    for (;;) {
      bool found = false;
      std::size_t p = r;
      for (std::size_t i = r; i < m; ++i) {
        if (h(i, c) == 0) continue;
        if (!found || mpz_cmpabs(h(i, c).get_mpz_t(), h(p, c).get_mpz_t()) < 0) {
          found = true;
          p = i;
        }
      }
      if (!found) break;
      h.swap_rows(r, p);
      bool clean = true;
      for (std::size_t i = r + 1; i < m; ++i) {
        if (h(i, c) == 0) continue;
        Int q = h(i, c) / h(r, c);
        h.add_row_multiple(i, r, -q);
        if (h(i, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (h(r, c) == 0) continue;
    if (h(r, c) < 0) h.negate_row(r);
    for (std::size_t i = 0; i < r; ++i) {
      Int q;
      mpz_fdiv_q(q.get_mpz_t(), h(i, c).get_mpz_t(), h(r, c).get_mpz_t());
      h.add_row_multiple(i, r, -q);
    }
    ++r;
  }
  if (r == 0) return IntMat(1, n);
  std::vector<Int> data(h.entries().begin(), h.entries().begin() + static_cast<std::ptrdiff_t>(r * n));
  return IntMat(r, n, std::move(data));
}

Lattice::Lattice(const IntMat& generators)
    : ambient_(generators.cols()), rank_(0), basis_(hnf(generators)) {
  for (std::size_t i = 0; i < basis_.rows(); ++i) {
    auto row = basis_.row(i);
    if (std::any_of(row.begin(), row.end(), [](const Int& x) { return x != 0; })) ++rank_;
  }
}

Lattice::Lattice(std::size_t ambient_rank, const std::vector<std::vector<Int>>& generators)
    : Lattice(generators.empty() ? IntMat(1, ambient_rank) : stack_rows(generators)) {
  if (ambient_ != ambient_rank) throw std::invalid_argument("Lattice: generator length differs from ambient rank");
}

bool Lattice::contains(std::span<const Int> v) const {
  if (v.size() != ambient_) throw std::invalid_argument("Lattice::contains: wrong vector length");
  std::vector<Int> w(v.begin(), v.end());
  for (std::size_t t = 0; t < rank_; ++t) {
    std::size_t p = 0;
    while (basis_(t, p) == 0) ++p;
    if (w[p] == 0) continue;
    if (!mpz_divisible_p(w[p].get_mpz_t(), basis_(t, p).get_mpz_t())) return false;
    const Int f = w[p] / basis_(t, p);
    for (std::size_t j = p; j < ambient_; ++j) w[j] -= f * basis_(t, j);
  }
  return std::all_of(w.begin(), w.end(), [](const Int& x) { return x == 0; });
}

ExtInt lattice_index(const Lattice& lattice) {
  if (lattice.rank() < lattice.ambient_rank()) return ExtInt::infinity();
  Int index = 1;
  for (const Int& d : invariant_factors(lattice.basis())) index *= d;
  return ExtInt(index);
}

Int gcd_of(std::span<const Int> values) {
  Int g = 0;
  for (const Int& v : values) g = gcd(g, v);
  return g;
}

}  // namespace qrec
