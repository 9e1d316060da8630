#include "qrec/poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace qrec {

namespace {

Int factorial(unsigned long n) {
  Int f;
  mpz_fac_ui(f.get_mpz_t(), n);
  return f;
}

Int binom(const Int& n, unsigned long k) {
  Int b;
  mpz_bin_ui(b.get_mpz_t(), n.get_mpz_t(), k);
  return b;
}

// Monomial coefficients of the falling factorial n(n-1)...(n-k+1).
std::vector<std::vector<Int>> falling_factorials(std::size_t up_to) {
  std::vector<std::vector<Int>> f;
  f.push_back({Int(1)});
  for (std::size_t k = 0; k < up_to; ++k) {
    const auto& prev = f.back();
    std::vector<Int> next(prev.size() + 1);
    for (std::size_t j = 0; j < prev.size(); ++j) {
      next[j + 1] += prev[j];
      next[j] -= Int(static_cast<unsigned long>(k)) * prev[j];
    }
    f.push_back(std::move(next));
  }
  return f;
}

Rat eval_monomial(const std::vector<Rat>& c, const Int& n) {
  Rat acc = 0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * Rat(n) + c[j];
  return acc;
}

}  // namespace

IntValuedPoly::IntValuedPoly(std::vector<Int> binomial_coeffs) : coeffs_(std::move(binomial_coeffs)) { trim(); }

void IntValuedPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

IntValuedPoly IntValuedPoly::constant(const Int& c) { return IntValuedPoly(std::vector<Int>{c}); }

IntValuedPoly IntValuedPoly::from_monomial(const std::vector<Rat>& coeffs) {
  std::size_t d = coeffs.size();
  while (d > 0 && coeffs[d - 1] == 0) --d;
  if (d == 0) return IntValuedPoly();
  // values p(0..deg); integer-valued iff these are integers
  std::vector<Int> values;
  values.reserve(d);
  std::vector<Rat> c(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(d));
  for (std::size_t i = 0; i < d; ++i) {
    Rat v = eval_monomial(c, Int(static_cast<unsigned long>(i)));
    v.canonicalize();
    if (v.get_den() != 1) throw std::invalid_argument("IntValuedPoly: polynomial is not integer-valued");
    values.push_back(v.get_num());
  }
  // forward differences give the binomial-basis coefficients
  std::vector<Int> out;
  out.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    out.push_back(values[0]);
    for (std::size_t i = 0; i + 1 < values.size() - k; ++i) values[i] = values[i + 1] - values[i];
  }
  return IntValuedPoly(std::move(out));
}

IntValuedPoly IntValuedPoly::from_monomial(const std::vector<Int>& coeffs) {
  return from_monomial(std::vector<Rat>(coeffs.begin(), coeffs.end()));
}

IntValuedPoly IntValuedPoly::from_monomial(std::initializer_list<long> coeffs) {
  std::vector<Rat> c;
  for (long v : coeffs) c.emplace_back(v);
  return from_monomial(c);
}

std::vector<Rat> IntValuedPoly::monomial() const {
  if (coeffs_.empty()) return {};
  const auto ff = falling_factorials(coeffs_.size() - 1);
  std::vector<Rat> out(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_[k] == 0) continue;
    const Int kf = factorial(k);
    for (std::size_t j = 0; j <= k; ++j) out[j] += Rat(coeffs_[k] * ff[k][j], kf);
  }
  for (auto& x : out) x.canonicalize();
  return out;
}

bool IntValuedPoly::has_integer_monomial_coeffs() const {
  const auto m = monomial();
  return std::all_of(m.begin(), m.end(), [](const Rat& x) { return x.get_den() == 1; });
}

std::vector<Int> IntValuedPoly::integer_monomial() const {
  std::vector<Int> out;
  for (const Rat& x : monomial()) {
    if (x.get_den() != 1) throw std::invalid_argument("polynomial has non-integral monomial coefficients");
    out.push_back(x.get_num());
  }
  return out;
}

Int IntValuedPoly::operator()(const Int& n) const {
  Int acc = 0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    if (coeffs_[k] != 0) acc += coeffs_[k] * binom(n, k);
  return acc;
}

IntValuedPoly IntValuedPoly::compose_scale(const Int& scale) const {
  auto m = monomial();
  Int power = 1;
  for (auto& c : m) {
    c *= Rat(power);
    power *= scale;
  }
  return from_monomial(m);
}

IntValuedPoly operator+(const IntValuedPoly& a, const IntValuedPoly& b) {
  std::vector<Int> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return IntValuedPoly(std::move(c));
}

IntValuedPoly operator-(const IntValuedPoly& a, const IntValuedPoly& b) {
  std::vector<Int> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] -= b.coeffs_[i];
  return IntValuedPoly(std::move(c));
}

IntValuedPoly operator*(const IntValuedPoly& a, const IntValuedPoly& b) {
  if (a.is_zero() || b.is_zero()) return IntValuedPoly();
  const auto ma = a.monomial(), mb = b.monomial();
  std::vector<Rat> c(ma.size() + mb.size() - 1);
  for (std::size_t i = 0; i < ma.size(); ++i)
    for (std::size_t j = 0; j < mb.size(); ++j) c[i + j] += ma[i] * mb[j];
  return IntValuedPoly::from_monomial(c);
}

PolyVec::PolyVec(std::vector<IntValuedPoly> components) : comps_(std::move(components)) {
  if (comps_.empty()) throw std::invalid_argument("PolyVec: needs at least one component");
}

PolyVec PolyVec::from_monomial(const std::vector<std::vector<Int>>& components) {
  std::vector<IntValuedPoly> c;
  c.reserve(components.size());
  for (const auto& m : components) c.push_back(IntValuedPoly::from_monomial(m));
  return PolyVec(std::move(c));
}

int PolyVec::degree() const {
  int d = 0;
  for (const auto& c : comps_) d = std::max(d, c.degree());
  return d;
}

std::vector<Int> PolyVec::eval(const Int& n) const {
  std::vector<Int> out;
  out.reserve(comps_.size());
  for (const auto& c : comps_) out.push_back(c(n));
  return out;
}

bool PolyVec::has_integer_monomial_coeffs() const {
  return std::all_of(comps_.begin(), comps_.end(), [](const auto& c) { return c.has_integer_monomial_coeffs(); });
}

RescaledPolyVec rescale_to_integer_coeffs(const PolyVec& p) {
  const Int scale = factorial(static_cast<unsigned long>(p.degree()));
  std::vector<IntValuedPoly> out;
  out.reserve(p.dim());
  for (const auto& c : p.components()) out.push_back(c.compose_scale(scale));
  return {PolyVec(std::move(out)), scale};
}

CoeffMatrix coeff_matrix(const PolyVec& p) {
  const std::size_t rows = static_cast<std::size_t>(std::max(p.degree(), 1));
  IntMat c(rows, p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const auto m = p[i].integer_monomial();
    for (std::size_t j = 1; j < m.size(); ++j) c(j - 1, i) = m[j];
  }
  return {std::move(c)};
}

ExtInt mult_complexity(const PolyVec& p) {
  const IntMat c = coeff_matrix(p).matrix;
  if (rational_rank(c) < p.dim()) return ExtInt::infinity();
  const auto d = invariant_factors(c);
  return ExtInt(d.at(p.dim() - 1));
}

bool hyperplane_fleeing(const PolyVec& p) {
  if (p.degree() < 1) return false;
  const std::size_t rows = static_cast<std::size_t>(p.degree());
  std::vector<std::vector<Rat>> m(rows, std::vector<Rat>(p.dim()));
  Int den = 1;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const auto mono = p[i].monomial();
    for (std::size_t j = 1; j < mono.size(); ++j) {
      m[j - 1][i] = mono[j];
      den = lcm(den, mono[j].get_den());
    }
  }
  IntMat c(rows, p.dim());
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t i = 0; i < p.dim(); ++i) {
      Rat x = m[j][i] * Rat(den);
      x.canonicalize();
      c(j, i) = x.get_num();
    }
  return rational_rank(c) == p.dim();
}

MultiPoly::MultiPoly(std::size_t nvars, unsigned degree_cap) : nvars_(nvars), cap_(degree_cap) {}

MultiPoly MultiPoly::constant(std::size_t nvars, unsigned degree_cap, const Rat& c) {
  MultiPoly p(nvars, degree_cap);
  p.add_term(Exponents(nvars, 0), c);
  return p;
}

MultiPoly MultiPoly::univariate(std::size_t nvars, unsigned degree_cap, std::size_t var, const IntValuedPoly& q) {
  if (var >= nvars) throw std::invalid_argument("MultiPoly: variable index out of range");
  MultiPoly p(nvars, degree_cap);
  const auto m = q.monomial();
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j] == 0) continue;
    Exponents e(nvars, 0);
    e[var] = static_cast<unsigned>(j);
    p.add_term(e, m[j]);
  }
  return p;
}

void MultiPoly::add_term(const Exponents& e, const Rat& coeff) {
  if (e.size() != nvars_) throw std::invalid_argument("MultiPoly: exponent vector has wrong length");
  for (unsigned x : e)
    if (x > cap_) throw std::invalid_argument("MultiPoly: per-variable degree exceeds cap");
  if (coeff == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

unsigned MultiPoly::max_var_degree() const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_)
    for (unsigned x : e) d = std::max(d, x);
  return d;
}

Rat MultiPoly::eval(std::span<const Int> point) const {
  if (point.size() != nvars_) throw std::invalid_argument("MultiPoly: wrong point dimension");
  Rat acc = 0;
  for (const auto& [e, c] : terms_) {
    Int mono = 1;
    for (std::size_t v = 0; v < nvars_; ++v) {
      Int pw;
      mpz_pow_ui(pw.get_mpz_t(), point[v].get_mpz_t(), e[v]);
      mono *= pw;
    }
    acc += c * Rat(mono);
  }
  return acc;
}

MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) {
  if (a.nvars_ != b.nvars_) throw std::invalid_argument("MultiPoly: variable count mismatch");
  MultiPoly out(a.nvars_, std::min(a.cap_, b.cap_));
  for (const auto& [e, c] : a.terms_) out.add_term(e, c);
  for (const auto& [e, c] : b.terms_) out.add_term(e, c);
  return out;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
  if (a.nvars_ != b.nvars_) throw std::invalid_argument("MultiPoly: variable count mismatch");
  MultiPoly out(a.nvars_, std::min(a.cap_, b.cap_));
  MultiPoly::Exponents e(a.nvars_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t v = 0; v < a.nvars_; ++v) e[v] = ea[v] + eb[v];
      out.add_term(e, ca * cb);
    }
  return out;
}

Int substitution_degree_cap(unsigned r, unsigned nvars) {
  Int p;
  mpz_ui_pow_ui(p.get_mpz_t(), r + 1, nvars + 1);
  return p - r - 1;
}

PolyVec substitute_monomials(const std::vector<MultiPoly>& s, unsigned r) {
  if (s.empty()) throw std::invalid_argument("substitute_monomials: empty vector");
  const std::size_t nvars = s.front().nvars();
  const Int cap = substitution_degree_cap(r, static_cast<unsigned>(nvars));
  if (!cap.fits_ulong_p() || cap.get_ui() > (1UL << 16))
    throw std::invalid_argument("substitute_monomials: substituted degree too large");
  std::vector<unsigned long> weight(nvars);
  unsigned long w = r + 1;
  for (std::size_t v = 0; v < nvars; ++v) {
    weight[v] = w;
    w *= r + 1;
  }
  std::vector<IntValuedPoly> comps;
  comps.reserve(s.size());
  for (const auto& poly : s) {
    if (poly.nvars() != nvars) throw std::invalid_argument("substitute_monomials: variable count mismatch");
    if (poly.max_var_degree() > r)
      throw std::invalid_argument("substitute_monomials: per-variable degree exceeds r; substitution would not be injective");
    std::vector<Rat> mono(cap.get_ui() + 1);
    for (const auto& [e, c] : poly.terms()) {
      unsigned long deg = 0;
      for (std::size_t v = 0; v < nvars; ++v) deg += e[v] * weight[v];
      mono[deg] += c;
    }
    comps.push_back(IntValuedPoly::from_monomial(mono));
  }
  return PolyVec(std::move(comps));
}

}  // namespace qrec
