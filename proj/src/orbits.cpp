#include "qrec/orbits.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>

#include "qrec/diffscan.hpp"
#include "qrec/errors.hpp"

namespace qrec {

namespace {

IntMat nilpart(const IntMat& u) { return u - IntMat::identity(u.rows()); }

Int binom(const Int& n, unsigned long k) {
  Int b;
  mpz_bin_ui(b.get_mpz_t(), n.get_mpz_t(), k);
  return b;
}

// Incrementally maintained span of integer vectors.
class SpanBuilder {
 public:
  explicit SpanBuilder(std::size_t r) : r_(r), lattice_(IntMat(1, r)) {}
  void add(const std::vector<Int>& v) {
    if (lattice_.contains(v)) return;
    std::vector<std::vector<Int>> rows;
    for (std::size_t i = 0; i < lattice_.rank(); ++i) rows.push_back(lattice_.basis().row_vec(i));
    rows.push_back(v);
    lattice_ = Lattice(r_, rows);
  }
  const Lattice& lattice() const { return lattice_; }

 private:
  std::size_t r_;
  Lattice lattice_;
};

// Calls visit(point) for every u_1^{k_1}...u_n^{k_n} v with k_j in
// [0, bound_j], where position j uses generator seq[j].
void enumerate_words(const std::vector<const UnipotentMat*>& seq, const std::vector<unsigned>& bound,
                     const std::vector<Int>& v, const std::function<void(const std::vector<Int>&)>& visit) {
  // powers[j][k] = u_j^k
  std::vector<std::vector<IntMat>> powers(seq.size());
  for (std::size_t j = 0; j < seq.size(); ++j) {
    IntMat p = IntMat::identity(seq[j]->size());
    for (unsigned k = 0; k <= bound[j]; ++k) {
      powers[j].push_back(p);
      p = p * seq[j]->matrix();
    }
  }
  std::function<void(std::size_t, const std::vector<Int>&)> rec = [&](std::size_t pos, const std::vector<Int>& w) {
    if (pos == 0) {
      visit(w);
      return;
    }
    for (unsigned k = 0; k <= bound[pos - 1]; ++k) rec(pos - 1, powers[pos - 1][k] * std::span<const Int>(w));
  };
  rec(seq.size(), v);
}

IntMat conj(const IntMat& g, const IntMat& x) { return g * x * unimodular_inverse(g); }

}  // namespace

UnipotentMat::UnipotentMat(IntMat u) : u_(std::move(u)), nil_(0) {
  if (!u_.square()) throw std::invalid_argument("UnipotentMat: matrix not square");
  const IntMat n = nilpart(u_);
  IntMat p = IntMat::identity(u_.rows());
  for (unsigned k = 0; k <= u_.rows(); ++k) {
    if (p.is_zero()) {
      nil_ = k;
      return;
    }
    p = p * n;
  }
  throw std::invalid_argument("UnipotentMat: u - I is not nilpotent");
}

PolyMatrix::PolyMatrix(std::size_t n, std::vector<IntValuedPoly> entries) : n_(n), e_(std::move(entries)) {
  if (e_.size() != n * n) throw std::invalid_argument("PolyMatrix: entry count mismatch");
}

IntMat PolyMatrix::eval(const Int& n) const {
  IntMat m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j)(n);
  return m;
}

PolyMatrix unipotent_power_poly(const UnipotentMat& u) {
  const std::size_t m = u.size();
  const IntMat n = nilpart(u.matrix());
  std::vector<IntMat> powers{IntMat::identity(m)};
  for (unsigned k = 1; k < u.nilpotency(); ++k) powers.push_back(powers.back() * n);
  std::vector<IntValuedPoly> entries;
  entries.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<Int> c;
      for (const auto& p : powers) c.push_back(p(i, j));
      entries.emplace_back(std::move(c));
    }
  return PolyMatrix(m, std::move(entries));
}

IntMat unipotent_power(const UnipotentMat& u, const Int& e) {
  const IntMat n = nilpart(u.matrix());
  IntMat result = IntMat::identity(u.size());
  IntMat p = IntMat::identity(u.size());
  for (unsigned k = 1; k < u.nilpotency(); ++k) {
    p = p * n;
    result = result + binom(e, k) * p;
  }
  return result;
}

std::size_t tracezero_dim(std::size_t d) { return d * d - 1; }

std::vector<Int> tracezero_coords(const IntMat& x) {
  if (!x.square()) throw std::invalid_argument("tracezero_coords: matrix not square");
  const std::size_t d = x.rows();
  Int trace = 0;
  for (std::size_t i = 0; i < d; ++i) trace += x(i, i);
  if (trace != 0) throw std::invalid_argument("tracezero_coords: matrix has nonzero trace");
  std::vector<Int> out;
  out.reserve(tracezero_dim(d));
  Int diag_prefix = 0;
  for (std::size_t i = 0; i < d; ++i) {
    diag_prefix += x(i, i);
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j)
        out.push_back(x(i, j));
      else if (i + 1 < d)
        out.push_back(diag_prefix);
    }
  }
  return out;
}

IntMat tracezero_matrix(std::span<const Int> coords, std::size_t d) {
  if (coords.size() != tracezero_dim(d)) throw std::invalid_argument("tracezero_matrix: wrong coordinate count");
  IntMat x(d, d);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j) {
        x(i, j) = coords[k++];
      } else if (i + 1 < d) {
        x(i, i) += coords[k];
        x(i + 1, i + 1) -= coords[k];
        ++k;
      }
    }
  return x;
}

IntMat adjoint_map(const IntMat& g) {
  if (!g.square()) throw std::invalid_argument("adjoint_map: matrix not square");
  if (determinant(g) != 1) throw std::invalid_argument("adjoint_map: determinant is not 1");
  const std::size_t d = g.rows(), r = tracezero_dim(d);
  if (r == 0) throw std::invalid_argument("adjoint_map: size must be at least 2");
  const IntMat ginv = unimodular_inverse(g);
  IntMat ad(r, r);
  std::vector<Int> e(r);
  for (std::size_t k = 0; k < r; ++k) {
    std::fill(e.begin(), e.end(), Int(0));
    e[k] = 1;
    const auto col = tracezero_coords(g * tracezero_matrix(e, d) * ginv);
    for (std::size_t i = 0; i < r; ++i) ad(i, k) = col[i];
  }
  return ad;
}

CompanionMatrix::CompanionMatrix(std::vector<Int> coeffs) : a_(std::move(coeffs)) {
  if (a_.empty()) throw std::invalid_argument("companion: degree must be positive");
  if (a_.back() != 0) throw std::invalid_argument("companion: coefficient a_{n-1} must vanish (trace zero)");
}

IntMat CompanionMatrix::matrix() const {
  const std::size_t n = a_.size();
  IntMat c(n, n);
  for (std::size_t i = 1; i < n; ++i) c(i, i - 1) = 1;
  for (std::size_t i = 0; i < n; ++i) c(i, n - 1) = -a_[i];
  return c;
}

CompanionMatrix companion(std::vector<Int> coeffs) { return CompanionMatrix(std::move(coeffs)); }

std::vector<Int> charpoly(const IntMat& a) {
  if (!a.square()) throw std::invalid_argument("charpoly: matrix not square");
  const std::size_t n = a.rows();
  std::vector<Int> c(n + 1);
  c[n] = 1;
  IntMat m(n, n);  // M_0 = 0
  const IntMat id = IntMat::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    m = a * m + c[n - k + 1] * id;
    const IntMat am = a * m;
    Int tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
    Int q = -tr;
    mpz_divexact_ui(q.get_mpz_t(), q.get_mpz_t(), k);
    c[n - k] = q;
  }
  return c;
}

IntMat gamma0(std::size_t d) {
  IntMat g = IntMat::identity(d);
  g(0, d - 1) += 1;
  return g;
}

IntMat gamma0_identity(std::size_t d, const std::vector<std::vector<Int>>& samples) {
  if (d < 2) throw std::invalid_argument("gamma0_identity: d must be at least 2");
  std::vector<std::vector<Int>> work = samples;
  if (work.empty()) work.emplace_back(d);
  IntMat expected(d, d);
  expected(0, d - 2) += 1;
  expected(1, d - 1) -= 1;
  if (d == 2) expected(0, d - 1) -= 1;
  const IntMat g = gamma0(d);
  std::optional<IntMat> v0;
  for (const auto& coeffs : work) {
    if (coeffs.size() != d) throw std::invalid_argument("gamma0_identity: sample has wrong degree");
    const IntMat c = CompanionMatrix(coeffs).matrix();
    IntMat v = conj(g, c) - c;
    if (!v0) {
      v0 = v;
    } else if (!(v == *v0)) {
      throw VerificationError("gamma0_identity: samples disagree: " + v0->str() + " vs " + v.str());
    }
  }
  if (v0->is_zero()) throw VerificationError("gamma0_identity: v0 vanished");
  if (!(*v0 == expected))
    throw VerificationError("gamma0_identity: v0 = " + v0->str() + " does not match pattern " + expected.str());
  return *v0;
}

std::vector<std::pair<std::size_t, std::size_t>> elementary_hook_order(std::size_t d) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = k + 1; j < d; ++j) out.emplace_back(k, j);
    for (std::size_t i = k + 1; i < d; ++i) out.emplace_back(i, k);
  }
  return out;
}

std::vector<IntMat> elementary_generators(std::size_t d) {
  std::vector<IntMat> out;
  for (auto [i, j] : elementary_hook_order(d)) {
    IntMat g = IntMat::identity(d);
    g(i, j) = 1;
    out.push_back(std::move(g));
  }
  return out;
}

OrbitSpec::OrbitSpec(OrbitAction a, std::vector<UnipotentMat> acting, std::vector<Int> v)
    : action_(a), acting_(std::move(acting)), v_(std::move(v)) {
  if (acting_.empty()) throw std::invalid_argument("OrbitSpec: needs at least one generator");
  for (const auto& u : acting_)
    if (u.size() != v_.size()) throw std::invalid_argument("OrbitSpec: generator size does not match base vector");
}

OrbitSpec OrbitSpec::linear(const std::vector<IntMat>& generators, std::vector<Int> v) {
  std::vector<UnipotentMat> acting;
  for (const auto& g : generators) acting.emplace_back(g);
  return OrbitSpec(OrbitAction::Linear, std::move(acting), std::move(v));
}

OrbitSpec OrbitSpec::adjoint(const std::vector<IntMat>& generators, const IntMat& base) {
  std::vector<UnipotentMat> acting;
  for (const auto& g : generators) {
    UnipotentMat check(g);  // rejects non-unipotent generators
    acting.emplace_back(adjoint_map(g));
  }
  return OrbitSpec(OrbitAction::Adjoint, std::move(acting), tracezero_coords(base));
}

std::vector<Int> apply_word(const OrbitSpec& spec, std::span<const Int> exponents) {
  if (exponents.size() != spec.word_length()) throw std::invalid_argument("apply_word: wrong exponent count");
  std::vector<Int> w = spec.base();
  for (std::size_t i = spec.word_length(); i-- > 0;)
    w = unipotent_power(spec.acting()[i], exponents[i]) * std::span<const Int>(w);
  return w;
}

std::vector<MultiPoly> orbit_multipoly(const OrbitSpec& spec) {
  const std::size_t nvars = spec.word_length(), r = spec.dim();
  const auto cap = static_cast<unsigned>(r);
  std::vector<MultiPoly> w;
  for (const Int& x : spec.base()) w.push_back(MultiPoly::constant(nvars, cap, Rat(x)));
  for (std::size_t i = nvars; i-- > 0;) {
    const PolyMatrix pm = unipotent_power_poly(spec.acting()[i]);
    std::vector<MultiPoly> next;
    next.reserve(r);
    for (std::size_t a = 0; a < r; ++a) {
      MultiPoly acc(nvars, cap);
      for (std::size_t b = 0; b < r; ++b) {
        if (pm(a, b).is_zero() || w[b].terms().empty()) continue;
        acc = acc + MultiPoly::univariate(nvars, cap, i, pm(a, b)) * w[b];
      }
      next.push_back(std::move(acc));
    }
    w = std::move(next);
  }
  return w;
}

OrbitPolynomial orbit_poly(const OrbitSpec& spec) {
  const auto r = static_cast<unsigned>(spec.dim());
  PolyVec substituted = substitute_monomials(orbit_multipoly(spec), r);
  const Int cap = substitution_degree_cap(r, static_cast<unsigned>(spec.word_length()));
  const int deg = substituted.degree();
  if (Int(deg) > cap) throw std::logic_error("orbit_poly: substituted degree exceeds cap");
  auto rescaled = rescale_to_integer_coeffs(substituted);
  return {std::move(substituted), std::move(rescaled.poly), std::move(rescaled.scale), deg, cap};
}

std::vector<Int> orbit_poly_exponents(const OrbitSpec& spec, const Int& scale, const Int& n) {
  const Int base = scale * n;
  std::vector<Int> e;
  unsigned long w = spec.dim() + 1;
  for (std::size_t j = 0; j < spec.word_length(); ++j) {
    Int p;
    mpz_pow_ui(p.get_mpz_t(), base.get_mpz_t(), w);
    e.push_back(p);
    w *= spec.dim() + 1;
  }
  return e;
}

std::vector<std::vector<Int>> word_orbit_points(const OrbitSpec& spec, long lo, long hi) {
  if (lo > hi) throw std::invalid_argument("word_orbit_points: empty exponent box");
  std::set<std::vector<Int>> seen;
  const std::size_t n = spec.word_length();
  std::vector<std::vector<IntMat>> powers(n);
  for (std::size_t j = 0; j < n; ++j)
    for (long k = lo; k <= hi; ++k) powers[j].push_back(unipotent_power(spec.acting()[j], Int(k)));
  std::function<void(std::size_t, const std::vector<Int>&)> rec = [&](std::size_t pos, const std::vector<Int>& w) {
    if (pos == 0) {
      seen.insert(w);
      return;
    }
    for (const auto& p : powers[pos - 1]) rec(pos - 1, p * std::span<const Int>(w));
  };
  rec(n, spec.base());
  return {seen.begin(), seen.end()};
}

FleeingCertificate fleeing_certificate(const std::vector<std::vector<Int>>& points, std::size_t ambient_rank) {
  if (points.size() < 2) throw std::invalid_argument("fleeing_certificate: needs at least two points");
  SpanBuilder span(ambient_rank);
  std::vector<Int> diff(ambient_rank);
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].size() != ambient_rank) throw std::invalid_argument("fleeing_certificate: wrong point dimension");
    for (std::size_t k = 0; k < ambient_rank; ++k) diff[k] = points[i][k] - points[0][k];
    span.add(diff);
  }
  FleeingCertificate cert;
  const Lattice& l = span.lattice();
  for (std::size_t i = 0; i < l.rank(); ++i) cert.generators.push_back(l.basis().row_vec(i));
  cert.invariant_factors = invariant_factors(l.basis());
  cert.full_rank = l.rank() == ambient_rank;
  cert.index = lattice_index(l);
  return cert;
}

OrbitSpanCertificate certify_orbit_span(const std::vector<UnipotentMat>& acting, const std::vector<Int>& v0,
                                        unsigned depth, std::size_t gamma_index) {
  if (acting.empty()) throw std::invalid_argument("certify_orbit_span: no generators");
  if (depth == 0) throw std::invalid_argument("certify_orbit_span: depth must be positive");
  if (gamma_index >= acting.size()) throw std::invalid_argument("certify_orbit_span: gamma index out of range");
  const std::size_t r = v0.size(), ell = acting.size();
  OrbitSpanCertificate out;
  std::optional<Lattice> stable;
  for (unsigned n = 1; n <= depth; ++n) {
    std::vector<const UnipotentMat*> seq;
    std::vector<unsigned> bound;
    for (unsigned j = 0; j < n; ++j) {
      seq.push_back(&acting[j % ell]);
      bound.push_back(acting[j % ell].nilpotency() - 1);
    }
    SpanBuilder span(r);
    enumerate_words(seq, bound, v0, [&](const std::vector<Int>& p) { span.add(p); });
    const Lattice& w = span.lattice();
    out.span_history.push_back(lattice_index(w).str());
    if (stable) {
      if (!(w == *stable)) throw VerificationError("certify_orbit_span: span changed after stabilization");
      continue;
    }
    bool invariant = true;
    for (const auto& u : acting) {
      for (std::size_t i = 0; i < w.rank() && invariant; ++i) {
        const auto row = w.basis().row_vec(i);
        if (!w.contains(u.matrix() * std::span<const Int>(row))) invariant = false;
      }
      if (!invariant) break;
    }
    if (!invariant) continue;
    stable = w;
    out.stable_depth = n;
    unsigned big_n = n;
    while ((big_n - 1) % ell != gamma_index) ++big_n;
    FleeingCertificate& cert = out.certificate;
    cert.word_length = big_n;
    for (std::size_t i = 0; i < w.rank(); ++i) cert.generators.push_back(w.basis().row_vec(i));
    cert.invariant_factors = invariant_factors(w.basis());
    cert.full_rank = w.rank() == r;
    cert.index = lattice_index(w);
  }
  if (!stable)
    throw VerificationError("certify_orbit_span: span not generator-invariant by depth " + std::to_string(depth));
  return out;
}

CompanionCertificate certify_companion_bounds(std::size_t d, unsigned depth,
                                              const std::optional<std::vector<Int>>& companion_coeffs) {
  if (d < 2) throw std::invalid_argument("certify_companion_bounds: d must be at least 2");
  const std::vector<Int> coeffs = companion_coeffs.value_or(std::vector<Int>(d));
  CompanionCertificate out;
  out.d = d;
  out.v0 = gamma0_identity(d, {coeffs});
  const auto gens = elementary_generators(d);
  const auto order = elementary_hook_order(d);
  std::vector<UnipotentMat> acting;
  for (const auto& g : gens) acting.emplace_back(adjoint_map(g));
  const auto gamma_pos = static_cast<std::size_t>(
      std::find(order.begin(), order.end(), std::make_pair(std::size_t{0}, d - 1)) - order.begin());
  out.span = certify_orbit_span(acting, tracezero_coords(out.v0), depth, gamma_pos);
  if (companion_coeffs) {
    const unsigned big_n = out.span.certificate.word_length;
    std::vector<IntMat> seq;
    unsigned max_nil = 0;
    for (unsigned j = 0; j < big_n; ++j) {
      seq.push_back(gens[j % gens.size()]);
      max_nil = std::max(max_nil, acting[j % gens.size()].nilpotency());
    }
    const auto spec = OrbitSpec::adjoint(seq, CompanionMatrix(coeffs).matrix());
    // the box must reach one past the nilpotency so that g gamma0 c_p is hit
    auto cert = fleeing_certificate(word_orbit_points(spec, 0, max_nil), tracezero_dim(d));
    cert.word_length = big_n;
    if (!cert.full_rank)
      throw VerificationError("certify_companion_bounds: Gamma_N c_p lies in a proper affine subspace");
    const Int& q = out.span.certificate.index.value();
    if (!mpz_divisible_p(q.get_mpz_t(), cert.index.value().get_mpz_t()))
      throw VerificationError("certify_companion_bounds: sample difference index " + cert.index.str() +
                              " does not divide Q = " + q.get_str());
    out.sample = std::move(cert);
  }
  return out;
}

IntMat so21_a(const Int& t) {
  IntMat a(2, 2);
  a(0, 1) = 2 * t;
  a(1, 0) = 2;
  return a;
}

So21Setup so21_setup(long t_range) {
  So21Setup s;
  s.lambda_basis = {so21_embed(1, 0, 0), so21_embed(0, 1, 0), so21_embed(0, 0, 1)};
  s.generators = {IntMat{{1, 2}, {0, 1}}, IntMat{{1, 0}, {2, 1}}};
  s.gamma0 = IntMat{{1, 2}, {0, 1}};
  s.v0 = IntMat{{4, -8}, {0, -4}};
  const IntMat printed{{1, -2}, {0, 1}};
  const IntMat printed_inv = unimodular_inverse(printed);
  s.identity_resolved = s.identity_printed_forward = s.identity_printed_inverse = true;
  for (long t = -t_range; t <= t_range; ++t) {
    const IntMat a = so21_a(Int(t));
    so21_project(a);  // a_t lies in Lambda
    if (!(conj(s.gamma0, a) - a == s.v0)) s.identity_resolved = false;
    if (!(conj(printed, a) - a == s.v0)) s.identity_printed_forward = false;
    if (!(printed_inv * a * printed - a == s.v0)) s.identity_printed_inverse = false;
  }
  if (!s.identity_resolved && !s.identity_printed_forward)
    throw VerificationError("so21_setup: identity fails under both conjugation conventions");
  for (const auto& g : s.generators) {
    IntMat m(3, 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto col = so21_project(conj(g, s.lambda_basis[k]));
      for (std::size_t i = 0; i < 3; ++i) m(i, k) = col[i];
    }
    s.acting.push_back(std::move(m));
  }
  return s;
}

OrbitSpanCertificate certify_so21_bounds(unsigned depth) {
  const So21Setup s = so21_setup();
  std::vector<UnipotentMat> acting;
  for (const auto& m : s.acting) acting.emplace_back(m);
  return certify_orbit_span(acting, so21_project(s.v0), depth, 0);
}

}  // namespace qrec
