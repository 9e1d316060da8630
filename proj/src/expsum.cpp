#include "qrec/expsum.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

extern "C" {
#include <quadmath.h>
}

#include "qrec/errors.hpp"
#include "qrec/parallel.hpp"

namespace qrec {

namespace {

constexpr std::uint64_t kMaxModulus = std::uint64_t{1} << 62;
constexpr std::uint64_t kTableLimit = std::uint64_t{1} << 22;

std::uint64_t to_u64(const Int& x) {
  if (x < 0 || !x.fits_ulong_p()) throw std::invalid_argument("value does not fit in 64 bits");
  return x.get_ui();
}

std::uint64_t mod_u64(const Int& x, std::uint64_t q) {
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), Int(q).get_mpz_t());
  return r.get_ui();
}

// f(n) mod q by Horner, coefficients already reduced.
std::uint64_t horner_mod(const std::vector<std::uint64_t>& c, std::uint64_t n, std::uint64_t q) {
  unsigned __int128 acc = 0;
  for (std::size_t j = c.size(); j-- > 0;) acc = (acc * n + c[j]) % q;
  return static_cast<std::uint64_t>(acc);
}

std::vector<Complex> root_table(std::uint64_t q) {
  std::vector<Complex> t(q);
  for (std::uint64_t j = 0; j < q; ++j) t[j] = unit_root(static_cast<long long>(j), static_cast<long long>(q));
  return t;
}

// |(1/q) sum_{n=1}^{q} e(f(n)/q)|, coefficients reduced mod q.
Real normalized_sum(const std::vector<std::uint64_t>& c, std::uint64_t q, const std::vector<Complex>* table) {
  Complex acc;
  for (std::uint64_t n = 1; n <= q; ++n) {
    const std::uint64_t v = horner_mod(c, n % q, q);
    const Complex z = table ? (*table)[v] : unit_root(static_cast<long long>(v), static_cast<long long>(q));
    acc.re += z.re;
    acc.im += z.im;
  }
  Real m = real_abs(acc) / static_cast<Real>(q);
  return m > 1 ? Real(1) : m;
}

Real sum_with_reduction(const std::vector<Int>& coeffs, std::uint64_t q) {
  std::vector<std::uint64_t> c;
  c.reserve(coeffs.size());
  for (const Int& x : coeffs) c.push_back(mod_u64(x, q));
  if (q <= kTableLimit) {
    const auto table = root_table(q);
    return normalized_sum(c, q, &table);
  }
  return normalized_sum(c, q, nullptr);
}

Real to_real(const Int& x) {
  if (x.fits_slong_p()) return static_cast<Real>(x.get_si());
  return strtoflt128(x.get_str().c_str(), nullptr);
}

Real real_from_double(double x) { return static_cast<Real>(x); }

}  // namespace

Character::Character(const Int& q, std::vector<Int> residues) : q_(q), a_(std::move(residues)) {
  if (q_ <= 0) throw std::invalid_argument("Character: modulus must be positive");
  if (a_.empty()) throw std::invalid_argument("Character: needs at least one residue");
  for (auto& x : a_) mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), q_.get_mpz_t());
  Int g = q_;
  for (const auto& x : a_) g = gcd(g, x);
  if (g != 1) {
    q_ /= g;
    for (auto& x : a_) x /= g;
  }
}

SumReport char_sum(const Character& chi, const PolyVec& p) {
  if (chi.dim() != p.dim()) throw std::invalid_argument("char_sum: character and polynomial dimensions differ");
  const std::uint64_t q = to_u64(chi.modulus());
  if (q > kMaxModulus) throw std::invalid_argument("char_sum: modulus too large");
  // f(n) = P(n).a as an integer polynomial
  std::vector<Int> f(static_cast<std::size_t>(p.degree()) + 1);
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const auto m = p[i].integer_monomial();
    for (std::size_t j = 0; j < m.size(); ++j) f[j] += m[j] * chi.residues()[i];
  }
  Int q_prime = chi.modulus();
  for (std::size_t j = 1; j < f.size(); ++j) q_prime = gcd(q_prime, f[j]);
  SumReport rep;
  rep.q = chi.modulus();
  rep.magnitude = sum_with_reduction(f, q);
  rep.q_prime = q_prime;
  rep.reduced_q = chi.modulus() / q_prime;
  return rep;
}

Real poly_sum_magnitude(const std::vector<Int>& monomial_coeffs, std::uint64_t q) {
  if (q == 0) throw std::invalid_argument("poly_sum_magnitude: q must be positive");
  return sum_with_reduction(monomial_coeffs, q);
}

std::vector<HuaRow> hua_decay_scan(unsigned degree, const Int& complexity_cap, std::uint64_t q_max,
                                   unsigned trials, std::uint64_t seed) {
  if (degree < 2) throw std::invalid_argument("hua_decay_scan: degree must be at least 2");
  if (trials == 0) throw std::invalid_argument("hua_decay_scan: trials must be positive");
  if (complexity_cap < 1) throw std::invalid_argument("hua_decay_scan: complexity cap must be positive");
  std::vector<HuaRow> rows(q_max);
  parallel_for(q_max, [&](std::size_t idx) {
    const std::uint64_t q = idx + 1;
    HuaRow row{q, 0, Int(q)};
    if (q == 1) {
      row.worst_magnitude = 1;
      rows[idx] = std::move(row);
      return;
    }
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(q >> 32)};
    std::mt19937_64 rng(ss);
    std::uniform_int_distribution<std::uint64_t> any(0, q - 1), nonzero(1, q - 1);
    const auto table = q <= kTableLimit ? root_table(q) : std::vector<Complex>{};
    bool first = true;
    for (unsigned t = 0; t < trials; ++t) {
      std::vector<std::uint64_t> c(degree + 1, 0);
      Int g;
      for (int attempt = 0;; ++attempt) {
        if (attempt > 100000) throw std::runtime_error("hua_decay_scan: could not sample a primitive polynomial");
        for (unsigned j = 1; j < degree; ++j) c[j] = any(rng);
        c[degree] = nonzero(rng);
        g = Int(q);
        for (unsigned j = 1; j <= degree; ++j) g = gcd(g, Int(c[j]));
        if (g <= complexity_cap) break;
      }
      const Real m = normalized_sum(c, q, table.empty() ? nullptr : &table);
      if (first || m > row.worst_magnitude) {
        row.worst_magnitude = m;
        row.q_prime = g;
        first = false;
      }
    }
    rows[idx] = std::move(row);
  });
  return rows;
}

Complex partial_weyl_avg(const PolyVec& p, const std::vector<Real>& theta, std::uint64_t n_terms) {
  if (theta.size() != p.dim()) throw std::invalid_argument("partial_weyl_avg: theta has wrong dimension");
  if (n_terms == 0) throw std::invalid_argument("partial_weyl_avg: N must be positive");
  Complex acc;
  for (std::uint64_t n = 1; n <= n_terms; ++n) {
    const auto v = p.eval(Int(n));
    Real phase = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Real t = to_real(v[i]) * theta[i];
      phase += t - floorq(t);
    }
    const Complex z = unit_phase(phase);
    acc.re += z.re;
    acc.im += z.im;
  }
  return {acc.re / static_cast<Real>(n_terms), acc.im / static_cast<Real>(n_terms)};
}

std::uint64_t qbound_threshold(unsigned degree, const Int& complexity, double eps, const QBoundOptions& opt) {
  if (degree == 0) throw std::invalid_argument("qbound: degree must be positive");
  if (!(eps > 0)) throw std::invalid_argument("qbound: eps must be positive");
  if (!(opt.hua_constant > 0)) throw std::invalid_argument("qbound: Hua constant must be positive");
  if (complexity < 1) throw std::invalid_argument("qbound: complexity must be positive");
  const Real inv_d = Real(1) / degree;
  const Real heps = opt.hua_eps > 0 ? real_from_double(opt.hua_eps) : inv_d / 2;
  if (!(heps < inv_d)) throw std::invalid_argument("qbound: Hua exponent slack must be below 1/D");
  const Real c = real_from_double(opt.hua_constant);
  const Real e = real_from_double(eps);
  const Real qq = to_real(complexity);
  // bound(q) = C (q/Q)^(heps - 1/D) is decreasing in q
  auto below = [&](Real q) { return c * powq(q / qq, heps - inv_d) < e; };
  const Real t = qq * powq(c / e, Real(1) / (inv_d - heps));
  if (!(t < static_cast<Real>(opt.q0_cap)))
    throw CapExceeded("qbound: threshold q0 exceeds cap " + std::to_string(opt.q0_cap) + " (q0 ~ " +
                      real_str(t, 6) + ")");
  std::uint64_t q0 = t < 1 ? 1 : static_cast<std::uint64_t>(floorq(t)) + 1;
  while (q0 > 1 && below(static_cast<Real>(q0 - 1))) --q0;
  while (!below(static_cast<Real>(q0))) ++q0;
  if (q0 > opt.q0_cap) throw CapExceeded("qbound: threshold q0 exceeds cap " + std::to_string(opt.q0_cap));
  return q0;
}

QBound qbound(unsigned degree, unsigned dim, const Int& complexity, double eps, const QBoundOptions& opt) {
  if (dim == 0) throw std::invalid_argument("qbound: dimension must be positive");
  const std::uint64_t q0 = qbound_threshold(degree, complexity, eps, opt);
  return {q0, lcm_upto(q0)};
}

Int lcm_upto(std::uint64_t n) {
  if (n <= 1) return Int(1);
  std::vector<bool> composite(n + 1, false);
  std::vector<Int> factors;
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t m = p * p; m <= n; m += p) composite[m] = true;
    std::uint64_t pk = p;
    while (pk <= n / p) pk *= p;
    factors.emplace_back(static_cast<unsigned long>(pk));
  }
  // balanced product tree
  while (factors.size() > 1) {
    std::vector<Int> next;
    next.reserve((factors.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < factors.size(); i += 2) next.push_back(factors[i] * factors[i + 1]);
    if (factors.size() % 2) next.push_back(factors.back());
    factors.swap(next);
  }
  return factors.front();
}

}  // namespace qrec
