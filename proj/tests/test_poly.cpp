#include <numeric>

#include "common.hpp"
#include "doctest.h"
#include "qrec/poly.hpp"

using namespace qrec;

namespace {

PolyVec mono(const std::vector<std::vector<long>>& comps) {
  std::vector<std::vector<Int>> c;
  for (const auto& comp : comps) c.emplace_back(comp.begin(), comp.end());
  return PolyVec::from_monomial(c);
}

// max over q <= bound and a in [0,q)^r with gcd(a, q) = 1 of gcd(C a, q)
std::uint64_t brute_complexity(const IntMat& c, std::uint64_t bound) {
  std::uint64_t best = 1;
  const std::size_t r = c.cols();
  for (std::uint64_t q = 1; q <= bound; ++q) {
    std::vector<std::uint64_t> a(r, 0);
    for (;;) {
      std::uint64_t ga = q;
      for (auto x : a) ga = std::gcd(ga, x);
      if (ga == 1) {
        Int g = q;
        for (std::size_t j = 0; j < c.rows(); ++j) {
          Int s = 0;
          for (std::size_t i = 0; i < r; ++i) s += c(j, i) * a[i];
          mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), s.get_mpz_t());
        }
        best = std::max<std::uint64_t>(best, g.get_ui());
      }
      std::size_t pos = 0;
      while (pos < r && ++a[pos] == q) a[pos++] = 0;
      if (pos == r) break;
    }
  }
  return best;
}

PolyVec random_poly(std::mt19937_64& rng, std::size_t r, int degree) {
  std::uniform_int_distribution<long> coeff(-6, 6);
  std::vector<std::vector<Int>> comps(r);
  for (auto& c : comps) {
    for (int j = 0; j <= degree; ++j) c.push_back(Int(coeff(rng)));
  }
  return PolyVec::from_monomial(comps);
}

}  // namespace

TEST_CASE("evaluation examples") {
  CHECK(mono({{0, 2}, {0, 0, 3}}).eval(Int(2)) == std::vector<Int>{4, 12});
  const PolyVec b({IntValuedPoly(std::vector<Int>{0, 0, 1})});
  CHECK(b.eval(Int(5)) == std::vector<Int>{10});
  CHECK(mono({{0, 1}}).eval(Int(0)) == std::vector<Int>{0});
}

TEST_CASE("rescaling examples") {
  const PolyVec b2({IntValuedPoly(std::vector<Int>{0, 0, 1})});
  const auto r2 = rescale_to_integer_coeffs(b2);
  CHECK(r2.scale == 2);
  CHECK(r2.poly == mono({{0, -1, 2}}));
  const auto r3 = rescale_to_integer_coeffs(mono({{0, 0, 0, 1}}));
  CHECK(r3.scale == 6);
  CHECK(r3.poly == mono({{0, 0, 0, 216}}));
  const PolyVec b3({IntValuedPoly(std::vector<Int>{0, 0, 0, 1})});
  const auto r4 = rescale_to_integer_coeffs(b3);
  CHECK(r4.scale == 6);
  CHECK(r4.poly == mono({{0, 2, -18, 36}}));
}

TEST_CASE("rescaling agrees at scaled arguments") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<long> coeff(-5, 5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<IntValuedPoly> comps;
    for (int c = 0; c < 2; ++c) {
      std::vector<Int> b;
      for (int j = 0; j <= 4; ++j) b.push_back(Int(coeff(rng)));
      comps.emplace_back(b);
    }
    const PolyVec p(comps);
    const auto rs = rescale_to_integer_coeffs(p);
    CHECK(rs.poly.has_integer_monomial_coeffs());
    for (long n = -20; n <= 20; ++n) CHECK(rs.poly.eval(Int(n)) == p.eval(rs.scale * n));
  }
}

TEST_CASE("coefficient matrix examples") {
  CHECK(coeff_matrix(mono({{0, 2}, {0, 0, 3}})).matrix == IntMat{{2, 0}, {0, 3}});
  CHECK(coeff_matrix(mono({{0, 1}, {5, 1}})).matrix == IntMat{{1, 1}});
  CHECK(coeff_matrix(mono({{4, 6, 0, 10}})).matrix == IntMat{{6}, {0}, {10}});
}

TEST_CASE("multiplicative complexity examples") {
  CHECK(mult_complexity(mono({{4, 6, 0, 10}})).value() == 2);
  CHECK(mult_complexity(mono({{0, 2}, {0, 0, 3}})).value() == 6);
  CHECK(mult_complexity(mono({{0, 1}, {5, 1}})).is_infinite());
  CHECK(brute_complexity(IntMat{{2, 0}, {0, 3}}, 60) == 6);
}

TEST_CASE("hyperplane fleeing examples") {
  CHECK(hyperplane_fleeing(mono({{0, 1}, {0, 0, 1}})));
  CHECK_FALSE(hyperplane_fleeing(mono({{0, 1}, {5, 1}})));
  // (k c - R(k n), k n) with R(y) = y^2, k = 3, c = 2
  CHECK(hyperplane_fleeing(mono({{6, 0, -9}, {0, 3}})));
}

TEST_CASE("complexity matches brute force and the fleeing characterization") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t r = 1 + rng() % 3;
    const int degree = 1 + static_cast<int>(rng() % 4);
    const PolyVec p = random_poly(rng, r, degree);
    const ExtInt q = mult_complexity(p);
    const std::uint64_t bound = 24;
    std::uint64_t predicted = bound;
    if (!q.is_infinite()) {
      predicted = 1;
      for (std::uint64_t m = 1; m <= bound; ++m) {
        Int g;
        mpz_gcd_ui(g.get_mpz_t(), q.value().get_mpz_t(), m);
        predicted = std::max<std::uint64_t>(predicted, g.get_ui());
      }
    }
    CHECK(brute_complexity(coeff_matrix(p).matrix, bound) == predicted);
    CHECK(q.is_infinite() != hyperplane_fleeing(p));
  }
}

TEST_CASE("rescaled complexity is bounded by scale^D times the original") {
  const PolyVec p = mono({{0, 2}, {0, 0, 3}});
  const auto rs = rescale_to_integer_coeffs(p);
  Int bound = mult_complexity(p).value();
  for (int j = 0; j < p.degree(); ++j) bound *= rs.scale;
  CHECK(mult_complexity(rs.poly).value() <= bound);
}

TEST_CASE("monomial substitution") {
  MultiPoly s(2, 2);
  s.add_term({1, 2}, Rat(1));
  const PolyVec p = substitute_monomials({s}, 2);
  CHECK(p.degree() == 21);
  CHECK(p[0].integer_monomial()[21] == 1);
  CHECK(substitution_degree_cap(2, 2) == 24);
  const PolyVec c = substitute_monomials({MultiPoly::constant(2, 2, Rat(7))}, 2);
  CHECK(c.degree() == 0);
  CHECK(c.eval(Int(9)) == std::vector<Int>{7});
}

TEST_CASE("substitution preserves nonconstant coefficients") {
  MultiPoly s(2, 2);
  s.add_term({0, 0}, Rat(4));
  s.add_term({1, 0}, Rat(6));
  s.add_term({2, 1}, Rat(-3));
  s.add_term({0, 2}, Rat(10));
  const PolyVec p = substitute_monomials({s}, 2);
  auto coeffs = p[0].integer_monomial();
  std::vector<Int> nonconst;
  for (std::size_t j = 1; j < coeffs.size(); ++j)
    if (coeffs[j] != 0) nonconst.push_back(coeffs[j]);
  std::sort(nonconst.begin(), nonconst.end());
  CHECK(nonconst == std::vector<Int>{-3, 6, 10});
}

TEST_CASE("substitution rejects exponents above r") {
  MultiPoly s(1, 3);
  s.add_term({3}, Rat(1));
  CHECK_THROWS_AS(substitute_monomials({s}, 2), std::invalid_argument);
}

TEST_CASE("integer-valued construction") {
  CHECK_THROWS_AS(IntValuedPoly::from_monomial(std::vector<Rat>{Rat(0), Rat(1, 3)}), std::invalid_argument);
  const auto p = IntValuedPoly::from_monomial(std::vector<Rat>{Rat(0), Rat(-1, 2), Rat(1, 2)});
  CHECK(p.binomial_coeffs() == std::vector<Int>{0, 0, 1});
}
