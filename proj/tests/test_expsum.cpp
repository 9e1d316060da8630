#include <cmath>
#include <complex>

#include "common.hpp"
#include "doctest.h"
#include "qrec/errors.hpp"
#include "qrec/expsum.hpp"

using namespace qrec;

namespace {

// Direct summation in long double as an independent oracle.
double direct_magnitude(const std::vector<long>& coeffs, long q) {
  std::complex<long double> s = 0;
  for (long n = 1; n <= q; ++n) {
    long v = 0, pw = 1;
    for (long c : coeffs) {
      v = (v + ((c % q + q) % q) * pw) % q;
      pw = pw * n % q;
    }
    const long double phase = 2.0L * 3.14159265358979323846264338327950288L * static_cast<long double>(v) / q;
    s += std::complex<long double>(std::cos(phase), std::sin(phase));
  }
  return static_cast<double>(std::abs(s) / static_cast<long double>(q));
}

}  // namespace

TEST_CASE("character sum examples") {
  const auto triv = char_sum(Character::trivial(1), PolyVec::from_monomial({{Int(0), Int(0), Int(1)}}));
  CHECK(test::d(triv.magnitude) == doctest::Approx(1.0).epsilon(1e-12));
  const auto sq = char_sum(Character(Int(5), {Int(1)}), PolyVec::from_monomial({{Int(0), Int(0), Int(1)}}));
  CHECK(test::d(sq.magnitude) == doctest::Approx(std::sqrt(0.2)).epsilon(1e-12));
  const auto lin = char_sum(Character(Int(4), {Int(1)}), PolyVec::from_monomial({{Int(0), Int(2)}}));
  CHECK(test::d(lin.magnitude) < 1e-12);
  CHECK(lin.q_prime == 2);
  CHECK(lin.reduced_q == 2);
}

TEST_CASE("characters are stored in reduced form") {
  const Character c(Int(12), {Int(4), Int(8)});
  CHECK(c.modulus() == 3);
  CHECK(c.residues() == std::vector<Int>{1, 2});
  const Character n(Int(10), {Int(-3)});
  CHECK(n.residues() == std::vector<Int>{7});
}

TEST_CASE("normalized sums match direct summation") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<long> coeff(-20, 20);
  for (int trial = 0; trial < 60; ++trial) {
    const long q = 2 + static_cast<long>(rng() % 80);
    std::vector<long> c(4);
    for (auto& x : c) x = coeff(rng);
    std::vector<Int> ci(c.begin(), c.end());
    CHECK(test::d(poly_sum_magnitude(ci, static_cast<std::uint64_t>(q))) ==
          doctest::Approx(direct_magnitude(c, q)).epsilon(1e-9));
  }
}

TEST_CASE("magnitude is invariant under constant translation") {
  const PolyVec p = PolyVec::from_monomial({{Int(0), Int(3), Int(5)}, {Int(0), Int(0), Int(0), Int(2)}});
  const PolyVec t = PolyVec::from_monomial({{Int(17), Int(3), Int(5)}, {Int(-4), Int(0), Int(0), Int(2)}});
  const Character chi(Int(21), {Int(2), Int(5)});
  CHECK(test::d(char_sum(chi, p).magnitude) == doctest::Approx(test::d(char_sum(chi, t).magnitude)).epsilon(1e-12));
}

TEST_CASE("divisible nonconstant coefficients give magnitude one") {
  const auto r = char_sum(Character(Int(7), {Int(1)}), PolyVec::from_monomial({{Int(3), Int(14), Int(-21), Int(7)}}));
  CHECK(test::d(r.magnitude) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.q_prime == 7);
}

TEST_CASE("reported q' divides the coefficient gcd") {
  const auto r = char_sum(Character(Int(36), {Int(1)}), PolyVec::from_monomial({{Int(0), Int(6), Int(12)}}));
  CHECK(r.q_prime == 6);
  CHECK(r.reduced_q == 6);
}

TEST_CASE("hua scan basics") {
  const auto rows = hua_decay_scan(2, Int(1), 30, 8, 5);
  REQUIRE(rows.size() == 30);
  CHECK(test::d(rows[0].worst_magnitude) == doctest::Approx(1.0));
  for (const auto& row : rows) {
    CHECK(row.worst_magnitude <= 1 + Real(1e-20));
    CHECK(row.q_prime <= 1);
  }
  const auto again = hua_decay_scan(2, Int(1), 30, 8, 5);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].worst_magnitude == again[i].worst_magnitude);
}

TEST_CASE("weyl averages") {
  const PolyVec lin = PolyVec::from_monomial({{Int(0), Int(1)}});
  const Complex z = partial_weyl_avg(lin, {Real(0)}, 10);
  CHECK(test::d(z.re) == doctest::Approx(1.0));
  CHECK(test::d(real_abs(partial_weyl_avg(lin, {Real(0.5)}, 10))) < 1e-25);
  const PolyVec sq = PolyVec::from_monomial({{Int(0), Int(0), Int(1)}});
  const Real theta = real_sqrt(2) - 1;
  CHECK(test::d(real_abs(partial_weyl_avg(sq, {theta}, 100000))) < 0.05);
}

TEST_CASE("qbound examples") {
  QBoundOptions one;
  one.hua_constant = 1.0;
  const auto q = qbound(2, 1, Int(1), 0.5, one);
  CHECK(q.q0 == 17);
  CHECK(q.q == lcm_upto(17));
  CHECK(qbound(2, 1, Int(1), 2.0, one).q == 1);
  std::uint64_t prev = 0;
  for (double eps : {0.9, 0.6, 0.4, 0.3, 0.2}) {
    const auto t = qbound_threshold(3, Int(2), eps, one);
    CHECK(t >= prev);
    prev = t;
  }
  QBoundOptions capped;
  capped.q0_cap = 50;
  CHECK_THROWS_AS(qbound(3, 1, Int(1), 0.01, capped), CapExceeded);
}
