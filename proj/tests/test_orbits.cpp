#include "common.hpp"
#include "doctest.h"
#include "qrec/diffscan.hpp"
#include "qrec/errors.hpp"
#include "qrec/orbits.hpp"

using namespace qrec;

namespace {

IntMat random_unipotent(std::mt19937_64& rng, std::size_t d) {
  std::uniform_int_distribution<long> e(-3, 3);
  IntMat upper = IntMat::identity(d), lower = IntMat::identity(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) upper(i, j) = e(rng);
  // Conjugate by a unimodular lower-triangular matrix so the result is not triangular.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) lower(i, j) = e(rng) % 2;
  return lower * upper * unimodular_inverse(lower);
}

std::vector<Int> random_companion_coeffs(std::mt19937_64& rng, std::size_t d) {
  std::uniform_int_distribution<long> e(-30, 30);
  std::vector<Int> a(d);
  for (std::size_t i = 0; i + 1 < d; ++i) a[i] = e(rng);
  return a;
}

}  // namespace

TEST_CASE("unipotent power polynomial examples") {
  const auto p = unipotent_power_poly(UnipotentMat(IntMat{{1, 1}, {0, 1}}));
  CHECK(p.eval(Int(7)) == IntMat{{1, 7}, {0, 1}});
  const auto j3 = unipotent_power_poly(UnipotentMat(IntMat{{1, 1, 0}, {0, 1, 1}, {0, 0, 1}}));
  CHECK(j3(0, 2).binomial_coeffs() == std::vector<Int>{0, 0, 1});
  CHECK(j3.eval(Int(0)) == IntMat::identity(3));
}

TEST_CASE("unipotent powers match iterated products") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + rng() % 3;
    const UnipotentMat u(random_unipotent(rng, d));
    const auto pm = unipotent_power_poly(u);
    const IntMat inv = unimodular_inverse(u.matrix());
    IntMat pos = IntMat::identity(d), neg = IntMat::identity(d);
    for (long n = 0; n <= 20; ++n) {
      CHECK(pm.eval(Int(n)) == pos);
      CHECK(pm.eval(Int(-n)) == neg);
      CHECK(unipotent_power(u, Int(-n)) == neg);
      pos = pos * u.matrix();
      neg = neg * inv;
    }
  }
  CHECK_THROWS_AS(UnipotentMat(IntMat{{2, 0}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("adjoint map") {
  CHECK(adjoint_map(IntMat::identity(3)) == IntMat::identity(8));
  const IntMat a = adjoint_map(IntMat{{1, 1}, {0, 1}});
  const IntMat n = a - IntMat::identity(3);
  CHECK((n * n * n).is_zero());
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const IntMat g = random_unipotent(rng, 3), h = random_unipotent(rng, 3);
    CHECK(adjoint_map(g * h) == adjoint_map(g) * adjoint_map(h));
    const IntMat x = tracezero_matrix(std::vector<Int>{1, -2, 3, 0, 5, -1, 2, 4}, 3);
    const auto image = adjoint_map(g) * std::span<const Int>(tracezero_coords(x));
    CHECK(tracezero_matrix(image, 3) == g * x * unimodular_inverse(g));
  }
  CHECK_THROWS_AS(adjoint_map(IntMat{{2, 0}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("companion layout and characteristic polynomial") {
  CHECK(companion({Int(-5), Int(0)}).matrix() == IntMat{{0, 5}, {1, 0}});
  CHECK(companion({Int(-7), Int(2), Int(0)}).matrix() == IntMat{{0, 0, 7}, {1, 0, -2}, {0, 1, 0}});
  CHECK_THROWS_AS(companion({Int(1), Int(1)}), std::invalid_argument);
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + rng() % 4;
    const auto a = random_companion_coeffs(rng, d);
    auto cp = charpoly(companion(a).matrix());
    std::vector<Int> want(a);
    want.push_back(1);
    CHECK(cp == want);
  }
}

TEST_CASE("conjugation by gamma0 shifts companions by a constant") {
  CHECK(gamma0_identity(2, {{Int(3), Int(0)}, {Int(-8), Int(0)}}) == IntMat{{1, -1}, {0, -1}});
  const IntMat v3 = gamma0_identity(3, {{Int(1), Int(2), Int(0)}, {Int(5), Int(-4), Int(0)}});
  CHECK(v3 == IntMat{{0, 1, 0}, {0, 0, -1}, {0, 0, 0}});
  std::mt19937_64 rng(44);
  for (std::size_t d = 2; d <= 5; ++d) {
    std::vector<std::vector<Int>> samples;
    for (int s = 0; s < 20; ++s) samples.push_back(random_companion_coeffs(rng, d));
    const IntMat v = gamma0_identity(d, samples);
    Int trace = 0;
    for (std::size_t i = 0; i < d; ++i) trace += v(i, i);
    CHECK(trace == 0);
    CHECK_FALSE(v.is_zero());
  }
}

TEST_CASE("second-form setup") {
  const So21Setup s = so21_setup();
  CHECK(s.identity_resolved);
  CHECK(s.v0 == IntMat{{4, -8}, {0, -4}});
  CHECK(s.gamma0 == IntMat{{1, 2}, {0, 1}});
  for (long t = -50; t <= 50; ++t) {
    const IntMat a = so21_a(Int(t));
    CHECK((a(0, 1) - a(1, 0)) % 2 == 0);
    CHECK(s.gamma0 * a * unimodular_inverse(s.gamma0) - a == s.v0);
  }
}

TEST_CASE("orbit polynomial example") {
  const auto spec = OrbitSpec::linear({IntMat{{1, 1}, {0, 1}}}, {Int(0), Int(1)});
  const auto op = orbit_poly(spec);
  CHECK(op.substituted == PolyVec::from_monomial({{Int(0), Int(0), Int(0), Int(1)}, {Int(1)}}));
  CHECK(op.scale == 6);
  CHECK(op.poly == PolyVec::from_monomial({{Int(0), Int(0), Int(0), Int(216)}, {Int(1)}}));
  CHECK(op.degree_cap == 6);
  const auto zero = orbit_poly(OrbitSpec::linear({IntMat{{1, 1}, {0, 1}}}, {Int(0), Int(0)}));
  CHECK(zero.poly.degree() <= 0);
  CHECK_FALSE(hyperplane_fleeing(zero.poly));
}

TEST_CASE("word orbit points") {
  const auto spec = OrbitSpec::linear({IntMat{{1, 1}, {0, 1}}}, {Int(0), Int(1)});
  CHECK(word_orbit_points(spec, 0, 0) == std::vector<std::vector<Int>>{{0, 1}});
  CHECK(word_orbit_points(spec, -2, 2) ==
        std::vector<std::vector<Int>>{{-2, 1}, {-1, 1}, {0, 1}, {1, 1}, {2, 1}});
}

TEST_CASE("fleeing certificate examples") {
  CHECK(fleeing_certificate({{0, 0}, {1, 0}, {0, 1}}, 2).index.value() == 1);
  CHECK(fleeing_certificate({{0, 0}, {2, 0}, {0, 2}}, 2).index.value() == 4);
  const auto col = fleeing_certificate({{0, 0}, {1, 1}, {2, 2}}, 2);
  CHECK_FALSE(col.full_rank);
  CHECK(col.index.is_infinite());
}

TEST_CASE("companion certificates") {
  const auto c2 = certify_companion_bounds(2, 4);
  CHECK(c2.span.certificate.full_rank);
  CHECK(c2.span.certificate.word_length == 3);
  CHECK(c2.span.certificate.index.value() == 2);
  const auto c3 = certify_companion_bounds(3, 4);
  CHECK(c3.span.certificate.full_rank);
  CHECK(c3.span.certificate.word_length == 8);
  CHECK(c3.span.certificate.index.value() == 1);
  std::mt19937_64 rng(45);
  for (int s = 0; s < 5; ++s) {
    const auto cs = certify_companion_bounds(2, 4, random_companion_coeffs(rng, 2));
    CHECK(cs.span.certificate.index == c2.span.certificate.index);
    CHECK(cs.span.certificate.invariant_factors == c2.span.certificate.invariant_factors);
    REQUIRE(cs.sample);
    CHECK(cs.sample->full_rank);
  }
  CHECK_THROWS_AS(certify_companion_bounds(3, 2), VerificationError);
}

TEST_CASE("orbit polynomial values lie in the orbit and respect the degree cap") {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t d = 2 + rng() % 2;
    const std::size_t words = 1 + rng() % 2;
    std::vector<IntMat> gens;
    for (std::size_t j = 0; j < words; ++j) gens.push_back(random_unipotent(rng, d));
    std::vector<Int> v(d);
    for (auto& x : v) x = Int(static_cast<long>(rng() % 5) - 2);
    const auto spec = OrbitSpec::linear(gens, v);
    const auto op = orbit_poly(spec);
    CHECK(Int(op.degree_before_rescale) <= op.degree_cap);
    for (long n = -5; n <= 5; ++n)
      CHECK(op.poly.eval(Int(n)) == apply_word(spec, orbit_poly_exponents(spec, op.scale, Int(n))));
  }
}

TEST_CASE("second-form embedding determinant") {
  for (long x = -3; x <= 3; ++x)
    for (long y = -3; y <= 3; ++y)
      for (long z = -3; z <= 3; ++z) {
        const IntMat a = so21_embed(Int(x), Int(y), Int(z));
        CHECK(determinant(a) == x * x - y * y - z * z);
        CHECK(so21_project(a) == std::vector<Int>{x, y, z});
      }
}
