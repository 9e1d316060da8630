#include <cmath>
#include <complex>

#include "common.hpp"
#include "doctest.h"
#include "qrec/errors.hpp"
#include "qrec/systems.hpp"

using namespace qrec;

namespace {

MeasSet set_of(const FiniteSystem& sys, std::vector<std::size_t> xs) { return MeasSet::from_indices(sys, xs); }

std::size_t naive_intersection(const FiniteSystem& sys, const MeasSet& b, std::size_t shift) {
  std::size_t n = 0;
  for (std::size_t x = 0; x < sys.size(); ++x) n += b.contains(x) && b.contains(sys.add(x, shift));
  return n;
}

// ||P 1_B||^2 through naive coset averages of Phi(q Z^r).
Rat naive_projection_sq(const FiniteSystem& sys, const MeasSet& b, const Int& q) {
  const auto part = ergodic_components(sys, q);
  Rat total = 0;
  for (const auto& p : part.parts) {
    long in = 0;
    for (auto x : p) in += b.contains(x);
    Rat avg(in, static_cast<long>(p.size()));
    avg.canonicalize();
    total += avg * avg * Rat(static_cast<long>(p.size()), static_cast<long>(sys.size()));
  }
  total.canonicalize();
  return total;
}

}  // namespace

TEST_CASE("ergodic components") {
  const auto sys = FiniteSystem::rotation(12);
  const auto part = ergodic_components(sys, Int(4));
  REQUIRE(part.parts.size() == 4);
  CHECK(part.parts[0] == std::vector<std::size_t>{0, 4, 8});
  CHECK(part.parts[3] == std::vector<std::size_t>{3, 7, 11});
  CHECK(ergodic_components(sys, Int(1)).parts.size() == 1);
  const auto grid = FiniteSystem::grid(4, 6);
  const auto gp = ergodic_components(grid, Int(2));
  CHECK(gp.parts.size() == 4);
  std::size_t total = 0;
  for (const auto& p : gp.parts) total += p.size();
  CHECK(total == grid.size());
}

TEST_CASE("equidistribution examples") {
  const auto sys = FiniteSystem::rotation(12);
  const auto e1 = equidist_check(sys, set_of(sys, {0, 1, 2, 3}), Int(2), Rat(1, 2));
  CHECK(e1.equidistributed);
  const auto e2 = equidist_check(sys, set_of(sys, {0, 2, 4, 6}), Int(2), Rat(1, 2));
  CHECK_FALSE(e2.equidistributed);
  CHECK(e2.worst_ratio == 2);
  const auto e3 = equidist_check(sys, MeasSet::full(sys), Int(3), Rat(1, 10));
  CHECK(e3.equidistributed);
  CHECK(e3.worst_ratio == 1);
}

TEST_CASE("measure increment examples") {
  const auto sys = FiniteSystem::rotation(12);
  const auto t = measure_increment(sys, set_of(sys, {0, 2, 4, 6}), Int(2), Rat(1, 2));
  CHECK(t.k == 2);
  CHECK(t.component == 0);
  CHECK(t.final_density == test::rat(2, 3));
  CHECK(increment_bound_holds(t, Rat(1, 2)));
  const auto flat = measure_increment(sys, set_of(sys, {0, 1, 2, 3}), Int(2), Rat(1, 2));
  CHECK(flat.k == 1);
  CHECK(flat.steps.empty());
}

TEST_CASE("increment traces grow geometrically") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = trial % 2 ? FiniteSystem::grid(8, 12) : FiniteSystem::rotation(360);
    const auto b = MeasSet::random(sys, 0.1 + 0.05 * (trial % 5), rng());
    if (b.count() == 0) continue;
    const Rat delta(1, 4);
    const auto t = measure_increment(sys, b, Int(2 + trial % 3), delta);
    Rat prev = t.initial_density;
    for (const auto& s : t.steps) {
      CHECK(s.density >= (1 + delta) * prev);
      CHECK(s.density <= 1);
      prev = s.density;
    }
    CHECK(increment_bound_holds(t, delta));
  }
}

TEST_CASE("spectral projection examples") {
  const auto sys = FiniteSystem::rotation(12);
  std::vector<std::size_t> evens{0, 2, 4, 6, 8, 10};
  const auto rep = spectral_projection_norm(sys, set_of(sys, evens), Int(2));
  CHECK(test::d(rep.norm) == doctest::Approx(0.5).epsilon(1e-15));
  REQUIRE(rep.coefficients.size() == 1);
  CHECK(test::d(real_abs(rep.coefficients[0].value)) == doctest::Approx(0.5));
  const auto full = spectral_projection_norm(sys, MeasSet::full(sys), Int(6));
  CHECK(test::d(full.norm) < 1e-15);
}

TEST_CASE("spectral norm agrees with coset averages") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 12; ++trial) {
    const auto sys = trial % 2 ? FiniteSystem::grid(6, 10) : FiniteSystem::rotation(210);
    const auto b = MeasSet::random(sys, 0.3, rng());
    const Int q(static_cast<long>(2 + trial % 5));
    const auto rep = spectral_projection_norm(sys, b, q);
    CHECK(rep.projection_sq == naive_projection_sq(sys, b, q));
    CHECK(test::d(rep.norm) == doctest::Approx(test::d(rep.norm_from_components)).epsilon(1e-12));
  }
}

TEST_CASE("parseval") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 6; ++trial) {
    const auto sys = FiniteSystem::grid(6, 9);
    const auto b = MeasSet::random(sys, 0.4, rng());
    CHECK(test::d(fourier_mass(sys, b)) == doctest::Approx(b.measure().get_d()).epsilon(1e-14));
  }
}

TEST_CASE("mean ergodic deviation") {
  const auto sys = FiniteSystem::rotation(101);
  const auto zero = PolyVec::from_monomial({{Int(0)}});
  CHECK(mean_ergodic_deviation(sys, MeasSet::full(sys), zero, Int(1), 10).squared == 0);
  const auto b = MeasSet::random(sys, 1.0 / 3, 9);
  const auto lin = PolyVec::from_monomial({{Int(0), Int(1)}});
  CHECK(mean_ergodic_deviation(sys, b, lin, Int(1), 101).squared == 0);
  const auto d = mean_ergodic_deviation(sys, b, zero, Int(1), 5);
  const Rat mu = b.measure();
  CHECK(d.squared == mu - mu * mu);
}

TEST_CASE("recurrence search matches naive intersections") {
  const auto sys5 = FiniteSystem::rotation(5);
  const auto scan5 = recurrence_search(sys5, set_of(sys5, {0}), PolyVec::from_monomial({{Int(0), Int(1)}}), Int(1), 1, 15);
  for (const auto& row : scan5.rows) CHECK((row.measure > 0) == (row.n % 5 == 0));
  const auto sys = FiniteSystem::grid(7, 9);
  const auto b = MeasSet::random(sys, 0.35, 4);
  const auto p = PolyVec::from_monomial({{Int(0), Int(1), Int(1)}, {Int(2), Int(0), Int(0), Int(1)}});
  const auto scan = recurrence_search(sys, b, p, Int(2), -10, 10);
  for (const auto& row : scan.rows) {
    std::vector<Int> v = p.eval(row.n);
    for (auto& x : v) x *= 2;
    Rat want(static_cast<long>(naive_intersection(sys, b, sys.image(v))), static_cast<long>(sys.size()));
    want.canonicalize();
    CHECK(row.measure == want);
  }
  const auto full = recurrence_search(sys, MeasSet::full(sys), p, Int(1), 0, 5);
  for (const auto& row : full.rows) CHECK(row.measure == 1);
}

TEST_CASE("uniform recurrence for a linear family") {
  const auto sys = FiniteSystem::rotation(101);
  const auto b = MeasSet::random(sys, 0.3, 2);
  SarkozyOptions opt;
  opt.qbound.hua_constant = 0.01;
  const auto rep = uniform_sarkozy_experiment(sys, b, {{PolyVec::from_monomial({{Int(0), Int(1)}}), Int(1)}}, 0.5, opt);
  CHECK(rep.k == 1);
  CHECK(rep.success);
  CHECK(rep.within_bound);
  CHECK_THROWS_AS(uniform_sarkozy_experiment(sys, b, {{PolyVec::from_monomial({{Int(0), Int(6)}}), Int(1)}}, 0.5, opt),
                  VerificationError);
}

TEST_CASE("linear family obstruction") {
  const auto sys = FiniteSystem::rotation(12);
  const auto rep = linear_family_obstruction(sys, set_of(sys, {0, 1, 2, 3}), Int(12), 4);
  CHECK(rep.all_defeated);
  REQUIRE(rep.witnesses.size() == 4);
  for (const auto& w : rep.witnesses) {
    REQUIRE(w.a0);
    const std::size_t shift = (w.k * *w.a0) % 12;
    CHECK(naive_intersection(sys, set_of(sys, {0, 1, 2, 3}), shift) == 0);
  }
}

TEST_CASE("bogolyubov iteration") {
  const auto sys = FiniteSystem::grid(8, 8);
  BogOptions opt;
  opt.qbound.hua_constant = 0.01;
  const auto full = bogolyubov_iterate(sys, MeasSet::full(sys), {Int(0), Int(0), Int(1)}, 0.1, opt);
  CHECK(full.k == 1);
  CHECK(full.verified);
  std::vector<bool> bits(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x) {
    const auto c = sys.coords(x);
    bits[x] = c[0] % 4 == 0 && c[1] % 2 == 0;
  }
  const auto rep = bogolyubov_iterate(sys, MeasSet(sys, bits), {Int(0), Int(0), Int(1)}, 0.1, opt);
  CHECK(rep.verified);
  CHECK(rep.k % 4 == 0);
  CHECK(rep.stages.size() - 1 <= rep.stage_bound);
}
