#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "experiments.hpp"
#include "qrec/diffscan.hpp"
#include "qrec/expsum.hpp"
#include "qrec/orbits.hpp"
#include "qrec/poly.hpp"
#include "qrec/systems.hpp"

namespace qrec::cli {

namespace {

class Cases {
 public:
  template <class F>
  void check(const std::string& name, F&& body) {
    SelftestCase c{name, false, ""};
    try {
      c.ok = body(c.detail);
    } catch (const std::exception& e) {
      c.detail = std::string("exception: ") + e.what();
    }
    cases_.push_back(std::move(c));
  }
  std::vector<SelftestCase> take() { return std::move(cases_); }

 private:
  std::vector<SelftestCase> cases_;
};

bool near(Real a, Real b, Real tol) { return real_abs({a - b, 0}) <= tol; }

// Determinant of every k x k minor, gcd over all of them.
Int minor_gcd(const IntMat& a, std::size_t k) {
  Int g = 0;
  std::vector<std::size_t> rows(k), cols(k);
  std::function<void(std::size_t, std::size_t)> pick_cols;
  std::function<void(std::size_t, std::size_t)> pick_rows = [&](std::size_t depth, std::size_t start) {
    if (depth == k) {
      pick_cols(0, 0);
      return;
    }
    for (std::size_t i = start; i < a.rows(); ++i) {
      rows[depth] = i;
      pick_rows(depth + 1, i + 1);
    }
  };
  pick_cols = [&](std::size_t depth, std::size_t start) {
    if (depth == k) {
      IntMat m(k, k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = a(rows[i], cols[j]);
      const Int d = determinant(m);
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
      return;
    }
    for (std::size_t j = start; j < a.cols(); ++j) {
      cols[depth] = j;
      pick_cols(depth + 1, j + 1);
    }
  };
  pick_rows(0, 0);
  return g;
}

}  // namespace

std::vector<SelftestCase> selftest_linalg_poly() {
  Cases t;
  t.check("snf_minor_gcds", [](std::string& d) {
    const IntMat a{{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
    const auto f = invariant_factors(a);
    Int prod = 1;
    for (std::size_t k = 1; k <= 3; ++k) {
      prod *= f[k - 1];
      if (abs(prod) != minor_gcd(a, k)) {
        d = "k = " + std::to_string(k);
        return false;
      }
    }
    return f[0] == 2 && f[1] == 6 && f[2] == 12;
  });
  t.check("lattice_index_coset_count", [](std::string& d) {
    const Lattice l(IntMat{{2, 1}, {0, 3}});
    std::set<std::pair<long, long>> seen;
    for (long x = 0; x < 12; ++x)
      for (long y = 0; y < 12; ++y) {
        // reduce (x, y) modulo the basis rows (2,1), (0,3)
        const long a = x / 2, rx = x - 2 * a;
        long ry = (y - a) % 3;
        if (ry < 0) ry += 3;
        seen.insert({rx, ry});
      }
    const auto idx = lattice_index(l);
    d = "index " + idx.str();
    return !idx.is_infinite() && idx.value() == 6 && seen.size() == 6;
  });
  t.check("complexity_examples", [](std::string& d) {
    const auto q1 = mult_complexity(PolyVec::from_monomial({{0, 0, 2}, {0, 0, 0, 3}}));
    const auto q2 = mult_complexity(PolyVec::from_monomial({{0, 1, 1}, {0, 2, 2}}));
    const auto q3 = mult_complexity(PolyVec::from_monomial({{0, 2, 4}}));
    d = q1.str() + " " + q2.str() + " " + q3.str();
    return q1.str() == "6" && q2.is_infinite() && q3.str() == "2";
  });
  t.check("integer_valued_rescale", [](std::string& d) {
    const PolyVec p({IntValuedPoly(std::vector<Int>{0, 0, 1})});  // n(n-1)/2
    const auto rs = rescale_to_integer_coeffs(p);
    for (long n = -5; n <= 5; ++n)
      if (rs.poly.eval(Int(n)) != p.eval(rs.scale * n)) {
        d = "mismatch at n = " + std::to_string(n);
        return false;
      }
    return rs.poly.has_integer_monomial_coeffs();
  });
  return t.take();
}

std::vector<SelftestCase> selftest_expsum() {
  Cases t;
  t.check("quadratic_gauss_sum", [](std::string& d) {
    const auto r = char_sum(Character(Int(5), {Int(1)}), PolyVec::from_monomial({{0, 0, 1}}));
    d = real_str(r.magnitude, 12);
    return near(r.magnitude, real_sqrt(Real(1) / 5), Real(1e-25));
  });
  t.check("linear_sum_vanishes", [](std::string& d) {
    const auto r = char_sum(Character(Int(4), {Int(1)}), PolyVec::from_monomial({{0, 2}}));
    d = real_str(r.magnitude, 12);
    return near(r.magnitude, 0, Real(1e-25));
  });
  t.check("gauss_sums_odd_primes", [](std::string& d) {
    for (long p : {3, 7, 11, 13, 29, 47}) {
      const Real m = poly_sum_magnitude({Int(0), Int(0), Int(1)}, static_cast<std::uint64_t>(p));
      if (!near(m, real_sqrt(Real(1) / p), Real(1e-25))) {
        d = "p = " + std::to_string(p);
        return false;
      }
    }
    return true;
  });
  t.check("direct_summation_oracle", [](std::string& d) {
    const std::vector<Int> c{Int(3), Int(5), Int(1), Int(2)};
    const std::uint64_t q = 45;
    double re = 0, im = 0;
    for (std::uint64_t n = 1; n <= q; ++n) {
      const auto v = (3 + 5 * n + n * n + 2 * n * n * n) % q;
      re += std::cos(2 * M_PI * static_cast<double>(v) / q);
      im += std::sin(2 * M_PI * static_cast<double>(v) / q);
    }
    const double want = std::hypot(re, im) / q;
    const double got = to_double(poly_sum_magnitude(c, q));
    d = std::to_string(got);
    return std::abs(got - want) < 1e-12;
  });
  t.check("qbound_lcm", [](std::string& d) {
    d = lcm_upto(10).get_str();
    return lcm_upto(10) == 2520;
  });
  return t.take();
}

std::vector<SelftestCase> selftest_orbits() {
  Cases t;
  t.check("unipotent_power_matches_iteration", [](std::string& d) {
    const UnipotentMat u(IntMat{{1, 2, 3}, {0, 1, 4}, {0, 0, 1}});
    const auto pm = unipotent_power_poly(u);
    IntMat acc = IntMat::identity(3);
    for (long n = 0; n <= 6; ++n) {
      if (!(pm.eval(Int(n)) == acc)) {
        d = "n = " + std::to_string(n);
        return false;
      }
      acc = acc * u.matrix();
    }
    return unipotent_power(u, Int(-2)) * matrix_power(u.matrix(), 2) == IntMat::identity(3);
  });
  t.check("companion_identity", [](std::string& d) {
    for (std::size_t dd = 2; dd <= 4; ++dd) {
      std::vector<std::vector<Int>> samples;
      for (long s = 0; s < 3; ++s) {
        std::vector<Int> a(dd);
        for (std::size_t i = 0; i + 1 < dd; ++i) a[i] = Int(s * 3 + static_cast<long>(i) - 2);
        samples.push_back(a);
      }
      gamma0_identity(dd, samples);
    }
    d = "d = 2..4";
    return true;
  });
  t.check("companion_certificate_d2", [](std::string& d) {
    const auto c = certify_companion_bounds(2, 4);
    d = "N = " + std::to_string(c.span.certificate.word_length) + ", Q = " + c.span.certificate.index.str();
    return c.span.certificate.word_length == 3 && c.span.certificate.index.str() == "2";
  });
  t.check("so21_setup", [](std::string& d) {
    const auto s = so21_setup();
    d = "resolved " + std::to_string(s.identity_resolved);
    return s.identity_resolved && s.v0 == IntMat{{4, -8}, {0, -4}};
  });
  t.check("orbit_poly_values", [](std::string& d) {
    const auto spec = OrbitSpec::linear({IntMat{{1, 1}, {0, 1}}}, {Int(0), Int(1)});
    const auto op = orbit_poly(spec);
    for (long n = -3; n <= 3; ++n)
      if (op.poly.eval(Int(n)) != apply_word(spec, orbit_poly_exponents(spec, op.scale, Int(n)))) {
        d = "n = " + std::to_string(n);
        return false;
      }
    return true;
  });
  return t.take();
}

std::vector<SelftestCase> selftest_systems() {
  Cases t;
  t.check("increment_example", [](std::string& d) {
    const auto sys = FiniteSystem::rotation(12);
    const auto b = MeasSet::from_indices(sys, {0, 2, 4, 6});
    const auto tr = measure_increment(sys, b, Int(2), Rat(1, 2));
    d = "k = " + tr.k.get_str() + ", density " + tr.final_density.get_str();
    return tr.k == 2 && tr.final_density == Rat(2, 3) && increment_bound_holds(tr, Rat(1, 2));
  });
  t.check("spectral_norm_two_routes", [](std::string& d) {
    const auto sys = FiniteSystem::rotation(12);
    std::vector<std::size_t> evens;
    for (std::size_t x = 0; x < 12; x += 2) evens.push_back(x);
    const auto rep = spectral_projection_norm(sys, MeasSet::from_indices(sys, evens), Int(2));
    d = real_str(rep.norm, 12) + " / " + real_str(rep.norm_from_components, 12);
    return near(rep.norm, Real(0.5), Real(1e-25)) && near(rep.norm_from_components, Real(0.5), Real(1e-25));
  });
  t.check("parseval", [](std::string& d) {
    const auto sys = FiniteSystem::grid(6, 10);
    const auto b = MeasSet::random(sys, 0.4, 3);
    const Real m = fourier_mass(sys, b);
    d = real_str(m, 12);
    return near(m, static_cast<Real>(b.measure().get_d()), Real(1e-14));
  });
  t.check("linear_family_obstruction", [](std::string& d) {
    const auto sys = FiniteSystem::rotation(12);
    const auto b = MeasSet::from_indices(sys, {0});
    const auto rep = linear_family_obstruction(sys, b, Int(12), 4);
    d = std::to_string(rep.witnesses.size()) + " witnesses";
    return rep.all_defeated;
  });
  t.check("intersection_oracle", [](std::string& d) {
    const auto sys = FiniteSystem::rotation(30);
    const auto b = MeasSet::random(sys, 0.5, 11);
    const auto p = PolyVec::from_monomial({{0, 0, 1}});
    const auto scan = recurrence_search(sys, b, p, Int(1), 1, 10);
    for (const auto& row : scan.rows) {
      const long s = Int(row.n * row.n).get_si() % 30;
      std::size_t count = 0;
      for (std::size_t x = 0; x < 30; ++x) count += b.contains(x) && b.contains((x + s) % 30);
      Rat want(static_cast<long>(count), 30);
      want.canonicalize();
      if (row.measure != want) {
        d = "n = " + row.n.get_str();
        return false;
      }
    }
    return true;
  });
  return t.take();
}

std::vector<SelftestCase> selftest_diffscan() {
  Cases t;
  t.check("difference_set", [](std::string& d) {
    const auto w = Window::from_points_1d(10, {0, 3, 7});
    const auto ds = diff_set(w);
    d = std::to_string(ds.size()) + " differences";
    return ds == std::vector<std::int64_t>{-7, -4, -3, 0, 3, 4, 7};
  });
  t.check("quadform_image_oracle", [](std::string& d) {
    const auto w = Window::random(1, 60, 0.3, 5);
    const auto ds = diff_set(w);
    for (QuadForm f : {QuadForm::XyMinusZ2, QuadForm::X2PlusY2MinusZ2, QuadForm::X2MinusY2MinusZ2}) {
      std::set<std::int64_t> naive;
      for (auto x : ds)
        for (auto y : ds)
          for (auto z : ds) {
            const auto v = quadform_eval(f, x, y, z);
            if (v >= -100 && v <= 100) naive.insert(v);
          }
      if (quadform_image(ds, f, 100) != std::vector<std::int64_t>(naive.begin(), naive.end())) {
        d = quadform_name(f);
        return false;
      }
    }
    return true;
  });
  t.check("poly_bog_lattice", [](std::string& d) {
    const auto rep = poly_bog_scan(Window::lattice_2d(40, 4, 2), {0, 0, 1}, 80, 10);
    d = rep.smallest_k ? "k = " + std::to_string(*rep.smallest_k) : "no k";
    return rep.smallest_k && *rep.smallest_k == 4;
  });
  t.check("bohr_rational_half", [](std::string& d) {
    const auto b = bohr_set(Rat(1, 2), 0.1, 20);
    const auto pts = b.points_1d();
    d = std::to_string(pts.size()) + " members";
    for (auto x : pts)
      if (x % 2) return false;
    return pts.size() == 10;
  });
  t.check("sl2_embedding", [](std::string& d) {
    const IntMat a = sl2_embed(Int(3), Int(5), Int(2));
    d = "det " + determinant(a).get_str();
    return determinant(a) == 3 * 5 - 4 && sl2_project(a) == std::vector<Int>{3, 5, 2};
  });
  return t.take();
}

}  // namespace qrec::cli
