#include "qrec/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

extern "C" {
#include <quadmath.h>
}

#include "qrec/errors.hpp"
#include "qrec/parallel.hpp"

namespace qrec {

namespace {

constexpr std::size_t kSpectralCap = std::size_t{1} << 22;

Rat ratio(std::size_t num, std::size_t den) {
  Rat r(Int(static_cast<unsigned long>(num)), Int(static_cast<unsigned long>(den)));
  r.canonicalize();
  return r;
}

Real int_to_real(const Int& x) {
  if (x.fits_slong_p()) return static_cast<Real>(x.get_si());
  return strtoflt128(x.get_str().c_str(), nullptr);
}

Real rat_to_real(const Rat& x) { return int_to_real(x.get_num()) / int_to_real(x.get_den()); }

std::uint64_t mod_u64(const Int& x, std::uint64_t m) {
  Int r;
  mpz_fdiv_r_ui(r.get_mpz_t(), x.get_mpz_t(), m);
  return r.get_ui();
}

struct Part {
  std::vector<std::size_t> elements;
  std::size_t hits = 0;
};

// Cosets of the subgroup h meeting `ambient`, ordered by least element.
// Callers pass an ambient set that is a union of such cosets.
std::vector<Part> split(const FiniteSystem& sys, const std::vector<std::size_t>& ambient,
                        const std::vector<std::size_t>& h, const MeasSet& b) {
  std::vector<std::int64_t> label(sys.size(), -1);
  std::vector<Part> parts;
  for (std::size_t x : ambient) {
    if (label[x] >= 0) continue;
    Part p;
    p.elements.reserve(h.size());
    for (std::size_t g : h) {
      const std::size_t y = sys.add(x, g);
      label[y] = static_cast<std::int64_t>(parts.size());
      p.elements.push_back(y);
      if (b.contains(y)) ++p.hits;
    }
    std::sort(p.elements.begin(), p.elements.end());
    parts.push_back(std::move(p));
  }
  return parts;
}

std::size_t hits_in(const std::vector<std::size_t>& ambient, const MeasSet& b) {
  std::size_t c = 0;
  for (std::size_t x : ambient)
    if (b.contains(x)) ++c;
  return c;
}

std::vector<std::size_t> all_elements(const FiniteSystem& sys) {
  std::vector<std::size_t> v(sys.size());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

struct Densest {
  std::size_t index = 0;
  Rat density;
};

Densest densest(const std::vector<Part>& parts) {
  Densest d{0, ratio(parts[0].hits, parts[0].elements.size())};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    Rat v = ratio(parts[i].hits, parts[i].elements.size());
    if (v > d.density) d = {i, v};
  }
  return d;
}

EquidistReport equidist_within(const FiniteSystem& sys, const MeasSet& b, const std::vector<std::size_t>& ambient,
                               const Int& k, const Int& q, const Rat& delta) {
  if (q < 1) throw std::invalid_argument("equidist_check: q must be positive");
  if (delta < 0) throw std::invalid_argument("equidist_check: delta must be nonnegative");
  EquidistReport rep;
  rep.density = ratio(hits_in(ambient, b), ambient.size());
  if (rep.density == 0) throw std::invalid_argument("equidist_check: B has measure zero on the component");
  const auto parts = split(sys, ambient, sys.subgroup(k * q), b);
  const Densest d = densest(parts);
  rep.worst_ratio = d.density / rep.density;
  rep.witness = parts[d.index].elements.front();
  rep.equidistributed = rep.worst_ratio <= 1 + delta;
  return rep;
}

// Element-wise counts |B cap (B - s)| for the requested shifts.
std::size_t intersection(const FiniteSystem& sys, const std::vector<std::size_t>& elems, const MeasSet& b,
                         std::size_t s) {
  std::size_t c = 0;
  for (std::size_t x : elems)
    if (b.contains(sys.add(x, s))) ++c;
  return c;
}

class ShiftCache {
 public:
  ShiftCache(const FiniteSystem& sys, const MeasSet& b) : sys_(sys), b_(b), elems_(b.elements()), v_(sys.size(), -1) {}
  std::size_t operator()(std::size_t s) {
    if (v_[s] < 0) v_[s] = static_cast<std::int64_t>(intersection(sys_, elems_, b_, s));
    return static_cast<std::size_t>(v_[s]);
  }

 private:
  const FiniteSystem& sys_;
  const MeasSet& b_;
  std::vector<std::size_t> elems_;
  std::vector<std::int64_t> v_;
};

std::vector<Int> shifted_image(const PolyVec& p, const Int& k, const Int& n) {
  auto v = p.eval(n);
  for (auto& x : v) x *= k;
  return v;
}

// Separable DFT over the axes of G restricted to chosen frequency sets.
std::vector<Complex> restricted_dft(const FiniteSystem& sys, const MeasSet& b,
                                    const std::vector<std::vector<std::uint64_t>>& freqs) {
  const auto& m = sys.moduli();
  std::vector<std::size_t> dims(m.begin(), m.end());
  std::vector<Complex> data(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x)
    if (b.contains(x)) data[x].re = 1;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    const std::uint64_t mod = m[axis];
    std::vector<Complex> roots(mod);
    for (std::uint64_t j = 0; j < mod; ++j) roots[j] = unit_root(static_cast<long long>(mod - j), static_cast<long long>(mod));
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= dims[i];
    for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i];
    const auto& f = freqs[axis];
    std::vector<Complex> out(outer * f.size() * inner);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t fi = 0; fi < f.size(); ++fi)
        for (std::size_t x = 0; x < mod; ++x) {
          const Complex w = roots[static_cast<std::size_t>((static_cast<unsigned __int128>(f[fi]) * x) % mod)];
          const Complex* src = &data[(o * mod + x) * inner];
          Complex* dst = &out[(o * f.size() + fi) * inner];
          for (std::size_t i = 0; i < inner; ++i) {
            dst[i].re += src[i].re * w.re - src[i].im * w.im;
            dst[i].im += src[i].re * w.im + src[i].im * w.re;
          }
        }
    data.swap(out);
    dims[axis] = f.size();
  }
  const Real scale = static_cast<Real>(sys.size());
  for (auto& c : data) {
    c.re /= scale;
    c.im /= scale;
  }
  return data;
}

}  // namespace

FiniteSystem::FiniteSystem(std::vector<std::uint64_t> moduli, std::vector<std::vector<std::int64_t>> action,
                           std::size_t cap)
    : moduli_(std::move(moduli)), size_(1), exponent_(1) {
  if (moduli_.empty()) throw std::invalid_argument("FiniteSystem: needs at least one modulus");
  if (action.empty()) throw std::invalid_argument("FiniteSystem: needs at least one generator");
  for (std::uint64_t m : moduli_) {
    if (m == 0) throw std::invalid_argument("FiniteSystem: moduli must be positive");
    if (size_ > cap / m) throw CapExceeded("FiniteSystem: group order exceeds cap " + std::to_string(cap));
    size_ *= m;
    exponent_ = std::lcm(exponent_, m);
  }
  stride_.assign(moduli_.size(), 1);
  for (std::size_t i = moduli_.size() - 1; i-- > 0;) stride_[i] = stride_[i + 1] * moduli_[i + 1];
  for (const auto& g : action) {
    if (g.size() != moduli_.size()) throw std::invalid_argument("FiniteSystem: generator image has wrong length");
    std::vector<std::uint64_t> red(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto m = static_cast<std::int64_t>(moduli_[i]);
      red[i] = static_cast<std::uint64_t>(((g[i] % m) + m) % m);
    }
    action_.push_back(std::move(red));
  }
}

FiniteSystem FiniteSystem::rotation(std::uint64_t m) { return FiniteSystem({m}, {{1}}); }

FiniteSystem FiniteSystem::grid(std::uint64_t m1, std::uint64_t m2) { return FiniteSystem({m1, m2}, {{1, 0}, {0, 1}}); }

std::vector<std::uint64_t> FiniteSystem::coords(std::size_t x) const {
  std::vector<std::uint64_t> c(moduli_.size());
  for (std::size_t i = 0; i < moduli_.size(); ++i) c[i] = (x / stride_[i]) % moduli_[i];
  return c;
}

std::size_t FiniteSystem::index(std::span<const std::uint64_t> c) const {
  if (c.size() != moduli_.size()) throw std::invalid_argument("FiniteSystem::index: wrong coordinate count");
  std::size_t x = 0;
  for (std::size_t i = 0; i < c.size(); ++i) x += (c[i] % moduli_[i]) * stride_[i];
  return x;
}

std::size_t FiniteSystem::add(std::size_t x, std::size_t y) const {
  if (moduli_.size() == 1) {
    const std::size_t s = x + y;
    return s >= size_ ? s - size_ : s;
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    std::size_t s = (x / stride_[i]) % moduli_[i] + (y / stride_[i]) % moduli_[i];
    if (s >= moduli_[i]) s -= moduli_[i];
    out += s * stride_[i];
  }
  return out;
}

std::size_t FiniteSystem::negate(std::size_t x) const {
  std::size_t out = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    const std::size_t c = (x / stride_[i]) % moduli_[i];
    out += (c == 0 ? 0 : moduli_[i] - c) * stride_[i];
  }
  return out;
}

std::size_t FiniteSystem::generator_multiple(std::size_t j, const Int& k) const {
  std::size_t out = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    const unsigned __int128 v = static_cast<unsigned __int128>(mod_u64(k, moduli_[i])) * action_[j][i];
    out += static_cast<std::size_t>(v % moduli_[i]) * stride_[i];
  }
  return out;
}

std::size_t FiniteSystem::image(std::span<const Int> v) const {
  if (v.size() != action_.size()) throw std::invalid_argument("FiniteSystem::image: vector has wrong length");
  std::size_t out = 0;
  for (std::size_t j = 0; j < v.size(); ++j) out = add(out, generator_multiple(j, v[j]));
  return out;
}

std::vector<std::size_t> FiniteSystem::subgroup(const Int& k) const {
  std::vector<std::size_t> gens;
  for (std::size_t j = 0; j < action_.size(); ++j) {
    const std::size_t g = generator_multiple(j, k);
    if (g != 0) gens.push_back(g);
  }
  std::vector<bool> seen(size_, false);
  std::vector<std::size_t> members{0};
  seen[0] = true;
  for (std::size_t head = 0; head < members.size(); ++head)
    for (std::size_t g : gens) {
      const std::size_t y = add(members[head], g);
      if (!seen[y]) {
        seen[y] = true;
        members.push_back(y);
      }
    }
  std::sort(members.begin(), members.end());
  return members;
}

MeasSet::MeasSet(const FiniteSystem& sys, std::vector<bool> members) : bits_(std::move(members)), count_(0) {
  if (bits_.size() != sys.size()) throw std::invalid_argument("MeasSet: bitmap size does not match the group");
  count_ = static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

MeasSet MeasSet::from_indices(const FiniteSystem& sys, const std::vector<std::size_t>& members) {
  std::vector<bool> bits(sys.size(), false);
  for (std::size_t x : members) {
    if (x >= sys.size()) throw std::invalid_argument("MeasSet: element outside the group");
    bits[x] = true;
  }
  return MeasSet(sys, std::move(bits));
}

MeasSet MeasSet::full(const FiniteSystem& sys) { return MeasSet(sys, std::vector<bool>(sys.size(), true)); }

MeasSet MeasSet::random(const FiniteSystem& sys, double density, std::uint64_t seed) {
  if (!(density >= 0 && density <= 1)) throw std::invalid_argument("MeasSet::random: density must lie in [0,1]");
  std::mt19937_64 rng(seed);
  std::vector<bool> bits(sys.size());
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(density, 53));
  for (std::size_t x = 0; x < sys.size(); ++x) bits[x] = (rng() >> 11) < threshold;
  return MeasSet(sys, std::move(bits));
}

std::vector<std::size_t> MeasSet::elements() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (std::size_t x = 0; x < bits_.size(); ++x)
    if (bits_[x]) out.push_back(x);
  return out;
}

Partition ergodic_components(const FiniteSystem& sys, const Int& k) {
  if (k < 1) throw std::invalid_argument("ergodic_components: k must be positive");
  const MeasSet none(sys, std::vector<bool>(sys.size(), false));
  auto parts = split(sys, all_elements(sys), sys.subgroup(k), none);
  Partition out;
  for (auto& p : parts) {
    out.representatives.push_back(p.elements.front());
    out.parts.push_back(std::move(p.elements));
  }
  return out;
}

EquidistReport equidist_check(const FiniteSystem& sys, const MeasSet& b, const Int& q, const Rat& delta) {
  return equidist_within(sys, b, all_elements(sys), Int(1), q, delta);
}

EquidistReport equidist_check_on(const FiniteSystem& sys, const MeasSet& b, const Int& k, std::size_t rep,
                                 const Int& q, const Rat& delta) {
  if (rep >= sys.size()) throw std::invalid_argument("equidist_check_on: representative outside the group");
  std::vector<std::size_t> ambient;
  for (std::size_t h : sys.subgroup(k)) ambient.push_back(sys.add(rep, h));
  std::sort(ambient.begin(), ambient.end());
  return equidist_within(sys, b, ambient, k, q, delta);
}

IncrementTrace measure_increment(const FiniteSystem& sys, const MeasSet& b, const Int& q, const Rat& delta) {
  if (q < 1) throw std::invalid_argument("measure_increment: q must be positive");
  if (delta <= 0) throw std::invalid_argument("measure_increment: delta must be positive");
  if (b.count() == 0) throw std::invalid_argument("measure_increment: B has measure zero");
  IncrementTrace t;
  t.initial_density = b.measure();
  std::vector<std::size_t> ambient = all_elements(sys);
  Rat nu = t.initial_density;
  Int k = 1;
  std::size_t rep = 0;
  for (;;) {
    // every component density is at most 1, so the test passes trivially
    if ((1 + delta) * nu > 1) break;
    auto parts = split(sys, ambient, sys.subgroup(k * q), b);
    const Densest d = densest(parts);
    if (d.density <= (1 + delta) * nu) break;
    k *= q;
    nu = d.density;
    ambient = std::move(parts[d.index].elements);
    rep = ambient.front();
    t.steps.push_back({q, k, rep, nu});
  }
  t.k = k;
  t.component = rep;
  t.final_density = nu;
  return t;
}

bool increment_bound_holds(const IncrementTrace& trace, const Rat& delta) {
  Rat growth = 1;
  Rat prev = trace.initial_density;
  for (const auto& s : trace.steps) {
    if (s.density < (1 + delta) * prev) return false;
    prev = s.density;
    growth *= 1 + delta;
  }
  return growth * trace.initial_density <= 1;
}

SpectralReport spectral_projection_norm(const FiniteSystem& sys, const MeasSet& b, const Int& q) {
  if (q < 1) throw std::invalid_argument("spectral_projection_norm: q must be positive");
  if (!sys.ergodic()) throw std::invalid_argument("spectral_projection_norm: system is not ergodic");
  std::vector<std::vector<std::uint64_t>> freqs;
  std::size_t total = 1;
  for (std::uint64_t m : sys.moduli()) {
    const std::uint64_t g = std::gcd(mod_u64(q, m), m);  // gcd(q, m), with gcd(0, m) = m
    const std::uint64_t step = m / g;
    std::vector<std::uint64_t> f;
    for (std::uint64_t x = 0; x < m; x += step) f.push_back(x);
    total *= f.size();
    freqs.push_back(std::move(f));
  }
  if (total > kSpectralCap) throw CapExceeded("spectral_projection_norm: too many characters");
  const auto coeffs = restricted_dft(sys, b, freqs);
  SpectralReport rep;
  Real sq = 0;
  for (std::size_t idx = 1; idx < coeffs.size(); ++idx) {
    CharCoefficient c;
    std::size_t rest = idx;
    c.frequency.assign(freqs.size(), 0);
    for (std::size_t i = freqs.size(); i-- > 0;) {
      c.frequency[i] = freqs[i][rest % freqs[i].size()];
      rest /= freqs[i].size();
    }
    c.value = coeffs[idx];
    sq += c.value.re * c.value.re + c.value.im * c.value.im;
    rep.coefficients.push_back(std::move(c));
  }
  rep.norm = real_sqrt(sq);
  const auto parts = split(sys, all_elements(sys), sys.subgroup(q), b);
  Rat proj = 0;
  for (const auto& p : parts) proj += ratio(p.hits * p.hits, p.elements.size() * sys.size());
  rep.projection_sq = proj;
  const Rat mu = b.measure();
  rep.norm_from_components = real_sqrt(rat_to_real(proj - mu * mu));
  return rep;
}

Real fourier_mass(const FiniteSystem& sys, const MeasSet& b) {
  if (sys.size() > kSpectralCap) throw CapExceeded("fourier_mass: group too large");
  std::vector<std::vector<std::uint64_t>> freqs;
  for (std::uint64_t m : sys.moduli()) {
    std::vector<std::uint64_t> f(m);
    std::iota(f.begin(), f.end(), std::uint64_t{0});
    freqs.push_back(std::move(f));
  }
  Real sq = 0;
  for (const auto& c : restricted_dft(sys, b, freqs)) sq += c.re * c.re + c.im * c.im;
  return sq;
}

Deviation mean_ergodic_deviation(const FiniteSystem& sys, const MeasSet& b, const PolyVec& p, const Int& k,
                                 std::uint64_t n_terms) {
  if (n_terms == 0) throw std::invalid_argument("mean_ergodic_deviation: N must be positive");
  if (p.dim() != sys.rank()) throw std::invalid_argument("mean_ergodic_deviation: polynomial dimension mismatch");
  std::vector<std::uint64_t> hist(sys.size(), 0);
  for (std::uint64_t n = 1; n <= n_terms; ++n) ++hist[sys.image(shifted_image(p, k, Int(static_cast<unsigned long>(n))))];
  // N * A(x) = sum_s hist(s) 1_B(x + s)
  std::vector<std::uint64_t> na(sys.size(), 0);
  const auto elems = b.elements();
  for (std::size_t s = 0; s < sys.size(); ++s) {
    if (hist[s] == 0) continue;
    const std::size_t neg = sys.negate(s);
    for (std::size_t y : elems) na[sys.add(y, neg)] += hist[s];
  }
  const Int g(static_cast<unsigned long>(sys.size())), n(static_cast<unsigned long>(n_terms));
  const Int bn = Int(static_cast<unsigned long>(b.count())) * n;
  Int acc = 0;
  for (std::size_t x = 0; x < sys.size(); ++x) {
    const Int d = bn - g * Int(static_cast<unsigned long>(na[x]));
    acc += d * d;
  }
  Deviation dev;
  dev.squared = Rat(acc, g * g * g * n * n);
  dev.squared.canonicalize();
  dev.value = real_sqrt(rat_to_real(dev.squared));
  return dev;
}

RecurrenceScan recurrence_search(const FiniteSystem& sys, const MeasSet& b, const PolyVec& p, const Int& k, long lo,
                                 long hi, const std::optional<Real>& threshold) {
  if (lo > hi) throw std::invalid_argument("recurrence_search: empty range");
  if (p.dim() != sys.rank()) throw std::invalid_argument("recurrence_search: polynomial dimension mismatch");
  const std::size_t count = static_cast<std::size_t>(hi - lo) + 1;
  std::vector<std::size_t> shift(count);
  for (std::size_t i = 0; i < count; ++i) shift[i] = sys.image(shifted_image(p, k, Int(lo + static_cast<long>(i))));
  std::vector<std::size_t> distinct = shift;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const auto elems = b.elements();
  std::vector<std::size_t> inter(distinct.size());
  parallel_for(distinct.size(), [&](std::size_t i) { inter[i] = intersection(sys, elems, b, distinct[i]); });
  RecurrenceScan scan;
  scan.best = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), shift[i]) - distinct.begin());
    RecurrenceRow row{Int(lo + static_cast<long>(i)), ratio(inter[pos], sys.size()), false};
    if (threshold) row.above = rat_to_real(row.measure) > *threshold;
    if (row.above && !scan.first_above) scan.first_above = row.n;
    if (row.measure > 0 && !scan.first_positive) scan.first_positive = row.n;
    if (row.measure > scan.best) scan.best = row.measure;
    scan.rows.push_back(std::move(row));
  }
  return scan;
}

SarkozyReport uniform_sarkozy_experiment(const FiniteSystem& sys, const MeasSet& b,
                                         const std::vector<FamilyMember>& family, double eps,
                                         const SarkozyOptions& opt) {
  if (family.empty()) throw std::invalid_argument("uniform_sarkozy_experiment: empty family");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("uniform_sarkozy_experiment: eps must lie in (0,1)");
  SarkozyReport rep;
  rep.complexity_bound = 1;
  for (const auto& m : family) {
    if (m.poly.dim() != sys.rank()) throw std::invalid_argument("uniform_sarkozy_experiment: dimension mismatch");
    if (!m.poly.has_integer_monomial_coeffs())
      throw std::invalid_argument("uniform_sarkozy_experiment: family members need integer coefficients");
    const ExtInt c = mult_complexity(m.poly);
    if (c.is_infinite() || !hyperplane_fleeing(m.poly))
      throw VerificationError("uniform_sarkozy_experiment: family member is not hyperplane-fleeing");
    if (c.value() > m.declared_complexity)
      throw VerificationError("uniform_sarkozy_experiment: complexity " + c.str() + " exceeds declared " +
                              m.declared_complexity.get_str());
    rep.degree = std::max(rep.degree, static_cast<unsigned>(std::max(m.poly.degree(), 1)));
    rep.complexity_bound = std::max(rep.complexity_bound, m.declared_complexity);
  }
  const Rat e = exact_rat(eps);
  rep.delta = opt.delta.value_or(e * e * e * e / 12);
  rep.q = qbound(rep.degree, static_cast<unsigned>(sys.rank()), rep.complexity_bound, eps * eps / 2, opt.qbound);
  rep.trace = measure_increment(sys, b, rep.q.q, rep.delta);
  rep.k = rep.trace.k;
  rep.within_bound = increment_bound_holds(rep.trace, rep.delta);
  rep.success = true;
  const long period = static_cast<long>(sys.exponent());
  for (const auto& m : family) {
    const auto scan = recurrence_search(sys, b, m.poly, rep.k, 1, period);
    MemberOutcome out{mult_complexity(m.poly).value(), scan.first_positive, scan.best};
    if (!out.n) rep.success = false;
    rep.members.push_back(std::move(out));
  }
  return rep;
}

ObstructionReport linear_family_obstruction(const FiniteSystem& sys, const MeasSet& b, const Int& a1, unsigned k0) {
  if (sys.rank() != 1) throw std::invalid_argument("linear_family_obstruction: needs a Z action");
  ShiftCache cache(sys, b);
  ObstructionReport rep;
  rep.all_defeated = true;
  const std::uint64_t period = sys.exponent();
  for (unsigned k = 1; k <= k0; ++k) {
    ObstructionWitness w{k, std::nullopt};
    for (std::uint64_t a0 = 0; a0 < sys.size() && !w.a0; ++a0) {
      bool disjoint = true;
      for (std::uint64_t n = 1; n <= period && disjoint; ++n) {
        const Int v = Int(k) * (a1 * Int(static_cast<unsigned long>(n)) + Int(static_cast<unsigned long>(a0)));
        if (cache(sys.image(std::span<const Int>(&v, 1))) > 0) disjoint = false;
      }
      if (disjoint) w.a0 = a0;
    }
    if (!w.a0) rep.all_defeated = false;
    rep.witnesses.push_back(w);
  }
  return rep;
}

unsigned increment_step_bound(double eps, const Rat& delta) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("increment_step_bound: eps must lie in (0,1)");
  if (delta <= 0) throw std::invalid_argument("increment_step_bound: delta must be positive");
  const Real v = logq(Real(1) / static_cast<Real>(eps)) / log1pq(rat_to_real(delta));
  return static_cast<unsigned>(ceilq(v));
}

BogReport bogolyubov_iterate(const FiniteSystem& sys, const MeasSet& b, const std::vector<Int>& r_coeffs,
                             double eps, const BogOptions& opt) {
  if (sys.rank() != 2) throw std::invalid_argument("bogolyubov_iterate: needs a Z^2 action");
  std::vector<Int> r = r_coeffs;
  while (!r.empty() && r.back() == 0) r.pop_back();
  if (r.size() < 3) throw std::invalid_argument("bogolyubov_iterate: R must have degree at least 2");
  if (r[0] != 0) throw std::invalid_argument("bogolyubov_iterate: R(0) must vanish");
  if (b.count() == 0) throw std::invalid_argument("bogolyubov_iterate: B has measure zero");
  const auto degree = static_cast<unsigned>(r.size() - 1);
  const Int lead = abs(r.back());
  BogReport rep;
  const Rat e = exact_rat(eps);
  rep.delta = opt.delta.value_or(e * e * e * e / 12);
  rep.stage_bound = increment_step_bound(eps, rep.delta);

  std::vector<std::size_t> ambient = all_elements(sys);
  Rat nu = b.measure();
  Int k = 1;
  unsigned boosts = 0;
  for (;;) {
    BogStage st;
    Int kd;
    mpz_pow_ui(kd.get_mpz_t(), k.get_mpz_t(), degree);
    st.complexity = lead * kd;
    st.density = nu;
    st.component = ambient.front();
    if ((1 + rep.delta) * nu > 1) {
      st.equidistributed = true;
      rep.stages.push_back(std::move(st));
      break;
    }
    st.q = qbound(degree, 2, st.complexity, eps * eps / 2, opt.qbound);
    auto parts = split(sys, ambient, sys.subgroup(k * st.q->q), b);
    const Densest d = densest(parts);
    st.equidistributed = d.density <= (1 + rep.delta) * nu;
    const Int q = st.q->q;
    rep.stages.push_back(std::move(st));
    if (rep.stages.back().equidistributed) break;
    if (++boosts > rep.stage_bound)
      throw VerificationError("bogolyubov_iterate: " + std::to_string(boosts) + " increments exceed the bound " +
                              std::to_string(rep.stage_bound));
    k *= q;
    nu = d.density;
    ambient = std::move(parts[d.index].elements);
  }
  rep.k = k;

  // every target c mod the exponent needs a return along P_{k,c}
  ShiftCache cache(sys, b);
  const std::uint64_t period = sys.exponent();
  const IntValuedPoly rpoly = IntValuedPoly::from_monomial(r);
  rep.targets = period;
  for (std::uint64_t c = 0; c < period; ++c) {
    bool found = false;
    for (std::uint64_t n = 1; n <= period && !found; ++n) {
      const Int kn = k * Int(static_cast<unsigned long>(n));
      const Int v[2] = {k * Int(static_cast<unsigned long>(c)) - rpoly(kn), kn};
      if (cache(sys.image(std::span<const Int>(v, 2))) > 0) found = true;
    }
    if (!found) {
      ++rep.failures;
      if (!rep.first_failure) rep.first_failure = c;
    }
  }
  rep.verified = rep.failures == 0;
  return rep;
}

Rat exact_rat(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("exact_rat: value is not finite");
  Rat r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

}  // namespace qrec
