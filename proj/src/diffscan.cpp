#include "qrec/diffscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "qrec/errors.hpp"
#include "qrec/parallel.hpp"

namespace qrec {

namespace {

constexpr std::int64_t kMaxHalfWidth = std::int64_t{1} << 30;

void check_half_width(std::int64_t l) {
  if (l < 0 || l > kMaxHalfWidth) throw std::invalid_argument("Window: half-width out of range");
}

std::vector<std::int64_t> from_bitmap(const std::vector<bool>& bits, std::int64_t lo) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(lo + static_cast<std::int64_t>(i));
  return out;
}

std::vector<std::int64_t> sorted_unique(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool fits(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

}  // namespace

Window::Window(unsigned dim, std::int64_t half_width) : dim_(dim), l_(half_width) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Window: dimension must be 1 or 2");
  check_half_width(half_width);
  const auto side = static_cast<std::size_t>(2 * half_width + 1);
  bits_.assign(dim == 1 ? side : side * side, false);
}

Window Window::from_points_1d(std::int64_t half_width, const std::vector<std::int64_t>& points) {
  Window w(1, half_width);
  for (auto x : points) w.insert(x);
  return w;
}

Window Window::from_points_2d(std::int64_t half_width, const std::vector<std::pair<std::int64_t, std::int64_t>>& points) {
  Window w(2, half_width);
  for (auto [x, y] : points) w.insert(x, y);
  return w;
}

Window Window::random(unsigned dim, std::int64_t half_width, double density, std::uint64_t seed, std::int64_t lo) {
  if (!(density >= 0 && density <= 1)) throw std::invalid_argument("Window::random: density must lie in [0,1]");
  if (lo < -half_width || lo > half_width) throw std::invalid_argument("Window::random: lower corner outside the box");
  Window w(dim, half_width);
  std::mt19937_64 rng(seed);
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(density, 53));
  for (std::int64_t x = lo; x <= half_width; ++x) {
    if (dim == 1) {
      if ((rng() >> 11) < threshold) w.insert(x);
      continue;
    }
    for (std::int64_t y = lo; y <= half_width; ++y)
      if ((rng() >> 11) < threshold) w.insert(x, y);
  }
  return w;
}

Window Window::lattice_2d(std::int64_t half_width, std::int64_t a, std::int64_t b) {
  if (a <= 0 || b <= 0) throw std::invalid_argument("Window::lattice_2d: steps must be positive");
  Window w(2, half_width);
  for (std::int64_t x = -half_width; x <= half_width; ++x)
    for (std::int64_t y = -half_width; y <= half_width; ++y)
      if (x % a == 0 && y % b == 0) w.insert(x, y);
  return w;
}

std::size_t Window::offset(std::int64_t x) const {
  if (dim_ != 1) throw std::logic_error("Window: not one-dimensional");
  if (x < -l_ || x > l_) throw std::out_of_range("Window: point outside the box");
  return static_cast<std::size_t>(x + l_);
}

std::size_t Window::offset(std::int64_t x, std::int64_t y) const {
  if (dim_ != 2) throw std::logic_error("Window: not two-dimensional");
  if (x < -l_ || x > l_ || y < -l_ || y > l_) throw std::out_of_range("Window: point outside the box");
  return static_cast<std::size_t>(x + l_) * static_cast<std::size_t>(2 * l_ + 1) + static_cast<std::size_t>(y + l_);
}

bool Window::contains(std::int64_t x) const {
  if (x < -l_ || x > l_) return false;
  return bits_[offset(x)];
}

bool Window::contains(std::int64_t x, std::int64_t y) const {
  if (x < -l_ || x > l_ || y < -l_ || y > l_) return false;
  return bits_[offset(x, y)];
}

void Window::insert(std::int64_t x) {
  const std::size_t o = offset(x);
  if (!bits_[o]) ++count_;
  bits_[o] = true;
}

void Window::insert(std::int64_t x, std::int64_t y) {
  const std::size_t o = offset(x, y);
  if (!bits_[o]) ++count_;
  bits_[o] = true;
}

std::vector<std::int64_t> Window::points_1d() const {
  if (dim_ != 1) throw std::logic_error("Window: not one-dimensional");
  return from_bitmap(bits_, -l_);
}

std::vector<std::pair<std::int64_t, std::int64_t>> Window::points_2d() const {
  if (dim_ != 2) throw std::logic_error("Window: not two-dimensional");
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  const auto side = static_cast<std::size_t>(2 * l_ + 1);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i])
      out.emplace_back(static_cast<std::int64_t>(i / side) - l_, static_cast<std::int64_t>(i % side) - l_);
  return out;
}

std::vector<std::int64_t> diff_set(const Window& b) {
  const auto pts = b.points_1d();
  if (pts.empty()) throw std::invalid_argument("diff_set: empty window");
  const std::int64_t span = 2 * b.half_width();
  std::vector<bool> seen(static_cast<std::size_t>(2 * span + 1), false);
  for (auto x : pts)
    for (auto y : pts) seen[static_cast<std::size_t>(x - y + span)] = true;
  return from_bitmap(seen, -span);
}

std::vector<std::pair<std::int64_t, std::int64_t>> diff_set_2d(const Window& b) {
  const auto pts = b.points_2d();
  if (pts.empty()) throw std::invalid_argument("diff_set_2d: empty window");
  const std::int64_t span = 2 * b.half_width();
  const auto side = static_cast<std::size_t>(2 * span + 1);
  std::vector<bool> seen(side * side, false);
  for (auto [x1, y1] : pts)
    for (auto [x2, y2] : pts)
      seen[static_cast<std::size_t>(x1 - x2 + span) * side + static_cast<std::size_t>(y1 - y2 + span)] = true;
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i])
      out.emplace_back(static_cast<std::int64_t>(i / side) - span, static_cast<std::int64_t>(i % side) - span);
  return out;
}

QuadForm parse_quadform(const std::string& name) {
  if (name == "xy-z2") return QuadForm::XyMinusZ2;
  if (name == "x2+y2-z2") return QuadForm::X2PlusY2MinusZ2;
  if (name == "x2-y2-z2") return QuadForm::X2MinusY2MinusZ2;
  throw std::invalid_argument("unknown form '" + name + "' (expected xy-z2, x2+y2-z2 or x2-y2-z2)");
}

std::string quadform_name(QuadForm f) {
  switch (f) {
    case QuadForm::XyMinusZ2: return "xy-z2";
    case QuadForm::X2PlusY2MinusZ2: return "x2+y2-z2";
    case QuadForm::X2MinusY2MinusZ2: return "x2-y2-z2";
  }
  return "";
}

std::int64_t quadform_eval(QuadForm f, std::int64_t x, std::int64_t y, std::int64_t z) {
  switch (f) {
    case QuadForm::XyMinusZ2: return x * y - z * z;
    case QuadForm::X2PlusY2MinusZ2: return x * x + y * y - z * z;
    case QuadForm::X2MinusY2MinusZ2: return x * x - y * y - z * z;
  }
  return 0;
}

std::vector<std::int64_t> quadform_image(const std::vector<std::int64_t>& d, QuadForm f, std::int64_t m,
                                         std::size_t budget_bytes) {
  if (d.empty()) throw std::invalid_argument("quadform_image: empty difference set");
  if (m < 0) throw std::invalid_argument("quadform_image: M must be nonnegative");
  for (auto x : d)
    if (x > kMaxHalfWidth || x < -kMaxHalfWidth) throw std::invalid_argument("quadform_image: entry too large");
  const auto vals = sorted_unique(d);
  std::vector<std::int64_t> squares;
  for (auto x : vals) squares.push_back(x * x);
  squares = sorted_unique(std::move(squares));

  // value = table - probe (sign = +1) or probe - table (sign = -1)
  const std::vector<std::int64_t>& left = f == QuadForm::XyMinusZ2 ? vals : squares;
  const std::vector<std::int64_t>& probes_src = squares;
  const std::size_t pairs = left.size() * left.size();
  if (pairs > budget_bytes / sizeof(std::int64_t))
    throw CapExceeded("quadform_image: product table needs " + std::to_string(pairs * sizeof(std::int64_t)) +
                      " bytes, budget " + std::to_string(budget_bytes));
  const std::int64_t lo = probes_src.front() - m, hi = probes_src.back() + m;
  std::vector<std::int64_t> table;
  for (std::size_t i = 0; i < left.size(); ++i)
    for (std::size_t j = (f == QuadForm::XyMinusZ2 ? 0 : i); j < left.size(); ++j) {
      const std::int64_t t = f == QuadForm::XyMinusZ2 ? left[i] * left[j] : left[i] + left[j];
      if (t >= lo && t <= hi) table.push_back(t);
    }
  table = sorted_unique(std::move(table));
  const int sign = f == QuadForm::X2MinusY2MinusZ2 ? -1 : 1;

  const unsigned workers = std::max(1u, std::min<unsigned>(thread_count(), static_cast<unsigned>(probes_src.size())));
  const auto width = static_cast<std::size_t>(2 * m + 1);
  std::vector<std::vector<char>> hit(workers, std::vector<char>(width, 0));
  parallel_for(workers, [&](std::size_t w) {
    auto& mark = hit[w];
    for (std::size_t i = w; i < probes_src.size(); i += workers) {
      const std::int64_t s = probes_src[i];
      auto it = std::lower_bound(table.begin(), table.end(), s - m);
      for (; it != table.end() && *it <= s + m; ++it) {
        const std::int64_t v = sign * (*it - s);
        mark[static_cast<std::size_t>(v + m)] = 1;
      }
    }
  });
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < width; ++i) {
    bool any = false;
    for (const auto& h : hit) any = any || h[i];
    if (any) out.push_back(static_cast<std::int64_t>(i) - m);
  }
  return out;
}

CoverageReport find_k_cover(const std::vector<std::int64_t>& image, std::int64_t m, std::int64_t k_max,
                            const std::string& form) {
  if (m < 0) throw std::invalid_argument("find_k_cover: M must be nonnegative");
  if (k_max < 1) throw std::invalid_argument("find_k_cover: kMax must be positive");
  CoverageReport rep;
  rep.form = form;
  rep.range = m;
  rep.verdict_range = m / 2;
  std::vector<bool> in(static_cast<std::size_t>(2 * m + 1), false);
  for (auto v : image)
    if (v >= -m && v <= m) in[static_cast<std::size_t>(v + m)] = true;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    KCoverage c;
    c.k = k;
    for (std::int64_t v = -(m / k) * k; v <= m; v += k) {
      const bool hit = in[static_cast<std::size_t>(v + m)];
      ++c.total;
      if (hit) ++c.covered;
      if (v >= -rep.verdict_range && v <= rep.verdict_range) {
        ++c.total_verdict;
        if (hit) ++c.covered_verdict;
      }
    }
    if (c.full() && !rep.smallest_k) rep.smallest_k = k;
    rep.per_k.push_back(c);
  }
  return rep;
}

Rat golden_convergent(std::int64_t min_den) {
  Int a = 1, b = 1;
  while (b <= min_den) {
    Int c = a + b;
    a = b;
    b = c;
  }
  return Rat(a, b);
}

bool in_bohr(const Rat& theta, std::int64_t x, const Rat& bound) {
  Int r = theta.get_num() * Int(static_cast<long>(x));
  const Int& den = theta.get_den();
  mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), den.get_mpz_t());
  const Int dist = std::min(r, Int(den - r));
  return Rat(dist, den) < bound;
}

Window bohr_set(const Rat& theta, double eps, std::int64_t length) {
  if (!(eps > 0 && eps < 0.5)) throw std::invalid_argument("bohr_set: eps must lie in (0, 1/2)");
  if (length <= 0) throw std::invalid_argument("bohr_set: length must be positive");
  Rat bound;
  mpq_set_d(bound.get_mpq_t(), eps);
  Window w(1, length);
  for (std::int64_t x = 0; x < length; ++x)
    if (in_bohr(theta, x, bound)) w.insert(x);
  return w;
}

BohrControlReport bohr_negative_control(const Rat& theta, double eps, std::int64_t length, std::int64_t k_max) {
  if (!(eps > 0 && eps < 0.125)) throw std::invalid_argument("bohr_negative_control: eps must lie in (0, 1/8)");
  BohrControlReport rep;
  rep.theta = theta;
  const Window b = bohr_set(theta, eps, length);
  rep.members = b.count();
  const auto d = diff_set(b);
  // F((B x B) - (B x B)) = (B - B) + (B - B)
  const std::int64_t span = 2 * length;
  std::vector<bool> seen(static_cast<std::size_t>(2 * span + 1), false);
  for (auto x : d)
    for (auto y : d) seen[static_cast<std::size_t>(x + y + span)] = true;
  const auto values = from_bitmap(seen, -span);
  rep.values = values.size();
  Rat bound;
  mpq_set_d(bound.get_mpq_t(), 4 * eps);
  for (auto v : values)
    if (!in_bohr(theta, v, bound)) {
      rep.contained = false;
      rep.outside_witness = v;
      break;
    }
  rep.coverage = find_k_cover(values, span, k_max, "x1+x2");
  rep.no_k_covers = true;
  const std::int64_t vr = rep.coverage.verdict_range;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    std::optional<std::int64_t> esc;
    for (std::int64_t v = k; v <= vr && !esc; v += k) {
      if (!seen[static_cast<std::size_t>(v + span)]) esc = v;
      else if (!seen[static_cast<std::size_t>(-v + span)]) esc = -v;
    }
    if (!esc) rep.no_k_covers = false;
    rep.escapes.emplace_back(k, esc);
  }
  return rep;
}

CoverageReport poly_bog_scan(const Window& e, const std::vector<std::int64_t>& r_coeffs, std::int64_t m,
                             std::int64_t k_max) {
  std::vector<std::int64_t> r = r_coeffs;
  while (!r.empty() && r.back() == 0) r.pop_back();
  if (r.size() < 3) throw std::invalid_argument("poly_bog_scan: R must have degree at least 2");
  if (r[0] != 0) throw std::invalid_argument("poly_bog_scan: R(0) must vanish");
  if (m < 0) throw std::invalid_argument("poly_bog_scan: M must be nonnegative");
  const auto diffs = diff_set_2d(e);
  const std::int64_t span = 2 * e.half_width();
  // R(y) for |y| <= span, absent when it leaves the 64-bit range
  std::vector<std::optional<std::int64_t>> ry(static_cast<std::size_t>(2 * span + 1));
  for (std::int64_t y = -span; y <= span; ++y) {
    __int128 acc = 0;
    bool ok = true;
    for (std::size_t j = r.size(); j-- > 0 && ok;) {
      acc = acc * y + r[j];
      ok = fits(acc);
    }
    if (ok) ry[static_cast<std::size_t>(y + span)] = static_cast<std::int64_t>(acc);
  }
  std::vector<bool> seen(static_cast<std::size_t>(2 * m + 1), false);
  for (auto [x, y] : diffs) {
    const auto& v = ry[static_cast<std::size_t>(y + span)];
    if (!v) continue;
    const __int128 t = static_cast<__int128>(x) + *v;
    if (t >= -m && t <= m) seen[static_cast<std::size_t>(t + m)] = true;
  }
  return find_k_cover(from_bitmap(seen, -m), m, k_max, "x+R(y)");
}

IntMat sl2_embed(const Int& x, const Int& y, const Int& z) {
  IntMat a(2, 2);
  a(0, 0) = z;
  a(0, 1) = -y;
  a(1, 0) = x;
  a(1, 1) = -z;
  return a;
}

std::vector<Int> sl2_project(const IntMat& a) {
  if (a.rows() != 2 || a.cols() != 2) throw std::invalid_argument("sl2_project: expected a 2x2 matrix");
  if (a(0, 0) + a(1, 1) != 0) throw std::invalid_argument("sl2_project: matrix not trace zero");
  return {a(1, 0), -a(0, 1), a(0, 0)};
}

IntMat so21_embed(const Int& x, const Int& y, const Int& z) {
  IntMat a(2, 2);
  a(0, 0) = z;
  a(0, 1) = -(x + y);
  a(1, 0) = x - y;
  a(1, 1) = -z;
  return a;
}

std::vector<Int> so21_project(const IntMat& a) {
  if (a.rows() != 2 || a.cols() != 2) throw std::invalid_argument("so21_project: expected a 2x2 matrix");
  if (a(0, 0) + a(1, 1) != 0) throw std::invalid_argument("so21_project: matrix not trace zero");
  const Int b = a(0, 1), c = a(1, 0);
  const Int s = c - b;
  if (!mpz_even_p(s.get_mpz_t())) throw std::invalid_argument("so21_project: off-diagonal entries differ in parity");
  return {s / 2, (-b - c) / 2, a(0, 0)};
}

}  // namespace qrec
