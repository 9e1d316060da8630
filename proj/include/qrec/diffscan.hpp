#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrec/linalg.hpp"

namespace qrec {

/// Subset of the box [-L, L]^dim, dim in {1, 2}.
class Window {
 public:
  Window(unsigned dim, std::int64_t half_width);

  static Window from_points_1d(std::int64_t half_width, const std::vector<std::int64_t>& points);
  static Window from_points_2d(std::int64_t half_width, const std::vector<std::pair<std::int64_t, std::int64_t>>& points);
  /// Each point of [lo, L]^dim included independently with the given probability.
  static Window random(unsigned dim, std::int64_t half_width, double density, std::uint64_t seed, std::int64_t lo = 0);
  /// (a Z x b Z) cap [-L, L]^2
  static Window lattice_2d(std::int64_t half_width, std::int64_t a, std::int64_t b);

  unsigned dim() const { return dim_; }
  std::int64_t half_width() const { return l_; }
  std::size_t box_size() const { return bits_.size(); }
  std::size_t count() const { return count_; }
  double density() const { return static_cast<double>(count_) / static_cast<double>(bits_.size()); }

  bool contains(std::int64_t x) const;
  bool contains(std::int64_t x, std::int64_t y) const;
  void insert(std::int64_t x);
  void insert(std::int64_t x, std::int64_t y);

  std::vector<std::int64_t> points_1d() const;
  std::vector<std::pair<std::int64_t, std::int64_t>> points_2d() const;

 private:
  std::size_t offset(std::int64_t x) const;
  std::size_t offset(std::int64_t x, std::int64_t y) const;
  unsigned dim_;
  std::int64_t l_;
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

/// B - B for a one-dimensional window, sorted.
std::vector<std::int64_t> diff_set(const Window& b);
/// B - B for a two-dimensional window, sorted lexicographically.
std::vector<std::pair<std::int64_t, std::int64_t>> diff_set_2d(const Window& b);

enum class QuadForm { XyMinusZ2, X2PlusY2MinusZ2, X2MinusY2MinusZ2 };

QuadForm parse_quadform(const std::string& name);  // "xy-z2", "x2+y2-z2", "x2-y2-z2"
std::string quadform_name(QuadForm f);
std::int64_t quadform_eval(QuadForm f, std::int64_t x, std::int64_t y, std::int64_t z);

constexpr std::size_t kDefaultTableBudget = std::size_t{2} << 30;  // bytes

/// {F(a,b,c) : a, b, c in d} cap [-M, M], sorted. Meet in the middle over
/// a table of two-variable values and a probe list of one-variable values.
/// Throws CapExceeded when the table would exceed `budget_bytes`.
std::vector<std::int64_t> quadform_image(const std::vector<std::int64_t>& d, QuadForm f, std::int64_t m,
                                         std::size_t budget_bytes = kDefaultTableBudget);

struct KCoverage {
  std::int64_t k = 0;
  std::uint64_t covered = 0;          // multiples of k in [-M, M] attained
  std::uint64_t total = 0;
  std::uint64_t covered_verdict = 0;  // same over [-M', M']
  std::uint64_t total_verdict = 0;
  double fraction() const { return total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0; }
  bool full() const { return covered_verdict == total_verdict; }
};

/// Finite-window evidence only: coverage of kZ cap [-M', M'] with M' = M/2.
struct CoverageReport {
  std::string form;
  std::int64_t range = 0;          // M
  std::int64_t verdict_range = 0;  // M'
  std::vector<KCoverage> per_k;
  std::optional<std::int64_t> smallest_k;
};

CoverageReport find_k_cover(const std::vector<std::int64_t>& image, std::int64_t m, std::int64_t k_max,
                            const std::string& form = "");

/// Convergent F_{j-1}/F_j of the golden ratio's fractional part with F_j > min_den.
Rat golden_convergent(std::int64_t min_den);

/// {x in [0, L) : ||x theta|| < eps}, theta rational. Requires 0 < eps < 1/2.
Window bohr_set(const Rat& theta, double eps, std::int64_t length);

/// ||x theta|| < bound, exactly.
bool in_bohr(const Rat& theta, std::int64_t x, const Rat& bound);

struct BohrControlReport {
  Rat theta;
  std::size_t members = 0;
  std::size_t values = 0;           // |F((B x B) - (B x B))|
  bool contained = true;            // every value in B(theta, 4 eps)
  std::optional<std::int64_t> outside_witness;
  std::vector<std::pair<std::int64_t, std::optional<std::int64_t>>> escapes;  // k -> multiple of k not attained
  CoverageReport coverage;
  bool no_k_covers = false;
};

/// F(x1, x2) = x1 + x2 on (B x B) - (B x B) for B = bohr_set(theta, eps, L).
BohrControlReport bohr_negative_control(const Rat& theta, double eps, std::int64_t length, std::int64_t k_max);

/// {x + R(y) : (x, y) in E - E} cap [-M, M] and its covering k.
CoverageReport poly_bog_scan(const Window& e, const std::vector<std::int64_t>& r_coeffs, std::int64_t m,
                             std::int64_t k_max);

/// (x, y, z) -> [[z, -y], [x, -z]], det = xy - z^2.
IntMat sl2_embed(const Int& x, const Int& y, const Int& z);
std::vector<Int> sl2_project(const IntMat& a);
/// (x, y, z) -> [[z, -(x+y)], [x-y, -z]], det = x^2 - y^2 - z^2.
IntMat so21_embed(const Int& x, const Int& y, const Int& z);
/// Inverse of so21_embed; throws unless the off-diagonal entries share parity.
std::vector<Int> so21_project(const IntMat& a);

}  // namespace qrec
