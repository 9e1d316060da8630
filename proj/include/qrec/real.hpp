#pragma once

#include <string>

namespace qrec {

/// 113-bit mantissa reals for exponential sums and norms.
using Real = __float128;

struct Complex {
  Real re = 0;
  Real im = 0;
};

Real real_sqrt(Real x);
Real real_abs(const Complex& z);
Real real_pow(Real x, Real y);
Real real_log(Real x);

/// e(num / den) = exp(2 pi i num / den), exact argument reduction.
Complex unit_root(long long num, long long den);
/// e(x) for a real phase.
Complex unit_phase(Real x);

/// Shortest decimal with the given significant digits.
std::string real_str(Real x, int digits = 20);
inline double to_double(Real x) { return static_cast<double>(x); }

}  // namespace qrec
