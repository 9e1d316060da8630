#include "qrec/real.hpp"

extern "C" {
#include <quadmath.h>
}

namespace qrec {

namespace {
Real pi() {
  static const Real value = acosq(Real(-1));
  return value;
}
}  // namespace

Real real_sqrt(Real x) { return sqrtq(x); }
Real real_abs(const Complex& z) { return hypotq(z.re, z.im); }
Real real_pow(Real x, Real y) { return powq(x, y); }
Real real_log(Real x) { return logq(x); }

Complex unit_root(long long num, long long den) {
  long long r = num % den;
  if (r < 0) r += den;
  const Real angle = 2 * pi() * static_cast<Real>(r) / static_cast<Real>(den);
  return {cosq(angle), sinq(angle)};
}

Complex unit_phase(Real x) {
  const Real frac = x - floorq(x);
  const Real angle = 2 * pi() * frac;
  return {cosq(angle), sinq(angle)};
}

std::string real_str(Real x, int digits) {
  char buf[128];
  quadmath_snprintf(buf, sizeof buf, "%.*Qg", digits, x);
  return buf;
}

}  // namespace qrec
