#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qrec/linalg.hpp"
#include "qrec/real.hpp"

namespace qrec::test {

inline IntMat random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, long lo, long hi) {
  std::uniform_int_distribution<long> dist(lo, hi);
  IntMat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline double d(Real x) { return to_double(x); }

inline Rat rat(long num, long den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace qrec::test
