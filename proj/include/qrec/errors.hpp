#pragma once

#include <stdexcept>
#include <string>

namespace qrec {

/// An identity or inequality that the toolkit checks did not hold. The
/// message carries the counterexample datum.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource cap (group size, q0, table memory) was exceeded.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qrec
