#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept { return "Error"; }
};

#define CVQKD_DEFINE_ERROR(Type)                                     \
  class Type : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
    const char* name() const noexcept override { return #Type; }     \
  };

// Parameter outside its mathematical domain.
CVQKD_DEFINE_ERROR(DomainError)
// Mode index collision or out of range.
CVQKD_DEFINE_ERROR(IndexError)
// Matrix sizes do not match.
CVQKD_DEFINE_ERROR(DimensionError)
// Covariance matrix violates the uncertainty relation.
CVQKD_DEFINE_ERROR(PhysicalityError)
// No attack configuration reproduces the requested channel.
CVQKD_DEFINE_ERROR(InfeasibleError)
// NLA gain pushes the equivalent squeezing to gamma >= 1.
CVQKD_DEFINE_ERROR(GainTooLargeError)
// Threshold bisection found no sign change on its interval.
CVQKD_DEFINE_ERROR(NoThresholdError)
// Malformed run configuration or flag value.
CVQKD_DEFINE_ERROR(ConfigError)

#undef CVQKD_DEFINE_ERROR

}  // namespace cvqkd
