#pragma once

#include <stdexcept>
#include <string>

namespace twistlab {

// Base class for all failures raised by the library. Messages carry the
// offending values so callers can log a witness without re-deriving it.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : Error { using Error::Error; };

// base dynamics
struct DistanceExceedsTau : Error { using Error::Error; };
struct NotClose : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct NoConnectingWord : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct NotAdmissible : Error { using Error::Error; };

// twisting / cocycle
struct IllConditioned : Error { using Error::Error; };
struct NotCertifiable : Error { using Error::Error; };
struct SingularQ : Error { using Error::Error; };

// fiber bunching / holonomy / transfer
struct TailTooLarge : Error { using Error::Error; };
struct NotStablePair : Error { using Error::Error; };
struct NotUnstablePair : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct NotHomoclinic : Error { using Error::Error; };
struct NotCauchy : Error { using Error::Error; };
struct InsufficientPairs : Error { using Error::Error; };

// exact arithmetic
struct OverflowError : Error { using Error::Error; };

}  // namespace twistlab
