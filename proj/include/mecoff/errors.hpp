#pragma once

#include <stdexcept>
#include <string>

namespace mecoff {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Graph construction / validation.
struct CyclicGraph : Error { using Error::Error; };
struct DisconnectedTask : Error { using Error::Error; };
struct BadVirtualTask : Error { using Error::Error; };
struct BadIndex : Error { using Error::Error; };
struct PathExplosion : Error { using Error::Error; };

// Evaluation.
struct ZeroRate : Error { using Error::Error; };
struct ZeroFrequency : Error { using Error::Error; };
struct EmptyMembership : Error { using Error::Error; };

// Actor / training.
struct DimensionMismatch : Error { using Error::Error; };
struct CountTooLarge : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };

// Baselines.
struct TooManyTasks : Error { using Error::Error; };

// Configuration and file I/O.
struct ConfigError : Error { using Error::Error; };

}  // namespace mecoff
