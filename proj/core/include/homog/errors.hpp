#pragma once

#include <stdexcept>
#include <string>

namespace homog {

/// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Lattice and direction handling.
struct ZeroVector : Error { using Error::Error; };
struct EtaNotRepresentable : Error { using Error::Error; };

// Coefficient fields.
struct EllipticityViolation : Error { using Error::Error; };
struct UnknownFamily : Error { using Error::Error; };

// Linear and cell solvers.
struct SolverDiverged : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };
struct NonConvergent : Error { using Error::Error; };
struct CompatibilityViolation : Error { using Error::Error; };
struct SmallDivisor : Error { using Error::Error; };

// Invariant measures and limits.
struct NullspaceDegenerate : Error { using Error::Error; };
struct SequenceNotSettled : Error { using Error::Error; };

// Front propagation.
struct InvalidAlpha : Error { using Error::Error; };
struct NoMargin : Error { using Error::Error; };
struct GradientDegenerate : Error { using Error::Error; };
struct CFLViolation : Error { using Error::Error; };

// Obstacle problems.
struct NotConverged : Error { using Error::Error; };
struct BracketsDisagree : Error { using Error::Error; };

// Configuration and CLI.
struct ConfigError : Error { using Error::Error; };

} // namespace homog
