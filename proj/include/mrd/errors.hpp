#pragma once

#include <stdexcept>
#include <string>

namespace mrd {

/// Base class for every error thrown by this library. The what() string of
/// each derived type starts with the error's name, so callers can match on
/// either the type or the text.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// chain construction
class DuplicateLabel : public Error { public: using Error::Error; };
class TooShort : public Error { public: using Error::Error; };

// grading functions and increments
class NotComonotonic : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class NonPositiveDelta : public Error { public: using Error::Error; };

// divergence evaluation
class ChainMismatch : public Error { public: using Error::Error; };
class NotADistribution : public Error { public: using Error::Error; };

// solvers
class InvalidPins : public Error { public: using Error::Error; };
class Infeasible : public Error { public: using Error::Error; };
class TooLarge : public Error { public: using Error::Error; };
class NoFeasibleGridPoint : public Error { public: using Error::Error; };

// conditional probability
class OutOfDomain : public Error { public: using Error::Error; };
class InvalidInstance : public Error { public: using Error::Error; };

}  // namespace mrd
