#pragma once

#include <stdexcept>
#include <string>

namespace dpt {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error { using Error::Error; };

// exact
class DimensionOverflow : public Error { using Error::Error; };
class Unconverged : public Error { using Error::Error; };
class DegenerateKernelAmbiguity : public Error { using Error::Error; };
class EigensolverFailure : public Error { using Error::Error; };

// gaussian
class UnstableDrift : public Error { using Error::Error; };
class CriticalPoint : public Error { using Error::Error; };

// oneloop
class NoConvergence : public Error { using Error::Error; };
class NegativeOccupation : public Error { using Error::Error; };

// cumulant
class RootNotFound : public Error { using Error::Error; };
class JacobianSingular : public Error { using Error::Error; };
class StiffnessAbort : public Error { using Error::Error; };

// scaling
class InsufficientRange : public Error { using Error::Error; };
class NonPositiveValue : public Error { using Error::Error; };
class EmptyOverlap : public Error { using Error::Error; };

}  // namespace dpt
