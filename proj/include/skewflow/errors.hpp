#pragma once

#include <stdexcept>
#include <string>

namespace skewflow {

/// Base of every error raised by the library. Each subclass names one
/// precondition family so callers (and the CLI exit-code mapping) can
/// dispatch on the type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SKEWFLOW_DEFINE_ERROR(Name)    \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

SKEWFLOW_DEFINE_ERROR(TimeOrderError);
SKEWFLOW_DEFINE_ERROR(DomainError);
SKEWFLOW_DEFINE_ERROR(DimensionError);
SKEWFLOW_DEFINE_ERROR(EmptyGridError);
SKEWFLOW_DEFINE_ERROR(SpaceMismatchError);
SKEWFLOW_DEFINE_ERROR(IndexKindError);
SKEWFLOW_DEFINE_ERROR(FamilyCountError);
SKEWFLOW_DEFINE_ERROR(IncompatibleFamiliesError);
SKEWFLOW_DEFINE_ERROR(ScopeMismatchError);
SKEWFLOW_DEFINE_ERROR(NonConvergenceError);
SKEWFLOW_DEFINE_ERROR(NoDeltaError);
SKEWFLOW_DEFINE_ERROR(TailUnboundedError);
SKEWFLOW_DEFINE_ERROR(HypothesisFailError);
SKEWFLOW_DEFINE_ERROR(ParamError);
SKEWFLOW_DEFINE_ERROR(ConfigError);

#undef SKEWFLOW_DEFINE_ERROR

}  // namespace skewflow
