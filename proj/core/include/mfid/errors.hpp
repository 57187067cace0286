#pragma once

#include <stdexcept>
#include <string>

namespace mfid {

/// Broad classification used by the CLI to pick an exit code.
enum class ErrorKind {
  validation,  // bad input, bad configuration, contract violated by the caller
  numerical,   // divergence, unobservable or ill-conditioned quantities
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define MFID_DEFINE_ERROR(Name, Kind)                                       \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

MFID_DEFINE_ERROR(ValidationError, validation)
// A non-finite value was produced while sampling an expression.
MFID_DEFINE_ERROR(SamplingError, validation)
// Data was requested outside the valid range of a series (window or shift too far).
MFID_DEFINE_ERROR(OutOfRangeError, validation)
// Derivative order or model shape the implementation does not provide.
MFID_DEFINE_ERROR(CapabilityError, validation)
// A kernel does not satisfy the boundary conditions an operation relies on.
MFID_DEFINE_ERROR(KernelContractError, validation)
MFID_DEFINE_ERROR(NonInvertibleError, numerical)
MFID_DEFINE_ERROR(DivergenceError, numerical)
MFID_DEFINE_ERROR(UnobservableDelayError, numerical)
MFID_DEFINE_ERROR(IllConditionedDelayError, numerical)
MFID_DEFINE_ERROR(IoError, io)

#undef MFID_DEFINE_ERROR

}  // namespace mfid
