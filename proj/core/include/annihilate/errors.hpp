#pragma once

#include <stdexcept>
#include <string>

namespace annihilate {

// Base of every error thrown by the library. `code()` is a stable
// identifier used in the CLI's machine-readable error output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define ANNIHILATE_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

ANNIHILATE_DEFINE_ERROR(InvalidState)
ANNIHILATE_DEFINE_ERROR(NonFiniteForce)
ANNIHILATE_DEFINE_ERROR(NonFiniteEnergy)
ANNIHILATE_DEFINE_ERROR(StepSizeUnderflow)
ANNIHILATE_DEFINE_ERROR(NonAlternatingCluster)
ANNIHILATE_DEFINE_ERROR(NetChargeTooLarge)
ANNIHILATE_DEFINE_ERROR(LengthMismatch)
ANNIHILATE_DEFINE_ERROR(ComplexRoots)
ANNIHILATE_DEFINE_ERROR(JumpTooClose)
ANNIHILATE_DEFINE_ERROR(CFLViolation)
ANNIHILATE_DEFINE_ERROR(DegenerateCrossing)
ANNIHILATE_DEFINE_ERROR(ConfigError)

#undef ANNIHILATE_DEFINE_ERROR

}  // namespace annihilate
