#pragma once

#include <stdexcept>
#include <string>

namespace ulf {

/// Coarse error classes, used by the CLI for exit codes:
/// parse = 1, precondition = 2, precision = 3, check = 4.
enum class ErrorClass { parse, precondition, precision, check };

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }
  virtual std::string name() const { return "Error"; }

private:
  ErrorClass cls_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(ErrorClass::parse, w) {}
  ParseError(const std::string& w, std::size_t pos)
      : Error(ErrorClass::parse, w + " (at position " + std::to_string(pos) + ")") {}
  std::string name() const override { return "ParseError"; }
};

struct PrecisionExhausted : Error {
  explicit PrecisionExhausted(const std::string& w) : Error(ErrorClass::precision, w) {}
  std::string name() const override { return "PrecisionExhausted"; }
};

#define ULF_ERROR_TYPE(Name, Class)                                      \
  struct Name : Error {                                                  \
    explicit Name(const std::string& w) : Error(ErrorClass::Class, w) {} \
    std::string name() const override { return #Name; }                  \
  }

ULF_ERROR_TYPE(DescriptorMismatch, precondition);
ULF_ERROR_TYPE(DivisionByZero, precondition);
ULF_ERROR_TYPE(SingularInput, precondition);
ULF_ERROR_TYPE(NotInvertible, precondition);
ULF_ERROR_TYPE(JacobiViolation, precondition);
ULF_ERROR_TYPE(NotAutomorphism, precondition);
ULF_ERROR_TYPE(NotContractive, precondition);
ULF_ERROR_TYPE(NotContracting, precondition);
ULF_ERROR_TYPE(InvalidGradation, precondition);
ULF_ERROR_TYPE(NotNilpotent, precondition);
ULF_ERROR_TYPE(TagMismatch, precondition);
ULF_ERROR_TYPE(DenominatorNotUnit, precondition);
ULF_ERROR_TYPE(NotTorsion, precondition);
ULF_ERROR_TYPE(WindowTooSmall, precondition);
ULF_ERROR_TYPE(NotInvariant, precondition);
ULF_ERROR_TYPE(NotIntertwining, precondition);

// violations of facts the theory guarantees on exact inputs; reaching one
// signals a precision failure or a broken internal invariant
ULF_ERROR_TYPE(GradingViolation, check);
ULF_ERROR_TYPE(CentralityViolation, check);
ULF_ERROR_TYPE(CheckFailure, check);

#undef ULF_ERROR_TYPE

}  // namespace ulf
