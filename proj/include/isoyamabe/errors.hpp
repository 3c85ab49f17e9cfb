#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace isoyamabe {

/// Failure categories. The CLI maps Config to exit code 2 and Numerical to 3.
enum class ErrorClass { Config, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), class_(cls), kind_(std::move(kind)) {}

    ErrorClass error_class() const noexcept { return class_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorClass class_;
    std::string kind_;
};

#define ISOYAMABE_DEFINE_ERROR(Name, Cls)                                               \
    class Name : public Error {                                                         \
    public:                                                                             \
        explicit Name(const std::string& what) : Error(ErrorClass::Cls, #Name, what) {} \
    }

// exprlang
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::string expected, const std::string& what)
        : Error(ErrorClass::Config, "SyntaxError",
                what + " at offset " + std::to_string(offset) + " (expected " + expected + ")"),
          offset_(offset), expected_(std::move(expected)) {}
    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};
ISOYAMABE_DEFINE_ERROR(DomainError, Numerical);
ISOYAMABE_DEFINE_ERROR(NonDifferentiable, Config);

// system
ISOYAMABE_DEFINE_ERROR(InvalidSystem, Config);
ISOYAMABE_DEFINE_ERROR(DivergentArclength, Numerical);
ISOYAMABE_DEFINE_ERROR(SystemFileError, Config);

// discretize
ISOYAMABE_DEFINE_ERROR(NonPositiveMass, Numerical);
ISOYAMABE_DEFINE_ERROR(SingularShift, Numerical);
ISOYAMABE_DEFINE_ERROR(LengthMismatch, Config);

// spectral
ISOYAMABE_DEFINE_ERROR(EigenFailure, Numerical);
ISOYAMABE_DEFINE_ERROR(ZeroWeight, Config);

// conformal
ISOYAMABE_DEFINE_ERROR(NonPositiveFactor, Config);
ISOYAMABE_DEFINE_ERROR(ZeroFunction, Config);

// solver
ISOYAMABE_DEFINE_ERROR(NotPositiveOperator, Config);
ISOYAMABE_DEFINE_ERROR(ExponentOutOfRange, Config);
class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& what, std::vector<double> last = {})
        : Error(ErrorClass::Numerical, "NoConvergence", what), last_(std::move(last)) {}
    /// Last iterate of the failed iteration, empty when not recorded.
    const std::vector<double>& last_iterate() const noexcept { return last_; }

private:
    std::vector<double> last_;
};
ISOYAMABE_DEFINE_ERROR(DegenerateSecondEigenvalue, Numerical);
ISOYAMABE_DEFINE_ERROR(UnsupportedDimension, Config);
ISOYAMABE_DEFINE_ERROR(PreconditionFailed, Config);

#undef ISOYAMABE_DEFINE_ERROR

}  // namespace isoyamabe
