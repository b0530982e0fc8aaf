#pragma once

#include <stdexcept>
#include <string>

namespace spinmoments {

// Base error. `invalid_input` distinguishes precondition violations (bad user
// parameters, CLI exit code 2) from computation failures (CLI exit code 1).
class SpinError : public std::runtime_error {
public:
    SpinError(const std::string& what, bool invalid_input)
        : std::runtime_error(what), invalid_input_(invalid_input) {}
    bool invalid_input() const noexcept { return invalid_input_; }

private:
    bool invalid_input_;
};

#define SPINMOMENTS_DEFINE_ERROR(Name, is_input)                        \
    class Name : public SpinError {                                     \
    public:                                                             \
        explicit Name(const std::string& what = #Name)                  \
            : SpinError(std::string(#Name) + ": " + what, is_input) {}  \
    }

SPINMOMENTS_DEFINE_ERROR(NonHermitianInput, false);
SPINMOMENTS_DEFINE_ERROR(BadPartition, true);
SPINMOMENTS_DEFINE_ERROR(OutOfRange, true);
SPINMOMENTS_DEFINE_ERROR(OddN, true);
SPINMOMENTS_DEFINE_ERROR(BadDirection, true);
SPINMOMENTS_DEFINE_ERROR(ShapeMismatch, true);
SPINMOMENTS_DEFINE_ERROR(NotSymmetric, true);
SPINMOMENTS_DEFINE_ERROR(BadArity, true);
SPINMOMENTS_DEFINE_ERROR(InsufficientDesignStrength, true);
SPINMOMENTS_DEFINE_ERROR(TooFewShots, true);
SPINMOMENTS_DEFINE_ERROR(ComplexRoots, false);
SPINMOMENTS_DEFINE_ERROR(NoConvergence, false);

#undef SPINMOMENTS_DEFINE_ERROR

}  // namespace spinmoments
