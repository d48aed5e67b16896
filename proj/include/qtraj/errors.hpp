#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

// Base class for all library errors. `name()` is the stable identifier
// emitted by the CLI on numerical failures (exit code 4).
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define QTRAJ_DEFINE_ERROR(Type)                                   \
    class Type : public Error {                                    \
    public:                                                        \
        explicit Type(const std::string& what) : Error(#Type, what) {} \
    }

QTRAJ_DEFINE_ERROR(NotHermitian);
QTRAJ_DEFINE_ERROR(NotPSD);
QTRAJ_DEFINE_ERROR(NotUnitary);
QTRAJ_DEFINE_ERROR(SingularOperator);
QTRAJ_DEFINE_ERROR(ZeroPhaseUndefined);
QTRAJ_DEFINE_ERROR(DimensionMismatch);
QTRAJ_DEFINE_ERROR(CompletenessViolation);
QTRAJ_DEFINE_ERROR(UnknownPreset);
QTRAJ_DEFINE_ERROR(InvalidParameter);
QTRAJ_DEFINE_ERROR(InvalidIndex);
QTRAJ_DEFINE_ERROR(CombinatorialOverflow);
QTRAJ_DEFINE_ERROR(DeadEnd);
QTRAJ_DEFINE_ERROR(IncompleteSet);
QTRAJ_DEFINE_ERROR(DegenerateFringe);
QTRAJ_DEFINE_ERROR(ParallelityViolation);
QTRAJ_DEFINE_ERROR(UndefinedPhaseMass);
QTRAJ_DEFINE_ERROR(ValidationError);

#undef QTRAJ_DEFINE_ERROR

} // namespace qtraj
