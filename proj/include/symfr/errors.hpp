#pragma once
// Exception hierarchy. Every error maps onto one CLI exit class.

#include <stdexcept>
#include <string>

namespace symfr {

enum class ExitClass : int {
    ok = 0,
    input = 2,
    consistency = 3,
    obstruction = 4,
    numerical = 5,
};

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg, ExitClass cls)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)), cls_(cls) {}
    const std::string& kind() const noexcept { return kind_; }
    ExitClass exit_class() const noexcept { return cls_; }
    int exit_code() const noexcept { return static_cast<int>(cls_); }

private:
    std::string kind_;
    ExitClass cls_;
};

#define SYMFR_ERROR(Name, Cls)                                                   \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& msg) : Error(#Name, msg, Cls) {}        \
    };

// malformed input, models, configs
SYMFR_ERROR(DimensionError, ExitClass::input)
SYMFR_ERROR(ShapeError, ExitClass::input)
SYMFR_ERROR(GapClosedError, ExitClass::input)
SYMFR_ERROR(NotTRInvariantError, ExitClass::input)
SYMFR_ERROR(SchemaError, ExitClass::input)
SYMFR_ERROR(AliasingError, ExitClass::input)

// numerics that did not converge or hit a branch
SYMFR_ERROR(UnderResolvedError, ExitClass::numerical)
SYMFR_ERROR(NonIntegerDegreeError, ExitClass::numerical)
SYMFR_ERROR(BranchPointError, ExitClass::numerical)
SYMFR_ERROR(SingularError, ExitClass::numerical)
SYMFR_ERROR(TransportAccuracyError, ExitClass::numerical)
SYMFR_ERROR(TrackingError, ExitClass::numerical)
SYMFR_ERROR(SmoothingError, ExitClass::numerical)
SYMFR_ERROR(BudgetError, ExitClass::numerical)
SYMFR_ERROR(ApproximantError, ExitClass::numerical)
SYMFR_ERROR(TangencyError, ExitClass::numerical)
SYMFR_ERROR(QuadratureError, ExitClass::numerical)
SYMFR_ERROR(LocalizationFailure, ExitClass::numerical)

// formulas that should agree but did not
SYMFR_ERROR(InternalConsistencyError, ExitClass::consistency)
SYMFR_ERROR(EqualityViolationError, ExitClass::consistency)

#undef SYMFR_ERROR

// The topological obstruction: a symmetric frame cannot exist.
class ObstructionError : public Error {
public:
    ObstructionError(const std::string& msg, int index, int crossings = -1)
        : Error("ObstructionError", msg, ExitClass::obstruction), index_(index), crossings_(crossings) {}
    int index() const noexcept { return index_; }
    // odd crossing count seen by the branch cut, or -1 if not applicable
    int crossings() const noexcept { return crossings_; }

private:
    int index_;
    int crossings_;
};

}  // namespace symfr
