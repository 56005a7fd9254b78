#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace shadow_audit {

enum class ErrorKind {
    Io,
    MalformedHeader,
    DuplicateSheet,
    UnknownSheet,
    UnencodableCell,
    InvalidAddress,
    Syntax,
    UnknownFunction,
    Cycle,
    Type,
    DivideByZero,
    UnknownSheetRef,
    NonFinite,
    UnknownSet,
    UnknownParam,
    UnknownIndex,
    FreeIndex,
    CyclicDefinition,
    DuplicateName,
    IncludeCycle,
    UnknownElement,
    ArityMismatch,
    AssignToDefined,
    StaleValue,
    EmptyAggregate,
    DomainMismatch,
    DuplicateInputBinding,
    NotDefinedParam,
    MissingSheet,
    RegionOutOfGrid,
    TargetIsFormula,
    InvalidBounds,
    TooFewVars,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `kind()` is the stable,
/// machine-checkable part; the message is for humans.
///
/// `trail()` carries an ordered path when one exists: the cell cycle for
/// Cycle, the definition cycle for CyclicDefinition, the include chain for
/// IncludeCycle and Io errors raised while resolving includes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::vector<std::string> trail = {});

    ErrorKind kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }
    const std::vector<std::string>& trail() const noexcept { return trail_; }

private:
    ErrorKind kind_;
    std::string detail_;
    std::vector<std::string> trail_;
};

/// Syntax errors also report where parsing stopped and what would have been
/// accepted there.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, std::vector<std::string> expected, const std::string& detail);

    std::size_t position() const noexcept { return position_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::vector<std::string> expected_;
};

}  // namespace shadow_audit
