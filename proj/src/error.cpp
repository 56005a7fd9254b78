#include "shadow_audit/error.hpp"

namespace shadow_audit {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io: return "IoError";
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::DuplicateSheet: return "DuplicateSheet";
        case ErrorKind::UnknownSheet: return "UnknownSheet";
        case ErrorKind::UnencodableCell: return "UnencodableCell";
        case ErrorKind::InvalidAddress: return "InvalidAddress";
        case ErrorKind::Syntax: return "SyntaxError";
        case ErrorKind::UnknownFunction: return "UnknownFunction";
        case ErrorKind::Cycle: return "CycleError";
        case ErrorKind::Type: return "TypeError";
        case ErrorKind::DivideByZero: return "DivideByZero";
        case ErrorKind::UnknownSheetRef: return "UnknownSheetRef";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::UnknownSet: return "UnknownSet";
        case ErrorKind::UnknownParam: return "UnknownParam";
        case ErrorKind::UnknownIndex: return "UnknownIndex";
        case ErrorKind::FreeIndex: return "FreeIndexError";
        case ErrorKind::CyclicDefinition: return "CyclicDefinitionError";
        case ErrorKind::DuplicateName: return "DuplicateName";
        case ErrorKind::IncludeCycle: return "IncludeCycle";
        case ErrorKind::UnknownElement: return "UnknownElement";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::AssignToDefined: return "AssignToDefined";
        case ErrorKind::StaleValue: return "StaleValue";
        case ErrorKind::EmptyAggregate: return "EmptyAggregate";
        case ErrorKind::DomainMismatch: return "DomainMismatch";
        case ErrorKind::DuplicateInputBinding: return "DuplicateInputBinding";
        case ErrorKind::NotDefinedParam: return "NotDefinedParam";
        case ErrorKind::MissingSheet: return "MissingSheet";
        case ErrorKind::RegionOutOfGrid: return "RegionOutOfGrid";
        case ErrorKind::TargetIsFormula: return "TargetIsFormula";
        case ErrorKind::InvalidBounds: return "InvalidBounds";
        case ErrorKind::TooFewVars: return "TooFewVars";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

Error::Error(ErrorKind kind, const std::string& message, std::vector<std::string> trail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(message),
      trail_(std::move(trail)) {}

namespace {

std::string describe_syntax(std::size_t position, const std::vector<std::string>& expected,
                            const std::string& detail) {
    std::string out = "at position " + std::to_string(position) + ": " + detail;
    if (!expected.empty()) {
        out += " (expected one of:";
        for (const auto& e : expected) out += " " + e;
        out += ")";
    }
    return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position, std::vector<std::string> expected, const std::string& detail)
    : Error(ErrorKind::Syntax, describe_syntax(position, expected, detail)),
      position_(position),
      expected_(std::move(expected)) {}

}  // namespace shadow_audit
