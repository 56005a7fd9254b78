#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shadow_audit/box.hpp"
#include "shadow_audit/workbook.hpp"

namespace shadow_audit::formula {

struct Expr;

struct NumberLit {
    double value = 0.0;
    friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

/// A cell reference as written; `sheet` is empty when unqualified.
struct CellRef {
    std::optional<std::string> sheet;
    int column = 1;
    int row = 1;

    CellAddress resolve(const std::string& home_sheet) const {
        return CellAddress{sheet.value_or(home_sheet), column, row};
    }
    friend bool operator==(const CellRef&, const CellRef&) = default;
};

/// Rectangular range on one sheet. Corners are kept as written.
struct RangeRef {
    std::optional<std::string> sheet;
    int first_column = 1;
    int first_row = 1;
    int last_column = 1;
    int last_row = 1;

    /// Every covered address, row-major from the top-left corner.
    std::vector<CellAddress> expand(const std::string& home_sheet) const;
    friend bool operator==(const RangeRef&, const RangeRef&) = default;
};

struct Negate {
    Box<Expr> operand;
    friend bool operator==(const Negate&, const Negate&) = default;
};

enum class BinaryOp { Add, Sub, Mul, Div, Pow, Eq, Ne, Lt, Le, Gt, Ge };

struct Binary {
    BinaryOp op;
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const Binary&, const Binary&) = default;
};

/// Function names are stored upper-case.
struct Call {
    std::string name;
    std::vector<Expr> args;
    friend bool operator==(const Call&, const Call&) = default;
};

struct Expr {
    std::variant<NumberLit, CellRef, RangeRef, Negate, Binary, Call> node;
    friend bool operator==(const Expr&, const Expr&) = default;
};

/// Parses "=expr". Throws SyntaxError (with position and expected tokens)
/// or UnknownFunction.
///
/// Precedence, loosest first: comparisons (non-associative), + -, * /,
/// unary minus, ^ (right-associative). So `-2^2` is `-(2^2)` and `2^-1` is
/// accepted. Ranges are legal only as direct arguments of SUM, MAX, MIN,
/// AVERAGE and the cash-flow arguments of NPV.
Expr parse(std::string_view source);

/// Canonical text, including the leading '='. Minimal parentheses; reparses
/// to an equal tree.
std::string print(const Expr& expr);

/// Referenced addresses, unqualified references resolved against
/// `home_sheet`, ranges expanded.
std::set<CellAddress> extract_dependencies(const Expr& expr, const std::string& home_sheet);

bool is_known_function(std::string_view upper_name) noexcept;

}  // namespace shadow_audit::formula
