#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shadow_audit/box.hpp"

namespace shadow_audit::model {

struct Expr;

struct NumberLit {
    double value = 0.0;
    friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

/// A bound index used as a value: its element label, or the label read as a
/// number in arithmetic.
struct IndexRef {
    std::string index;
    friend bool operator==(const IndexRef&, const IndexRef&) = default;
};

/// `Name(i, j)`; `args` are index names. Scalars have no args.
struct ParamRef {
    std::string name;
    std::vector<std::string> args;
    friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

/// FIRST(Set): the first element label in declared order.
struct FirstOf {
    std::string set;
    friend bool operator==(const FirstOf&, const FirstOf&) = default;
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

enum class AggregateKind { Sum, Max, Min };

/// SUM((i, j) | filter, body)
struct Aggregate {
    AggregateKind kind;
    std::vector<std::string> indices;
    std::optional<Box<Expr>> filter;
    Box<Expr> body;
    friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

/// IF cond THEN a ELSE b ENDIF
struct Conditional {
    Box<Expr> condition;
    Box<Expr> then_branch;
    Box<Expr> else_branch;
    friend bool operator==(const Conditional&, const Conditional&) = default;
};

struct Expr {
    std::variant<NumberLit, IndexRef, ParamRef, FirstOf, Negate, Binary, Aggregate, Conditional> node;
    friend bool operator==(const Expr&, const Expr&) = default;
};

struct SetDecl {
    std::string name;
    std::vector<std::string> indices;
    std::optional<std::string> parent;
    /// Labels written in the declaration; absent for a SUBSET that takes
    /// all of its parent's elements.
    std::optional<std::vector<std::string>> declared_elements;
    /// Resolved, ordered element labels.
    std::vector<std::string> elements;

    friend bool operator==(const SetDecl&, const SetDecl&) = default;
};

enum class ParamRole { Input, Defined };

struct ParamDecl {
    std::string name;
    std::vector<std::string> domain;  // index names
    ParamRole role = ParamRole::Input;
    std::optional<Expr> definition;

    friend bool operator==(const ParamDecl&, const ParamDecl&) = default;
};

/// Resolved shadow model. Holds only symbolic content: sets, parameter
/// declarations and definitions. Immutable once built.
class Model {
public:
    const std::vector<SetDecl>& sets() const noexcept { return sets_; }
    const std::vector<ParamDecl>& params() const noexcept { return params_; }

    const SetDecl* find_set(std::string_view name) const noexcept;
    const ParamDecl* find_param(std::string_view name) const noexcept;
    /// Set an index ranges over, or nullptr.
    const SetDecl* set_of_index(std::string_view index) const noexcept;
    /// True when `set` equals `ancestor` or is a (transitive) subset of it.
    bool is_within(std::string_view set, std::string_view ancestor) const noexcept;

    /// Defined parameters, each after everything it reads.
    const std::vector<std::string>& evaluation_order() const noexcept { return order_; }
    /// Parameters read directly by a definition (empty for inputs).
    const std::vector<std::string>& reads(std::string_view param) const;
    /// Defined parameters that read `param` directly or transitively, in
    /// evaluation order.
    std::vector<std::string> downstream(std::string_view param) const;
    /// Input parameters no definition reads.
    std::vector<std::string> unused_inputs() const;

    std::size_t definition_count() const noexcept;
    /// Stable digest of the definitions section.
    std::size_t definitions_fingerprint() const;

    friend bool operator==(const Model& a, const Model& b) { return a.sets_ == b.sets_ && a.params_ == b.params_; }

private:
    friend Model parse_model(std::string_view source);

    std::vector<SetDecl> sets_;
    std::vector<ParamDecl> params_;
    std::map<std::string, std::vector<std::string>, std::less<>> reads_;
    std::vector<std::string> order_;
};

/// Parses and resolves a model. The source must not contain INCLUDE lines;
/// run `include_resolve` first.
///
/// Errors: SyntaxError, UnknownSet, UnknownParam, UnknownIndex, UnknownElement,
/// FreeIndexError, ArityMismatch, DomainMismatch, CyclicDefinitionError,
/// DuplicateName.
Model parse_model(std::string_view source);

/// Splices `INCLUDE "file";` lines. Files are looked up next to the including
/// file first, then in `include_paths`. Throws IncludeCycle or IoError, both
/// carrying the include chain.
std::string include_resolve(std::string_view source, const std::string& origin,
                            const std::vector<std::string>& include_paths = {});

/// Reads, resolves includes and parses.
Model load_model(const std::string& path, const std::vector<std::string>& include_paths = {});

/// Canonical text: sets, then parameters and definitions in declaration
/// order, one per line.
std::string print_model(const Model& model);
std::string print_expr(const Expr& expr);

}  // namespace shadow_audit::model
