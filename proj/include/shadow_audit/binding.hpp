#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shadow_audit/model.hpp"
#include "shadow_audit/recalc.hpp"
#include "shadow_audit/scenario.hpp"
#include "shadow_audit/shadow_eval.hpp"
#include "shadow_audit/workbook.hpp"

namespace shadow_audit {

enum class Direction { Input, Output };

/// Cell rectangle; `sheet` empty means "the binding's own sheet".
struct Region {
    std::string sheet;
    int first_column = 1;
    int first_row = 1;
    int last_column = 1;
    int last_row = 1;

    int rows() const noexcept { return last_row - first_row + 1; }
    int columns() const noexcept { return last_column - first_column + 1; }
};

/// Labels along one axis of a range: inline `idx = {a, b}` or read from a
/// header range `idx FROM A2:A4`.
struct Axis {
    std::string index;
    std::optional<std::vector<std::string>> labels;
    std::optional<Region> header;
};

/// `BLOCK idx STEP (dr, dc)`: element k of the index sits at the range
/// shifted by k * (dr, dc). Labels default to the index's set order.
struct Block {
    std::string index;
    std::vector<std::string> labels;
    int row_step = 0;
    int column_step = 0;
};

/// One INPUT or OUTPUT directive.
struct Binding {
    Direction direction = Direction::Input;
    std::string param;
    std::vector<std::string> indices;
    /// Sheet name, possibly with `{idx}` placeholders (one sheet per element).
    std::string sheet_template;
    Region range;
    std::optional<Axis> rows;
    std::optional<Axis> columns;
    std::optional<Block> block;
    bool triangular_lower = false;
    int line = 0;

    /// Placeholder indices in order of appearance.
    std::vector<std::string> template_indices() const;
};

struct BindingSet {
    std::vector<Binding> bindings;
    std::vector<InputVar> vars;

    const Binding* input_for(std::string_view param) const noexcept;
};

/// One mapped cell.
struct MappedCell {
    CellAddress address;
    Tuple tuple;
};

/// Binding file: INPUT / OUTPUT / VAR directives, one per line, `#` comments.
///
///   INPUT Distance(o, d) FROM Inputs!B2:D4 ROWS o FROM A2:A4 COLS d = {Ams, Rot} TRIANGULAR LOWER
///   INPUT Volume(o, d, t, s) FROM Y{t}!B3:D5 ROWS o = {...} COLS d = {...} BLOCK s STEP (0, 4)
///   OUTPUT NPV(s) FROM Results!B2:B4 ROWS s = {worst, base, best}
///   VAR Inputs!B12 DEFAULT 0.08 MIN 0.05 MAX 0.12
///   VAR Volume(Rot, Ams, 2003, base) DEFAULT 100 MIN 0 MAX 200
///
/// Names are checked against `model`. Errors: SyntaxError, UnknownParam,
/// DomainMismatch, DuplicateInputBinding, NotDefinedParam, AssignToDefined,
/// UnknownElement, InvalidBounds, DuplicateName.
BindingSet parse_bindings(std::string_view text, const model::Model& model);
BindingSet load_bindings(const std::string& path, const model::Model& model);

/// Expands a binding into cells, ordered by the parameter's domain tuples
/// (first index slowest). Header labels are read from `wb`. Throws
/// MissingSheet, RegionOutOfGrid, UnknownElement.
std::vector<MappedCell> expand(const Binding& binding, const model::Model& model, const Workbook& wb);

/// One assignment per non-empty cell of every INPUT binding. Text cells raise
/// TypeError.
std::vector<Assignment> import_inputs(const Workbook& wb, const ValueGrid& values, const BindingSet& bindings,
                                      const model::Model& model);

/// Writes stored input values back through the INPUT bindings.
Workbook write_inputs(const Workbook& wb, const DataStore& store, const BindingSet& bindings);

/// Cell a scenario target writes to. Throws UnknownParam when a parameter
/// target has no INPUT binding covering it.
CellAddress resolve_target(const Target& target, const BindingSet& bindings, const model::Model& model,
                           const Workbook& wb);

/// Overwrites each target cell with a number. Throws TargetIsFormula.
Workbook inject_scenario(const Workbook& wb, const BindingSet& bindings, const model::Model& model,
                         const Scenario& scenario);

struct OutputReading {
    std::string param;
    Tuple tuple;
    CellAddress address;
    double value = 0.0;
    bool empty_cell = false;
    /// Set when the cell cannot be read as a number.
    std::optional<std::string> error;
};

/// One reading per mapped element of every OUTPUT binding, binding order.
std::vector<OutputReading> read_outputs(const Workbook& wb, const ValueGrid& values, const BindingSet& bindings,
                                        const model::Model& model);

/// Non-empty strictly-upper cells of TRIANGULAR LOWER bindings, one message each.
std::vector<std::string> check_triangular(const Workbook& wb, const BindingSet& bindings, const model::Model& model);

}  // namespace shadow_audit
