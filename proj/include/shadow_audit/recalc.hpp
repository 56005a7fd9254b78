#pragma once

#include <map>
#include <set>
#include <vector>

#include "shadow_audit/formula.hpp"
#include "shadow_audit/workbook.hpp"

namespace shadow_audit {

/// Numeric value of every Number and Formula cell.
using ValueGrid = std::map<CellAddress, double>;

/// Holds a workbook together with its parsed formulas, dependency graph and
/// computed values. Construction performs a full recalculation; `set_cell`
/// recomputes only the changed cell's transitive dependents.
///
/// Errors (CycleError, TypeError, DivideByZero, UnknownSheetRef, NonFinite)
/// are thrown. A failed `set_cell` leaves the calculator unchanged.
class Recalculator {
public:
    explicit Recalculator(Workbook wb);

    const Workbook& workbook() const noexcept { return wb_; }
    const ValueGrid& values() const noexcept { return values_; }

    /// Formula cells in evaluation order.
    const std::vector<CellAddress>& order() const noexcept { return order_; }
    /// Cells read by the formula at `addr`.
    const std::set<CellAddress>& precedents(const CellAddress& addr) const;
    /// Formula cells that read `addr` directly.
    std::vector<CellAddress> dependents(const CellAddress& addr) const;

    const ValueGrid& set_cell(const CellAddress& addr, CellContent content);

private:
    void attach(const CellAddress& addr, const formula::Expr& ast);
    void detach(const CellAddress& addr);
    void rebuild_order();
    double evaluate_cell(const CellAddress& addr) const;

    Workbook wb_;
    std::map<CellAddress, formula::Expr> asts_;
    std::map<CellAddress, std::set<CellAddress>> precedents_;
    std::map<CellAddress, std::set<CellAddress>> dependents_;
    std::vector<CellAddress> order_;
    ValueGrid values_;
};

/// Full recalculation of a workbook.
ValueGrid recalculate(const Workbook& wb);

/// Applies one edit and returns the updated values; equal to a full
/// recalculation of the edited workbook.
const ValueGrid& recalc_after_set(Recalculator& calc, const CellAddress& addr, CellContent content);

}  // namespace shadow_audit
