#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shadow_audit/binding.hpp"
#include "shadow_audit/model.hpp"
#include "shadow_audit/scenario.hpp"
#include "shadow_audit/workbook.hpp"

namespace shadow_audit {

/// Two values agree when |a - b| <= abs or |a - b| <= rel * max(|a|, |b|).
struct Tolerance {
    double abs = 1e-9;
    double rel = 1e-6;

    bool accepts(double a, double b) const noexcept;
};

enum class Verdict { Pass, Fail };

struct AuditFinding {
    std::string scenario_id;
    std::string param;
    Tuple tuple;
    CellAddress cell;
    double sheet_value = 0.0;
    double shadow_value = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;
    Verdict verdict = Verdict::Pass;
    /// empty-output, triangular:<cell>, and `error:` notes when either side
    /// failed to produce a value.
    std::vector<std::string> warnings;
};

struct AuditReport {
    std::vector<AuditFinding> findings;
    std::vector<std::string> scenario_ids;
    /// Warnings about the configuration rather than one finding, e.g.
    /// unused inputs.
    std::vector<std::string> warnings;

    std::size_t failures() const noexcept;
};

/// One finding per scenario and output element, ordered by scenario, then
/// binding, then tuple. A scenario whose workbook or shadow side throws gets
/// FAIL findings carrying the error instead of aborting the run.
///
/// `threads` caps parallel scenarios; 0 or 1 runs serially. The result does
/// not depend on it.
///
/// Throws for configuration problems found before any scenario runs, such as
/// output bindings that do not expand against `wb`.
AuditReport run_audit(const Workbook& wb, std::shared_ptr<const model::Model> model, const BindingSet& bindings,
                      const std::vector<Scenario>& scenarios, const Tolerance& tol, unsigned threads = 0);

enum class ReportMode { Human, Csv };

std::string format_report(const AuditReport& report, ReportMode mode);

}  // namespace shadow_audit
