#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shadow_audit::cost {

struct EffortParams {
    int dims = 2;
    std::int64_t levels = 1;
    double minutes_per_formula = 3.0;
    /// Effort of auditing one relationship around the spreadsheet, in units
    /// of one distinct formula.
    double around_ratio = 2.0;
};

enum class Approach { Traditional, Around };

/// Distinct formulas for one relationship laid out over `dims` dimensions of
/// `levels` elements each: the first two dimensions share one formula, every
/// further dimension multiplies the slices. Throws InvalidArgument for
/// dims < 1 or levels < 1.
double distinct_formula_count(int dims, std::int64_t levels);

/// Minutes to audit one relationship.
double effort_per_relationship(const EffortParams& params, Approach approach);

/// Smallest level count at which auditing around costs no more than the
/// traditional audit; nullopt when that never happens.
std::optional<std::int64_t> crossover_levels(int dims, double ratio);

/// CSV `d,levels,traditional_minutes,around_minutes`, one row per dimension
/// and level, dimensions outermost.
std::string emit_curves(const std::vector<int>& dims, std::int64_t first_level, std::int64_t last_level,
                        double minutes_per_formula = 3.0, double around_ratio = 2.0);

/// Hours for a traditional audit of `formulas` distinct formulas.
double total_effort_check(double formulas, double minutes_per_formula);

}  // namespace shadow_audit::cost
