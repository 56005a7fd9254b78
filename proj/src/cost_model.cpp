#include "shadow_audit/cost_model.hpp"

#include <cmath>

#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit::cost {

namespace {

void check(const EffortParams& p) {
    if (p.dims < 1 || p.levels < 1) throw Error(ErrorKind::InvalidArgument, "dimensions and levels must be at least 1");
    if (!(p.minutes_per_formula > 0) || !(p.around_ratio > 0) || !std::isfinite(p.minutes_per_formula) ||
        !std::isfinite(p.around_ratio))
        throw Error(ErrorKind::InvalidArgument, "cost per formula and ratio must be positive");
}

}  // namespace

double distinct_formula_count(int dims, std::int64_t levels) {
    check(EffortParams{dims, levels, 1.0, 1.0});
    return std::pow(static_cast<double>(levels), std::max(dims - 2, 0));
}

double effort_per_relationship(const EffortParams& params, Approach approach) {
    check(params);
    if (approach == Approach::Around) return params.around_ratio * params.minutes_per_formula;
    return params.minutes_per_formula * distinct_formula_count(params.dims, params.levels);
}

std::optional<std::int64_t> crossover_levels(int dims, double ratio) {
    check(EffortParams{dims, 1, 1.0, ratio});
    int exponent = std::max(dims - 2, 0);
    if (exponent == 0) return ratio <= 1.0 ? std::optional<std::int64_t>(1) : std::nullopt;
    // Start from the real root and step to the exact integer boundary.
    auto level = static_cast<std::int64_t>(std::max(1.0, std::floor(std::pow(ratio, 1.0 / exponent))));
    while (level > 1 && std::pow(static_cast<double>(level - 1), exponent) >= ratio) --level;
    while (std::pow(static_cast<double>(level), exponent) < ratio) ++level;
    return level;
}

std::string emit_curves(const std::vector<int>& dims, std::int64_t first_level, std::int64_t last_level,
                        double minutes_per_formula, double around_ratio) {
    if (first_level < 1 || last_level < first_level)
        throw Error(ErrorKind::InvalidArgument, "level range must satisfy 1 <= first <= last");
    std::string out = "d,levels,traditional_minutes,around_minutes\n";
    for (int d : dims)
        for (auto l = first_level; l <= last_level; ++l) {
            EffortParams p{d, l, minutes_per_formula, around_ratio};
            out += std::to_string(d) + "," + std::to_string(l) + "," +
                   format_number(effort_per_relationship(p, Approach::Traditional)) + "," +
                   format_number(effort_per_relationship(p, Approach::Around)) + "\n";
        }
    return out;
}

double total_effort_check(double formulas, double minutes_per_formula) {
    if (!(formulas >= 0) || !(minutes_per_formula >= 0))
        throw Error(ErrorKind::InvalidArgument, "formula count and minutes must be non-negative");
    return formulas * minutes_per_formula / 60.0;
}

}  // namespace shadow_audit::cost
