#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "shadow_audit/shadow_eval.hpp"
#include "shadow_audit/workbook.hpp"

namespace shadow_audit {

/// Parameter element targeted by a scenario, e.g. Volume(Rot, Ams, 2003, base).
struct ParamTarget {
    std::string param;
    Tuple tuple;
    friend bool operator==(const ParamTarget&, const ParamTarget&) = default;
};

using Target = std::variant<CellAddress, ParamTarget>;

std::string target_name(const Target& target);

/// A declared scenario input with its default and bounds (min <= default <= max).
struct InputVar {
    Target target;
    double default_value = 0.0;
    double min = 0.0;
    double max = 0.0;

    std::string name() const { return target_name(target); }
};

/// Throws InvalidBounds unless min <= default <= max (all finite).
void validate(const InputVar& var);

struct Scenario {
    std::string id;
    std::vector<std::pair<Target, double>> assignments;
    /// Assigns exactly the defaults; kept rather than removed so suite sizes
    /// stay predictable.
    bool degenerate = false;
};

std::vector<Scenario> gen_default(const std::vector<InputVar>& vars);
/// Two scenarios per variable (min, max), everything else at default.
std::vector<Scenario> gen_one_at_a_time(const std::vector<InputVar>& vars);
/// Four scenarios per unordered pair over {min,max}^2. Throws TooFewVars for n < 2.
std::vector<Scenario> gen_pairwise(const std::vector<InputVar>& vars);
/// `count` scenarios drawing each variable uniformly on [min, max].
///
/// Draws come from std::mt19937_64 seeded with `seed`, one 64-bit output per
/// variable in declaration order, scenario by scenario. The top 53 bits give
/// u in [0, 1) and the value is min + u * (max - min), clamped to max. Both
/// steps are exactly specified, so a seed reproduces on every platform.
std::vector<Scenario> gen_random(const std::vector<InputVar>& vars, std::size_t count, std::uint64_t seed);

enum class Suite { Default, OneAtATime, Pairwise, Full };

/// Default + one-at-a-time + pairwise (when n >= 2) for Full; the random
/// block is appended when `random_count` > 0.
std::vector<Scenario> generate_suite(const std::vector<InputVar>& vars, Suite suite, std::size_t random_count,
                                     std::uint64_t seed);

/// One scenario per line: `id: target=value; target=value`.
std::string emit_scenarios(const std::vector<Scenario>& scenarios);

}  // namespace shadow_audit
