#include <doctest.h>

#include <string>

#include "shadow_audit/cost_model.hpp"
#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

using namespace shadow_audit;
using namespace shadow_audit::cost;

TEST_CASE("distinct formula count") {
    CHECK(distinct_formula_count(2, 20) == 1);
    CHECK(distinct_formula_count(1, 50) == 1);
    // One slice per level beyond the second dimension, counted by enumeration.
    for (int d = 1; d <= 5; ++d)
        for (std::int64_t l = 1; l <= 6; ++l) {
            std::int64_t slices = 1;
            for (int k = 2; k < d; ++k) slices *= l;
            CHECK(distinct_formula_count(d, l) == static_cast<double>(slices));
        }
    CHECK_THROWS_AS(distinct_formula_count(0, 3), Error);
    CHECK_THROWS_AS(distinct_formula_count(3, 0), Error);
}

TEST_CASE("effort per relationship") {
    CHECK(effort_per_relationship({3, 10, 3.0, 2.0}, Approach::Traditional) == 30);
    CHECK(effort_per_relationship({1, 50, 3.0, 2.0}, Approach::Traditional) == 3);
    for (int d = 1; d <= 4; ++d)
        for (std::int64_t l : {1, 7, 30}) CHECK(effort_per_relationship({d, l, 3.0, 2.0}, Approach::Around) == 6);
    // Linear in the per-formula cost.
    for (int d = 1; d <= 4; ++d) {
        double base = effort_per_relationship({d, 5, 1.0, 2.0}, Approach::Traditional);
        CHECK(effort_per_relationship({d, 5, 7.5, 2.0}, Approach::Traditional) == doctest::Approx(7.5 * base));
        CHECK(effort_per_relationship({d, 5, 7.5, 2.0}, Approach::Around) == 15);
    }
    CHECK_THROWS_AS(effort_per_relationship({3, 5, 0.0, 2.0}, Approach::Around), Error);
    CHECK_THROWS_AS(effort_per_relationship({3, 5, 3.0, -1.0}, Approach::Around), Error);
}

TEST_CASE("crossover levels") {
    CHECK(crossover_levels(3, 2) == 2);
    CHECK(crossover_levels(4, 2) == 2);
    CHECK_FALSE(crossover_levels(2, 2));
    CHECK_FALSE(crossover_levels(1, 2));
    CHECK(crossover_levels(2, 1) == 1);
    CHECK(crossover_levels(3, 10) == 10);
    CHECK(crossover_levels(4, 10) == 4);
    CHECK(crossover_levels(5, 27) == 3);
    CHECK(crossover_levels(5, 28) == 4);
    // Smallest level by linear search.
    for (int d = 3; d <= 5; ++d)
        for (double ratio : {0.5, 1.0, 2.0, 3.5, 9.0, 100.0}) {
            std::int64_t l = 1;
            while (distinct_formula_count(d, l) < ratio) ++l;
            CHECK(crossover_levels(d, ratio) == l);
        }
}

TEST_CASE("curves") {
    auto csv = emit_curves({1, 2, 3, 4}, 1, 30);
    auto lines = split(csv, '\n');
    CHECK(lines.front() == "d,levels,traditional_minutes,around_minutes");
    CHECK(lines.size() == 122);  // header, 120 rows, trailing empty piece
    CHECK(lines[1] == "1,1,3,6");
    CHECK(lines[62] == "3,2,6,6");
    CHECK(lines[120] == "4,30,2700,6");
    CHECK(emit_curves({3}, 4, 4, 2.0, 3.0) == "d,levels,traditional_minutes,around_minutes\n3,4,8,6\n");
    CHECK_THROWS_AS(emit_curves({3}, 5, 4), Error);
    CHECK_THROWS_AS(emit_curves({3}, 0, 4), Error);
}

TEST_CASE("total effort") {
    CHECK(total_effort_check(500, 3) == 25);
    CHECK(total_effort_check(1500, 3) == 75);
    CHECK(total_effort_check(0, 3) == 0);
    CHECK_THROWS_AS(total_effort_check(-1, 3), Error);
}
