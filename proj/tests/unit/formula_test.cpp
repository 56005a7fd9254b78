#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "../support/random_workbooks.hpp"
#include "shadow_audit/error.hpp"
#include "shadow_audit/formula.hpp"
#include "shadow_audit/recalc.hpp"

using namespace shadow_audit;
using namespace shadow_audit::formula;

namespace {

Expr num(double v) { return Expr{NumberLit{v}}; }
Expr ref(const char* cell) {
    auto a = CellAddress::parse(std::string("X!") + cell);
    return Expr{CellRef{std::nullopt, a.column, a.row}};
}
Expr bin(BinaryOp op, Expr l, Expr r) { return Expr{Binary{op, std::move(l), std::move(r)}}; }

template <class F>
ErrorKind kind_of(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::InvalidArgument;
}

Workbook sheet_of(std::initializer_list<std::pair<const char*, CellContent>> cells) {
    Workbook wb;
    wb.add_sheet("S");
    for (const auto& [a, c] : cells) wb.set_cell(CellAddress::parse(std::string("S!") + a), c);
    return wb;
}

}  // namespace

TEST_CASE("parser follows the grammar") {
    CHECK(parse("=B2*C2-D2") == bin(BinaryOp::Sub, bin(BinaryOp::Mul, ref("B2"), ref("C2")), ref("D2")));

    auto sum = parse("=SUM(Y2001!B2:D4, Y2002!B2:D4)");
    const auto& call = std::get<Call>(sum.node);
    CHECK(call.name == "SUM");
    REQUIRE(call.args.size() == 2);
    CHECK(std::get<RangeRef>(call.args[0].node) == RangeRef{"Y2001", 2, 2, 4, 4});
    CHECK(std::get<RangeRef>(call.args[1].node) == RangeRef{"Y2002", 2, 2, 4, 4});

    CHECK(parse("=1/(1+B1)^(A3-2001)") ==
          bin(BinaryOp::Div, num(1),
              bin(BinaryOp::Pow, bin(BinaryOp::Add, num(1), ref("B1")), bin(BinaryOp::Sub, ref("A3"), num(2001)))));
}

TEST_CASE("precedence and associativity") {
    CHECK(parse("=-2^2") == Expr{Negate{bin(BinaryOp::Pow, num(2), num(2))}});
    CHECK(parse("=2^3^2") == bin(BinaryOp::Pow, num(2), bin(BinaryOp::Pow, num(3), num(2))));
    CHECK(parse("=2^-1") == bin(BinaryOp::Pow, num(2), Expr{Negate{num(1)}}));
    CHECK(parse("=1-2-3") == bin(BinaryOp::Sub, bin(BinaryOp::Sub, num(1), num(2)), num(3)));
    CHECK(parse("=1+2<3*4") ==
          bin(BinaryOp::Lt, bin(BinaryOp::Add, num(1), num(2)), bin(BinaryOp::Mul, num(3), num(4))));
    CHECK(parse("=sum(a1)") == parse("=SUM(A1)"));
    CHECK(parse("=2001!A1") == Expr{CellRef{"2001", 1, 1}});
}

TEST_CASE("parser errors carry position and expectations") {
    try {
        parse("=1+");
        FAIL("no error");
    } catch (const SyntaxError& e) {
        CHECK(e.kind() == ErrorKind::Syntax);
        CHECK(e.position() == 3);
        CHECK_FALSE(e.expected().empty());
    }
    CHECK(kind_of([] { parse("A1"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=(1"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=1 2"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=A1:A3"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=SUM(A1:A3+1)"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=NPV(A1:A2,B1)"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=SUM(S!A1:T!A2)"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=IF(1,2)"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=1<2<3"); }) == ErrorKind::Syntax);
    CHECK(kind_of([] { parse("=VLOOKUP(A1,B1:C2,2)"); }) == ErrorKind::UnknownFunction);
}

TEST_CASE("print then parse is the identity on parsed trees") {
    const char* sources[] = {
        "=B2*C2-D2",
        "=1/(1+B1)^(A3-2001)",
        "=-2^2",
        "=(-2)^2",
        "=2^-3^2",
        "=(2^3)^2",
        "=a1-(b1-c1)",
        "=A1/(B1*C1)",
        "=-(A1+B1)*--C1",
        "=IF(A1>=0,NPV(0.1,B1:B5,7),-1)",
        "=(1=2)+(3<>4)",
        "=MAX(S!A1:C3)+MIN(1,2)+AVERAGE(A1:A2)",
        "=1e+20*0.000001",
        "=T!B7*2001!A1",
    };
    for (const char* src : sources) {
        CAPTURE(src);
        auto ast = parse(src);
        auto printed = print(ast);
        CAPTURE(printed);
        CHECK(parse(printed) == ast);
        CHECK(print(parse(printed)) == printed);
    }
    CHECK(print(parse("= B2 * C2 - D2")) == "=B2*C2-D2");
    CHECK(print(parse("=((A1))+(B1*C1)")) == "=A1+B1*C1");
}

TEST_CASE("print/parse idempotence over random trees") {
    std::mt19937_64 rng(99);
    std::function<std::string(int)> gen = [&](int depth) -> std::string {
        if (depth == 0 || rng() % 4 == 0) {
            switch (rng() % 4) {
                case 0: return std::to_string(rng() % 100);
                case 1: return "A" + std::to_string(1 + rng() % 9);
                case 2: return "T!C" + std::to_string(1 + rng() % 9);
                default: return "0.25";
            }
        }
        static const char* ops[] = {"+", "-", "*", "/", "^"};
        switch (rng() % 5) {
            case 0: return "-" + gen(depth - 1);
            case 1: return "(" + gen(depth - 1) + ")";
            case 2: return "SUM(A1:B3," + gen(depth - 1) + ")";
            case 3: return "IF(" + gen(depth - 1) + "<" + gen(depth - 1) + "," + gen(depth - 1) + "," + gen(depth - 1) + ")";
            default: return gen(depth - 1) + ops[rng() % 5] + gen(depth - 1);
        }
    };
    for (int i = 0; i < 500; ++i) {
        auto src = "=" + gen(4);
        CAPTURE(src);
        auto ast = parse(src);
        CHECK(parse(print(ast)) == ast);
    }
}

TEST_CASE("dependency extraction") {
    using Set = std::set<CellAddress>;
    auto a = [](const char* s) { return CellAddress::parse(s); };
    CHECK(extract_dependencies(parse("=A1+B1"), "S") == Set{a("S!A1"), a("S!B1")});
    CHECK(extract_dependencies(parse("=SUM(A1:A3)"), "S") == Set{a("S!A1"), a("S!A2"), a("S!A3")});
    CHECK(extract_dependencies(parse("=T!A1"), "S") == Set{a("T!A1")});
    CHECK(extract_dependencies(parse("=SUM(B2:A1)"), "S").size() == 4);
}

TEST_CASE("recalculate basic values") {
    auto wb = sheet_of({{"A1", CellContent::number(2)}, {"B1", CellContent::formula("=A1^3")}});
    CHECK(recalculate(wb).at(CellAddress::parse("S!B1")) == 8.0);

    auto npv = sheet_of({{"A1", CellContent::number(-100)},
                         {"A2", CellContent::number(60)},
                         {"A3", CellContent::number(60)},
                         {"B1", CellContent::number(0.1)},
                         {"C1", CellContent::formula("=A1 + A2/(1+B1)^1 + A3/(1+B1)^2")}});
    double c1 = recalculate(npv).at(CellAddress::parse("S!C1"));
    // Hand arithmetic: -100 + 60/1.1 + 60/1.21.
    CHECK(c1 == doctest::Approx(-100.0 + 54.54545454545455 + 49.58677685950413).epsilon(1e-14));
    CHECK(std::abs(c1 - 4.1322) < 1e-4);
}

TEST_CASE("functions") {
    auto wb = sheet_of({{"A1", CellContent::number(1)},
                        {"A2", CellContent::number(2)},
                        {"A4", CellContent::number(6)},
                        {"B1", CellContent::formula("=SUM(A1:A4)")},
                        {"B2", CellContent::formula("=AVERAGE(A1:A4)")},
                        {"B3", CellContent::formula("=MAX(A1:A4,-1)+MIN(A1:A4)")},
                        {"B4", CellContent::formula("=IF(A1>A2,1/0,5)")},
                        {"B5", CellContent::formula("=NPV(0.5,A1,A2)")},
                        {"B6", CellContent::formula("=A3*10+1")},
                        {"B7", CellContent::formula("=MAX(C1:C3)")}});
    auto v = recalculate(wb);
    auto at = [&](const char* c) { return v.at(CellAddress::parse(std::string("S!") + c)); };
    CHECK(at("B1") == 9.0);
    CHECK(at("B2") == 3.0);  // empties are skipped
    CHECK(at("B3") == 7.0);
    CHECK(at("B4") == 5.0);  // untaken branch is not evaluated
    CHECK(at("B5") == doctest::Approx(1.0 / 1.5 + 2.0 / 2.25));
    CHECK(at("B6") == 1.0);
    CHECK(at("B7") == 0.0);
}

TEST_CASE("evaluation errors") {
    CHECK(kind_of([] { recalculate(sheet_of({{"A1", CellContent::formula("=B1")}, {"B1", CellContent::formula("=A1")}})); }) ==
          ErrorKind::Cycle);
    try {
        recalculate(sheet_of({{"A1", CellContent::formula("=B1")}, {"B1", CellContent::formula("=A1")}}));
    } catch (const Error& e) {
        CHECK(e.trail() == std::vector<std::string>{"S!A1", "S!B1", "S!A1"});
        CHECK(std::string(e.what()).find("S!A1 -> S!B1 -> S!A1") != std::string::npos);
    }
    CHECK(kind_of([] { recalculate(sheet_of({{"A1", CellContent::formula("=SUM(A1:A2)")}})); }) == ErrorKind::Cycle);
    CHECK(kind_of([] { recalculate(sheet_of({{"A1", CellContent::text("x")}, {"B1", CellContent::formula("=A1+1")}})); }) ==
          ErrorKind::Type);
    CHECK(kind_of([] { recalculate(sheet_of({{"A1", CellContent::text("x")}, {"B1", CellContent::formula("=SUM(A1:A2)")}})); }) ==
          ErrorKind::Type);
    CHECK(kind_of([] { recalculate(sheet_of({{"B1", CellContent::formula("=1/A1")}})); }) == ErrorKind::DivideByZero);
    CHECK(kind_of([] { recalculate(sheet_of({{"B1", CellContent::formula("=AVERAGE(A1:A2)")}})); }) ==
          ErrorKind::DivideByZero);
    CHECK(kind_of([] { recalculate(sheet_of({{"B1", CellContent::formula("=Nope!A1")}})); }) == ErrorKind::UnknownSheetRef);
    CHECK(kind_of([] { recalculate(sheet_of({{"B1", CellContent::formula("=(-8)^0.5")}})); }) == ErrorKind::NonFinite);
    CHECK(kind_of([] { recalculate(sheet_of({{"B1", CellContent::formula("=1+")}})); }) == ErrorKind::Syntax);
}

TEST_CASE("incremental recalculation") {
    auto wb = sheet_of({{"A1", CellContent::number(1)},
                        {"A2", CellContent::number(2)},
                        {"C1", CellContent::text("label")},
                        {"B1", CellContent::formula("=A1*10")},
                        {"B2", CellContent::formula("=B1+A2")}});
    Recalculator calc(wb);
    auto before = calc.values();

    CHECK(calc.set_cell(CellAddress::parse("S!C1"), CellContent::text("renamed")) == before);

    auto changed = calc.set_cell(CellAddress::parse("S!A1"), CellContent::number(3));
    auto mutated = wb;
    mutated.set_cell(CellAddress::parse("S!A1"), CellContent::number(3));
    CHECK(changed == recalculate(mutated));
    CHECK(changed.at(CellAddress::parse("S!B2")) == 32.0);

    auto snapshot = calc.values();
    CHECK(kind_of([&] { calc.set_cell(CellAddress::parse("S!A1"), CellContent::formula("=B2")); }) == ErrorKind::Cycle);
    CHECK(calc.values() == snapshot);
    CHECK(calc.workbook().get_cell(CellAddress::parse("S!A1")) == CellContent::number(3));

    calc.set_cell(CellAddress::parse("S!A1"), CellContent::formula("=A2*2"));
    CHECK(calc.values().at(CellAddress::parse("S!B2")) == 42.0);
    calc.set_cell(CellAddress::parse("S!A1"), CellContent::empty());
    CHECK(calc.values().count(CellAddress::parse("S!A1")) == 0);
    CHECK(calc.values().at(CellAddress::parse("S!B2")) == 2.0);
    CHECK(calc.dependents(CellAddress::parse("S!A2")) == std::vector<CellAddress>{CellAddress::parse("S!B2")});
}

TEST_CASE("incremental equals full on random mutations") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        auto g = testsupport::generate_workbook(rng, 20, true);
        std::optional<Recalculator> calc;
        try {
            calc.emplace(g.workbook);
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::NonFinite);
            continue;
        }
        for (int m = 0; m < 5; ++m) {
            CellAddress target{rng() % 2 ? "S" : "T", 1 + static_cast<int>(rng() % 8), 1 + static_cast<int>(rng() % 12)};
            if (calc->workbook().get_cell(target).kind() == CellContent::Kind::Formula) continue;
            auto value = CellContent::number(static_cast<double>(static_cast<int>(rng() % 21) - 10));
            auto edited = calc->workbook();
            edited.set_cell(target, value);
            try {
                auto full = recalculate(edited);
                const auto& inc = calc->set_cell(target, value);
                REQUIRE(inc.size() == full.size());
                for (const auto& [a, v] : full) CHECK(std::memcmp(&v, &inc.at(a), sizeof v) == 0);
                ++checked;
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::NonFinite);
            }
        }
    }
    CHECK(checked > 100);
}
