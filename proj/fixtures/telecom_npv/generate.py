#!/usr/bin/env python3
"""Writes the telecom NPV fixture: workbook, shadow model, bindings, data
file and seeded mutant workbooks. Output is deterministic; rerun after
editing and commit the result."""

import os

HERE = os.path.dirname(os.path.abspath(__file__))

NODES = ["Ams", "Rot", "Utr"]
YEARS = [2001, 2002, 2003, 2004, 2005]
SCENARIOS = ["worst", "base", "best"]
BLOCK_COLS = {"worst": 2, "base": 6, "best": 10}  # first volume column per scenario

# Lower-triangular distances in miles, direct trajectories only.
DISTANCE = {("Rot", "Ams"): 57, ("Utr", "Ams"): 35, ("Utr", "Rot"): 41}
# Gross margin per unit of volume; depends on direction.
MARGIN = {
    ("Ams", "Rot"): 1.2, ("Ams", "Utr"): 0.9,
    ("Rot", "Ams"): 1.1, ("Rot", "Utr"): 0.7,
    ("Utr", "Ams"): 1.3, ("Utr", "Rot"): 0.8,
}
INVESTMENT_PER_MILE = 1000
WACC = 0.08
PRICE_PER_BYTE = 0.002
GROWTH_2005 = 1.05
SCALE = {"worst": 0.8, "base": 1.0, "best": 1.25}

PAIRS = [(o, d) for o in NODES for d in NODES if o != d]


def col(n):
    s = ""
    while n:
        n, r = divmod(n - 1, 26)
        s = chr(65 + r) + s
    return s


def fmt(x):
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x)


def base_volume(o, d, year):
    i, j = NODES.index(o), NODES.index(d)
    return 9000 + 1500 * i + 700 * j + 1200 * (year - 2001)


def literal_volume(o, d, year, s):
    return float(round(base_volume(o, d, year) * SCALE[s]))


def volume(o, d, year, s):
    """Value the workbook computes, including the growth formulas of the last year."""
    if year == 2005:
        return literal_volume(o, d, 2004, s) * GROWTH_2005
    return literal_volume(o, d, year, s)


def cell(c, r):
    return f"{col(c)}{r}"


def margin_ref(o, d):
    return "Inputs!" + cell(2 + NODES.index(d), 7 + NODES.index(o))


def volume_ref(o, d, s):
    return cell(BLOCK_COLS[s] + NODES.index(d), 3 + NODES.index(o))


def revenue_terms(s, margin=margin_ref):
    return [f"{volume_ref(o, d, s)}*{margin(o, d)}" for o, d in PAIRS]


def year_sheet(year, mutate=None):
    grid = {}
    grid[(1, 1)] = "Year"
    for s in SCENARIOS:
        c0 = BLOCK_COLS[s]
        grid[(c0, 1)] = s
        for j, d in enumerate(NODES):
            grid[(c0 + j, 2)] = d
        for i, o in enumerate(NODES):
            for j, d in enumerate(NODES):
                if o == d:
                    continue
                if year == 2005:
                    grid[(c0 + j, 3 + i)] = f"=Y2004!{cell(c0 + j, 3 + i)}*B11"
                else:
                    grid[(c0 + j, 3 + i)] = fmt(literal_volume(o, d, year, s))
    grid[(1, 2)] = "from/to"
    for i, o in enumerate(NODES):
        grid[(1, 3 + i)] = o
    grid[(1, 7)] = "NetCashFlow"
    for s in SCENARIOS:
        grid[(BLOCK_COLS[s], 7)] = "=" + "+".join(revenue_terms(s)) + "-B9"
    grid[(1, 9)] = "Investment"
    grid[(2, 9)] = "=SUM(Inputs!B2:D4)*Inputs!B11" if year == 2001 else "0"
    if year == 2005:
        grid[(1, 11)] = "Growth"
        grid[(2, 11)] = fmt(GROWTH_2005)
    if mutate:
        mutate(grid)
    return grid


def inputs_sheet():
    grid = {(1, 1): "miles"}
    for j, d in enumerate(NODES):
        grid[(2 + j, 1)] = d
        grid[(2 + j, 6)] = d
    for i, o in enumerate(NODES):
        grid[(1, 2 + i)] = o
        grid[(1, 7 + i)] = o
        for j, d in enumerate(NODES):
            if (o, d) in DISTANCE:
                grid[(2 + j, 2 + i)] = fmt(DISTANCE[(o, d)])
            if (o, d) in MARGIN:
                grid[(2 + j, 7 + i)] = fmt(MARGIN[(o, d)])
    grid[(1, 6)] = "margin"
    grid[(1, 11)] = "InvestmentPerMile"
    grid[(2, 11)] = fmt(INVESTMENT_PER_MILE)
    grid[(1, 12)] = "WACC"
    grid[(2, 12)] = fmt(WACC)
    grid[(1, 13)] = "PricePerByte"
    grid[(2, 13)] = fmt(PRICE_PER_BYTE)
    return grid


def npv_formula(s, years=YEARS, exponent=lambda y: y - 2001, sheet_of=lambda s, y: f"Y{y}"):
    c = cell(BLOCK_COLS[s], 7)
    return "=" + "+".join(f"{sheet_of(s, y)}!{c}/(1+Inputs!B12)^{exponent(y)}" for y in years)


def results_sheet(npv=npv_formula):
    grid = {(1, 1): "Scenario", (2, 1): "NPV"}
    for k, s in enumerate(SCENARIOS):
        grid[(1, 2 + k)] = s
        grid[(2, 2 + k)] = npv(s)
    return grid


def render(sheets):
    lines = []
    for name, grid in sheets:
        lines.append(f"[sheet: {name}]")
        rows = max(r for _, r in grid)
        cols = max(c for c, _ in grid)
        for r in range(1, rows + 1):
            row = [grid.get((c, r), "") for c in range(1, cols + 1)]
            while row and row[-1] == "":
                row.pop()
            lines.append("|".join(row))
    return "\n".join(lines) + "\n"


def workbook(year_mutations=None, results=None):
    year_mutations = year_mutations or {}
    sheets = [("Inputs", inputs_sheet())]
    for y in YEARS:
        sheets.append((f"Y{y}", year_sheet(y, year_mutations.get(y))))
    sheets.append(("Results", results or results_sheet()))
    return render(sheets)


MODEL = """# Telecom network investment: net present value per volume scenario.
SET Nodes(n) := {Ams, Rot, Utr};
SET Origins(o) SUBSET Nodes;
SET Destinations(d) SUBSET Nodes;
SET Time(t) := {2001, 2002, 2003, 2004, 2005};
SET Scenarios(s) := {worst, base, best};

PARAM Volume(o, d, t, s);
PARAM GrossMargin(o, d);
PARAM Distance(o, d);
PARAM InvestmentPerMile;
PARAM WACC;
PARAM PricePerByte;

DEF Investment(t) := IF t = FIRST(Time) THEN SUM((o, d), Distance(o, d) * InvestmentPerMile) ELSE 0 ENDIF;
# Revenue sums over every trajectory; o and d are not indices of FCF.
DEF FCF(s, t) := SUM((o, d), Volume(o, d, t, s) * GrossMargin(o, d)) - Investment(t);
DEF NPV(s) := SUM(t, FCF(s, t) / (1 + WACC)^(t - 2001));
"""

BINDINGS = """# Inputs sheet: distance and margin matrices with their own headers.
INPUT Distance(o, d) FROM Inputs!B2:D4 ROWS o FROM A2:A4 COLS d FROM B1:D1 TRIANGULAR LOWER
INPUT GrossMargin(o, d) FROM Inputs!B7:D9 ROWS o FROM A7:A9 COLS d FROM B6:D6
INPUT InvestmentPerMile FROM Inputs!B11
INPUT WACC FROM Inputs!B12
INPUT PricePerByte FROM Inputs!B13

# One sheet per year, one block of columns per scenario.
INPUT Volume(o, d, t, s) FROM Y{t}!B3:D5 ROWS o FROM A3:A5 COLS d FROM B2:D2 BLOCK s STEP (0, 4)

OUTPUT NPV(s) FROM Results!B2:B4 ROWS s FROM A2:A4

VAR WACC DEFAULT 0.08 MIN 0.05 MAX 0.12
VAR InvestmentPerMile DEFAULT 1000 MIN 800 MAX 1500
VAR Y2005!B11 DEFAULT 1.05 MIN 0 MAX 1.5
VAR Volume(Rot, Ams, 2003, base) DEFAULT {v} MIN 0 MAX {v2}
"""


def data_file():
    lines = ["# Values the workbook holds in its input regions (default scenario)."]
    for (o, d), v in DISTANCE.items():
        lines.append(f"Distance({o}, {d}) = {fmt(v)}")
    for (o, d), v in MARGIN.items():
        lines.append(f"GrossMargin({o}, {d}) = {fmt(v)}")
    lines.append(f"InvestmentPerMile = {fmt(INVESTMENT_PER_MILE)}")
    lines.append(f"WACC = {fmt(WACC)}")
    lines.append(f"PricePerByte = {fmt(PRICE_PER_BYTE)}")
    for o, d in PAIRS:
        for y in YEARS:
            for s in SCENARIOS:
                lines.append(f"Volume({o}, {d}, {y}, {s}) = {fmt(volume(o, d, y, s))}")
    return "\n".join(lines) + "\n"


def set_cell(c, r, value):
    def apply(grid):
        grid[(c, r)] = value
    return apply


def mutants():
    out = {}
    # One revenue term missing from the base scenario of 2003.
    terms = revenue_terms("base")
    out["dropped_term"] = workbook({2003: set_cell(6, 7, "=" + "+".join(terms[1:]) + "-B9")})

    # Best-case NPV reads the 2002 sheet where it should read 2003.
    def wrong_sheet(s, y):
        return "Y2002" if (s == "best" and y == 2003) else f"Y{y}"
    out["wrong_sheet_ref"] = workbook(results=results_sheet(lambda s: npv_formula(s, sheet_of=wrong_sheet)))

    # 2002 revenue multiplies by the transposed margin matrix.
    def transposed(grid):
        for s in SCENARIOS:
            grid[(BLOCK_COLS[s], 7)] = "=" + "+".join(revenue_terms(s, lambda o, d: margin_ref(d, o))) + "-B9"
    out["transposed_matrix"] = workbook({2002: transposed})

    # Discounting starts one period early.
    out["wrong_exponent"] = workbook(results=results_sheet(lambda s: npv_formula(s, exponent=lambda y: y - 2000)))

    # Investment typed in as a number instead of computed from the inputs.
    total = sum(DISTANCE.values()) * INVESTMENT_PER_MILE
    out["hardcoded_constant"] = workbook({2001: set_cell(2, 9, fmt(total))})

    # The NPV formulas stop at 2004.
    out["dropped_year"] = workbook(results=results_sheet(lambda s: npv_formula(s, years=YEARS[:-1])))
    return out


def write(path, text):
    with open(os.path.join(HERE, path), "w", newline="\n") as f:
        f.write(text)


def main():
    os.makedirs(os.path.join(HERE, "mutants"), exist_ok=True)
    write("workbook.txt", workbook())
    write("model.shd", MODEL)
    v = literal_volume("Rot", "Ams", 2003, "base")
    write("bindings.txt", BINDINGS.replace("{v}", fmt(v)).replace("{v2}", fmt(2 * v)))
    write("data.dat", data_file())
    for name, text in mutants().items():
        write(os.path.join("mutants", name + ".txt"), text)


if __name__ == "__main__":
    main()
