#!/usr/bin/env python3
"""Computes NPV per scenario from data.dat with plain loops.

    Investment(t) = sum of Distance * InvestmentPerMile in the first year, else 0
    FCF(s, t)     = sum over trajectories of Volume * GrossMargin - Investment(t)
    NPV(s)        = sum over years of FCF(s, t) / (1 + WACC)^(t - first year)

Usage: oracle.py [data.dat] [--check expected_npv.txt]
Without --check, prints `NPV(s) = value` lines. With --check, exits 1 unless
the file matches to 1e-9 relative.
"""

import os
import re
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
SCENARIOS = ["worst", "base", "best"]
LINE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s*=\s*(\S+)$")


def load(path):
    scalars, tables = {}, {}
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = LINE.match(line)
            if not m:
                raise ValueError(f"bad line: {raw!r}")
            name, args, value = m.group(1), m.group(2), float(m.group(3))
            if args is None:
                scalars[name] = value
            else:
                key = tuple(a.strip() for a in args.split(","))
                tables.setdefault(name, {})[key] = value
    return scalars, tables


def npv(scalars, tables):
    volume = tables["Volume"]
    years = sorted({int(k[2]) for k in volume})
    first = years[0]
    investment_total = 0.0
    for v in tables["Distance"].values():
        investment_total += v * scalars["InvestmentPerMile"]
    out = {}
    for s in SCENARIOS:
        total = 0.0
        for year in years:
            revenue = 0.0
            for (o, d, t, sc), vol in volume.items():
                if int(t) == year and sc == s:
                    revenue += vol * tables["GrossMargin"].get((o, d), 0.0)
            invest = investment_total if year == first else 0.0
            total += (revenue - invest) / (1 + scalars["WACC"]) ** (year - first)
        out[s] = total
    return out


def main(argv):
    data = os.path.join(HERE, "data.dat")
    check = None
    args = list(argv)
    if "--check" in args:
        i = args.index("--check")
        check = args[i + 1]
        del args[i:i + 2]
    if args:
        data = args[0]
    values = npv(*load(data))
    if check is None:
        for s in SCENARIOS:
            print(f"NPV({s}) = {values[s]!r}")
        return 0
    expected = {}
    with open(check) as f:
        for line in f:
            m = re.match(r"^NPV\((\w+)\) = (\S+)$", line.strip())
            if m:
                expected[m.group(1)] = float(m.group(2))
    ok = set(expected) == set(SCENARIOS)
    for s in SCENARIOS:
        a, b = values[s], expected.get(s, float("nan"))
        if not abs(a - b) <= 1e-9 * max(abs(a), abs(b), 1.0):
            print(f"NPV({s}): oracle {a!r}, file {b!r}", file=sys.stderr)
            ok = False
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
