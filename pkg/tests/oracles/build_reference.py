"""Regenerate tests/data/reference_volumes.wpv from the integral-form oracle.

Run from the repository root:  python3 -m tests.oracles.build_reference
"""
from math import factorial
from pathlib import Path

from . import integral_recursion as oracle

OUT = Path(__file__).resolve().parent.parent / "data" / "reference_volumes.wpv"


def to_intersection_rows(g, n):
    """Convert the L-polynomial of V_{g,n} into table rows [tau_d]."""
    rows = []
    for (exps, pi2), coeff in sorted(oracle.V(g, n).items()):
        d = tuple(e // 2 for e in exps)
        tau = coeff
        for di in d:
            tau *= factorial(2 * di + 1) * 4 ** di
        rows.append((d, tau, pi2))
    return rows


def main(g_max=4, n_max=4):
    lines = ["# V_{g,n} intersection numbers for g <= 4, n <= 4",
             "# produced by tests/oracles/integral_recursion.py (integral form, L-variables)"]
    for g in range(g_max + 1):
        for n in range(n_max + 1):
            if 2 * g - 2 + n <= 0:
                continue
            for d, tau, pi2 in to_intersection_rows(g, n):
                idx = " ".join(map(str, d))
                lines.append(f"{g} {n} | {idx} | {tau.numerator}/{tau.denominator} | {pi2}")
    OUT.write_text("\n".join(lines) + "\n")
    return OUT


if __name__ == "__main__":
    print(main())
