"""Sparse exact Gaussian elimination over the rationals.

First-nonzero pivoting in fixed row/column order: deterministic results,
no pivoting heuristics.  Systems here are desk-scale (at most a few
thousand unknowns), assembled from cochain bases and per-degree solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

Row = dict[int, Fraction]


@dataclass
class LinearSystem:
    """rows[i] maps column index -> coefficient; rhs[i] is the target."""

    n_cols: int
    rows: list[Row] = field(default_factory=list)
    rhs: list[Fraction] = field(default_factory=list)

    def add_row(self, row: Row, b: Fraction | int = 0):
        clean = {j: Fraction(c) for j, c in row.items() if c != 0}
        for j in clean:
            if not 0 <= j < self.n_cols:
                raise ValueError(f"column {j} out of range")
        self.rows.append(clean)
        self.rhs.append(Fraction(b))


@dataclass
class LinearSolveResult:
    solvable: bool
    solution: list[Fraction] | None
    kernel: list[list[Fraction]]
    # first witness row with 0 == nonzero after elimination, if unsolvable
    failure_row: int | None = None


def _eliminate(rows: list[Row], rhs: list[Fraction], n_cols: int):
    """Row echelon by first-nonzero pivot; returns (pivots, rows, rhs).

    pivots is a list of (row index, column) in elimination order.
    """
    rows = [dict(r) for r in rows]
    rhs = list(rhs)
    pivots: list[tuple[int, int]] = []
    pivot_row = 0
    for col in range(n_cols):
        sel = None
        for i in range(pivot_row, len(rows)):
            if rows[i].get(col, 0) != 0:
                sel = i
                break
        if sel is None:
            continue
        rows[pivot_row], rows[sel] = rows[sel], rows[pivot_row]
        rhs[pivot_row], rhs[sel] = rhs[sel], rhs[pivot_row]
        piv = rows[pivot_row][col]
        if piv != 1:
            rows[pivot_row] = {j: c / piv for j, c in rows[pivot_row].items()}
            rhs[pivot_row] = rhs[pivot_row] / piv
        prow = rows[pivot_row]
        for i in range(len(rows)):
            if i == pivot_row:
                continue
            f = rows[i].get(col, 0)
            if f == 0:
                continue
            ri = rows[i]
            for j, c in prow.items():
                v = ri.get(j, Fraction(0)) - f * c
                if v:
                    ri[j] = v
                else:
                    ri.pop(j, None)
            rhs[i] = rhs[i] - f * rhs[pivot_row]
        pivots.append((pivot_row, col))
        pivot_row += 1
        if pivot_row == len(rows):
            break
    return pivots, rows, rhs


def solve_linear(sys: LinearSystem) -> LinearSolveResult:
    """Solve sys exactly.

    Returns one solution (free variables set to 0) plus a kernel basis, or
    an explicit no-solution result with the inconsistent row index.
    """
    if len(sys.rows) != len(sys.rhs):
        raise ValueError("row/rhs length mismatch")
    pivots, rows, rhs = _eliminate(sys.rows, sys.rhs, sys.n_cols)
    pivot_cols = {col: ri for ri, col in pivots}
    rank = len(pivots)
    for i in range(rank, len(rows)):
        if not rows[i] and rhs[i] != 0:
            return LinearSolveResult(False, None, [], failure_row=i)
    solution = [Fraction(0)] * sys.n_cols
    for col, ri in pivot_cols.items():
        solution[col] = rhs[ri]
    kernel: list[list[Fraction]] = []
    for col in range(sys.n_cols):
        if col in pivot_cols:
            continue
        vec = [Fraction(0)] * sys.n_cols
        vec[col] = Fraction(1)
        for pcol, ri in pivot_cols.items():
            c = rows[ri].get(col, 0)
            if c:
                vec[pcol] = -c
        kernel.append(vec)
    return LinearSolveResult(True, solution, kernel)


def matrix_rank(rows: list[Row], n_cols: int) -> int:
    pivots, _, _ = _eliminate(rows, [Fraction(0)] * len(rows), n_cols)
    return len(pivots)
