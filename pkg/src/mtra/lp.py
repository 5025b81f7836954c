"""Exact rational linear programming (dense two-phase simplex).

The public surface speaks :class:`fractions.Fraction`; internally the
tableau is kept fraction-free by integer pivoting (Bareiss-style exact
division), which is an order of magnitude faster in CPython than a
Fraction tableau.  Bland's rule with a fixed variable order (declaration
order) makes the solver cycle-free and fully deterministic.

Every returned witness is re-checked against the original constraints
before the outcome is handed back; an infeasible outcome carries a
Farkas certificate that is likewise verified.  Problem sizes in this
package are a few dozen rows by a few hundred columns, so no sparse
machinery is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    rel: str
    rhs: Fraction


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x  subject to the constraints.

    Variables are free unless ``nonneg`` is set; bounds can always be
    expressed as explicit constraints instead.
    """

    num_vars: int
    constraints: tuple[Constraint, ...]
    objective: tuple[Fraction, ...] | None = None
    nonneg: bool = False

    def __post_init__(self) -> None:
        for c in self.constraints:
            if len(c.coeffs) != self.num_vars:
                raise ValueError("constraint arity does not match variable count")
            if c.rel not in (LE, EQ, GE):
                raise ValueError(f"unknown relation {c.rel!r}")
        if self.objective is not None and len(self.objective) != self.num_vars:
            raise ValueError("objective arity does not match variable count")


def constraint(coeffs: Iterable, rel: str, rhs) -> Constraint:
    return Constraint(tuple(Fraction(v) for v in coeffs), rel, Fraction(rhs))


@dataclass(frozen=True)
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    witness: tuple[Fraction, ...] | None = None
    objective_value: Fraction | None = None
    certificate: tuple[Fraction, ...] | None = None  # Farkas row multipliers

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _scaled_int_row(fracs: Sequence[Fraction]) -> tuple[list[int], int]:
    scale = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return [int(f * scale) for f in fracs], scale


class _IntTableau:
    """Integer simplex tableau: true values are entries divided by det.

    The last two rows are the phase-2 and phase-1 objective rows (c - z
    form, scaled like everything else); they are pivoted alongside the
    constraints so reduced costs never need re-pricing.
    """

    def __init__(self, rows: list[list[int]], basis: list[int], ncols: int):
        self.rows = rows
        self.basis = basis  # per constraint row
        self.ncols = ncols
        self.det = 1

    @property
    def m(self) -> int:
        return len(self.basis)

    def pivot(self, r: int, c: int) -> None:
        rows = self.rows
        prow = rows[r]
        piv = prow[c]
        if piv < 0:
            # only reached when driving zero-value artificials out; a row
            # negation keeps the determinant positive and the system equal
            prow = rows[r] = [-v for v in prow]
            piv = -piv
        det = self.det
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[c]
            if f:
                rows[i] = [(piv * a - f * b) // det for a, b in zip(row, prow)]
            elif piv != det:
                rows[i] = [(piv * a) // det for a in row]
        self.det = piv
        self.basis[r] = c

    def run(self, objective_row: int) -> str:
        """Bland steps driven by the given objective row; 'optimal' or
        'unbounded'."""
        rows = self.rows
        ncols = self.ncols
        while True:
            obj = rows[objective_row]
            enter = -1
            for c in range(ncols):
                if obj[c] > 0:
                    enter = c
                    break
            if enter < 0:
                return "optimal"
            leave = -1
            best_num = best_den = 0
            for i in range(self.m):
                a = rows[i][enter]
                if a > 0:
                    num = rows[i][ncols]
                    if (
                        leave < 0
                        or num * best_den < best_num * a
                        or (num * best_den == best_num * a and self.basis[i] < self.basis[leave])
                    ):
                        best_num, best_den, leave = num, a, i
            if leave < 0:
                return "unbounded"
            self.pivot(leave, enter)

    def value(self, row: int) -> Fraction:
        return Fraction(self.rows[row][self.ncols], self.det)


def solve(lp: LinearProgram) -> LpOutcome:
    """Exact optimum (or feasibility when no objective is given)."""
    n = lp.num_vars
    split = not lp.nonneg
    base = 2 * n if split else n

    def expand(coeffs: Sequence[Fraction]) -> list[Fraction]:
        if not split:
            return list(coeffs)
        return list(coeffs) + [-v for v in coeffs]

    norm_rows: list[list[Fraction]] = []
    rels: list[str] = []
    rhs: list[Fraction] = []
    for c in lp.constraints:
        coeffs = expand(c.coeffs)
        rel, b = c.rel, c.rhs
        if b < 0:
            coeffs = [-v for v in coeffs]
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        norm_rows.append(coeffs)
        rels.append(rel)
        rhs.append(b)

    m = len(norm_rows)
    n_slack = sum(1 for r in rels if r != EQ)
    ncols = base + n_slack + m
    rows: list[list[int]] = []
    basis: list[int] = []
    identity_col: list[int] = []
    row_scale: list[int] = []
    slack_i = 0
    for i in range(m):
        scaled, k = _scaled_int_row(norm_rows[i] + [rhs[i]])
        row = scaled[:-1] + [0] * (n_slack + m) + [scaled[-1]]
        if rels[i] != EQ:
            row[base + slack_i] = k if rels[i] == LE else -k
            slack_i += 1
        art = base + n_slack + i
        row[art] = 1  # artificial added after scaling so its coeff stays 1
        rows.append(row)
        basis.append(art)
        identity_col.append(art)
        row_scale.append(k)

    # phase-2 objective row (c - z; artificials cost 0, so initially just c)
    objective = list(lp.objective) if lp.objective is not None else [ZERO] * n
    obj_scaled, _ = _scaled_int_row(expand(objective))
    rows.append(obj_scaled + [0] * (n_slack + m) + [0])
    # phase-1 objective row: z - c for "minimize artificial mass", which
    # initially is the column sum of the constraint rows with artificial
    # entries zeroed
    phase1 = [0] * (ncols + 1)
    for i in range(m):
        for j, v in enumerate(rows[i]):
            phase1[j] += v
    for i in range(m):
        phase1[identity_col[i]] = 0
    rows.append(phase1)

    tab = _IntTableau(rows, basis, ncols)
    obj2_row, obj1_row = m, m + 1

    status = tab.run(obj1_row)
    assert status == "optimal", "phase 1 is bounded by construction"
    if tab.rows[obj1_row][ncols] != 0:
        # Phase 1 keeps the z-c row of "minimize artificial mass": at the
        # artificial column of row i it now holds y_i - 1 (times det) with
        # y the dual prices of the row-scaled system; undoing the scaling
        # yields the Farkas certificate: y^T A <= 0 columnwise, y^T b > 0.
        y = tuple(
            row_scale[i]
            * (Fraction(tab.rows[obj1_row][identity_col[i]], tab.det) + 1)
            for i in range(m)
        )
        cert = _recondition_certificate(y, lp, norm_rows, rels, rhs)
        return LpOutcome(status="infeasible", certificate=cert)

    # drive residual zero-value artificials out of the basis
    art_start = base + n_slack
    drop: list[int] = []
    for i in range(m):
        if tab.basis[i] >= art_start:
            target = next((c for c in range(art_start) if tab.rows[i][c] != 0), None)
            if target is None:
                drop.append(i)  # redundant constraint
            else:
                tab.pivot(i, target)
    for i in sorted(drop, reverse=True):
        del tab.rows[i]
        del tab.basis[i]
    # forbid artificial columns from re-entering
    for r in tab.rows:
        for c in range(art_start, ncols):
            r[c] = 0
    obj2_row = tab.m
    obj1_row = tab.m + 1

    status = tab.run(obj2_row)
    if status == "unbounded":
        return LpOutcome(status="unbounded")
    values = [ZERO] * ncols
    for i, b in enumerate(tab.basis):
        values[b] = Fraction(tab.rows[i][ncols], tab.det)
    if split:
        witness = tuple(values[k] - values[n + k] for k in range(n))
    else:
        witness = tuple(values[:n])
    obj_val = sum((c * v for c, v in zip(objective, witness)), ZERO)
    _verify_witness(lp, witness)
    return LpOutcome(status="optimal", witness=witness, objective_value=obj_val)


def feasibility(lp: LinearProgram) -> LpOutcome:
    """Feasibility query: any objective on the program is ignored."""
    return solve(LinearProgram(lp.num_vars, lp.constraints, None, nonneg=lp.nonneg))


def _verify_witness(lp: LinearProgram, witness: Sequence[Fraction]) -> None:
    for c in lp.constraints:
        lhs = sum((a * v for a, v in zip(c.coeffs, witness)), ZERO)
        ok = lhs <= c.rhs if c.rel == LE else lhs >= c.rhs if c.rel == GE else lhs == c.rhs
        assert ok, f"witness violates {c}"
    if lp.nonneg:
        assert all(v >= 0 for v in witness), "witness violates nonnegativity"


def _recondition_certificate(
    y: Sequence[Fraction],
    lp: LinearProgram,
    norm_rows: Sequence[Sequence[Fraction]],
    rels: Sequence[str],
    rhs: Sequence[Fraction],
) -> tuple[Fraction, ...]:
    """Verify the Farkas certificate on the normalized system, then map
    it back to the original constraint order (sign-corrected for rows
    negated during normalization)."""
    for j in range(len(norm_rows[0]) if norm_rows else 0):
        col = sum((y[i] * norm_rows[i][j] for i in range(len(norm_rows))), ZERO)
        assert col <= 0, "certificate fails on a structural column"
    for i, rel in enumerate(rels):
        if rel == LE:
            assert y[i] <= 0, "certificate sign clash on a slack column"
        elif rel == GE:
            assert y[i] >= 0, "certificate sign clash on a surplus column"
    total = sum((y[i] * rhs[i] for i in range(len(norm_rows))), ZERO)
    assert total > 0, "certificate does not separate"
    out = []
    for i, c in enumerate(lp.constraints):
        out.append(-y[i] if c.rhs < 0 else y[i])
    return tuple(out)
