"""Exact linear algebra and linear programming over Q.

Small dense routines on lists of Fractions: row reduction, rank, null
spaces, and a two-phase simplex method with Bland's rule (so it cannot
cycle).  Problem sizes in this package are tiny, so clarity wins over
speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

Matrix = list  # list[list[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)


def _copy(rows: Sequence[Sequence[Fraction]]) -> Matrix:
    return [[Fraction(v) for v in r] for r in rows]


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    M = _copy(rows)
    if not M:
        return M, []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = ONE / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """A basis of ``{v : rows @ v = 0}``."""
    if not rows:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for i, p in enumerate(pivots):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def solve_square(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[list[Fraction]]:
    """Unique solution of ``A x = b`` or None when A is singular."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [R[i][n] for i in range(n)]


def solve_affine(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], ncols: int):
    """One solution of ``A x = b`` (free variables set to 0), or None."""
    if not A:
        return [ZERO] * ncols
    aug = [list(A[i]) + [b[i]] for i in range(len(A))]
    R, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [ZERO] * ncols
    for i, p in enumerate(pivots):
        x[p] = R[i][ncols]
    return x


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Optional[Fraction] = None
    x: Optional[tuple] = None


def _pivot(T: Matrix, basis: list[int], r: int, c: int) -> None:
    inv = ONE / T[r][c]
    T[r] = [v * inv for v in T[r]]
    row = T[r]
    for i in range(len(T)):
        if i != r:
            f = T[i][c]
            if f != 0:
                T[i] = [a - f * b for a, b in zip(T[i], row)]
    basis[r] = c


def _simplex(T: Matrix, basis: list[int], cost: list[Fraction], allowed: list[bool]) -> str:
    """Maximise ``cost . x`` on tableau T in place (Bland's rule)."""
    ncols = len(cost)
    while True:
        entering = -1
        for j in range(ncols):
            if not allowed[j] or j in basis:
                continue
            rc = cost[j] - sum((cost[basis[i]] * T[i][j] for i in range(len(T)) if T[i][j] != 0), ZERO)
            if rc > 0:
                entering = j
                break
        if entering < 0:
            return "optimal"
        best = None
        for i in range(len(T)):
            a = T[i][entering]
            if a > 0:
                ratio = T[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        _pivot(T, basis, best[1], entering)


def linprog(
    c: Sequence[Fraction],
    A_ub: Sequence[Sequence[Fraction]] = (),
    b_ub: Sequence[Fraction] = (),
    A_eq: Sequence[Sequence[Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
    nonneg: bool = False,
) -> LPResult:
    """Maximise ``c . x`` subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``.

    Variables are free unless ``nonneg`` is set.  Everything is exact.
    """
    nv = len(c)
    # free variables split as x = p - q
    width = nv if nonneg else 2 * nv

    def expand(row):
        row = [Fraction(v) for v in row]
        if len(row) != nv:
            raise ValueError("constraint row has wrong length")
        return row if nonneg else row + [-v for v in row]

    rows, rhs = [], []
    n_ub = len(A_ub)
    for k, (a, b) in enumerate(zip(A_ub, b_ub)):
        slack = [ZERO] * n_ub
        slack[k] = ONE
        rows.append(expand(a) + slack)
        rhs.append(Fraction(b))
    for a, b in zip(A_eq, b_eq):
        rows.append(expand(a) + [ZERO] * n_ub)
        rhs.append(Fraction(b))
    ncore = width + n_ub
    m = len(rows)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    T = [rows[i] + [ONE if j == i else ZERO for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [ncore + i for i in range(m)]
    total = ncore + m

    phase1 = [ZERO] * ncore + [-ONE] * m
    _simplex(T, basis, phase1, [True] * total)
    if sum((T[i][-1] for i in range(m) if basis[i] >= ncore), ZERO) != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis; drop redundant rows
    i = 0
    while i < len(T):
        if basis[i] >= ncore:
            j = next((j for j in range(ncore) if T[i][j] != 0), None)
            if j is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, basis, i, j)
        i += 1
    cexp = expand(c) + [ZERO] * n_ub + [ZERO] * m
    allowed = [True] * ncore + [False] * m
    status = _simplex(T, basis, cexp, allowed)
    if status == "unbounded":
        return LPResult("unbounded")
    sol = [ZERO] * total
    for i, b in enumerate(basis):
        sol[b] = T[i][-1]
    x = tuple(sol[:nv]) if nonneg else tuple(sol[j] - sol[j + nv] for j in range(nv))
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), ZERO)
    return LPResult("optimal", value, x)


def feasible_point(
    A_ub: Sequence[Sequence[Fraction]],
    b_ub: Sequence[Fraction],
    nvars: int,
    A_eq: Sequence[Sequence[Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
) -> Optional[tuple]:
    res = linprog([ZERO] * nvars, A_ub, b_ub, A_eq, b_eq)
    return res.x if res.status == "optimal" else None
