"""Numerical rank, nullspaces and a small dense simplex solver.

The LP solver is a two-phase tableau simplex with Bland's pivoting rule. It is
meant for the tiny, highly degenerate programs that arise in jamming tests,
where reproducible vertex answers matter more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

EPS = np.finfo(float).eps


class CyclingError(RuntimeError):
    """The simplex exceeded its pivot budget."""


@dataclass
class RankInfo:
    rank: int
    nullspace: np.ndarray  # orthonormal columns
    singular_values: np.ndarray
    tol: float

    def near_threshold(self, factor: float = 100.0) -> bool:
        """True when a singular value counted as nonzero is below ``factor * tol``.

        Values under the tolerance are not flagged: roundoff zeros land a small
        multiple of eps below it by construction.
        """
        if self.tol <= 0:
            return False
        sv = self.singular_values
        return bool(np.any((sv > self.tol) & (sv < self.tol * factor)))


def default_rank_tol(M: np.ndarray, singular_values: np.ndarray) -> float:
    if singular_values.size == 0:
        return 0.0
    return max(M.shape) * EPS * float(singular_values[0])


def _sign_normalize(vectors: np.ndarray, tiny: float = 1e-12) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > tiny)
        if idx.size and col[idx[0]] < 0:
            out[:, k] = -col
    return out


def rank_and_nullspace(M, tol: Optional[float] = None) -> RankInfo:
    """Numerical rank of ``M`` and an orthonormal basis of its right nullspace.

    ``tol`` defaults to ``max(rows, cols) * eps * sigma_max``. Each basis column is
    signed so that its first non-negligible entry is positive.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size and not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return RankInfo(0, np.eye(cols), np.zeros(0), 0.0 if tol is None else float(tol))
    _, sv, vt = np.linalg.svd(M, full_matrices=True)
    if tol is None:
        tol = default_rank_tol(M, sv)
    rank = int(np.sum(sv > tol))
    null = vt[rank:].T.copy()
    return RankInfo(rank, _sign_normalize(null), sv, float(tol))


# --------------------------------------------------------------------------- LP


@dataclass
class LinearProgram:
    """maximize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  lb <= x <= ub."""

    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub, self.b_ub = _consistent(self.A_ub, self.b_ub, n, "ub")
        self.A_eq, self.b_eq = _consistent(self.A_eq, self.b_eq, n, "eq")
        self.lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=float).ravel()
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).ravel()
        if self.lb.size != n or self.ub.size != n:
            raise ValueError("bound vectors must match the number of variables")
        if np.any(self.lb > self.ub):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n(self) -> int:
        return self.c.size


def _consistent(A, b, n, label):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return np.zeros((0, n)), np.zeros(0)
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[1] != n or A.shape[0] != b.size:
        raise ValueError(f"{label} constraint dimensions mismatch: A {A.shape}, b {b.shape}, n={n}")
    return A, b


@dataclass
class LPResult:
    status: str  # "optimal" | "unbounded" | "infeasible"
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    ray: Optional[np.ndarray] = None
    pivots: int = 0
    tolerances: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense tableau for  max c.y  s.t.  rows of [A | rhs],  y >= 0."""

    def __init__(self, T: np.ndarray, basis: list, pivot_tol: float, cost_tol: float, max_pivots: int):
        self.T = T
        self.basis = basis
        self.pivot_tol = pivot_tol
        self.cost_tol = cost_tol
        self.max_pivots = max_pivots
        self.pivots = 0

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise CyclingError(f"simplex exceeded {self.max_pivots} pivots")

    def run(self, allowed: np.ndarray):
        """Bland's rule on the objective row (last row holds reduced costs)."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            cost = T[-1, :-1]
            candidates = np.flatnonzero((cost > self.cost_tol) & allowed)
            if candidates.size == 0:
                return "optimal", None
            j = int(candidates[0])
            col = T[:m, j]
            rows = np.flatnonzero(col > self.pivot_tol)
            if rows.size == 0:
                return "unbounded", j
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            tie = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(tie, key=lambda rr: self.basis[rr]))
            self.pivot(r, j)


def solve_lp(
    lp: LinearProgram,
    feas_tol: float = 1e-9,
    pivot_tol: float = 1e-10,
    cost_tol: float = 1e-11,
    max_pivots: Optional[int] = None,
) -> LPResult:
    """Solve ``lp`` exactly at a vertex using two-phase simplex with Bland's rule."""
    n = lp.n
    tolerances = {"feas_tol": feas_tol, "pivot_tol": pivot_tol, "cost_tol": cost_tol}

    # x = shift + S y with y >= 0; each original variable maps to one or two y columns
    cols = []  # (var index, sign)
    shift = np.zeros(n)
    extra_ub = []  # (y column, bound)
    for i in range(n):
        lo, hi = lp.lb[i], lp.ub[i]
        if np.isfinite(lo):
            shift[i] = lo
            cols.append((i, 1.0))
            if np.isfinite(hi):
                extra_ub.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[i] = hi
            cols.append((i, -1.0))
        else:
            cols.append((i, 1.0))
            cols.append((i, -1.0))
    ny = len(cols)
    S = np.zeros((n, ny))
    for k, (i, s) in enumerate(cols):
        S[i, k] = s

    A_ub = lp.A_ub @ S
    b_ub = lp.b_ub - lp.A_ub @ shift
    if extra_ub:
        rows = np.zeros((len(extra_ub), ny))
        for r, (k, bound) in enumerate(extra_ub):
            rows[r, k] = 1.0
        A_ub = np.vstack([A_ub, rows])
        b_ub = np.concatenate([b_ub, [bound for _, bound in extra_ub]])
    A_eq = lp.A_eq @ S
    b_eq = lp.b_eq - lp.A_eq @ shift
    c_y = S.T @ lp.c
    const = float(lp.c @ shift)

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    n_slack = m_ub
    # rows needing an artificial: ub rows with negative rhs, all eq rows
    art_rows = [r for r in range(m_ub) if b_ub[r] < 0] + [m_ub + r for r in range(m_eq)]
    n_art = len(art_rows)
    width = ny + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    basis = [0] * m
    for r in range(m_ub):
        sgn = -1.0 if b_ub[r] < 0 else 1.0
        T[r, :ny] = sgn * A_ub[r]
        T[r, ny + r] = sgn
        T[r, -1] = sgn * b_ub[r]
        basis[r] = ny + r
    for r in range(m_eq):
        sgn = -1.0 if b_eq[r] < 0 else 1.0
        T[m_ub + r, :ny] = sgn * A_eq[r]
        T[m_ub + r, -1] = sgn * b_eq[r]
    for a, r in enumerate(art_rows):
        col = ny + n_slack + a
        T[r, col] = 1.0
        basis[r] = col

    if max_pivots is None:
        max_pivots = 50 * (m + width) + 1000
    tab = _Tableau(T, basis, pivot_tol, cost_tol, max_pivots)
    art_start = ny + n_slack
    allowed = np.ones(width, dtype=bool)

    if n_art:
        # phase 1: maximize -(sum of artificials), expressed in reduced-cost form
        T[-1, :] = 0.0
        for r in art_rows:
            T[-1, :] += T[r, :]
        T[-1, art_start:width] = 0.0
        status, _ = tab.run(allowed)
        infeas = T[-1, -1]
        if infeas > feas_tol * max(1.0, float(np.abs(T[:-1, -1]).max(initial=0.0))):
            return LPResult("infeasible", pivots=tab.pivots, tolerances=tolerances)
        # drive remaining artificials out of the basis or drop redundant rows
        keep = []
        for r in range(m):
            if tab.basis[r] >= art_start:
                row = T[r, :art_start]
                nz = np.flatnonzero(np.abs(row) > pivot_tol)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                    keep.append(r)
            else:
                keep.append(r)
        T = np.vstack([T[keep], T[-1:]])
        basis = [tab.basis[r] for r in keep]
        T = np.delete(T, np.arange(art_start, width), axis=1)
        tab.T, tab.basis = T, basis
        width = art_start
        allowed = np.ones(width, dtype=bool)

    # phase 2 objective row: reduced costs c_j - c_B B^-1 A_j, stored as positive-improving
    c_full = np.zeros(width)
    c_full[:ny] = c_y
    m = T.shape[0] - 1
    T[-1, :] = 0.0
    T[-1, :width] = c_full
    for r in range(m):
        cb = c_full[basis[r]]
        if cb != 0.0:
            T[-1, :] -= cb * T[r, :]
    status, entering = tab.run(allowed)
    T = tab.T

    y = np.zeros(width)
    for r, j in enumerate(tab.basis):
        y[j] = T[r, -1]
    y = np.maximum(y, 0.0)
    x = shift + S @ y[:ny]

    if status == "unbounded":
        d = np.zeros(width)
        d[entering] = 1.0
        for r, j in enumerate(tab.basis):
            d[j] = -T[r, entering]
        ray = S @ d[:ny]
        return LPResult("unbounded", x=x, ray=ray, pivots=tab.pivots, tolerances=tolerances)

    value = float(lp.c @ x)
    return LPResult("optimal", x=x, value=value, pivots=tab.pivots, tolerances=tolerances)


def lp_residual(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest constraint violation of ``x`` for ``lp``."""
    worst = 0.0
    if lp.A_ub.shape[0]:
        worst = max(worst, float(np.max(lp.A_ub @ x - lp.b_ub)))
    if lp.A_eq.shape[0]:
        worst = max(worst, float(np.max(np.abs(lp.A_eq @ x - lp.b_eq))))
    worst = max(worst, float(np.max(lp.lb - x, initial=0.0)))
    worst = max(worst, float(np.max(x - lp.ub, initial=0.0)))
    return worst


def stack(blocks: Sequence[np.ndarray], n: int) -> np.ndarray:
    blocks = [np.atleast_2d(b) for b in blocks if np.size(b)]
    return np.vstack(blocks) if blocks else np.zeros((0, n))
